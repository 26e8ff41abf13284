#include "mobiscope/serve.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "mobiscope/bundle.hpp"
#include "mobiscope/error.hpp"

// After Eigen: resolv.h, pulled in by httplib, defines a `_res` macro.
#include <httplib.h>

namespace mobiscope {

std::string content_type_for(const std::filesystem::path& file) {
  const std::string ext = file.extension().string();
  if (ext == ".geojson") return "application/geo+json";
  if (ext == ".json") return "application/json";
  if (ext == ".csv") return "text/csv";
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js") return "text/javascript";
  if (ext == ".css") return "text/css";
  return "application/octet-stream";
}

struct BundleServer::Impl {
  std::filesystem::path root;
  httplib::Server server;
};

namespace {

bool inside(const std::filesystem::path& root, const std::filesystem::path& p) {
  const auto rel = p.lexically_relative(root);
  return !rel.empty() && *rel.begin() != "..";
}

}  // namespace

BundleServer::BundleServer(std::filesystem::path bundle_dir) : impl_(std::make_unique<Impl>()) {
  impl_->root = std::filesystem::weakly_canonical(bundle_dir);
  Impl* impl = impl_.get();

  auto handler = [impl](const httplib::Request& req, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    std::string target = req.path;
    if (target.empty() || target == "/") target = "/bundle.json";
    const auto path = (impl->root / std::filesystem::path(target).relative_path()).lexically_normal();
    std::error_code ec;
    if (!inside(impl->root, path) || !std::filesystem::is_regular_file(path, ec)) {
      res.status = 404;
      res.set_content("not found\n", "text/plain");
      return;
    }
    std::ifstream in(path, std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    res.status = 200;
    res.set_content(body.str(), content_type_for(path));
  };
  impl_->server.Get(R"(/.*)", handler);
  impl_->server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, HEAD, OPTIONS");
    res.status = 204;
  });
  auto refuse = [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Allow", "GET, HEAD, OPTIONS");
    res.status = 405;
  };
  // httplib's default also sets SO_REUSEPORT, which would let a second server
  // share a busy port instead of failing.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  impl_->server.Post(R"(/.*)", refuse);
  impl_->server.Put(R"(/.*)", refuse);
  impl_->server.Delete(R"(/.*)", refuse);
  impl_->server.Patch(R"(/.*)", refuse);
}

BundleServer::~BundleServer() { stop(); }

int BundleServer::bind(const std::string& host, int port) {
  int bound = -1;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound < 0) throw Error(Errc::BindError, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void BundleServer::listen() { impl_->server.listen_after_bind(); }

void BundleServer::stop() {
  if (impl_) impl_->server.stop();
}

void serve_bundle(const std::filesystem::path& bundle_dir, int port, const std::string& host) {
  read_bundle_index(bundle_dir);
  BundleServer server(bundle_dir);
  const int bound = server.bind(host, port);
  std::cout << "serving " << bundle_dir.string() << " on http://" << host << ":" << bound << "/" << std::endl;
  server.listen();
}

}  // namespace mobiscope
