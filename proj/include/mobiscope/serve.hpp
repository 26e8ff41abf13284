#pragma once

#include <filesystem>
#include <memory>
#include <string>

namespace mobiscope {

/// Content type served for a bundle file name.
std::string content_type_for(const std::filesystem::path& file);

/// Read-only static server over one bundle directory. GET and HEAD only;
/// every response carries `Access-Control-Allow-Origin: *`.
class BundleServer {
 public:
  explicit BundleServer(std::filesystem::path bundle_dir);
  ~BundleServer();
  BundleServer(const BundleServer&) = delete;
  BundleServer& operator=(const BundleServer&) = delete;

  /// Binds to host:port (port 0 picks a free one) and returns the bound
  /// port. BindError when the port is taken.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Checks the bundle, binds and serves until the process ends.
void serve_bundle(const std::filesystem::path& bundle_dir, int port, const std::string& host = "127.0.0.1");

}  // namespace mobiscope
