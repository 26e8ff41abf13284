#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mobiscope/synth.hpp"

namespace testing {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

/// xorshift64* with its own uniform/normal, independent of the library RNG.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : s_(seed ? seed : 0x9E3779B97F4A7C15ULL) {}
  std::uint64_t next() {
    s_ ^= s_ >> 12;
    s_ ^= s_ << 25;
    s_ ^= s_ >> 27;
    return s_ * 0x2545F4914F6CDD1DULL;
  }
  double uniform() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * uniform());
  }

 private:
  std::uint64_t s_;
};

std::string read_file(const fs::path& p);
void write_file(const fs::path& p, const std::string& text);

/// Empty when every regular file under `a` exists in `b` with identical bytes
/// and vice versa; otherwise the first difference.
std::string compare_trees(const fs::path& a, const fs::path& b);

/// Strict RFC 7946 check; returns the violations found.
std::vector<std::string> rfc7946_violations(const nlohmann::json& doc);

/// Runs the CLI in-process.
int run_cli(const std::vector<std::string>& args, std::string* out = nullptr, std::string* err = nullptr);

/// Short scenario on a 140 m loop: every modality on, noiseless GPS,
/// default distortion.
mobiscope::SynthScenario short_scenario(std::uint64_t seed = 1, double duration_s = 120.0);

/// Scenario with only GPS and SLAM, on the same loop.
mobiscope::SynthScenario geo_only_scenario(std::uint64_t seed, double duration_s);

}  // namespace testing
