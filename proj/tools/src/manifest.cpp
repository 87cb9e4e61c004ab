#include "soligas_cli/manifest.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>

#include <Eigen/Core>
#include <boost/version.hpp>

namespace soligas::cli {

json version_info() {
  json v;
  v["soligas"] = SOLIGAS_VERSION;
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  v["boost"] = std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
               std::to_string(BOOST_VERSION % 100);
  v["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                       "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH);
#if defined(__clang__)
  v["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  v["compiler"] = std::string("gcc ") + __VERSION__;
#endif
  return v;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void to_json(json& j, const RunManifest& m) {
  json outs = json::array();
  for (const auto& o : m.outputs) outs.push_back({{"path", o.path}, {"bytes", o.bytes}});
  j = json{{"command", m.command},
           {"arguments", m.arguments},
           {"seed", m.seed},
           {"threads", m.threads},
           {"exit_code", m.exit_code},
           {"versions", version_info()},
           {"timestamps", {{"started", m.started}, {"finished", m.finished}}},
           {"outputs", outs}};
}

void write_manifest(const std::string& path, RunManifest m) {
  for (auto& o : m.outputs) {
    std::error_code ec;
    const auto n = std::filesystem::file_size(o.path, ec);
    o.bytes = ec ? 0 : n;
  }
  save_json(path, json(m));
}

}  // namespace soligas::cli
