#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "soligas/json_io.hpp"

namespace soligas::cli {

struct OutputFile {
  std::string path;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  int exit_code = 0;
  std::string started, finished;  // UTC, ISO 8601
  std::vector<OutputFile> outputs;
};

// Library, compiler and dependency versions.
json version_info();
std::string utc_now();

void to_json(json& j, const RunManifest& m);
void write_manifest(const std::string& path, RunManifest m);

}  // namespace soligas::cli
