#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "absa/experiment.hpp"

namespace fixtures {

inline std::filesystem::path e2e_dir() { return std::filesystem::path(ABSA_TEST_DATA_DIR) / "e2e"; }

// Fresh scratch directory per call.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "absa_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// The checked-in fixture config with its log redirected into scratch space.
inline absa::ExperimentConfig e2e_config(const std::filesystem::path& scratch) {
  auto c = absa::load_config(e2e_dir() / "config.json");
  c.log = scratch / "run.jsonl";
  return c;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The log with timing fields stripped, one record per line.
inline std::string log_without_timing(const std::filesystem::path& p) {
  std::string out;
  for (const auto& r : absa::read_log(p)) out += absa::record_to_json(r, false) + "\n";
  return out;
}

inline std::shared_ptr<absa::LlmClient> replay_client(const absa::ExperimentConfig& c) {
  return std::make_shared<absa::LlmClient>(c.completion, absa::CacheMode::replay,
                                           std::make_shared<absa::ResponseCache>(c.cache), nullptr);
}

}  // namespace fixtures
