#pragma once

// The fpaut command line: automorphism files, JSON reports, input hashing and the result cache.

#include <fpaut/automorphism.hpp>

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace fpaut::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchema = 1;

struct JobConfig {
  std::string command;
  std::string aut, aut2;
  std::string element;
  int max_len = 4;
  int max_exp = 4;
  int max_iter = 20;
  int depth = 0;  // 0: the default gate depth of the graph map
  std::string lambda_min = "1.5";
  int min_len = 1;
  int conj_len = 2;
  int max_l1 = 0;  // 0: the command's default
  std::size_t max_candidates = 0;
  int jobs = 1;
  bool strict = false;
  std::string out;
  std::string cache_dir;
};

struct RunResult {
  int exit_code = 0;
  nlohmann::json report;  // empty on errors
  std::string error;
  bool cached = false;
};

nlohmann::json automorphism_to_json(const Automorphism& phi);
Automorphism automorphism_from_json(const nlohmann::json& j);
Automorphism load_automorphism(const std::string& path);

std::string sha256_hex(std::string_view bytes);
/// "1.5", "3/2" or "2" as an exact rational.
Rational parse_rational(const std::string& text);

/// Runs one command. Errors in the input or configuration give exit code 2 and a message, never an exception.
RunResult run(const JobConfig& cfg);

/// Pretty-printed report with sorted keys and a trailing newline.
std::string render_report(const nlohmann::json& report);

}  // namespace fpaut::cli
