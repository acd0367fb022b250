#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>

#include "sslasso/experiment.hpp"

namespace sslasso {

namespace detail {

inline double config_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* begin = value.data();
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end)
    throw ParseError("config: key '" + key + "' needs a real value, got '" +
                     value + "'");
  return out;
}

inline std::int64_t config_int(const std::string& key,
                               const std::string& value) {
  std::int64_t out = 0;
  const char* begin = value.data();
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end)
    throw ParseError("config: key '" + key + "' needs an integer, got '" +
                     value + "'");
  return out;
}

inline std::uint64_t config_uint(const std::string& key,
                                 const std::string& value) {
  std::uint64_t out = 0;
  const char* begin = value.data();
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end)
    throw ParseError("config: key '" + key +
                     "' needs a nonnegative integer, got '" + value + "'");
  return out;
}

}  // namespace detail

// Plain-text "key = value" document; '#' starts a comment. Unknown keys are
// hard errors.
inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  bool have_theorem = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string stripped = detail::trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ParseError("config: line " + std::to_string(line_no) +
                       " is not 'key = value'");
    const std::string key = detail::trim(stripped.substr(0, eq));
    const std::string value = detail::trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError("config: line " + std::to_string(line_no) +
                       " has an empty key or value");
    if (!seen.insert(key).second)
      throw ParseError("config: duplicate key '" + key + "'");

    if (key == "theorem") {
      cfg.experiment = value;
      if (value != "benefit") {
        try {
          theorem_from_string(value);
        } catch (const InvalidInput& e) {
          throw ParseError(std::string("config: ") + e.what());
        }
      }
      have_theorem = true;
    } else if (key == "p") {
      cfg.p = static_cast<int>(detail::config_int(key, value));
    } else if (key == "n") {
      cfg.n = detail::config_int(key, value);
    } else if (key == "N") {
      cfg.total_count = detail::config_int(key, value);
    } else if (key == "s_star") {
      cfg.s_star = static_cast<int>(detail::config_int(key, value));
    } else if (key == "beta_magnitude") {
      cfg.beta_magnitude = detail::config_real(key, value);
    } else if (key == "design") {
      cfg.design = value;
    } else if (key == "nonlinearity") {
      try {
        cfg.nonlinearity = nonlinearity_from_string(value);
      } catch (const InvalidInput& e) {
        throw ParseError(std::string("config: ") + e.what());
      }
    } else if (key == "alpha") {
      cfg.alpha = detail::config_real(key, value);
    } else if (key == "noise_halfwidth") {
      cfg.noise_halfwidth = detail::config_real(key, value);
    } else if (key == "delta") {
      cfg.delta = detail::config_real(key, value);
    } else if (key == "gamma") {
      cfg.gamma = detail::config_real(key, value);
    } else if (key == "lambda_slack") {
      cfg.lambda_slack = detail::config_real(key, value);
    } else if (key == "trials") {
      cfg.trials = static_cast<int>(detail::config_int(key, value));
    } else if (key == "master_seed") {
      cfg.master_seed = detail::config_uint(key, value);
    } else if (key == "variant") {
      try {
        cfg.variant = estimator_kind_from_string(value);
      } catch (const InvalidInput& e) {
        throw ParseError(std::string("config: ") + e.what());
      }
    } else {
      throw ParseError("config: unknown key '" + key + "'");
    }
  }
  if (!have_theorem) throw ParseError("config: missing required key 'theorem'");
  if (cfg.trials < 1) throw ParseError("config: trials must be >= 1");
  if (cfg.n < 1 || cfg.total_count < cfg.n)
    throw ParseError("config: need 1 <= n <= N");
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open " + path.string());
  return parse_config(in);
}

}  // namespace sslasso
