#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "driver.hpp"

namespace mposim {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (in.fail() || !(in >> std::ws).eof())
    throw std::invalid_argument("config: bad value for " + key + ": '" + value + "'");
  return out;
}

inline bool parse_flag(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw std::invalid_argument("config: bad value for " + key + ": '" + value + "'");
}

}  // namespace detail

// Flat key = value format, one pair per line. '#' starts a comment. Keys
// mirror CircuitConfig field names exactly; unknown keys are errors, repeated
// keys overwrite. The parsed config is not validated here; callers validate
// once all flag overrides are applied.
inline CircuitConfig parse_config(std::istream& in) {
  CircuitConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string s = detail::trim(line);
    if (s.empty()) continue;
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not 'key = value'");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not 'key = value'");

    if (key == "n")
      cfg.n = detail::parse_number<std::size_t>(key, value);
    else if (key == "depth_max")
      cfg.depth_max = detail::parse_number<std::size_t>(key, value);
    else if (key == "p")
      cfg.p = detail::parse_number<double>(key, value);
    else if (key == "chi")
      cfg.chi = detail::parse_number<std::size_t>(key, value);
    else if (key == "n_samples")
      cfg.n_samples = detail::parse_number<std::size_t>(key, value);
    else if (key == "master_seed")
      cfg.master_seed = detail::parse_number<std::uint64_t>(key, value);
    else if (key == "trunc_tol")
      cfg.trunc_tol = detail::parse_number<double>(key, value);
    else if (key == "fast_path")
      cfg.fast_path = detail::parse_flag(key, value);
    else
      throw std::invalid_argument("config: unknown key '" + key + "' on line " +
                                  std::to_string(lineno));
  }
  return cfg;
}

inline CircuitConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  return parse_config(in);
}

inline std::string format_config(const CircuitConfig& cfg) {
  std::ostringstream out;
  out << "n = " << cfg.n << "\n"
      << "depth_max = " << cfg.depth_max << "\n"
      << "p = " << cfg.p << "\n"
      << "chi = " << cfg.chi << "\n"
      << "n_samples = " << cfg.n_samples << "\n"
      << "master_seed = " << cfg.master_seed << "\n"
      << "trunc_tol = " << cfg.trunc_tol << "\n"
      << "fast_path = " << (cfg.fast_path ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace mposim
