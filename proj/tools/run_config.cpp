#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace hazode::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& text) {
  double x = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, x);
  if (ec != std::errc{} || ptr != end) throw ConfigError("config: '" + key + "' is not a number: '" + text + "'");
  return x;
}

}  // namespace

RunConfig RunConfig::from_string(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    cfg.values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str(), path.string());
}

void RunConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::string RunConfig::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config: missing required key '" + key + "'");
  read_[key] = true;
  return it->second;
}

std::string RunConfig::str(const std::string& key, const std::string& fallback) const {
  return has(key) ? str(key) : fallback;
}

double RunConfig::num(const std::string& key) const { return parse_number(key, str(key)); }

double RunConfig::num(const std::string& key, double fallback) const { return has(key) ? num(key) : fallback; }

std::uint64_t RunConfig::u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string text = str(key);
  std::uint64_t x = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, x);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("config: '" + key + "' is not a non-negative integer: '" + text + "'");
  return x;
}

std::vector<std::string> RunConfig::list(const std::string& key, const std::string& fallback) const {
  std::vector<std::string> out;
  std::istringstream is(str(key, fallback));
  std::string item;
  while (std::getline(is, item, ','))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

std::vector<double> RunConfig::nums(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : list(key, str(key))) out.push_back(parse_number(key, item));
  return out;
}

std::vector<std::string> RunConfig::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!read_.count(k)) out.push_back(k);
  return out;
}

}  // namespace hazode::cli
