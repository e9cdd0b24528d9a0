#include "hazode/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hazode/errors.hpp"

namespace hazode {

std::size_t SurvivalDataset::event_count() const noexcept {
  return static_cast<std::size_t>(std::count(events.begin(), events.end(), 1));
}

double SurvivalDataset::total_time() const noexcept { return std::accumulate(times.begin(), times.end(), 0.0); }

double SurvivalDataset::max_time() const noexcept {
  return times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
}

double SurvivalDataset::censoring_rate() const noexcept {
  if (events.empty()) return 0.0;
  return 1.0 - static_cast<double>(event_count()) / static_cast<double>(events.size());
}

void SurvivalDataset::validate() const {
  if (times.size() != events.size()) throw DataError("dataset: times and events differ in length");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0)
      throw DataError("dataset: row " + std::to_string(i + 1) + " has an invalid time");
    if (events[i] != 0 && events[i] != 1)
      throw DataError("dataset: row " + std::to_string(i + 1) + " has an indicator outside {0,1}");
  }
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_dataset_csv(std::ostream& os, const SurvivalDataset& data) {
  data.validate();
  os << "time,status\n";
  for (std::size_t i = 0; i < data.size(); ++i) os << format_double(data.times[i]) << ',' << data.events[i] << '\n';
}

void write_dataset_csv(const std::filesystem::path& path, const SurvivalDataset& data) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  write_dataset_csv(os, data);
}

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c) && c != '"'; };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty() || s == "NA" || s == "NaN" || s == "nan") return std::nullopt;
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return x;
}

}  // namespace

SurvivalDataset read_dataset_csv(std::istream& is, StatusConvention convention, TimeUnit unit) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw DataError("dataset: file is empty");

  const auto header = split(line);
  const auto col = [&](const char* name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(std::string("dataset: missing required column '") + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t time_col = col("time");
  const std::size_t status_col = col("status");

  SurvivalDataset data;
  data.meta.time_unit = unit == TimeUnit::DaysToYears ? "years (days/365.25)" : "native";
  std::vector<std::size_t> bad_rows;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    const auto get = [&](std::size_t c) { return c < fields.size() ? fields[c] : std::string(); };
    const auto t = parse_number(get(time_col));
    if (!t) {
      ++data.meta.dropped_rows;
      continue;
    }
    const auto s = parse_number(get(status_col));
    int event = -1;
    if (s) {
      if (convention == StatusConvention::Status12) {
        if (*s == 2.0) event = 1;
        else if (*s == 1.0) event = 0;
      } else {
        if (*s == 1.0) event = 1;
        else if (*s == 0.0) event = 0;
      }
    }
    if (event < 0) {
      bad_rows.push_back(lineno);
      continue;
    }
    if (*t < 0.0) throw DataError("dataset: negative time on line " + std::to_string(lineno));
    data.times.push_back(unit == TimeUnit::DaysToYears ? *t / kDaysPerYear : *t);
    data.events.push_back(event);
  }
  if (!bad_rows.empty()) {
    std::ostringstream os;
    os << "dataset: unknown status codes on line(s)";
    for (std::size_t i = 0; i < bad_rows.size() && i < 20; ++i) os << ' ' << bad_rows[i];
    if (bad_rows.size() > 20) os << " ... (" << bad_rows.size() << " total)";
    throw DataError(os.str());
  }
  if (data.times.empty()) throw DataError("dataset: no usable rows");
  return data;
}

SurvivalDataset ingest_survival_data(const std::filesystem::path& path, StatusConvention convention,
                                     TimeUnit unit) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  return read_dataset_csv(is, convention, unit);
}

}  // namespace hazode
