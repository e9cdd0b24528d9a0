#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hazode {

struct DatasetMeta {
  std::string model;
  std::uint64_t seed = 0;
  std::optional<double> c_max;
  std::string time_unit = "native";
  std::size_t dropped_rows = 0;
};

// Right-censored observations: times[i] = min(T_i, C_i), events[i] = 1{T_i <= C_i}.
struct SurvivalDataset {
  std::vector<double> times;
  std::vector<int> events;
  DatasetMeta meta;

  std::size_t size() const noexcept { return times.size(); }
  std::size_t event_count() const noexcept;
  double total_time() const noexcept;
  double max_time() const noexcept;
  double censoring_rate() const noexcept;
  // Throws DataError on length mismatch, negative/non-finite times or indicators outside {0,1}.
  void validate() const;
};

enum class StatusConvention {
  Status01,  // 1 = event, 0 = censored
  Status12,  // 2 = dead, 1 = censored
};

enum class TimeUnit {
  Native,
  DaysToYears,  // t / 365.25
};

inline constexpr double kDaysPerYear = 365.25;

// Header `time,status`, comma-delimited, LF endings, shortest round-trip decimals.
void write_dataset_csv(std::ostream& os, const SurvivalDataset& data);
void write_dataset_csv(const std::filesystem::path& path, const SurvivalDataset& data);

// Reads any delimited file carrying `time` and `status` columns. Rows with a missing
// time are dropped and counted; unknown status codes raise DataError naming the rows.
SurvivalDataset read_dataset_csv(std::istream& is, StatusConvention convention, TimeUnit unit);
SurvivalDataset ingest_survival_data(const std::filesystem::path& path, StatusConvention convention,
                                     TimeUnit unit);

std::string format_double(double x);

}  // namespace hazode
