#include <doctest.h>

#include <sstream>

#include "hazode/dataset.hpp"
#include "hazode/errors.hpp"
#include "hazode/models.hpp"
#include "hazode/sampling.hpp"

using namespace hazode;

TEST_SUITE("dataset") {
  TEST_CASE("status12 convention with days to years") {
    std::istringstream is("inst,time,status,age\n3,455,2,68\n3,1010,1,56\n");
    const auto d = read_dataset_csv(is, StatusConvention::Status12, TimeUnit::DaysToYears);
    REQUIRE(d.size() == 2);
    CHECK(d.times[0] == 455.0 / 365.25);
    CHECK(d.events[0] == 1);
    CHECK(d.events[1] == 0);
    CHECK(d.meta.time_unit != "native");
  }

  TEST_CASE("missing times are dropped and counted") {
    std::istringstream is("time,status\n1.5,1\nNA,0\n,1\n2.5,0\n");
    const auto d = read_dataset_csv(is, StatusConvention::Status01, TimeUnit::Native);
    CHECK(d.size() == 2);
    CHECK(d.meta.dropped_rows == 2);
  }

  TEST_CASE("unknown status codes name their lines") {
    std::istringstream is("time,status\n1,1\n2,3\n3,0\n4,7\n");
    try {
      read_dataset_csv(is, StatusConvention::Status01, TimeUnit::Native);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(" 3") != std::string::npos);
      CHECK(msg.find(" 5") != std::string::npos);
    }
  }

  TEST_CASE("empty input and missing columns") {
    std::istringstream empty("");
    CHECK_THROWS_AS(read_dataset_csv(empty, StatusConvention::Status01, TimeUnit::Native), DataError);
    std::istringstream nocol("t,status\n1,1\n");
    CHECK_THROWS_AS(read_dataset_csv(nocol, StatusConvention::Status01, TimeUnit::Native), DataError);
  }

  TEST_CASE("simulated data round-trips exactly") {
    const ModelSpec m(DampedOscParams{0.5, 1.0, 0.2, 0.1, 0.3});
    const auto d = simulate_dataset(m, 500, CensoringSpec::uniform(8.0), 77);
    std::ostringstream os;
    write_dataset_csv(os, d);
    std::istringstream is(os.str());
    const auto back = read_dataset_csv(is, StatusConvention::Status01, TimeUnit::Native);
    CHECK(back.times == d.times);
    CHECK(back.events == d.events);
    CHECK(os.str().rfind("time,status\n", 0) == 0);
  }

  TEST_CASE("bundled clinical data ingests under the years convention") {
    const auto d = ingest_survival_data(HAZODE_DATA_DIR "/lung.csv", StatusConvention::Status12, TimeUnit::DaysToYears);
    CHECK(d.size() == 228);
    CHECK(d.event_count() == 165);
  }

  TEST_CASE("validation") {
    SurvivalDataset d;
    d.times = {1.0, -1.0};
    d.events = {1, 0};
    CHECK_THROWS_AS(d.validate(), DataError);
    d.times = {1.0, 2.0};
    d.events = {1, 2};
    CHECK_THROWS_AS(d.validate(), DataError);
    d.events = {1, 0};
    CHECK(d.censoring_rate() == 0.5);
  }
}
