#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "swd/report_io.hpp"

using namespace swd;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig rates_config() {
  return parse_run_config("name = \"r\"\noutput_dir = \"o\"\nseed = 4\n[spec]\nfamily = \"gaussian\"\ndim = 1\n"
                          "[rates]\nn_grid = [8, 16, 32]\nreps = 2\n",
                          Command::rates, "/cfg");
}

}  // namespace

TEST(ReportIo, FormatRealRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -2.5}) {
    EXPECT_EQ(std::strtod(format_real(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(format_real(2.0), "2");
}

TEST(ReportIo, RateCsv) {
  RateReport r;
  r.grid = {8, 16};
  r.means = {0.5, 0.25};
  r.sds = {0.1, 0.05};
  r.reps = 3;
  EXPECT_EQ(rate_csv(r), "axis_value,mean,sd,reps\n8,0.5,0.10000000000000001,3\n16,0.25,0.050000000000000003,3\n");
}

TEST(ReportIo, BootstrapCsvNumbersReplicates) {
  const std::vector<double> v{0.5, 1.5};
  EXPECT_EQ(bootstrap_csv(v), "replicate,value\n0,0.5\n1,1.5\n");
}

TEST(ReportIo, TestJsonHasExactlyTheContractKeys) {
  TestResult t;
  t.statistic = 1.5;
  t.critical_value = 1.0;
  t.p_value = 0.02;
  t.reject = true;
  t.alpha = 0.05;
  t.B = 99;
  t.sigma = 0.5;
  t.n = 10;
  t.m = 12;
  t.seed = 7;
  const auto j = json::parse(test_json(t));
  std::vector<std::string> keys;
  for (const auto& [k, _] : j.items()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  EXPECT_EQ(keys, (std::vector<std::string>{"B", "alpha", "critical_value", "m", "n", "p_value", "reject", "seed",
                                            "sigma", "statistic"}));
  EXPECT_EQ(j["reject"], true);
  EXPECT_EQ(j["B"], 99);
}

TEST(ReportIo, DistJson) {
  SwdEstimate e;
  e.value = 0.25;
  e.standard_error = 0.01;
  e.method = SmoothingMethod::grid_flow;
  const auto j = json::parse(dist_json(e, 10, 20, 2, 1.0));
  EXPECT_EQ(j["method"], "grid-flow");
  EXPECT_EQ(j["stderr"], 0.01);
  EXPECT_EQ(j["d"], 2);
}

TEST(ReportIo, SidecarProvenanceRoundTrip) {
  const auto config = rates_config();
  RateReport r;
  r.experiment = "one-sample";
  r.axis = "n";
  r.grid = {8, 16, 32};
  r.means = {0.4, 0.2, 0.1};
  r.sds = {0.0, 0.0, 0.0};
  r.reps = 2;
  r.values = {{0.4, 0.4}, {0.2, 0.2}, {0.1, 0.1}};
  summarize(r);
  const Provenance p{Command::rates, "r", 4, config.source, config.base_dir};

  const auto dir = std::filesystem::path(testing::TempDir()) / "swd_report_io";
  std::filesystem::remove_all(dir);
  write_text_file(dir / "nested" / "r.json", rate_sidecar(r, p, config, "r.csv"));
  const auto body = slurp(dir / "nested" / "r.json");
  EXPECT_EQ(body.back(), '\n');

  const auto j = json::parse(body);
  EXPECT_EQ(j["kind"], "rate");
  EXPECT_EQ(j["csv"], "r.csv");
  EXPECT_EQ(j["spec"]["family"], "gaussian");
  EXPECT_NEAR(j["slope"].get<double>(), -1.0, 1e-12);
  EXPECT_FALSE(j.contains("sandwich"));

  const auto back = read_provenance(dir / "nested" / "r.json");
  EXPECT_EQ(back.command, Command::rates);
  EXPECT_EQ(back.name, "r");
  EXPECT_EQ(back.seed, 4u);
  EXPECT_EQ(back.config_source, config.source);
  EXPECT_EQ(back.config_dir, std::filesystem::path("/cfg"));
  std::filesystem::remove_all(dir);
}
