#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "swd/config.hpp"
#include "swd/errors.hpp"

using namespace swd;

namespace {

std::string error_of(std::string_view text, Command command) {
  try {
    parse_run_config(text, command, "/base");
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

const std::string kHead = "name = \"t\"\noutput_dir = \"out\"\n";
const std::string kRates = kHead +
                           "[spec]\nfamily = \"gaussian\"\ndim = 2\n"
                           "[rates]\nn_grid = [16, 32, 64]\nreps = 3\n";

}  // namespace

TEST(Config, ShippedConfigsParse) {
  const std::pair<const char*, Command> files[] = {
      {"rate_d3.toml", Command::rates},          {"cod_d5.toml", Command::rates},
      {"intrinsic_dim.toml", Command::rates},    {"sigma_prefactor.toml", Command::rates},
      {"vanishing_sigma.toml", Command::rates},  {"concentration.toml", Command::concentration},
      {"mde_fit.toml", Command::mde},            {"mde_rate.toml", Command::mde},
      {"bootstrap_law.toml", Command::bootstrap}, {"bootstrap_one_sample.toml", Command::bootstrap},
      {"bootstrap_two_sample.toml", Command::bootstrap}, {"two_sample_power.toml", Command::power},
  };
  const std::filesystem::path dir = SWD_CONFIG_DIR;
  for (const auto& [file, command] : files) {
    SCOPED_TRACE(file);
    RunConfig c;
    ASSERT_NO_THROW(c = load_run_config(dir / file, command));
    EXPECT_EQ(c.command, command);
    EXPECT_TRUE(c.seed.has_value());
    EXPECT_EQ(c.base_dir, dir);
  }
}

TEST(Config, RatesDefaults) {
  const auto c = parse_run_config(kRates, Command::rates, "/base");
  EXPECT_EQ(c.name, "t");
  EXPECT_FALSE(c.seed.has_value());
  EXPECT_EQ(c.workers, 1);
  EXPECT_EQ(c.estimator.method, SmoothingMethod::automatic);
  ASSERT_TRUE(c.spec && c.rates);
  EXPECT_EQ(c.spec->dim(), 2u);
  EXPECT_EQ(c.rates->experiment, RateExperiment::one_sample);
  EXPECT_EQ(c.rates->n_grid, (std::vector<std::size_t>{16, 32, 64}));
  EXPECT_DOUBLE_EQ(c.rates->sigma, 1.0);
  EXPECT_FALSE(c.concentration || c.mde || c.bootstrap || c.power);
  EXPECT_EQ(c.source, kRates);
}

TEST(Config, RelativePathsResolveAgainstConfigDir) {
  const auto c = parse_run_config(kRates, Command::rates, "/base");
  EXPECT_EQ(c.resolve("data/x.csv"), std::filesystem::path("/base/data/x.csv"));
  EXPECT_EQ(c.resolve("/abs/x.csv"), std::filesystem::path("/abs/x.csv"));
}

TEST(Config, EstimatorSection) {
  const auto c = parse_run_config(kRates +
                                      "[estimator]\nmethod = \"mc-exact\"\nreplicas = 4\nrepeats = 2\n"
                                      "[estimator.grid]\nspacing = 0.3\nstencil_radius = 3\n",
                                  Command::rates);
  EXPECT_EQ(c.estimator.method, SmoothingMethod::mc_exact);
  EXPECT_EQ(c.estimator.replicas, 4);
  EXPECT_EQ(c.estimator.repeats, 2);
  EXPECT_DOUBLE_EQ(c.estimator.grid.spacing, 0.3);
  EXPECT_EQ(c.estimator.grid.stencil_radius, 3);
  EXPECT_EQ(error_of(kRates + "[estimator]\nmethod = \"magic\"\n", Command::rates).rfind("estimator.method: ", 0), 0u);
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_EQ(error_of(kRates + "colour = 1\n", Command::rates), "rates.colour: unexpected key");
  EXPECT_EQ(error_of("bogus = 1\n" + kRates, Command::rates), "bogus: unexpected key");

  std::string short_grid = kRates;
  short_grid.replace(short_grid.find("[16, 32, 64]"), 12, "[16]");
  EXPECT_EQ(error_of(short_grid, Command::rates), "rates.n_grid: n_grid needs ≥ 3 points");

  EXPECT_NE(error_of(kHead + "[rates]\nn_grid = [16, 32, 64]\n", Command::rates).find("spec"), std::string::npos);
  EXPECT_EQ(error_of(kRates, Command::power).rfind("power", 0), 0u);
  EXPECT_EQ(error_of("name = \"a/b\"\n" + kRates.substr(kHead.size()), Command::rates).rfind("name: ", 0), 0u);
  EXPECT_EQ(error_of(kRates + "[rates\n", Command::rates).rfind("config: line ", 0), 0u);

  std::string wrong_type = kRates;
  wrong_type.replace(wrong_type.find("reps = 3"), 8, "reps = \"3\"");
  EXPECT_EQ(error_of(wrong_type, Command::rates).rfind("rates.reps: ", 0), 0u);
}

TEST(Config, VanishingSigmaGuard) {
  const std::string base = kHead +
                           "[spec]\nfamily = \"gaussian\"\ndim = 2\n"
                           "[rates]\nexperiment = \"vanishing-sigma\"\nn_grid = [16, 32, 64]\nreps = 3\n"
                           "guard_alpha = 2.0\n[rates.schedule]\nkind = \"power\"\nc = 1.0\n";
  EXPECT_NO_THROW(parse_run_config(base + "p = 0.1\n", Command::rates));
  EXPECT_EQ(error_of(base + "p = 0.2\n", Command::rates).rfind("rates.schedule.p: ", 0), 0u);
}

TEST(Config, IntrinsicDimForbidsSpec) {
  const std::string body = "[rates]\nexperiment = \"intrinsic-dim\"\nintrinsic_dim = 3\nambient_dim = 6\n"
                           "n_grid = [16, 32, 64]\nreps = 3\n";
  EXPECT_NO_THROW(parse_run_config(kHead + body, Command::rates));
  EXPECT_NE(error_of(kHead + "[spec]\nfamily = \"gaussian\"\ndim = 6\n" + body, Command::rates), "");
}

TEST(Config, MdeNeedsExactlyOneSource) {
  const std::string mde = kHead +
                          "[mde]\nfamily = \"gaussian-location\"\ndim = 1\nlower = [-2.0]\nupper = [2.0]\n";
  EXPECT_NE(error_of(mde, Command::mde), "");
  const auto c = parse_run_config(mde + "data = \"x.csv\"\n", Command::mde, "/base");
  ASSERT_TRUE(c.mde);
  EXPECT_EQ(c.mde->data, std::filesystem::path("x.csv"));
  EXPECT_NE(error_of(mde + "data = \"x.csv\"\n[mde.rate]\ntheta_star = [0.0]\nn_grid = [8, 16, 32]\n", Command::mde),
            "");
  const auto r = parse_run_config(mde + "[mde.rate]\ntheta_star = [0.5]\nn_grid = [8, 16, 32]\nreps = 3\n",
                                  Command::mde);
  ASSERT_TRUE(r.mde && r.mde->rate);
  EXPECT_EQ(r.mde->rate->theta_star, std::vector<double>{0.5});
}

TEST(Config, PowerAlternativeMustMatchDimension) {
  const std::string power = kHead +
                            "[spec]\nfamily = \"gaussian\"\ndim = 2\n"
                            "[power]\nn = 10\nm = 12\nsigma = 0.5\n[power.alternative]\nfamily = \"gaussian\"\n";
  const auto c = parse_run_config(power + "mean = [1.0, 0.0]\nvariances = [1.0, 1.0]\n", Command::power);
  ASSERT_TRUE(c.power);
  EXPECT_EQ(c.power->alternative.dim(), 2u);
  EXPECT_EQ(c.power->m, 12u);
  EXPECT_NE(error_of(power + "mean = [1.0]\nvariances = [1.0]\n", Command::power), "");
}

TEST(Config, Specs) {
  EXPECT_EQ(parse_spec("family = \"gaussian\"\ndim = 3\n").dim(), 3u);
  const auto cube = parse_spec("family = \"uniform-cube\"\ndim = 2\n");
  ASSERT_TRUE(cube.support_diameter());
  EXPECT_NEAR(*cube.support_diameter(), std::sqrt(2.0), 1e-12);
  EXPECT_EQ(parse_spec("family = \"point-mass\"\nlocation = [1.0, 2.0]\n").dim(), 2u);
  const auto mix = parse_spec(
      "family = \"mixture\"\n"
      "[[components]]\nweight = 0.5\nfamily = \"point-mass\"\nlocation = [0.0]\n"
      "[[components]]\nweight = 0.5\nfamily = \"point-mass\"\nlocation = [1.0]\n");
  EXPECT_EQ(mix.family_name(), "mixture");
  EXPECT_THROW(parse_spec("family = \"cauchy\"\ndim = 1\n"), InputError);
  EXPECT_THROW(parse_spec("family = \"gaussian\"\ndim = 0\n"), InputError);
}
