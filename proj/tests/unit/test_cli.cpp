#include "cli.hpp"
#include "commands.hpp"

#include "extdep/angular_model.hpp"
#include "extdep/csv.hpp"
#include "extdep/sampling.hpp"
#include "extdep/serialization.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

using namespace extdep;
namespace tsup = extdep::testing;

namespace {

const std::string kCli = EXTDEP_CLI_PATH;

int run_cli(const std::string& args) { return tsup::run_command(kCli + " " + args + " > /dev/null 2>&1"); }

// Raw data whose large values follow a known angular model: radius Pareto(1)
// times an angular draw, plus a light-tailed bulk.
void write_synthetic(const std::string& path, const AngularModel& m, std::size_t n, std::uint64_t seed) {
  const PointMatrix W = sample_angular(m, n, seed);
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> u(0, 1);
  std::ostringstream out;
  write_csv_row(out, {"date", "A", "B", "C"});
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    const double r = 1 / (1 - u(rng));
    std::vector<std::string> row{"d" + std::to_string(i)};
    for (int j = 0; j < 3; ++j) row.push_back(format_double(3 * r * W(i, j) + u(rng)));
    write_csv_row(out, row);
  }
  tsup::spit(path, out.str());
}

std::vector<std::vector<std::string>> rows_of(const std::string& path) {
  std::istringstream in(tsup::slurp(path));
  return parse_csv(in).rows;
}

}  // namespace

TEST(ConfigFile, FlagsWinAndKeysAreChecked) {
  auto lookup = [](const std::string& key) {
    if (key == "allow-small-sample") return cli::ConfigOption{true, true};
    if (key == "seed" || key == "k") return cli::ConfigOption{true, false};
    return cli::ConfigOption{};
  };
  const std::vector<std::string> args{"fit", "--seed", "5"};
  const auto merged = cli::merge_config_file(args, "# comment\nseed = 9\nk = 40\nallow-small-sample = true\n", lookup);
  EXPECT_EQ(merged, (std::vector<std::string>{"fit", "--seed", "5", "--k", "40", "--allow-small-sample"}));
  EXPECT_EQ(cli::merge_config_file(args, "allow-small-sample = off\n", lookup), args);
  EXPECT_THROW(cli::merge_config_file(args, "colour = red\n", lookup), cli::ConfigError);
  EXPECT_THROW(cli::merge_config_file(args, "allow-small-sample = maybe\n", lookup), cli::ConfigError);
  EXPECT_THROW(cli::merge_config_file(args, "k\n", lookup), cli::ConfigError);
}

TEST(BinomialInterval, NormalAndExactBranches) {
  const auto a = cli::binomial_interval(18, 528);
  EXPECT_FALSE(a.exact);
  EXPECT_NEAR(a.estimate, 18.0 / 528, 1e-15);
  EXPECT_NEAR(a.lower, 0.019, 5e-4);
  EXPECT_NEAR(a.upper, 0.050, 5e-4);
  EXPECT_NEAR(a.lower, 0.018612777028634037, 1e-12);
  // Clopper-Pearson values from an independent beta quantile implementation
  const auto b = cli::binomial_interval(5, 528);
  EXPECT_TRUE(b.exact);
  EXPECT_NEAR(b.lower, 0.0030817318868889875, 1e-10);
  EXPECT_NEAR(b.upper, 0.02195985356039687, 1e-10);
  const auto z = cli::binomial_interval(0, 100);
  EXPECT_EQ(z.lower, 0.0);
  EXPECT_NEAR(z.upper, 1 - std::pow(0.025, 0.01), 1e-10);
  EXPECT_THROW(cli::binomial_interval(3, 2), ValidationError);
}

TEST(ExitCodes, EndToEndMatrix) {
  tsup::TempDir dir("cli_codes");
  write_synthetic(dir / "data.csv", tsup::fitted_hr(), 600, 3);
  tsup::spit(dir / "missing.csv", "A,B,C\n1,2,3\n4,,6\n");
  save_model(tsup::fitted_hr(), dir / "hr.txt");
  save_model(AngularModel::husler_reiss(std::vector<double>{0.7, 0.8, 0.9, 0.75, 0.85, 0.8}, 4), dir / "hr4.txt");
  tsup::spit(dir / "bad.cfg", "colour = red\n");
  const std::string out = " --output-dir " + dir / "out";

  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("fit --input " + dir / "nope.csv" + " --columns A,B,C" + out), 2);
  EXPECT_EQ(run_cli("fit --input " + dir / "missing.csv" + " --columns A,B,C" + out), 2);
  EXPECT_EQ(run_cli("fit --input " + dir / "data.csv" + " --columns A,B,Z" + out), 2);
  EXPECT_EQ(run_cli("fit --input " + dir / "data.csv" + " --columns A,B,C --k 601" + out), 1);
  EXPECT_EQ(run_cli("fit --input " + dir / "data.csv" + " --columns A,B,C --families XX" + out), 1);
  EXPECT_EQ(run_cli("fit --input " + dir / "data.csv" + " --columns A,B,C --config " + dir / "bad.cfg" + out), 1);
  EXPECT_EQ(run_cli("density-grid --model " + dir / "hr4.txt" + out), 1);
  EXPECT_EQ(run_cli("density-grid --model " + dir / "hr.txt" + " --resolution 1" + out), 1);
  EXPECT_EQ(run_cli("simulate --model " + dir / "nope.txt" + out), 2);
  EXPECT_EQ(run_cli("simulate --model " + dir / "hr.txt" + " --n 10" + out), 0);
  EXPECT_EQ(run_cli("diagnose --chain " + dir / "out/simulated.csv" + out), 2);  // 10 draws are too few

  // fitted margins and an unattainable joint return level
  ASSERT_EQ(run_cli("fit --input " + dir / "data.csv" + " --columns A,B,C --families HR --starts 2" + out), 0);
  EXPECT_EQ(run_cli("return-levels --model " + dir / "out/HR_model.txt" + " --margins " + dir / "out/margins.json" +
                " --free A --fixed B=1e6,C=1e6 --p 0.2" + out),
            3);
  EXPECT_EQ(run_cli("return-levels --model " + dir / "out/HR_model.txt" + " --margins " + dir / "out/margins.json" +
                " --free A --free2 A" + out),
            1);
}

TEST(Fit, SyntheticHuslerReissRanksFirstAndIsDeterministic) {
  tsup::TempDir dir("cli_fit");
  write_synthetic(dir / "data.csv", tsup::fitted_hr(), 1500, 11);
  const std::string base = "fit --input " + dir / "data.csv" + " --columns A,B,C --families TD,HR,PB --starts 3";
  ASSERT_EQ(run_cli(base + " --output-dir " + dir / "a"), 0);
  ASSERT_EQ(run_cli(base + " --output-dir " + dir / "b"), 0);
  for (const char* f : {"ranking.csv", "ranking.json", "margins.json", "excesses.csv", "HR_fit.json", "HR_model.txt"})
    EXPECT_EQ(tsup::slurp(dir / (std::string("a/") + f)), tsup::slurp(dir / (std::string("b/") + f))) << f;

  const auto ranking = rows_of(dir / "a/ranking.csv");
  ASSERT_EQ(ranking.size(), 6u);
  for (const auto& r : ranking)
    if (r[2] == "1") EXPECT_EQ(r[3], "HR") << r[1];
  EXPECT_EQ(rows_of(dir / "a/excesses.csv").size(), 100u);
}

TEST(Fit, SmallSampleFlagThroughConfig) {
  tsup::TempDir dir("cli_small");
  write_synthetic(dir / "data.csv", tsup::fitted_hr(), 300, 5);
  const std::string base =
      "fit --input " + dir / "data.csv" + " --columns A,B,C --families HR --k 12 --starts 2 --output-dir " + dir / "o";
  EXPECT_EQ(run_cli(base), 2);
  tsup::spit(dir / "run.cfg", "allow-small-sample = true\n");
  EXPECT_EQ(run_cli(base + " --config " + dir / "run.cfg"), 0);
  tsup::spit(dir / "off.cfg", "allow-small-sample = false\n");
  EXPECT_EQ(run_cli(base + " --config " + dir / "off.cfg"), 2);
}

TEST(DensityGrid, SmallestGrid) {
  tsup::TempDir dir("cli_grid2");
  save_model(AngularModel::tilted_dirichlet(std::vector<double>{2, 2, 2}), dir / "td.txt");
  ASSERT_EQ(run_cli("density-grid --model " + dir / "td.txt" + " --resolution 2 --output-dir " + dir.str()), 0);
  EXPECT_EQ(rows_of(dir / "density_grid.csv").size(), 3u);
}

TEST(DensityGrid, SymmetricAndIntegratesToInteriorMass) {
  tsup::TempDir dir("cli_grid");
  for (const auto& [label, m] :
       {std::pair{"TD", AngularModel::tilted_dirichlet(std::vector<double>{2, 2, 2})},
        std::pair{"AL", AngularModel::asym_logistic_exchangeable(2.5, std::vector<double>{0.5, 0.5, 0.5})}}) {
    save_model(m, dir / "m.txt");
    ASSERT_EQ(run_cli("density-grid --model " + dir / "m.txt" + " --resolution 60 --output-dir " + dir.str()), 0);
    const int steps = 120;
    std::map<std::array<int, 3>, double> grid;
    double integral = 0;
    for (const auto& r : rows_of(dir / "density_grid.csv")) {
      const std::array<int, 3> key{static_cast<int>(std::lround(std::stod(r[0]) * steps)),
                                   static_cast<int>(std::lround(std::stod(r[1]) * steps)),
                                   static_cast<int>(std::lround(std::stod(r[2]) * steps))};
      grid[key] = std::stod(r[3]);
      integral += std::exp(std::stod(r[3])) / (steps * steps);
    }
    for (const auto& [k, v] : grid) {
      const std::array<int, 3> rot{k[1], k[2], k[0]}, swap{k[1], k[0], k[2]};
      EXPECT_NEAR(grid.at(rot), v, 1e-12) << label;
      EXPECT_NEAR(grid.at(swap), v, 1e-12) << label;
    }
    double boundary = 0;
    for (const auto& r : rows_of(dir / "masses.csv"))
      if (r[1] != "3") boundary += std::stod(r[2]);
    EXPECT_NEAR(integral, 1 - boundary, 0.02 * (1 - boundary)) << label;
  }
}

TEST(Simulate, EmptyAndDeterministic) {
  tsup::TempDir dir("cli_sim");
  save_model(tsup::fitted_td(), dir / "td.txt");
  ASSERT_EQ(run_cli("simulate --model " + dir / "td.txt" + " --n 0 --output-dir " + dir / "z"), 0);
  EXPECT_EQ(tsup::slurp(dir / "z/simulated.csv"), "w1,w2,w3\n");
  ASSERT_EQ(run_cli("simulate --model " + dir / "td.txt" + " --n 4000 --seed 3 --output-dir " + dir / "a"), 0);
  ASSERT_EQ(run_cli("simulate --model " + dir / "td.txt" + " --n 4000 --seed 3 --output-dir " + dir / "b"), 0);
  EXPECT_EQ(tsup::slurp(dir / "a/simulated.csv"), tsup::slurp(dir / "b/simulated.csv"));
  std::array<double, 3> mean{};
  const auto rows = rows_of(dir / "a/simulated.csv");
  ASSERT_EQ(rows.size(), 4000u);
  for (const auto& r : rows)
    for (int j = 0; j < 3; ++j) mean[j] += std::stod(r[j]) / rows.size();
  for (double v : mean) EXPECT_NEAR(v, 1.0 / 3, 0.02);
}

TEST(Predict, ClipsLowThresholdsAndCountsEvents) {
  tsup::TempDir dir("cli_pred");
  write_synthetic(dir / "data.csv", tsup::fitted_hr(), 800, 8);
  ASSERT_EQ(run_cli("fit --input " + dir / "data.csv" + " --columns A,B,C --families HR --starts 2 --output-dir " +
                dir.str()),
            0);
  tsup::spit(dir / "events.csv", "event,mode,A,B,C\nlow,union,0.5,0.5,0.5\nhigh,intersection,60,60,60\n");
  ASSERT_EQ(run_cli("predict --model " + dir / "HR_model.txt" + " --margins " + dir / "margins.json" + " --events " +
                dir / "events.csv" + " --input " + dir / "data.csv" + " --output-dir " + dir.str()),
            0);
  const auto rows = rows_of(dir / "predictions.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(std::stod(rows[0][2]), 1.0);
  EXPECT_FALSE(rows[0][4].empty());
  const double p = std::stod(rows[1][2]);
  EXPECT_GT(p, 0.0);
  EXPECT_LT(p, 0.1);
  EXPECT_EQ(rows[1][6], "800");
}

TEST(Diagnose, ReadsExportedChain) {
  tsup::TempDir dir("cli_diag");
  write_synthetic(dir / "data.csv", tsup::fitted_hr(), 600, 2);
  ASSERT_EQ(run_cli("fit --input " + dir / "data.csv" +
                " --columns A,B,C --families HR --engine bayes --mcmc-iter 6000 --burn-in 2000 --output-dir " +
                dir.str()),
            0);
  ASSERT_EQ(run_cli("diagnose --chain " + dir / "HR_chain.csv" + " --output-dir " + dir / "d1"), 0);
  ASSERT_EQ(run_cli("diagnose --chain " + dir / "HR_chain.csv" + " --output-dir " + dir / "d2"), 0);
  EXPECT_EQ(tsup::slurp(dir / "d1/diagnostics.csv"), tsup::slurp(dir / "d2/diagnostics.csv"));
  EXPECT_EQ(rows_of(dir / "d1/diagnostics.csv").size(), 3u);
}
