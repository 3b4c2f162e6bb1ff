#pragma once

#include "extdep/error.hpp"

#include <cstddef>
#include <cstdint>
#include <exception>
#include <string>
#include <vector>

namespace extdep::cli {

// Invalid command-line or config-file settings.
class ConfigError : public Error {
public:
  using Error::Error;
};

enum ExitCode { kSuccess = 0, kConfigFailure = 1, kDataFailure = 2, kNumericFailure = 3 };

int exit_code_for(const std::exception& e);

struct FitArgs {
  std::string input;
  std::vector<std::string> columns;
  double threshold_quantile = 0.7;
  std::size_t k = 0;  // 0 picks 100 for d <= 3 and 200 for d = 4
  std::vector<std::string> families{"HR", "TD", "PB", "ET"};
  std::string engine = "mle";
  std::uint64_t seed = 1;
  int starts = 10;
  std::size_t mcmc_iter = 80000;
  std::size_t burn_in = 30000;
  bool allow_small_sample = false;
  std::string output_dir = ".";
};

struct PredictArgs {
  std::string model;
  std::string margins;
  std::string events;
  std::string input;  // optional raw data for empirical counts
  std::string output_dir = ".";
};

struct ReturnLevelArgs {
  std::string model;
  std::string margins;
  std::string free;
  std::string free2;
  std::vector<std::string> fixed;  // COL=value
  std::vector<double> p{0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001};
  int points = 60;
  std::string input;
  std::string output_dir = ".";
};

struct DensityGridArgs {
  std::string model;
  int resolution = 50;
  std::string output_dir = ".";
};

struct SimulateArgs {
  std::string model;
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
};

struct DiagnoseArgs {
  std::string chain;
  std::string output_dir = ".";
};

// Each command writes its files into output_dir and returns an exit code.
// Failures that stop the whole command are thrown.
int cmd_fit(const FitArgs& a);
int cmd_predict(const PredictArgs& a);
int cmd_return_levels(const ReturnLevelArgs& a);
int cmd_density_grid(const DensityGridArgs& a);
int cmd_simulate(const SimulateArgs& a);
int cmd_diagnose(const DiagnoseArgs& a);

// 95% interval for a binomial proportion: normal approximation, or
// Clopper-Pearson when the estimate is below 0.02.
struct BinomialInterval {
  double estimate, lower, upper;
  bool exact;
};
BinomialInterval binomial_interval(std::size_t count, std::size_t n);

}  // namespace extdep::cli
