#include "extdep/angular_model.hpp"
#include "extdep/inference.hpp"
#include "extdep/mvgauss.hpp"
#include "extdep/sampling.hpp"
#include "extdep/summaries.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace extdep;

namespace {

AngularModel hr3() { return AngularModel::husler_reiss(std::vector<double>{0.65, 0.90, 0.98}, 3); }
AngularModel td3() { return AngularModel::tilted_dirichlet(std::vector<double>{1.20, 0.67, 0.41}); }

void BM_MvnCdf(benchmark::State& st) {
  const int d = static_cast<int>(st.range(0));
  const std::vector<double> up(d * (d - 1) / 2, 0.5), a(d, 0.3);
  const auto R = CorrelationMatrix::from_upper(d, up);
  for (auto _ : st) benchmark::DoNotOptimize(mvn_cdf(a, R));
}
BENCHMARK(BM_MvnCdf)->DenseRange(2, 4);

void BM_MvtCdf(benchmark::State& st) {
  const int d = static_cast<int>(st.range(0));
  const std::vector<double> up(d * (d - 1) / 2, 0.5), a(d, 0.3);
  const auto R = CorrelationMatrix::from_upper(d, up);
  for (auto _ : st) benchmark::DoNotOptimize(mvt_cdf(a, R, 3.0));
}
BENCHMARK(BM_MvtCdf)->DenseRange(2, 3)->Unit(benchmark::kMillisecond);

void BM_DensityHR(benchmark::State& st) {
  const AngularModel m = hr3();
  const std::vector<double> w{0.2, 0.3, 0.5};
  for (auto _ : st) benchmark::DoNotOptimize(angular_density(m, w));
}
BENCHMARK(BM_DensityHR);

void BM_DensityET(benchmark::State& st) {
  const AngularModel m = AngularModel::extremal_t(std::vector<double>{0.52, 0.71, 0.52}, 3.0, 3);
  const std::vector<double> w{0.2, 0.3, 0.5};
  for (auto _ : st) benchmark::DoNotOptimize(angular_density(m, w));
}
BENCHMARK(BM_DensityET);

void BM_ExponentQuadratureTD(benchmark::State& st) {
  const AngularModel m = td3();
  const std::vector<double> y{0.7, 1.3, 2.1};
  for (auto _ : st) benchmark::DoNotOptimize(exponent_function(m, y, 1e-6));
}
BENCHMARK(BM_ExponentQuadratureTD)->Unit(benchmark::kMillisecond);

void BM_Moments(benchmark::State& st) {
  const AngularModel m = st.range(0) == 3 ? hr3()
                                          : AngularModel::husler_reiss(
                                                std::vector<double>{0.7, 0.8, 0.9, 0.75, 0.85, 0.8}, 4);
  for (auto _ : st) benchmark::DoNotOptimize(angular_moments(m, 1e-6));
}
BENCHMARK(BM_Moments)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_FailureRegionHR(benchmark::State& st) {
  const AngularModel m = hr3();
  const std::vector<double> y{20, 35, 50};
  for (auto _ : st) benchmark::DoNotOptimize(prob_failure_region(m, y).value);
}
BENCHMARK(BM_FailureRegionHR);

void BM_Sample(benchmark::State& st) {
  const AngularModel m = td3();
  for (auto _ : st) benchmark::DoNotOptimize(sample_angular(m, 1000, 1));
}
BENCHMARK(BM_Sample)->Unit(benchmark::kMillisecond);

void BM_FitMle(benchmark::State& st) {
  const Family f = st.range(0) == 0 ? Family::HuslerReiss : Family::TiltedDirichlet;
  const PointMatrix W = sample_angular(f == Family::HuslerReiss ? hr3() : td3(), 100, 3);
  FitOptions o;
  o.starts = 1;
  for (auto _ : st) benchmark::DoNotOptimize(fit_mle(f, W, o).loglik);
}
BENCHMARK(BM_FitMle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
