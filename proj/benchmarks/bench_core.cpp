#include <benchmark/benchmark.h>

#include <Eigen/QR>

#include "conceptsig/algebra.hpp"
#include "conceptsig/generators.hpp"
#include "conceptsig/hierarchy.hpp"
#include "conceptsig/random_mlp.hpp"
#include "conceptsig/rng.hpp"
#include "conceptsig/signature.hpp"
#include "conceptsig/stream.hpp"

using namespace conceptsig;

namespace {

PointCloud gaussian_cloud(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  return PointCloud(rng.normal_matrix(n, d));
}

void BM_Embed(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const MonomialBasis basis(d, 3);
  Rng rng(1);
  const Eigen::VectorXd x = rng.normal_vector(d);
  for (auto _ : state) benchmark::DoNotOptimize(basis.embed(x));
  state.counters["monomials"] = static_cast<double>(basis.size());
}
BENCHMARK(BM_Embed)->Arg(2)->Arg(5)->Arg(10);

void BM_MomentMatrix(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const PointCloud cloud = gaussian_cloud(500, d, 2);
  const MonomialBasis basis(d, 2);
  for (auto _ : state) benchmark::DoNotOptimize(moment_matrix(cloud, basis));
}
BENCHMARK(BM_MomentMatrix)->Arg(2)->Arg(10)->Arg(20);

void BM_FitCircle(benchmark::State& state) {
  const PointCloud cloud = sample(ManifoldSpec{CircleSpec{}}, static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(fit(cloud, FitConfig{}));
}
BENCHMARK(BM_FitCircle)->Arg(50)->Arg(1000);

void BM_FitProjected(benchmark::State& state) {
  const PointCloud cloud = gaussian_cloud(200, 50, 4);
  FitConfig cfg;
  cfg.projection = ProjectionConfig{static_cast<int>(state.range(0)), 5};
  for (auto _ : state) benchmark::DoNotOptimize(fit(cloud, cfg));
}
BENCHMARK(BM_FitProjected)->Arg(5)->Arg(14);

void BM_Intersect(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Rng rng(6);
  FitConfig lin;
  lin.degree = 1;
  lin.include_constant = false;
  const Eigen::MatrixXd shared = rng.normal_matrix(d, 2);
  Eigen::MatrixXd b1(d, 5), b2(d, 5);
  b1 << shared, rng.normal_matrix(d, 3);
  b2 << shared, rng.normal_matrix(d, 3);
  const Signature a = fit(PointCloud(rng.normal_matrix(30, 5) * b1.transpose()), lin);
  const Signature b = fit(PointCloud(rng.normal_matrix(30, 5) * b2.transpose()), lin);
  for (auto _ : state) benchmark::DoNotOptimize(intersect(a, b));
}
BENCHMARK(BM_Intersect)->Arg(10)->Arg(50);

void BM_Level2Circles(benchmark::State& state) {
  std::vector<Signature> sigs;
  for (int i = 0; i < 8; ++i)
    sigs.push_back(fit(sample(ManifoldSpec{CircleSpec{Eigen::Vector2d::Zero(), 0.5 + 0.2 * i}}, 40, 7 + i),
                       FitConfig{}));
  for (auto _ : state) benchmark::DoNotOptimize(signature_of_signatures(sigs, Level2Config{}));
}
BENCHMARK(BM_Level2Circles);

void BM_StreamStep(benchmark::State& state) {
  Rng rng(8);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(rng.normal_matrix(20, 2));
  const Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(20, 2);
  StreamConfig cfg;
  StreamArchitecture net(cfg);
  for (int i = 0; i < cfg.buffer_size; ++i) net.step(basis * rng.normal_vector(2));
  for (auto _ : state) benchmark::DoNotOptimize(net.step(basis * rng.normal_vector(2)));
}
BENCHMARK(BM_StreamStep);

void BM_RecoverMoment(benchmark::State& state) {
  const int units = static_cast<int>(state.range(0));
  RandomMLP net(5, units, 9);
  net.set_calibration(calibrate(5));
  const PointCloud cloud = gaussian_cloud(400, 5, 10);
  for (auto _ : state) benchmark::DoNotOptimize(net.recover_moment(cloud));
  state.SetItemsProcessed(state.iterations() * units);
}
BENCHMARK(BM_RecoverMoment)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_Calibrate(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(calibrate(d));
}
BENCHMARK(BM_Calibrate)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
