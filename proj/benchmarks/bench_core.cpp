#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "langdist/otdd.hpp"
#include "langdist/regress.hpp"
#include "langdist/rng.hpp"
#include "langdist/sinkhorn.hpp"

namespace {

using namespace langdist;

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = standard_normal(rng);
  return m;
}

// Points in 16 dims around one of five label means.
embed::LabeledDataset clustered(std::uint64_t seed, Eigen::Index n) {
  Rng rng = substream(seed, "bench");
  const Eigen::MatrixXd means = 2.0 * gaussian(5, 16, rng);
  Eigen::MatrixXd x = gaussian(n, 16, rng);
  std::vector<std::string> labels;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto l = static_cast<Eigen::Index>(i % 5);
    x.row(i) += means.row(l);
    labels.push_back("l" + std::to_string(l));
  }
  return embed::LabeledDataset::from_items("xx", "bench", 7, x, labels);
}

void BM_EuclideanCost(benchmark::State& state) {
  Rng rng = substream(1, "cost");
  const Eigen::MatrixXd a = gaussian(state.range(0), 768, rng);
  const Eigen::MatrixXd b = gaussian(state.range(0), 768, rng);
  for (auto _ : state) benchmark::DoNotOptimize(otdd::euclidean_cost(a, b, true));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_EuclideanCost)->Arg(256)->Arg(1024);

void BM_Sinkhorn(benchmark::State& state) {
  Rng rng = substream(2, "sinkhorn");
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd c =
      otdd::euclidean_cost(gaussian(n, 16, rng), gaussian(n, 16, rng), true);
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  otdd::SinkhornOptions o;
  o.eps = 0.05 * c.mean();
  int iters = 0;
  for (auto _ : state) {
    const auto r = otdd::sinkhorn(c, u, u, o);
    iters = r.iterations;
    benchmark::DoNotOptimize(r.cost);
  }
  state.counters["iterations"] = iters;
}
BENCHMARK(BM_Sinkhorn)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_DatasetDistance(benchmark::State& state) {
  const auto a = clustered(3, state.range(0));
  const auto b = clustered(4, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(otdd::dataset_distance(a, b, {}));
}
BENCHMARK(BM_DatasetDistance)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_GbdtFit(benchmark::State& state) {
  Rng rng = substream(5, "gbdt");
  const Eigen::MatrixXd x = gaussian(state.range(0), 116, rng);
  Eigen::VectorXd y = 2.0 * x.col(3) + x.col(7);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += 0.1 * standard_normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(regress::fit_gbdt(x, y, {}));
}
BENCHMARK(BM_GbdtFit)->Arg(300)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
