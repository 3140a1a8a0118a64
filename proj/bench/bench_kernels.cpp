#include <benchmark/benchmark.h>

#include <map>

#include "bilevel/kernels.hpp"
#include "bilevel/rng.hpp"

namespace {

using namespace bilevel;

struct Data {
  RowMatrix X;
  Vector labels;
  Vector weights;
  Vector w;
  Vector z;
};

const Data& data(Index n, Index d) {
  static std::map<std::pair<Index, Index>, Data> cache;
  auto it = cache.find({n, d});
  if (it == cache.end()) {
    RngStream rng(1, 0);
    Data D{rng.normal_matrix(n, d), Vector(n), rng.normal_vector(n).cwiseAbs(), rng.normal_vector(d),
           rng.normal_vector(d)};
    for (Index i = 0; i < n; ++i) D.labels[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
    it = cache.emplace(std::make_pair(n, d), std::move(D)).first;
  }
  return it->second;
}

template <bool Parallel>
void grad(benchmark::State& state) {
  const auto& D = data(state.range(0), state.range(1));
  for (auto _ : state) {
    Vector g = Parallel ? kernels::parallel::logistic_grad(D.X, D.labels, D.weights, D.w)
                        : kernels::serial::logistic_grad(D.X, D.labels, D.weights, D.w);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void hvp(benchmark::State& state) {
  const auto& D = data(state.range(0), state.range(1));
  for (auto _ : state) {
    Vector h = Parallel ? kernels::parallel::logistic_hvp(D.X, D.weights, D.w, D.z)
                        : kernels::serial::logistic_hvp(D.X, D.weights, D.w, D.z);
    benchmark::DoNotOptimize(h.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void hessian(benchmark::State& state) {
  const auto& D = data(state.range(0), state.range(1));
  for (auto _ : state) {
    Matrix H = Parallel ? kernels::parallel::logistic_hessian(D.X, D.weights, D.w)
                        : kernels::serial::logistic_hessian(D.X, D.weights, D.w);
    benchmark::DoNotOptimize(H.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void sizes(benchmark::internal::Benchmark* b) {
  for (Index n : {1000, 20000, 200000}) b->Args({n, 20});
}

}  // namespace

BENCHMARK(grad<false>)->Name("logistic_grad/serial")->Apply(sizes);
BENCHMARK(grad<true>)->Name("logistic_grad/parallel")->Apply(sizes);
BENCHMARK(hvp<false>)->Name("logistic_hvp/serial")->Apply(sizes);
BENCHMARK(hvp<true>)->Name("logistic_hvp/parallel")->Apply(sizes);
BENCHMARK(hessian<false>)->Name("logistic_hessian/serial")->Apply(sizes);
BENCHMARK(hessian<true>)->Name("logistic_hessian/parallel")->Apply(sizes);

BENCHMARK_MAIN();
