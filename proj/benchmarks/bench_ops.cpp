#include <benchmark/benchmark.h>

#include <random>

#include "slic/attacks.hpp"
#include "slic/nn_ops.hpp"
#include "slic/perceptual.hpp"

using namespace slic;

namespace {

TensorData randt(std::vector<int> shape, uint64_t seed) {
  TensorData t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int64_t i = 0; i < t.size(); ++i) t.v[i] = u(rng);
  return t;
}

void BM_Conv2dForward(benchmark::State& state) {
  int hw = static_cast<int>(state.range(0));
  auto x = randt({16, hw, hw}, 1);
  auto w = randt({32, 16, 5, 5}, 2);
  auto b = randt({32}, 3);
  for (auto _ : state) {
    Tape t(false);
    Var y = conv2d(t.constant_ref({16, hw, hw}, x.v), t.constant_ref({32, 16, 5, 5}, w.v),
                   t.constant_ref({32}, b.v), 2, 2);
    benchmark::DoNotOptimize(y.v().sum());
  }
}
BENCHMARK(BM_Conv2dForward)->Arg(32)->Arg(64);

void BM_Conv2dBackward(benchmark::State& state) {
  int hw = static_cast<int>(state.range(0));
  auto x = randt({16, hw, hw}, 1);
  auto w = randt({32, 16, 5, 5}, 2);
  auto b = randt({32}, 3);
  for (auto _ : state) {
    Tape t;
    Var xv = t.leaf(x);
    Var y = sum(conv2d(xv, t.leaf(w), t.leaf(b), 2, 2));
    t.backward(y);
    xv.n->ensure_grad();
    benchmark::DoNotOptimize(grad_of(xv).sum());
  }
}
BENCHMARK(BM_Conv2dBackward)->Arg(32)->Arg(64);

void BM_PerceptualDistance(benchmark::State& state) {
  int hw = static_cast<int>(state.range(0));
  const PerceptualMetric& pm = PerceptualMetric::fallback();
  Image a = Image::from_tensor(randt({3, hw, hw}, 5));
  Image b = Image::from_tensor(randt({3, hw, hw}, 6));
  for (auto _ : state) benchmark::DoNotOptimize(pm.distance(a, b));
}
BENCHMARK(BM_PerceptualDistance)->Arg(64)->Arg(128);

void BM_DiffJpegForward(benchmark::State& state) {
  int hw = static_cast<int>(state.range(0));
  auto x = randt({3, hw, hw}, 7);
  for (auto _ : state) {
    Tape t(false);
    Var y = diff_jpeg(t, t.constant_ref({3, hw, hw}, x.v), 80);
    benchmark::DoNotOptimize(y.v().sum());
  }
}
BENCHMARK(BM_DiffJpegForward)->Arg(64)->Arg(128);

}  // namespace
