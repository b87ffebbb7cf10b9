#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "slic/range_coder.hpp"

using namespace slic;

namespace {

// Skewed 16-symbol source, frequencies summing to kFreqTotal.
struct Source {
  std::vector<uint32_t> freq, cum;
  std::vector<int> symbols;

  explicit Source(size_t n) {
    freq = {20000, 14000, 9000, 7000, 5000, 3500, 2400, 1600,
            1100,  800,   500,  300,  160,  90,   60,   26};
    cum.assign(freq.size() + 1, 0);
    for (size_t i = 0; i < freq.size(); ++i) cum[i + 1] = cum[i] + freq[i];
    std::mt19937_64 rng(7);
    std::discrete_distribution<int> d(freq.begin(), freq.end());
    symbols.resize(n);
    for (auto& s : symbols) s = d(rng);
  }
};

void BM_RangeEncode(benchmark::State& state) {
  Source src(static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    RangeEncoder enc;
    for (int s : src.symbols) enc.encode(src.cum[s], src.freq[s], src.cum.back());
    benchmark::DoNotOptimize(enc.finish());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RangeEncode)->Arg(1 << 12)->Arg(1 << 16);

void BM_RangeRoundTrip(benchmark::State& state) {
  Source src(static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    RangeEncoder enc;
    for (int s : src.symbols) enc.encode(src.cum[s], src.freq[s], src.cum.back());
    std::vector<uint8_t> bytes = enc.finish();
    RangeDecoder dec(bytes.data(), bytes.size());
    long sum = 0;
    for (size_t i = 0; i < src.symbols.size(); ++i) {
      uint32_t f = dec.decode_freq(src.cum.back());
      int s = 0;
      while (src.cum[static_cast<size_t>(s) + 1] <= f) ++s;
      dec.decode_update(src.cum[s], src.freq[s]);
      sum += s;
    }
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RangeRoundTrip)->Arg(1 << 12)->Arg(1 << 16);

}  // namespace
