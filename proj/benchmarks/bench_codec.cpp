#include <benchmark/benchmark.h>

#include <random>

#include "slic/bitstream.hpp"
#include "slic/codec.hpp"
#include "slic/image.hpp"

using namespace slic;

namespace {

Image textured(int h, int w, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  Image im = Image::zeros(3, h, w);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        im.at(c, y, x) = std::clamp(
            0.5 + 0.3 * std::sin(0.2 * x + c) * std::cos(0.15 * y) + u(rng), 0.0, 1.0);
  return im;
}

struct Fixture {
  Codec codec{ModelSpec{32, 32, 'c'}};
  Fixture() { codec.init_params(9); }
};

void BM_Compress(benchmark::State& state) {
  Fixture f;
  int hw = static_cast<int>(state.range(0));
  Image im = textured(hw, hw, 11);
  for (auto _ : state) {
    TensorData y = f.codec.analyze_image(im);
    TensorData yq{y.shape, Codec::quantize(y.v)};
    SlicBitstream bs = f.codec.pack_latent(yq, im.h, im.w, false);
    benchmark::DoNotOptimize(serialize_bitstream(bs));
  }
}
BENCHMARK(BM_Compress)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Decompress(benchmark::State& state) {
  Fixture f;
  int hw = static_cast<int>(state.range(0));
  Image im = textured(hw, hw, 12);
  TensorData y = f.codec.analyze_image(im);
  TensorData yq{y.shape, Codec::quantize(y.v)};
  SlicBitstream bs = f.codec.pack_latent(yq, im.h, im.w, false);
  std::vector<uint8_t> wire = serialize_bitstream(bs);
  for (auto _ : state) {
    Image out = f.codec.decompress(parse_bitstream(wire.data(), wire.size()));
    benchmark::DoNotOptimize(out.data.sum());
  }
}
BENCHMARK(BM_Decompress)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
