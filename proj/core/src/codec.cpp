#include "slic/codec.hpp"

#include <cmath>

namespace slic {

namespace {

constexpr int kKernel = 5, kPad = 2, kOutPad = 1, kStages = 4;
constexpr Scalar kSlope = 0.2;

void fill_normal(Arr& a, std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> d(0.0, stddev);
  for (int64_t i = 0; i < a.size(); ++i) a[i] = d(rng);
}

}  // namespace

Codec::Codec(const ModelSpec& spec) : spec_(spec), em_(store_, "em", spec.latent_channels) {
  int n = spec_.latent_channels;
  if (n < 1 || n > 1024) throw std::invalid_argument("Codec: bad channel count");
  for (int i = 0; i < kStages; ++i) {
    int in_c = i == 0 ? 3 : n;
    ew_[i] = &store_.add("enc.w" + std::to_string(i), {n, in_c, kKernel, kKernel});
    eb_[i] = &store_.add("enc.b" + std::to_string(i), {n});
  }
  for (int i = 0; i < kStages; ++i) {
    int out_c = i + 1 < kStages ? n : 3;
    dw_[i] = &store_.add("dec.w" + std::to_string(i), {n, out_c, kKernel, kKernel});
    db_[i] = &store_.add("dec.b" + std::to_string(i), {out_c});
  }
}

void Codec::init_params(uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int i = 0; i < kStages; ++i) {
    // He-style init scaled for the leaky ReLU that follows; the last layer
    // of each transform is linear and gets the smaller variance.
    double gain = i + 1 < kStages ? 2.0 / (1.0 + kSlope * kSlope) : 1.0;
    int fan_e = ew_[i]->shape[1] * kKernel * kKernel;
    fill_normal(ew_[i]->value, rng, std::sqrt(gain / fan_e));
    eb_[i]->value.setZero();
    int fan_d = dw_[i]->shape[0] * kKernel * kKernel / 4;  // stride-2 overlap
    fill_normal(dw_[i]->value, rng, std::sqrt(gain / fan_d));
    db_[i]->value.setZero();
  }
  // Mid-gray bias on the synthesis output keeps early reconstructions in
  // range (inputs are shifted by -0.5 on the way in).
  db_[kStages - 1]->value.setConstant(0.5);
  em_.init_params(rng);
  invalidate_tables();
}

Var Codec::analyze(Tape& t, Var x, bool trainable) {
  if (x.shape().size() != 3 || x.dim(0) != 3 || x.dim(1) % kStride || x.dim(2) % kStride)
    throw std::invalid_argument("analyze: expected (3,H,W) with stride-multiple dims");
  Var h = add_scalar(x, -0.5);
  for (int i = 0; i < kStages; ++i) {
    Var w = t.param(ew_[i]->shape, ew_[i]->value, &ew_[i]->grad, trainable);
    Var b = t.param(eb_[i]->shape, eb_[i]->value, &eb_[i]->grad, trainable);
    h = conv2d(h, w, b, 2, kPad);
    if (i + 1 < kStages) h = leaky_relu(h, kSlope);
  }
  return h;
}

Var Codec::synthesize(Tape& t, Var y, bool trainable) {
  if (y.shape().size() != 3 || y.dim(0) != spec_.latent_channels)
    throw std::invalid_argument("synthesize: latent channel mismatch");
  Var h = y;
  for (int i = 0; i < kStages; ++i) {
    Var w = t.param(dw_[i]->shape, dw_[i]->value, &dw_[i]->grad, trainable);
    Var b = t.param(db_[i]->shape, db_[i]->value, &db_[i]->grad, trainable);
    h = conv_transpose2d(h, w, b, 2, kPad, kOutPad);
    if (i + 1 < kStages) h = leaky_relu(h, kSlope);
  }
  return clamp01(h);
}

TensorData Codec::analyze_image(const Image& im) {
  if (im.c != 3) throw std::invalid_argument("analyze_image: 3 channels expected");
  Tape t(false);
  Var x = t.constant_ref({im.c, im.h, im.w}, im.data);
  int ph = pad_to_stride(im.h), pw = pad_to_stride(im.w);
  if (ph != im.h || pw != im.w) x = pad_reflect(x, 0, ph - im.h, 0, pw - im.w);
  Var y = analyze(t, x, false);
  return TensorData{y.shape(), y.v()};
}

Image Codec::decode_latent(const TensorData& yq, int out_h, int out_w) {
  Tape t(false);
  Var y = t.constant_ref(yq.shape, yq.v);
  Var x = synthesize(t, y, false);
  if (x.dim(1) < out_h || x.dim(2) < out_w)
    throw std::invalid_argument("decode_latent: latent too small for target dims");
  if (x.dim(1) != out_h || x.dim(2) != out_w) x = crop(x, 0, 0, out_h, out_w);
  Image im;
  im.c = 3;
  im.h = out_h;
  im.w = out_w;
  im.data = x.v();
  return im;
}

double Codec::estimate_bits(const TensorData& yq) const {
  if (yq.rank() != 3 || yq.dim(0) != spec_.latent_channels)
    throw std::invalid_argument("estimate_bits: latent shape mismatch");
  int64_t plane = static_cast<int64_t>(yq.dim(1)) * yq.dim(2);
  double bits = 0;
  for (int c = 0; c < spec_.latent_channels; ++c)
    for (int64_t i = 0; i < plane; ++i) {
      double v = yq.v[c * plane + i];
      bits -= std::log2(em_.pmf(c, static_cast<int>(std::lround(v))));
    }
  return bits;
}

const std::vector<ChannelTable>& Codec::tables() const {
  if (!tables_valid_) {
    tables_.clear();
    tables_.reserve(static_cast<size_t>(spec_.latent_channels));
    for (int c = 0; c < spec_.latent_channels; ++c)
      tables_.push_back(build_channel_table(em_, c));
    tables_valid_ = true;
  }
  return tables_;
}

SlicBitstream Codec::pack_latent(const TensorData& yq, int img_h, int img_w, bool watermark) {
  if (yq.rank() != 3 || yq.dim(0) != spec_.latent_channels)
    throw std::invalid_argument("pack_latent: latent shape mismatch");
  const auto& tabs = tables();
  int64_t plane = static_cast<int64_t>(yq.dim(1)) * yq.dim(2);
  RangeEncoder enc;
  for (int c = 0; c < spec_.latent_channels; ++c)
    for (int64_t i = 0; i < plane; ++i) {
      double v = yq.v[c * plane + i];
      long r = std::lround(v);
      if (std::abs(v - static_cast<double>(r)) > 1e-9)
        throw std::invalid_argument("pack_latent: latent not quantized");
      encode_value(enc, tabs[static_cast<size_t>(c)], static_cast<int>(r));
    }
  SlicBitstream bs;
  bs.model_hash = param_digest();
  bs.image_h = static_cast<uint32_t>(img_h);
  bs.image_w = static_cast<uint32_t>(img_w);
  bs.latent_c = static_cast<uint16_t>(yq.dim(0));
  bs.latent_h = static_cast<uint16_t>(yq.dim(1));
  bs.latent_w = static_cast<uint16_t>(yq.dim(2));
  bs.flags = watermark ? kFlagWatermark : 0;
  bs.payload = enc.finish();
  return bs;
}

TensorData Codec::unpack_latent(const SlicBitstream& bs) const {
  if (bs.model_hash != param_digest())
    throw std::runtime_error("unpack_latent: model-hash mismatch");
  if (bs.latent_c != spec_.latent_channels)
    throw std::runtime_error("unpack_latent: latent channel mismatch");
  const auto& tabs = tables();
  TensorData yq({static_cast<int>(bs.latent_c), static_cast<int>(bs.latent_h),
                 static_cast<int>(bs.latent_w)});
  int64_t plane = static_cast<int64_t>(bs.latent_h) * bs.latent_w;
  RangeDecoder dec(bs.payload.data(), bs.payload.size());
  for (int c = 0; c < static_cast<int>(bs.latent_c); ++c)
    for (int64_t i = 0; i < plane; ++i)
      yq.v[c * plane + i] = decode_value(dec, tabs[static_cast<size_t>(c)]);
  return yq;
}

Image Codec::decompress(const SlicBitstream& bs) {
  TensorData yq = unpack_latent(bs);
  return decode_latent(yq, static_cast<int>(bs.image_h), static_cast<int>(bs.image_w));
}

}  // namespace slic
