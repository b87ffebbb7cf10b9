#include "slic/message.hpp"

#include <cmath>
#include <stdexcept>

namespace slic {

namespace {

constexpr Scalar kSlope = 0.2;

void fill_normal(Arr& a, std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> d(0.0, stddev);
  for (int64_t i = 0; i < a.size(); ++i) a[i] = d(rng);
}

}  // namespace

MessageCoder::MessageCoder(int latent_channels, int msg_bits)
    : channels_(latent_channels), bits_(msg_bits) {
  if (msg_bits < 1 || msg_bits > 4096) throw std::invalid_argument("MessageCoder: bad bit count");
  int c = channels_, n = bits_;
  lw_ = &store_.add("me.lin.w", {c, n});
  lb_ = &store_.add("me.lin.b", {c});
  ew0_ = &store_.add("me.conv0.w", {c, c, 3, 3});
  eb0_ = &store_.add("me.conv0.b", {c});
  ew1_ = &store_.add("me.conv1.w", {c, c, 3, 3});
  eb1_ = &store_.add("me.conv1.b", {c});
  dw0_ = &store_.add("md.conv0.w", {c, c, 3, 3});
  db0_ = &store_.add("md.conv0.b", {c});
  dw1_ = &store_.add("md.conv1.w", {c, c, 3, 3});
  db1_ = &store_.add("md.conv1.b", {c});
  dlw_ = &store_.add("md.lin.w", {n, c});
  dlb_ = &store_.add("md.lin.b", {n});
}

void MessageCoder::init_params(uint64_t seed) {
  std::mt19937_64 rng(seed);
  int c = channels_, n = bits_;
  double lrelu_gain = 2.0 / (1.0 + kSlope * kSlope);
  fill_normal(lw_->value, rng, std::sqrt(1.0 / n));
  lb_->value.setZero();
  fill_normal(ew0_->value, rng, std::sqrt(lrelu_gain / (c * 9)));
  eb0_->value.setZero();
  // Final embedding layer starts near zero so the watermark begins as a
  // small perturbation instead of wrecking the codec from step one.
  fill_normal(ew1_->value, rng, 0.01);
  eb1_->value.setZero();
  fill_normal(dw0_->value, rng, std::sqrt(lrelu_gain / (c * 9)));
  db0_->value.setZero();
  fill_normal(dw1_->value, rng, std::sqrt(lrelu_gain / (c * 9)));
  db1_->value.setZero();
  fill_normal(dlw_->value, rng, std::sqrt(1.0 / c));
  dlb_->value.setZero();
}

Var MessageCoder::perturbation(Tape& t, const Arr& bits, int h, int w, bool trainable) {
  if (bits.size() != bits_) throw std::invalid_argument("perturbation: bit count mismatch");
  auto p = [&t, trainable](ParamBlock* b) {
    return t.param(b->shape, b->value, &b->grad, trainable);
  };
  Arr bipolar = 2.0 * bits - 1.0;
  Var m = t.constant(TensorData{{bits_}, std::move(bipolar)});
  Var v = linear(m, p(lw_), p(lb_));
  Var x = broadcast_chw(v, h, w);
  x = leaky_relu(conv2d(x, p(ew0_), p(eb0_), 1, 1), kSlope);
  return conv2d(x, p(ew1_), p(eb1_), 1, 1);
}

Var MessageCoder::logits(Tape& t, Var y, bool trainable) {
  if (y.shape().size() != 3 || y.dim(0) != channels_)
    throw std::invalid_argument("logits: latent shape mismatch");
  auto p = [&t, trainable](ParamBlock* b) {
    return t.param(b->shape, b->value, &b->grad, trainable);
  };
  Var x = leaky_relu(conv2d(y, p(dw0_), p(db0_), 1, 1), kSlope);
  x = leaky_relu(conv2d(x, p(dw1_), p(db1_), 1, 1), kSlope);
  return linear(global_avg_pool(x), p(dlw_), p(dlb_));
}

TensorData MessageCoder::perturbation_plain(const std::vector<uint8_t>& bits, int h, int w) {
  Tape t(false);
  Var d = perturbation(t, bits_to_arr(bits), h, w, false);
  return TensorData{d.shape(), d.v()};
}

Arr MessageCoder::logits_plain(const TensorData& y) {
  Tape t(false);
  Var yv = t.constant_ref(y.shape, y.v);
  return logits(t, yv, false).v();
}

std::vector<uint8_t> MessageCoder::extract_bits(const TensorData& y) {
  return threshold_logits(logits_plain(y));
}

Arr MessageCoder::bits_to_arr(const std::vector<uint8_t>& bits) {
  Arr a(static_cast<int64_t>(bits.size()));
  for (size_t i = 0; i < bits.size(); ++i) a[static_cast<int64_t>(i)] = bits[i] ? 1.0 : 0.0;
  return a;
}

std::vector<uint8_t> MessageCoder::threshold_logits(const Arr& logits) {
  std::vector<uint8_t> out(static_cast<size_t>(logits.size()));
  for (int64_t i = 0; i < logits.size(); ++i) out[static_cast<size_t>(i)] = logits[i] > 0 ? 1 : 0;
  return out;
}

std::vector<uint8_t> bits_from_hex(const std::string& hex, int nbits) {
  if (nbits % 4 || static_cast<int>(hex.size()) != nbits / 4)
    throw std::invalid_argument("bits_from_hex: expected " + std::to_string(nbits / 4) +
                                " hex digits");
  std::vector<uint8_t> bits(static_cast<size_t>(nbits));
  for (int i = 0; i < nbits / 4; ++i) {
    char c = hex[static_cast<size_t>(i)];
    int v;
    if (c >= '0' && c <= '9')
      v = c - '0';
    else if (c >= 'a' && c <= 'f')
      v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F')
      v = c - 'A' + 10;
    else
      throw std::invalid_argument("bits_from_hex: bad digit");
    for (int j = 0; j < 4; ++j)
      bits[static_cast<size_t>(4 * i + j)] = static_cast<uint8_t>((v >> (3 - j)) & 1);
  }
  return bits;
}

std::string bits_to_hex(const std::vector<uint8_t>& bits) {
  if (bits.size() % 4) throw std::invalid_argument("bits_to_hex: bit count not nibble-aligned");
  static const char* kDigits = "0123456789abcdef";
  std::string out(bits.size() / 4, '0');
  for (size_t i = 0; i < out.size(); ++i) {
    int v = 0;
    for (int j = 0; j < 4; ++j) v = v << 1 | (bits[4 * i + static_cast<size_t>(j)] ? 1 : 0);
    out[i] = kDigits[v];
  }
  return out;
}

std::vector<uint8_t> random_bits(std::mt19937_64& rng, int nbits) {
  std::vector<uint8_t> bits(static_cast<size_t>(nbits));
  std::uniform_int_distribution<int> d(0, 1);
  for (auto& b : bits) b = static_cast<uint8_t>(d(rng));
  return bits;
}

}  // namespace slic
