#include "slic/range_coder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slic {

void RangeEncoder::encode(uint32_t cum_freq, uint32_t freq, uint32_t tot_freq) {
  if (finished_) throw std::logic_error("RangeEncoder: encode after finish");
  if (freq == 0 || cum_freq + freq > tot_freq || tot_freq > kFreqTotal)
    throw std::invalid_argument("RangeEncoder: bad frequency interval");
  low_ += cum_freq * (range_ /= tot_freq);
  range_ *= freq;
  while ((low_ ^ (low_ + range_)) < kRangeTop ||
         (range_ < kRangeBot && ((range_ = -low_ & (kRangeBot - 1)), true))) {
    out_.push_back(static_cast<uint8_t>(low_ >> 24));
    low_ <<= 8;
    range_ <<= 8;
  }
}

std::vector<uint8_t> RangeEncoder::finish() {
  if (finished_) throw std::logic_error("RangeEncoder: double finish");
  finished_ = true;
  for (int i = 0; i < 4; ++i) {
    out_.push_back(static_cast<uint8_t>(low_ >> 24));
    low_ <<= 8;
  }
  return std::move(out_);
}

RangeDecoder::RangeDecoder(const uint8_t* data, size_t n) : p_(data), end_(data + n) {
  for (int i = 0; i < 4; ++i) code_ = code_ << 8 | next();
}

uint32_t RangeDecoder::decode_freq(uint32_t tot_freq) {
  uint32_t f = (code_ - low_) / (range_ /= tot_freq);
  return std::min(f, tot_freq - 1);
}

void RangeDecoder::decode_update(uint32_t cum_freq, uint32_t freq) {
  low_ += cum_freq * range_;
  range_ *= freq;
  while ((low_ ^ (low_ + range_)) < kRangeTop ||
         (range_ < kRangeBot && ((range_ = -low_ & (kRangeBot - 1)), true))) {
    code_ = code_ << 8 | next();
    low_ <<= 8;
    range_ <<= 8;
  }
}

uint8_t RangeDecoder::decode_byte_uniform() {
  uint32_t f = decode_freq(256);
  decode_update(f, 1);
  return static_cast<uint8_t>(f);
}

ChannelTable build_channel_table(const EntropyModel& model, int channel) {
  auto [lo, hi] = model.support(channel);
  int n = hi - lo + 1;
  std::vector<double> p(static_cast<size_t>(n) + 1);
  double acc = 0;
  for (int i = 0; i < n; ++i) {
    p[static_cast<size_t>(i)] = model.pmf(channel, lo + i);
    acc += p[static_cast<size_t>(i)];
  }
  p[static_cast<size_t>(n)] = std::max(1.0 - acc, kPmfFloor);  // escape mass
  double total = acc + p[static_cast<size_t>(n)];

  std::vector<uint32_t> counts(p.size());
  int64_t sum = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    counts[i] = static_cast<uint32_t>(
        std::max<long>(1, std::lround(p[i] / total * kFreqTotal)));
    sum += counts[i];
  }
  int64_t diff = static_cast<int64_t>(kFreqTotal) - sum;
  while (diff != 0) {
    // Push the correction onto the currently largest bucket; deterministic
    // because ties resolve to the lowest index.
    size_t best = 0;
    for (size_t i = 1; i < counts.size(); ++i)
      if (counts[i] > counts[best]) best = i;
    if (diff > 0) {
      counts[best] += static_cast<uint32_t>(diff);
      diff = 0;
    } else {
      uint32_t take = static_cast<uint32_t>(
          std::min<int64_t>(-diff, static_cast<int64_t>(counts[best]) - 1));
      if (take == 0) throw std::runtime_error("build_channel_table: cannot renormalize");
      counts[best] -= take;
      diff += take;
    }
  }

  ChannelTable t;
  t.lo = lo;
  t.cum.resize(counts.size() + 1);
  t.cum[0] = 0;
  for (size_t i = 0; i < counts.size(); ++i) t.cum[i + 1] = t.cum[i] + counts[i];
  return t;
}

void encode_value(RangeEncoder& enc, const ChannelTable& t, int v) {
  int n = t.symbols();
  int s = v - t.lo;
  if (s >= 0 && s < n) {
    enc.encode(t.cum[static_cast<size_t>(s)],
               t.cum[static_cast<size_t>(s) + 1] - t.cum[static_cast<size_t>(s)], kFreqTotal);
    return;
  }
  if (v < -32768 || v > 32767)
    throw std::out_of_range("encode_value: latent magnitude exceeds escape range");
  enc.encode(t.cum[static_cast<size_t>(n)],
             t.cum[static_cast<size_t>(n) + 1] - t.cum[static_cast<size_t>(n)], kFreqTotal);
  uint16_t raw = static_cast<uint16_t>(v + 32768);
  enc.encode_byte_uniform(static_cast<uint8_t>(raw >> 8));
  enc.encode_byte_uniform(static_cast<uint8_t>(raw & 0xFF));
}

int decode_value(RangeDecoder& dec, const ChannelTable& t) {
  uint32_t f = dec.decode_freq(kFreqTotal);
  // Largest s with cum[s] <= f.
  auto it = std::upper_bound(t.cum.begin(), t.cum.end(), f);
  size_t s = static_cast<size_t>(it - t.cum.begin()) - 1;
  dec.decode_update(t.cum[s], t.cum[s + 1] - t.cum[s]);
  int n = t.symbols();
  if (static_cast<int>(s) < n) return t.lo + static_cast<int>(s);
  uint16_t raw = static_cast<uint16_t>(dec.decode_byte_uniform() << 8);
  raw = static_cast<uint16_t>(raw | dec.decode_byte_uniform());
  return static_cast<int>(raw) - 32768;
}

}  // namespace slic
