#pragma once

#include <cstdint>
#include <vector>

#include "slic/entropy_model.hpp"

namespace slic {

// Carry-less 32-bit range coder (Subbotin variant). Frequencies are
// integers over a fixed total of kFreqTotal per decision.
constexpr uint32_t kRangeTop = 1u << 24;
constexpr uint32_t kRangeBot = 1u << 16;
constexpr uint32_t kFreqTotal = 1u << 16;

class RangeEncoder {
 public:
  void encode(uint32_t cum_freq, uint32_t freq, uint32_t tot_freq);
  void encode_byte_uniform(uint8_t b) { encode(b, 1, 256); }
  std::vector<uint8_t> finish();
  size_t bytes_pending() const { return out_.size(); }

 private:
  uint32_t low_ = 0, range_ = 0xFFFFFFFFu;
  std::vector<uint8_t> out_;
  bool finished_ = false;
};

class RangeDecoder {
 public:
  RangeDecoder(const uint8_t* data, size_t n);
  uint32_t decode_freq(uint32_t tot_freq);
  void decode_update(uint32_t cum_freq, uint32_t freq);
  uint8_t decode_byte_uniform();

 private:
  uint8_t next() { return p_ < end_ ? *p_++ : 0; }
  uint32_t low_ = 0, range_ = 0xFFFFFFFFu, code_ = 0;
  const uint8_t* p_;
  const uint8_t* end_;
};

// Quantized per-channel symbol table: values lo..lo+n-1 plus a final escape
// symbol; out-of-range values are escaped and sent as a raw offset u16.
struct ChannelTable {
  int lo = 0;
  std::vector<uint32_t> cum;  // size n+2, cum.front()=0, cum.back()=kFreqTotal
  int symbols() const { return static_cast<int>(cum.size()) - 2; }
};

ChannelTable build_channel_table(const EntropyModel& model, int channel);

void encode_value(RangeEncoder& enc, const ChannelTable& t, int v);
int decode_value(RangeDecoder& dec, const ChannelTable& t);

}  // namespace slic
