#pragma once

#include <deque>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "slic/tensor.hpp"

namespace slic {

// One named trainable tensor. `grad` is the sink that Tape::backward flushes
// into; it stays allocated (and zeroed between steps) for the block's lifetime.
struct ParamBlock {
  std::string name;
  std::vector<int> shape;
  Arr value;
  Arr grad;

  int64_t size() const { return value.size(); }
};

// Ordered collection of ParamBlocks with stable addresses. Order matters: the
// digest and the serialized layout follow insertion order.
class ParamStore {
 public:
  ParamBlock& add(const std::string& name, std::vector<int> shape);
  ParamBlock& at(const std::string& name);
  const ParamBlock& at(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) != 0; }

  std::deque<ParamBlock>& blocks() { return blocks_; }
  const std::deque<ParamBlock>& blocks() const { return blocks_; }
  size_t block_count() const { return blocks_.size(); }
  int64_t total_size() const;

  void zero_grad();
  double grad_sq_norm() const;

  // SHA-256 over names, shapes and raw values, in insertion order.
  std::string digest_hex() const;
  std::array<uint8_t, 32> digest() const;

  // Binary round-trip. `load` requires the stream's structure to match this
  // store exactly when non-empty, and builds the blocks when empty.
  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  std::deque<ParamBlock> blocks_;
  std::unordered_map<std::string, ParamBlock*> index_;
};

// Adam with bias correction; state is per-store and serializable so training
// can resume exactly.
class Adam {
 public:
  Adam(ParamStore& store, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void step();
  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  int64_t steps() const { return t_; }

  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  ParamStore* store_;
  double lr_, b1_, b2_, eps_;
  int64_t t_ = 0;
  std::vector<Arr> m_, v_;
};

}  // namespace slic
