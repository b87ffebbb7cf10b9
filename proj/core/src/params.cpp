#include "slic/params.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "slic/digest.hpp"

namespace slic {

namespace {

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("param stream: truncated");
  return v;
}

}  // namespace

ParamBlock& ParamStore::add(const std::string& name, std::vector<int> shape) {
  if (index_.count(name)) throw std::invalid_argument("ParamStore: duplicate name " + name);
  int64_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("ParamStore: bad dim for " + name);
    n *= d;
  }
  blocks_.push_back(ParamBlock{name, std::move(shape), Arr::Zero(n), Arr::Zero(n)});
  index_[name] = &blocks_.back();
  return blocks_.back();
}

ParamBlock& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("ParamStore: no block " + name);
  return *it->second;
}

const ParamBlock& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("ParamStore: no block " + name);
  return *it->second;
}

int64_t ParamStore::total_size() const {
  int64_t n = 0;
  for (const auto& b : blocks_) n += b.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& b : blocks_) b.grad.setZero();
}

double ParamStore::grad_sq_norm() const {
  double s = 0;
  for (const auto& b : blocks_) s += b.grad.square().sum();
  return s;
}

std::array<uint8_t, 32> ParamStore::digest() const {
  Sha256 h;
  for (const auto& b : blocks_) {
    h.update(b.name.data(), b.name.size() + 1);  // include NUL as separator
    uint32_t nd = static_cast<uint32_t>(b.shape.size());
    h.update(&nd, sizeof(nd));
    for (int d : b.shape) {
      uint32_t u = static_cast<uint32_t>(d);
      h.update(&u, sizeof(u));
    }
    h.update(b.value.data(), sizeof(Scalar) * b.value.size());
  }
  return h.finish();
}

std::string ParamStore::digest_hex() const {
  auto d = digest();
  return hex_encode(d.data(), d.size());
}

void ParamStore::save(std::ostream& os) const {
  write_pod<uint32_t>(os, static_cast<uint32_t>(blocks_.size()));
  for (const auto& b : blocks_) {
    write_pod<uint16_t>(os, static_cast<uint16_t>(b.name.size()));
    os.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
    write_pod<uint8_t>(os, static_cast<uint8_t>(b.shape.size()));
    for (int d : b.shape) write_pod<int32_t>(os, d);
    os.write(reinterpret_cast<const char*>(b.value.data()),
             static_cast<std::streamsize>(sizeof(Scalar) * b.value.size()));
  }
  if (!os) throw std::runtime_error("ParamStore::save: write failed");
}

void ParamStore::load(std::istream& is) {
  uint32_t count = read_pod<uint32_t>(is);
  bool building = blocks_.empty();
  if (!building && count != blocks_.size())
    throw std::runtime_error("ParamStore::load: block count mismatch");
  for (uint32_t i = 0; i < count; ++i) {
    uint16_t nlen = read_pod<uint16_t>(is);
    std::string name(nlen, '\0');
    is.read(name.data(), nlen);
    uint8_t nd = read_pod<uint8_t>(is);
    std::vector<int> shape(nd);
    for (auto& d : shape) d = read_pod<int32_t>(is);
    ParamBlock* b;
    if (building) {
      b = &add(name, shape);
    } else {
      b = &blocks_[i];
      if (b->name != name || b->shape != shape)
        throw std::runtime_error("ParamStore::load: structure mismatch at " + name);
    }
    is.read(reinterpret_cast<char*>(b->value.data()),
            static_cast<std::streamsize>(sizeof(Scalar) * b->value.size()));
    if (!is) throw std::runtime_error("ParamStore::load: truncated values for " + name);
  }
}

Adam::Adam(ParamStore& store, double lr, double beta1, double beta2, double eps)
    : store_(&store), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
  for (const auto& b : store.blocks()) {
    m_.push_back(Arr::Zero(b.size()));
    v_.push_back(Arr::Zero(b.size()));
  }
}

void Adam::step() {
  if (m_.size() != store_->block_count())
    throw std::runtime_error("Adam: store structure changed after construction");
  ++t_;
  double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  size_t i = 0;
  for (auto& b : store_->blocks()) {
    m_[i] = b1_ * m_[i] + (1.0 - b1_) * b.grad;
    v_[i] = b2_ * v_[i] + (1.0 - b2_) * b.grad.square();
    b.value -= lr_ * (m_[i] / c1) / ((v_[i] / c2).sqrt() + eps_);
    ++i;
  }
}

void Adam::save(std::ostream& os) const {
  write_pod<int64_t>(os, t_);
  write_pod<uint32_t>(os, static_cast<uint32_t>(m_.size()));
  for (size_t i = 0; i < m_.size(); ++i) {
    write_pod<int64_t>(os, m_[i].size());
    os.write(reinterpret_cast<const char*>(m_[i].data()),
             static_cast<std::streamsize>(sizeof(Scalar) * m_[i].size()));
    os.write(reinterpret_cast<const char*>(v_[i].data()),
             static_cast<std::streamsize>(sizeof(Scalar) * v_[i].size()));
  }
  if (!os) throw std::runtime_error("Adam::save: write failed");
}

void Adam::load(std::istream& is) {
  t_ = read_pod<int64_t>(is);
  uint32_t count = read_pod<uint32_t>(is);
  if (count != m_.size()) throw std::runtime_error("Adam::load: block count mismatch");
  for (size_t i = 0; i < m_.size(); ++i) {
    int64_t n = read_pod<int64_t>(is);
    if (n != m_[i].size()) throw std::runtime_error("Adam::load: block size mismatch");
    is.read(reinterpret_cast<char*>(m_[i].data()),
            static_cast<std::streamsize>(sizeof(Scalar) * n));
    is.read(reinterpret_cast<char*>(v_[i].data()),
            static_cast<std::streamsize>(sizeof(Scalar) * n));
    if (!is) throw std::runtime_error("Adam::load: truncated");
  }
}

}  // namespace slic
