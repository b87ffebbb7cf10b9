#include "slic/entropy_model.hpp"

#include <cmath>

namespace slic {

namespace {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Per-channel parameters with the softplus/tanh reparameterizations applied
// once, plus the factors the backward pass needs.
struct Pack {
  Vec3 sph1, b1, ta1, b2, ta2, b3, ta3, sph4;
  Mat3 sph2, sph3;
  double b4 = 0;
  Vec3 sg1, sg4, ca1, ca2, ca3;
  Mat3 sg2, sg3;
};

struct Inter {
  Vec3 z1, t1, u1, z2, t2, u2, z3, t3, u3;
  double z4 = 0, F = 0;
};

double eval_cdf(const Pack& p, double x, Inter& it) {
  it.z1 = p.sph1 * x + p.b1;
  it.t1 = it.z1.array().tanh();
  it.u1 = it.z1 + p.ta1.cwiseProduct(it.t1);
  it.z2 = p.sph2 * it.u1 + p.b2;
  it.t2 = it.z2.array().tanh();
  it.u2 = it.z2 + p.ta2.cwiseProduct(it.t2);
  it.z3 = p.sph3 * it.u2 + p.b3;
  it.t3 = it.z3.array().tanh();
  it.u3 = it.z3 + p.ta3.cwiseProduct(it.t3);
  it.z4 = p.sph4.dot(it.u3) + p.b4;
  it.F = sigmoid(it.z4);
  return it.F;
}

// Gradient accumulators for one channel.
struct ChanGrad {
  Vec3 dh1 = Vec3::Zero(), db1 = Vec3::Zero(), da1 = Vec3::Zero();
  Mat3 dh2 = Mat3::Zero(), dh3 = Mat3::Zero();
  Vec3 db2 = Vec3::Zero(), da2 = Vec3::Zero(), db3 = Vec3::Zero(), da3 = Vec3::Zero();
  Vec3 dh4 = Vec3::Zero();
  double db4 = 0;
};

// Pulls w = dL/dF back through the chain; returns dL/dx.
double backprop_cdf(const Pack& p, const Inter& it, double x, double w, ChanGrad& g) {
  double dz4 = w * it.F * (1.0 - it.F);
  g.db4 += dz4;
  g.dh4 += dz4 * p.sg4.cwiseProduct(it.u3);
  Vec3 du3 = dz4 * p.sph4;

  Vec3 dz3 = (du3.array() * (1.0 + p.ta3.array() * (1.0 - it.t3.array().square()))).matrix();
  g.da3 += (du3.array() * it.t3.array() * p.ca3.array()).matrix();
  g.db3 += dz3;
  g.dh3 += (dz3 * it.u2.transpose()).cwiseProduct(p.sg3);
  Vec3 du2 = p.sph3.transpose() * dz3;

  Vec3 dz2 = (du2.array() * (1.0 + p.ta2.array() * (1.0 - it.t2.array().square()))).matrix();
  g.da2 += (du2.array() * it.t2.array() * p.ca2.array()).matrix();
  g.db2 += dz2;
  g.dh2 += (dz2 * it.u1.transpose()).cwiseProduct(p.sg2);
  Vec3 du1 = p.sph2.transpose() * dz2;

  Vec3 dz1 = (du1.array() * (1.0 + p.ta1.array() * (1.0 - it.t1.array().square()))).matrix();
  g.da1 += (du1.array() * it.t1.array() * p.ca1.array()).matrix();
  g.db1 += dz1;
  g.dh1 += x * dz1.cwiseProduct(p.sg1);
  return dz1.dot(p.sph1);
}

Pack make_pack(int c, const Arr& h1, const Arr& b1, const Arr& a1, const Arr& h2, const Arr& b2,
               const Arr& a2, const Arr& h3, const Arr& b3, const Arr& a3, const Arr& h4,
               const Arr& b4) {
  Pack p;
  for (int j = 0; j < 3; ++j) {
    p.sph1[j] = softplus(h1[c * 3 + j]);
    p.sg1[j] = sigmoid(h1[c * 3 + j]);
    p.b1[j] = b1[c * 3 + j];
    p.ta1[j] = std::tanh(a1[c * 3 + j]);
    p.ca1[j] = 1.0 - p.ta1[j] * p.ta1[j];
    p.b2[j] = b2[c * 3 + j];
    p.ta2[j] = std::tanh(a2[c * 3 + j]);
    p.ca2[j] = 1.0 - p.ta2[j] * p.ta2[j];
    p.b3[j] = b3[c * 3 + j];
    p.ta3[j] = std::tanh(a3[c * 3 + j]);
    p.ca3[j] = 1.0 - p.ta3[j] * p.ta3[j];
    p.sph4[j] = softplus(h4[c * 3 + j]);
    p.sg4[j] = sigmoid(h4[c * 3 + j]);
    for (int k = 0; k < 3; ++k) {
      p.sph2(j, k) = softplus(h2[(c * 3 + j) * 3 + k]);
      p.sg2(j, k) = sigmoid(h2[(c * 3 + j) * 3 + k]);
      p.sph3(j, k) = softplus(h3[(c * 3 + j) * 3 + k]);
      p.sg3(j, k) = sigmoid(h3[(c * 3 + j) * 3 + k]);
    }
  }
  p.b4 = b4[c];
  return p;
}

constexpr double kLn2 = 0.6931471805599453;

}  // namespace

LearnedEntropyModel::LearnedEntropyModel(ParamStore& store, const std::string& prefix,
                                         int channels)
    : channels_(channels) {
  auto name = [&prefix](const char* s) { return prefix + "." + s; };
  h1_ = &store.add(name("h1"), {channels, 3});
  b1_ = &store.add(name("b1"), {channels, 3});
  a1_ = &store.add(name("a1"), {channels, 3});
  h2_ = &store.add(name("h2"), {channels, 3, 3});
  b2_ = &store.add(name("b2"), {channels, 3});
  a2_ = &store.add(name("a2"), {channels, 3});
  h3_ = &store.add(name("h3"), {channels, 3, 3});
  b3_ = &store.add(name("b3"), {channels, 3});
  a3_ = &store.add(name("a3"), {channels, 3});
  h4_ = &store.add(name("h4"), {channels, 3});
  b4_ = &store.add(name("b4"), {channels, 1});
}

void LearnedEntropyModel::init_params(std::mt19937_64& rng) {
  // softplus(log(expm1(q))) == q, so these constants set the initial layer
  // gains directly; the resulting CDF spreads over a few tens of units.
  double scale = std::pow(10.0, 0.25);
  double hidden = std::log(std::expm1(1.0 / (scale * 3.0)));
  double last = std::log(std::expm1(1.0 / scale));
  h1_->value.setConstant(hidden);
  h2_->value.setConstant(hidden);
  h3_->value.setConstant(hidden);
  h4_->value.setConstant(last);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (Arr* b : {&b1_->value, &b2_->value, &b3_->value, &b4_->value})
    for (int64_t i = 0; i < b->size(); ++i) (*b)[i] = u(rng);
  a1_->value.setZero();
  a2_->value.setZero();
  a3_->value.setZero();
}

double LearnedEntropyModel::cdf(int channel, double x) const {
  Pack p = make_pack(channel, h1_->value, b1_->value, a1_->value, h2_->value, b2_->value,
                     a2_->value, h3_->value, b3_->value, a3_->value, h4_->value, b4_->value);
  Inter it;
  return eval_cdf(p, x, it);
}

double LearnedEntropyModel::raw_pmf(int channel, int v) const {
  return std::max(cdf(channel, v + 0.5) - cdf(channel, v - 0.5), 0.0);
}

std::pair<int, int> LearnedEntropyModel::support(int channel) const {
  constexpr int kLoLim = -32760, kHiLim = 32760;
  int a = kLoLim, b = kHiLim;
  while (a < b) {  // first v with meaningful mass at or below it
    int m = a + (b - a) / 2;
    if (cdf(channel, m + 0.5) > kPmfFloor)
      b = m;
    else
      a = m + 1;
  }
  int lo = a;
  a = lo;
  b = kHiLim;
  while (a < b) {  // last v with meaningful mass at or above it
    int m = a + (b - a + 1) / 2;
    if (cdf(channel, m - 0.5) < 1.0 - kPmfFloor)
      a = m;
    else
      b = m - 1;
  }
  int hi = std::max(a, lo);
  constexpr int kMaxWidth = 4096;
  if (hi - lo + 1 > kMaxWidth) {
    a = lo;
    b = hi;
    while (a < b) {  // median
      int m = a + (b - a) / 2;
      if (cdf(channel, m) >= 0.5)
        b = m;
      else
        a = m + 1;
    }
    lo = a - kMaxWidth / 2;
    hi = lo + kMaxWidth - 1;
  }
  return {lo, hi};
}

EntropyParamVars LearnedEntropyModel::vars(Tape& tape, bool trainable) const {
  auto mk = [&tape, trainable](ParamBlock* b) {
    return tape.param(b->shape, b->value, &b->grad, trainable);
  };
  return EntropyParamVars{mk(h1_), mk(b1_), mk(a1_), mk(h2_), mk(b2_), mk(a2_),
                          mk(h3_), mk(b3_), mk(a3_), mk(h4_), mk(b4_)};
}

Var LearnedEntropyModel::rate_bits(Var y, const EntropyParamVars& ep) const {
  if (y.shape().size() != 3 || y.dim(0) != channels_)
    throw std::invalid_argument("rate_bits: latent shape mismatch");
  int64_t plane = static_cast<int64_t>(y.dim(1)) * y.dim(2);
  Node* pn[11] = {ep.h1.n, ep.b1.n, ep.a1.n, ep.h2.n, ep.b2.n, ep.a2.n,
                  ep.h3.n, ep.b3.n, ep.a3.n, ep.h4.n, ep.b4.n};
  bool needs = y.n->needs_grad;
  for (Node* n : pn) needs = needs || n->needs_grad;
  Var out = y.tape->make({1}, needs);

  double bits = 0;
  for (int c = 0; c < channels_; ++c) {
    Pack p = make_pack(c, pn[0]->v(), pn[1]->v(), pn[2]->v(), pn[3]->v(), pn[4]->v(), pn[5]->v(),
                       pn[6]->v(), pn[7]->v(), pn[8]->v(), pn[9]->v(), pn[10]->v());
    Inter it;
    for (int64_t i = 0; i < plane; ++i) {
      double x = y.v()[c * plane + i];
      double pr = eval_cdf(p, x + 0.5, it) - eval_cdf(p, x - 0.5, it);
      bits -= std::log2(std::max(pr, kPmfFloor));
    }
  }
  out.n->vown = Arr::Constant(1, bits);

  if (out.n->needs_grad) {
    Node* yn = y.n;
    Node* on = out.n;
    int ch = channels_;
    std::array<Node*, 11> pnode;
    std::copy(pn, pn + 11, pnode.begin());
    on->backprop = [yn, on, pnode, ch, plane] {
      double g = on->grad[0];
      if (yn->needs_grad) yn->ensure_grad();
      for (Node* n : pnode)
        if (n->needs_grad) n->ensure_grad();
      for (int c = 0; c < ch; ++c) {
        Pack p = make_pack(c, pnode[0]->v(), pnode[1]->v(), pnode[2]->v(), pnode[3]->v(),
                           pnode[4]->v(), pnode[5]->v(), pnode[6]->v(), pnode[7]->v(),
                           pnode[8]->v(), pnode[9]->v(), pnode[10]->v());
        ChanGrad cg;
        for (int64_t i = 0; i < plane; ++i) {
          double x = yn->v()[c * plane + i];
          Inter ip, im;
          double pr = eval_cdf(p, x + 0.5, ip) - eval_cdf(p, x - 0.5, im);
          if (pr <= kPmfFloor) continue;  // clamped region: no gradient
          double w = -g / (pr * kLn2);
          // Each call carries its signed weight, so both x-contributions add.
          double dx = backprop_cdf(p, ip, x + 0.5, w, cg) + backprop_cdf(p, im, x - 0.5, -w, cg);
          if (yn->needs_grad) yn->grad[c * plane + i] += dx;
        }
        auto flush3 = [](Node* n, int c2, const Vec3& v) {
          if (!n->needs_grad) return;
          for (int j = 0; j < 3; ++j) n->grad[c2 * 3 + j] += v[j];
        };
        auto flush9 = [](Node* n, int c2, const Mat3& m) {
          if (!n->needs_grad) return;
          for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) n->grad[(c2 * 3 + j) * 3 + k] += m(j, k);
        };
        flush3(pnode[0], c, cg.dh1);
        flush3(pnode[1], c, cg.db1);
        flush3(pnode[2], c, cg.da1);
        flush9(pnode[3], c, cg.dh2);
        flush3(pnode[4], c, cg.db2);
        flush3(pnode[5], c, cg.da2);
        flush9(pnode[6], c, cg.dh3);
        flush3(pnode[7], c, cg.db3);
        flush3(pnode[8], c, cg.da3);
        flush3(pnode[9], c, cg.dh4);
        if (pnode[10]->needs_grad) pnode[10]->grad[c] += cg.db4;
      }
    };
  }
  return out;
}

TableEntropyModel::TableEntropyModel(std::vector<std::vector<double>> pmfs, std::vector<int> lo)
    : pmfs_(std::move(pmfs)), lo_(std::move(lo)) {
  if (pmfs_.size() != lo_.size() || pmfs_.empty())
    throw std::invalid_argument("TableEntropyModel: pmf/offset mismatch");
  for (const auto& t : pmfs_)
    if (t.empty()) throw std::invalid_argument("TableEntropyModel: empty pmf");
}

double TableEntropyModel::raw_pmf(int channel, int v) const {
  const auto& t = pmfs_.at(static_cast<size_t>(channel));
  int64_t idx = static_cast<int64_t>(v) - lo_[static_cast<size_t>(channel)];
  if (idx < 0 || idx >= static_cast<int64_t>(t.size())) return 0.0;
  return t[static_cast<size_t>(idx)];
}

std::pair<int, int> TableEntropyModel::support(int channel) const {
  int lo = lo_.at(static_cast<size_t>(channel));
  return {lo, lo + static_cast<int>(pmfs_[static_cast<size_t>(channel)].size()) - 1};
}

}  // namespace slic
