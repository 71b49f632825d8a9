#include "gpsl/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace gpsl::diff {

namespace {
constexpr double kEntropyFloor = 1e-300;
}

Tape::Tape(ParameterStore* store) : store_(store), kink_margin_(std::numeric_limits<double>::infinity()) {}

void Tape::reset() {
  nodes_.clear();
  vals_.clear();
  grads_.clear();
  extras_.clear();
  param_nodes_.clear();
  param_lookup_.clear();
  kink_margin_ = std::numeric_limits<double>::infinity();
}

Tape::Node& Tape::node(Var v) {
  if (!v.valid() || v.id >= static_cast<std::int32_t>(nodes_.size()))
    throw std::logic_error("Tape: invalid node handle");
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.id >= static_cast<std::int32_t>(nodes_.size()))
    throw std::logic_error("Tape: invalid node handle");
  return nodes_[static_cast<std::size_t>(v.id)];
}

void Tape::note_kink(double margin) { kink_margin_ = std::min(kink_margin_, margin); }

Var Tape::make_node(Op op, int rows, int cols, Var in0, Var in1) {
  Node n;
  n.op = op;
  n.rows = rows;
  n.cols = cols;
  const std::size_t sz = static_cast<std::size_t>(rows) * cols;
  n.val = static_cast<std::int32_t>(vals_.size());
  n.grd = static_cast<std::int32_t>(grads_.size());
  vals_.resize(vals_.size() + sz, 0.0);
  grads_.resize(grads_.size() + sz, 0.0);
  n.in0 = in0.id;
  n.in1 = in1.id;
  nodes_.push_back(n);
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

Var Tape::check_same_shape(Var a, Var b, const char* what) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.rows != nb.rows || na.cols != nb.cols)
    throw std::invalid_argument(std::string("Tape: shape mismatch in ") + what);
  return a;
}

Var Tape::constant(std::span<const double> v, int rows, int cols) {
  if (rows < 0) {
    rows = static_cast<int>(v.size());
    cols = 1;
  }
  if (static_cast<std::size_t>(rows) * cols != v.size())
    throw std::invalid_argument("Tape::constant: shape does not match data");
  Var out = make_node(Op::kConst, rows, cols);
  std::copy(v.begin(), v.end(), val_ptr(node(out)));
  return out;
}

Var Tape::constant_scalar(double v) { return constant(std::span<const double>(&v, 1)); }

Var Tape::param(const std::string& name) {
  if (!store_) throw std::logic_error("Tape::param: no parameter store bound");
  auto it = param_lookup_.find(name);
  if (it != param_lookup_.end()) return Var{it->second};
  Tensor& t = store_->at(name);
  Var out = make_node(Op::kParam, t.rows, t.cols);
  std::copy(t.value.begin(), t.value.end(), val_ptr(node(out)));
  param_nodes_.emplace_back(out.id, &t);
  param_lookup_.emplace(name, out.id);
  return out;
}

Var Tape::add(Var a, Var b) {
  check_same_shape(a, b, "add");
  Var out = make_node(Op::kAdd, rows(a), cols(a), a, b);
  const Node& n = node(out);
  const double* pa = val_ptr(node(a));
  const double* pb = val_ptr(node(b));
  double* po = val_ptr(n);
  for (int i = 0; i < size(out); ++i) po[i] = pa[i] + pb[i];
  return out;
}

Var Tape::sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  Var out = make_node(Op::kSub, rows(a), cols(a), a, b);
  const double* pa = val_ptr(node(a));
  const double* pb = val_ptr(node(b));
  double* po = val_ptr(node(out));
  for (int i = 0; i < size(out); ++i) po[i] = pa[i] - pb[i];
  return out;
}

Var Tape::mul(Var a, Var b) {
  check_same_shape(a, b, "mul");
  Var out = make_node(Op::kMul, rows(a), cols(a), a, b);
  const double* pa = val_ptr(node(a));
  const double* pb = val_ptr(node(b));
  double* po = val_ptr(node(out));
  for (int i = 0; i < size(out); ++i) po[i] = pa[i] * pb[i];
  return out;
}

Var Tape::div(Var a, Var b) {
  check_same_shape(a, b, "div");
  Var out = make_node(Op::kDiv, rows(a), cols(a), a, b);
  const double* pa = val_ptr(node(a));
  const double* pb = val_ptr(node(b));
  double* po = val_ptr(node(out));
  for (int i = 0; i < size(out); ++i) {
    note_kink(std::abs(pb[i]));
    po[i] = pa[i] / pb[i];
  }
  return out;
}

Var Tape::neg(Var a) {
  Var out = make_node(Op::kNeg, rows(a), cols(a), a);
  const double* pa = val_ptr(node(a));
  double* po = val_ptr(node(out));
  for (int i = 0; i < size(out); ++i) po[i] = -pa[i];
  return out;
}

Var Tape::scale(Var a, double c) {
  Var out = make_node(Op::kScale, rows(a), cols(a), a);
  node(out).aux = c;
  const double* pa = val_ptr(node(a));
  double* po = val_ptr(node(out));
  for (int i = 0; i < size(out); ++i) po[i] = c * pa[i];
  return out;
}

Var Tape::max2(Var a, Var b) {
  check_same_shape(a, b, "max2");
  Var out = make_node(Op::kMax2, rows(a), cols(a), a, b);
  const double* pa = val_ptr(node(a));
  const double* pb = val_ptr(node(b));
  double* po = val_ptr(node(out));
  for (int i = 0; i < size(out); ++i) {
    note_kink(std::abs(pa[i] - pb[i]));
    po[i] = std::max(pa[i], pb[i]);
  }
  return out;
}

Var Tape::relu(Var a) {
  Var out = make_node(Op::kRelu, rows(a), cols(a), a);
  const double* pa = val_ptr(node(a));
  double* po = val_ptr(node(out));
  for (int i = 0; i < size(out); ++i) {
    note_kink(std::abs(pa[i]));
    po[i] = pa[i] > 0.0 ? pa[i] : 0.0;
  }
  return out;
}

Var Tape::logistic(Var a) {
  Var out = make_node(Op::kLogistic, rows(a), cols(a), a);
  const double* pa = val_ptr(node(a));
  double* po = val_ptr(node(out));
  for (int i = 0; i < size(out); ++i) po[i] = 1.0 / (1.0 + std::exp(-pa[i]));
  return out;
}

Var Tape::exp(Var a) {
  Var out = make_node(Op::kExp, rows(a), cols(a), a);
  const double* pa = val_ptr(node(a));
  double* po = val_ptr(node(out));
  for (int i = 0; i < size(out); ++i) po[i] = std::exp(pa[i]);
  return out;
}

Var Tape::log(Var a) {
  Var out = make_node(Op::kLog, rows(a), cols(a), a);
  const double* pa = val_ptr(node(a));
  double* po = val_ptr(node(out));
  for (int i = 0; i < size(out); ++i) {
    note_kink(pa[i]);
    po[i] = std::log(pa[i]);
  }
  return out;
}

Var Tape::sqrt(Var a) {
  Var out = make_node(Op::kSqrt, rows(a), cols(a), a);
  const double* pa = val_ptr(node(a));
  double* po = val_ptr(node(out));
  for (int i = 0; i < size(out); ++i) {
    note_kink(pa[i]);
    po[i] = std::sqrt(pa[i]);
  }
  return out;
}

Var Tape::sin(Var a) {
  Var out = make_node(Op::kSin, rows(a), cols(a), a);
  const double* pa = val_ptr(node(a));
  double* po = val_ptr(node(out));
  for (int i = 0; i < size(out); ++i) po[i] = std::sin(pa[i]);
  return out;
}

Var Tape::cos(Var a) {
  Var out = make_node(Op::kCos, rows(a), cols(a), a);
  const double* pa = val_ptr(node(a));
  double* po = val_ptr(node(out));
  for (int i = 0; i < size(out); ++i) po[i] = std::cos(pa[i]);
  return out;
}

Var Tape::abs(Var a) {
  Var out = make_node(Op::kAbs, rows(a), cols(a), a);
  const double* pa = val_ptr(node(a));
  double* po = val_ptr(node(out));
  for (int i = 0; i < size(out); ++i) {
    note_kink(std::abs(pa[i]));
    po[i] = std::abs(pa[i]);
  }
  return out;
}

Var Tape::matvec(Var w, Var x) {
  const Node& nw = node(w);
  const Node& nx = node(x);
  if (nx.cols != 1 || nw.cols != nx.rows)
    throw std::invalid_argument("Tape::matvec: dimension mismatch");
  Var out = make_node(Op::kMatVec, nw.rows, 1, w, x);
  const double* pw = val_ptr(node(w));
  const double* px = val_ptr(node(x));
  double* po = val_ptr(node(out));
  const int r = nw.rows, c = nw.cols;
  for (int i = 0; i < r; ++i) {
    double acc = 0.0;
    const double* row = pw + static_cast<std::size_t>(i) * c;
    for (int j = 0; j < c; ++j) acc += row[j] * px[j];
    po[i] = acc;
  }
  return out;
}

Var Tape::sum(Var a) {
  Var out = make_node(Op::kSum, 1, 1, a);
  const double* pa = val_ptr(node(a));
  double acc = 0.0;
  for (int i = 0; i < size(a); ++i) acc += pa[i];
  *val_ptr(node(out)) = acc;
  return out;
}

Var Tape::dot(Var a, Var b) {
  check_same_shape(a, b, "dot");
  Var out = make_node(Op::kDot, 1, 1, a, b);
  const double* pa = val_ptr(node(a));
  const double* pb = val_ptr(node(b));
  double acc = 0.0;
  for (int i = 0; i < size(a); ++i) acc += pa[i] * pb[i];
  *val_ptr(node(out)) = acc;
  return out;
}

Var Tape::max_reduce(Var a) {
  Var out = make_node(Op::kMaxReduce, 1, 1, a);
  const double* pa = val_ptr(node(a));
  const int n = size(a);
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (pa[i] > pa[best]) best = i;
  if (n >= 2) {
    double second = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      if (i != best) second = std::max(second, pa[i]);
    note_kink(pa[best] - second);
  }
  node(out).iaux0 = best;
  *val_ptr(node(out)) = pa[best];
  return out;
}

Var Tape::concat(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.cols != 1 || nb.cols != 1) throw std::invalid_argument("Tape::concat: vectors only");
  Var out = make_node(Op::kConcat, na.rows + nb.rows, 1, a, b);
  double* po = val_ptr(node(out));
  std::copy(val_ptr(node(a)), val_ptr(node(a)) + na.rows, po);
  std::copy(val_ptr(node(b)), val_ptr(node(b)) + nb.rows, po + na.rows);
  return out;
}

Var Tape::gather(Var a, int index) {
  if (index < 0 || index >= size(a)) throw std::invalid_argument("Tape::gather: index out of range");
  Var out = make_node(Op::kGather, 1, 1, a);
  node(out).iaux0 = index;
  *val_ptr(node(out)) = val_ptr(node(a))[index];
  return out;
}

Var Tape::pack(std::span<const Var> scalars) {
  if (scalars.empty()) throw std::invalid_argument("Tape::pack: empty input");
  for (Var s : scalars)
    if (size(s) != 1) throw std::invalid_argument("Tape::pack: inputs must be scalars");
  const std::int32_t xb = static_cast<std::int32_t>(extras_.size());
  for (Var s : scalars) extras_.push_back(s.id);
  Var out = make_node(Op::kPack, static_cast<int>(scalars.size()), 1);
  node(out).xb = xb;
  node(out).xn = static_cast<std::int32_t>(scalars.size());
  double* po = val_ptr(node(out));
  for (std::size_t i = 0; i < scalars.size(); ++i) po[i] = *val_ptr(node(scalars[i]));
  return out;
}

Var Tape::softmax(Var a) {
  if (cols(a) != 1) throw std::invalid_argument("Tape::softmax: vector expected");
  Var out = make_node(Op::kSoftmax, rows(a), 1, a);
  const double* pa = val_ptr(node(a));
  double* po = val_ptr(node(out));
  const int n = size(a);
  double mx = pa[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, pa[i]);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    po[i] = std::exp(pa[i] - mx);
    total += po[i];
  }
  for (int i = 0; i < n; ++i) po[i] /= total;
  return out;
}

Var Tape::entropy(Var w) {
  if (cols(w) != 1) throw std::invalid_argument("Tape::entropy: vector expected");
  Var out = make_node(Op::kEntropy, 1, 1, w);
  const double* pw = val_ptr(node(w));
  double acc = 0.0;
  for (int i = 0; i < size(w); ++i)
    if (pw[i] > kEntropyFloor) acc -= pw[i] * std::log(pw[i]);
  *val_ptr(node(out)) = acc;
  return out;
}

Var Tape::weighted_sum(Var w, std::span<const Var> vs) {
  if (cols(w) != 1 || rows(w) != static_cast<int>(vs.size()))
    throw std::invalid_argument("Tape::weighted_sum: weight count mismatch");
  if (vs.empty()) throw std::invalid_argument("Tape::weighted_sum: no inputs");
  const int n = size(vs[0]);
  for (Var v : vs)
    if (size(v) != n || cols(v) != 1) throw std::invalid_argument("Tape::weighted_sum: shape mismatch");
  const std::int32_t xb = static_cast<std::int32_t>(extras_.size());
  for (Var v : vs) extras_.push_back(v.id);
  Var out = make_node(Op::kWeightedSum, n, 1, w);
  node(out).xb = xb;
  node(out).xn = static_cast<std::int32_t>(vs.size());
  const double* pw = val_ptr(node(w));
  double* po = val_ptr(node(out));
  for (std::size_t g = 0; g < vs.size(); ++g) {
    const double* pv = val_ptr(node(vs[g]));
    for (int i = 0; i < n; ++i) po[i] += pw[g] * pv[i];
  }
  return out;
}

Var Tape::givens_t(Var v, Var angle, int i, int j) {
  const Node& nv = node(v);
  if (nv.cols != 1) throw std::invalid_argument("Tape::givens_t: vector expected");
  if (size(angle) != 1) throw std::invalid_argument("Tape::givens_t: angle must be scalar");
  if (i < 0 || j < 0 || i >= nv.rows || j >= nv.rows || i == j)
    throw std::invalid_argument("Tape::givens_t: bad axis pair");
  Var out = make_node(Op::kGivensT, nv.rows, 1, v, angle);
  node(out).iaux0 = i;
  node(out).iaux1 = j;
  const double th = *val_ptr(node(angle));
  const double c = std::cos(th), s = std::sin(th);
  const double* pv = val_ptr(node(v));
  double* po = val_ptr(node(out));
  std::copy(pv, pv + nv.rows, po);
  po[i] = c * pv[i] - s * pv[j];
  po[j] = s * pv[i] + c * pv[j];
  return out;
}

std::span<const double> Tape::value(Var v) const {
  const Node& n = node(v);
  return {val_ptr(n), static_cast<std::size_t>(n.rows) * n.cols};
}

std::span<const double> Tape::grad(Var v) const {
  const Node& n = node(v);
  return {grd_ptr(n), static_cast<std::size_t>(n.rows) * n.cols};
}

double Tape::scalar(Var v) const {
  if (size(v) != 1) throw std::logic_error("Tape::scalar: node is not a scalar");
  return *val_ptr(node(v));
}

int Tape::rows(Var v) const { return node(v).rows; }
int Tape::cols(Var v) const { return node(v).cols; }
int Tape::size(Var v) const {
  const Node& n = node(v);
  return n.rows * n.cols;
}

void Tape::backward(Var seed) {
  if (nodes_.empty()) throw std::logic_error("Tape::backward: no recorded computation");
  if (!seed.valid() || seed.id >= static_cast<std::int32_t>(nodes_.size()))
    throw std::logic_error("Tape::backward: invalid seed");
  if (size(seed) != 1) throw std::logic_error("Tape::backward: seed must be a scalar");

  std::fill(grads_.begin(), grads_.end(), 0.0);
  grads_[static_cast<std::size_t>(node(seed).grd)] = 1.0;

  for (std::int32_t id = seed.id; id >= 0; --id) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    const int sz = n.rows * n.cols;
    const double* g = grd_ptr(n);
    const double* o = val_ptr(n);
    switch (n.op) {
      case Op::kConst:
      case Op::kParam:
        break;
      case Op::kAdd: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        double* g1 = grd_ptr(nodes_[n.in1]);
        for (int i = 0; i < sz; ++i) {
          g0[i] += g[i];
          g1[i] += g[i];
        }
        break;
      }
      case Op::kSub: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        double* g1 = grd_ptr(nodes_[n.in1]);
        for (int i = 0; i < sz; ++i) {
          g0[i] += g[i];
          g1[i] -= g[i];
        }
        break;
      }
      case Op::kMul: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        double* g1 = grd_ptr(nodes_[n.in1]);
        const double* v0 = val_ptr(nodes_[n.in0]);
        const double* v1 = val_ptr(nodes_[n.in1]);
        for (int i = 0; i < sz; ++i) {
          g0[i] += g[i] * v1[i];
          g1[i] += g[i] * v0[i];
        }
        break;
      }
      case Op::kDiv: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        double* g1 = grd_ptr(nodes_[n.in1]);
        const double* v1 = val_ptr(nodes_[n.in1]);
        for (int i = 0; i < sz; ++i) {
          g0[i] += g[i] / v1[i];
          g1[i] -= g[i] * o[i] / v1[i];
        }
        break;
      }
      case Op::kNeg: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        for (int i = 0; i < sz; ++i) g0[i] -= g[i];
        break;
      }
      case Op::kScale: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        for (int i = 0; i < sz; ++i) g0[i] += n.aux * g[i];
        break;
      }
      case Op::kMax2: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        double* g1 = grd_ptr(nodes_[n.in1]);
        const double* v0 = val_ptr(nodes_[n.in0]);
        const double* v1 = val_ptr(nodes_[n.in1]);
        for (int i = 0; i < sz; ++i) {
          if (v0[i] >= v1[i])
            g0[i] += g[i];
          else
            g1[i] += g[i];
        }
        break;
      }
      case Op::kRelu: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        const double* v0 = val_ptr(nodes_[n.in0]);
        for (int i = 0; i < sz; ++i)
          if (v0[i] > 0.0) g0[i] += g[i];
        break;
      }
      case Op::kLogistic: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        for (int i = 0; i < sz; ++i) g0[i] += g[i] * o[i] * (1.0 - o[i]);
        break;
      }
      case Op::kExp: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        for (int i = 0; i < sz; ++i) g0[i] += g[i] * o[i];
        break;
      }
      case Op::kLog: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        const double* v0 = val_ptr(nodes_[n.in0]);
        for (int i = 0; i < sz; ++i) g0[i] += g[i] / v0[i];
        break;
      }
      case Op::kSqrt: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        for (int i = 0; i < sz; ++i) g0[i] += g[i] * 0.5 / o[i];
        break;
      }
      case Op::kSin: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        const double* v0 = val_ptr(nodes_[n.in0]);
        for (int i = 0; i < sz; ++i) g0[i] += g[i] * std::cos(v0[i]);
        break;
      }
      case Op::kCos: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        const double* v0 = val_ptr(nodes_[n.in0]);
        for (int i = 0; i < sz; ++i) g0[i] -= g[i] * std::sin(v0[i]);
        break;
      }
      case Op::kAbs: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        const double* v0 = val_ptr(nodes_[n.in0]);
        for (int i = 0; i < sz; ++i) {
          if (v0[i] > 0.0)
            g0[i] += g[i];
          else if (v0[i] < 0.0)
            g0[i] -= g[i];
        }
        break;
      }
      case Op::kMatVec: {
        const Node& nw = nodes_[n.in0];
        const Node& nx = nodes_[n.in1];
        double* gw = grd_ptr(nw);
        double* gx = grd_ptr(nx);
        const double* vw = val_ptr(nw);
        const double* vx = val_ptr(nx);
        const int r = nw.rows, c = nw.cols;
        for (int i = 0; i < r; ++i) {
          const double gi = g[i];
          if (gi == 0.0) continue;
          double* gw_row = gw + static_cast<std::size_t>(i) * c;
          const double* vw_row = vw + static_cast<std::size_t>(i) * c;
          for (int j = 0; j < c; ++j) {
            gw_row[j] += gi * vx[j];
            gx[j] += vw_row[j] * gi;
          }
        }
        break;
      }
      case Op::kSum: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        const int in_sz = nodes_[n.in0].rows * nodes_[n.in0].cols;
        for (int i = 0; i < in_sz; ++i) g0[i] += g[0];
        break;
      }
      case Op::kDot: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        double* g1 = grd_ptr(nodes_[n.in1]);
        const double* v0 = val_ptr(nodes_[n.in0]);
        const double* v1 = val_ptr(nodes_[n.in1]);
        const int in_sz = nodes_[n.in0].rows * nodes_[n.in0].cols;
        for (int i = 0; i < in_sz; ++i) {
          g0[i] += g[0] * v1[i];
          g1[i] += g[0] * v0[i];
        }
        break;
      }
      case Op::kMaxReduce: {
        grd_ptr(nodes_[n.in0])[n.iaux0] += g[0];
        break;
      }
      case Op::kConcat: {
        const Node& n0 = nodes_[n.in0];
        const Node& n1 = nodes_[n.in1];
        double* g0 = grd_ptr(n0);
        double* g1 = grd_ptr(n1);
        for (int i = 0; i < n0.rows; ++i) g0[i] += g[i];
        for (int i = 0; i < n1.rows; ++i) g1[i] += g[n0.rows + i];
        break;
      }
      case Op::kGather: {
        grd_ptr(nodes_[n.in0])[n.iaux0] += g[0];
        break;
      }
      case Op::kPack: {
        for (std::int32_t i = 0; i < n.xn; ++i) {
          const Node& src = nodes_[extras_[static_cast<std::size_t>(n.xb + i)]];
          *grd_ptr(src) += g[i];
        }
        break;
      }
      case Op::kSoftmax: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        double dotgw = 0.0;
        for (int i = 0; i < sz; ++i) dotgw += g[i] * o[i];
        for (int i = 0; i < sz; ++i) g0[i] += o[i] * (g[i] - dotgw);
        break;
      }
      case Op::kEntropy: {
        double* g0 = grd_ptr(nodes_[n.in0]);
        const double* v0 = val_ptr(nodes_[n.in0]);
        const int in_sz = nodes_[n.in0].rows * nodes_[n.in0].cols;
        for (int i = 0; i < in_sz; ++i)
          if (v0[i] > kEntropyFloor) g0[i] -= g[0] * (std::log(v0[i]) + 1.0);
        break;
      }
      case Op::kWeightedSum: {
        const Node& nw = nodes_[n.in0];
        double* gw = grd_ptr(nw);
        const double* vw = val_ptr(nw);
        for (std::int32_t gidx = 0; gidx < n.xn; ++gidx) {
          const Node& src = nodes_[extras_[static_cast<std::size_t>(n.xb + gidx)]];
          double* gv = grd_ptr(src);
          const double* vv = val_ptr(src);
          double acc = 0.0;
          for (int i = 0; i < sz; ++i) {
            acc += g[i] * vv[i];
            gv[i] += vw[gidx] * g[i];
          }
          gw[gidx] += acc;
        }
        break;
      }
      case Op::kGivensT: {
        const Node& nv = nodes_[n.in0];
        const Node& na = nodes_[n.in1];
        double* gv = grd_ptr(nv);
        double* ga = grd_ptr(na);
        const double* vv = val_ptr(nv);
        const double th = *val_ptr(na);
        const double c = std::cos(th), s = std::sin(th);
        const int i = n.iaux0, j = n.iaux1;
        for (int q = 0; q < sz; ++q)
          if (q != i && q != j) gv[q] += g[q];
        gv[i] += c * g[i] + s * g[j];
        gv[j] += -s * g[i] + c * g[j];
        ga[0] += g[i] * (-s * vv[i] - c * vv[j]) + g[j] * (c * vv[i] - s * vv[j]);
        break;
      }
    }
  }

  for (const auto& [id, tensor] : param_nodes_) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    const double* g = grd_ptr(n);
    for (std::size_t i = 0; i < tensor->grad.size(); ++i) tensor->grad[i] += g[i];
  }
}

}  // namespace gpsl::diff
