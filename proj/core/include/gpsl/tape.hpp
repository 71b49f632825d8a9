#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gpsl/tensor.hpp"

namespace gpsl::diff {

/// Handle to a node on the tape.
struct Var {
  std::int32_t id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode tape over dense value nodes (scalars, vectors, matrices).
/// Forward values are computed eagerly as nodes are created; backward()
/// walks the nodes in reverse creation order, which is a topological order
/// by construction, and flushes gradients into the bound ParameterStore.
///
/// Value and gradient storage lives in two arenas that are reused across
/// reset() calls, so a training loop does not allocate per step once the
/// arenas have grown to their working size.
class Tape {
 public:
  explicit Tape(ParameterStore* store = nullptr);

  /// Drops all nodes but keeps arena capacity.
  void reset();

  // Leaves.
  Var constant(std::span<const double> v, int rows = -1, int cols = 1);
  Var constant_scalar(double v);
  /// Parameter leaf bound to the store; memoized per name so repeated use
  /// within one tape accumulates gradients into a single node.
  Var param(const std::string& name);

  // Elementwise (shapes must match).
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var neg(Var a);
  Var scale(Var a, double c);
  Var max2(Var a, Var b);

  // Unary elementwise.
  Var relu(Var a);
  Var logistic(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var sqrt(Var a);
  Var sin(Var a);
  Var cos(Var a);
  Var abs(Var a);

  /// y = W x with W an r-by-c matrix node and x a length-c vector node.
  Var matvec(Var w, Var x);

  // Reductions and structure.
  Var sum(Var a);
  Var dot(Var a, Var b);
  Var max_reduce(Var a);
  Var concat(Var a, Var b);
  Var gather(Var a, int index);
  Var pack(std::span<const Var> scalars);

  /// Normalized exponentials of a vector (stabilized by the max shift).
  Var softmax(Var a);
  /// -sum(w * ln w) with 0 ln 0 := 0.
  Var entropy(Var w);
  /// sum_g w[g] * vs[g] for scalar weights w (vector node) and equal-length
  /// vector nodes vs.
  Var weighted_sum(Var w, std::span<const Var> vs);
  /// Applies the transpose of the planar rotation R(angle) acting on the
  /// (i, j) coordinate pair, with R_ii = R_jj = cos, R_ij = sin, R_ji = -sin.
  Var givens_t(Var v, Var angle, int i, int j);

  // Access.
  std::span<const double> value(Var v) const;
  std::span<const double> grad(Var v) const;
  double scalar(Var v) const;
  int rows(Var v) const;
  int cols(Var v) const;
  int size(Var v) const;
  std::size_t node_count() const { return nodes_.size(); }

  /// Smallest distance of any kinked op's input to its kink seen during
  /// forward evaluation (relu/abs/max at 0 or at ties, sqrt/log/div at 0).
  /// Infinity when no kinked op was recorded.
  double kink_margin() const { return kink_margin_; }

  /// Reverse pass from a scalar seed; accumulates dL/dp into the store's
  /// gradient slots for every parameter leaf on the tape.
  void backward(Var seed);

 private:
  enum class Op : std::uint8_t {
    kConst, kParam,
    kAdd, kSub, kMul, kDiv, kNeg, kScale, kMax2,
    kRelu, kLogistic, kExp, kLog, kSqrt, kSin, kCos, kAbs,
    kMatVec,
    kSum, kDot, kMaxReduce, kConcat, kGather, kPack,
    kSoftmax, kEntropy, kWeightedSum, kGivensT,
  };

  struct Node {
    Op op;
    std::int32_t rows, cols;
    std::int32_t val, grd;  // arena offsets
    std::int32_t in0 = -1, in1 = -1;
    std::int32_t xb = 0, xn = 0;  // extra-input range
    std::int32_t iaux0 = 0, iaux1 = 0;
    double aux = 0.0;
  };

  Var make_node(Op op, int rows, int cols, Var in0 = {}, Var in1 = {});
  Node& node(Var v);
  const Node& node(Var v) const;
  double* val_ptr(const Node& n) { return vals_.data() + n.val; }
  const double* val_ptr(const Node& n) const { return vals_.data() + n.val; }
  double* grd_ptr(const Node& n) { return grads_.data() + n.grd; }
  const double* grd_ptr(const Node& n) const { return grads_.data() + n.grd; }
  void note_kink(double margin);
  Var check_same_shape(Var a, Var b, const char* what);

  ParameterStore* store_;
  std::vector<Node> nodes_;
  std::vector<double> vals_;
  std::vector<double> grads_;
  std::vector<std::int32_t> extras_;
  std::vector<std::pair<std::int32_t, Tensor*>> param_nodes_;
  std::unordered_map<std::string, std::int32_t> param_lookup_;
  double kink_margin_;
};

}  // namespace gpsl::diff
