#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace gpsl::rng {

// Stream ids used by the trainer. Keeping initialization, preference
// sampling and density-control draws on separate streams means a model
// that skips one phase still sees identical draws in the others.
enum : std::uint64_t {
  kStreamInit = 1,
  kStreamTrain = 2,
  kStreamAdc = 3,
  kStreamMonteCarlo = 4,
};

/// Deterministic random stream. All distributions are generated from raw
/// 64-bit draws by hand so sequences do not depend on the standard
/// library's distribution implementations.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal (Box-Muller).
  double normal();
  /// Exponential(1).
  double exponential();
  /// Flat Dirichlet(1, ..., 1): uniform on the (k-1)-simplex.
  std::vector<double> dirichlet_flat(int k);

 private:
  std::mt19937_64 gen_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Sobol low-discrepancy sequence, dimensions 1..6.
class Sobol {
 public:
  explicit Sobol(int dim);
  /// Next point in [0,1)^dim.
  void next(std::span<double> out);

 private:
  int dim_;
  std::uint64_t index_ = 0;
  std::vector<std::uint32_t> state_;
  std::vector<std::uint32_t> dirs_;  // 32 direction numbers per dimension
};

}  // namespace gpsl::rng
