#include "gpsl/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gpsl::rng {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

Stream::Stream(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t s = seed ^ (stream_id * 0xd6e8feb86659fd93ull);
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  gen_.seed(a ^ (b << 1));
}

std::uint64_t Stream::next_u64() { return gen_(); }

double Stream::uniform() {
  // 53 random bits -> [0, 1)
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Stream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Stream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(a);
  has_cached_normal_ = true;
  return r * std::cos(a);
}

double Stream::exponential() { return -std::log(1.0 - uniform()); }

std::vector<double> Stream::dirichlet_flat(int k) {
  std::vector<double> v(static_cast<std::size_t>(k));
  double total = 0.0;
  for (auto& e : v) {
    e = exponential();
    total += e;
  }
  for (auto& e : v) e /= total;
  return v;
}

namespace {

// Primitive polynomial degree s, coefficient bits a, initial odd m values.
struct SobolParams {
  int s;
  std::uint32_t a;
  std::uint32_t m[5];
};

// Joe-Kuo parameters for dimensions 2..6 (dimension 1 is van der Corput).
constexpr SobolParams kSobolParams[] = {
    {1, 0, {1, 0, 0, 0, 0}},
    {2, 1, {1, 3, 0, 0, 0}},
    {3, 1, {1, 3, 1, 0, 0}},
    {3, 2, {1, 1, 1, 0, 0}},
    {4, 1, {1, 1, 3, 3, 0}},
};

constexpr int kBits = 32;

}  // namespace

Sobol::Sobol(int dim) : dim_(dim) {
  if (dim < 1 || dim > 6) throw std::invalid_argument("Sobol: dimension must be in [1, 6]");
  state_.assign(static_cast<std::size_t>(dim), 0u);
  dirs_.assign(static_cast<std::size_t>(dim) * kBits, 0u);
  // Dimension 1: v_k = 2^(31-k).
  for (int k = 0; k < kBits; ++k) dirs_[static_cast<std::size_t>(k)] = 1u << (31 - k);
  for (int d = 1; d < dim; ++d) {
    const SobolParams& p = kSobolParams[d - 1];
    std::uint32_t m[kBits];
    for (int k = 0; k < p.s; ++k) m[k] = p.m[k];
    for (int k = p.s; k < kBits; ++k) {
      std::uint32_t v = m[k - p.s] ^ (m[k - p.s] << p.s);
      for (int i = 1; i < p.s; ++i) {
        if ((p.a >> (p.s - 1 - i)) & 1u) v ^= m[k - i] << i;
      }
      m[k] = v;
    }
    for (int k = 0; k < kBits; ++k) {
      dirs_[static_cast<std::size_t>(d) * kBits + k] = m[k] << (31 - k);
    }
  }
}

void Sobol::next(std::span<double> out) {
  if (out.size() != static_cast<std::size_t>(dim_)) throw std::invalid_argument("Sobol: bad output span");
  if (index_ == 0) {
    // First point is the origin.
    for (int d = 0; d < dim_; ++d) out[static_cast<std::size_t>(d)] = 0.0;
    ++index_;
    return;
  }
  // Gray-code step: flip the direction of the lowest zero bit of index-1.
  std::uint64_t c = 0;
  std::uint64_t value = index_ - 1;
  while (value & 1u) {
    value >>= 1;
    ++c;
  }
  for (int d = 0; d < dim_; ++d) {
    state_[static_cast<std::size_t>(d)] ^= dirs_[static_cast<std::size_t>(d) * kBits + c];
    out[static_cast<std::size_t>(d)] = static_cast<double>(state_[static_cast<std::size_t>(d)]) * 0x1.0p-32;
  }
  ++index_;
}

}  // namespace gpsl::rng
