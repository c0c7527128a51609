#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace speclab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Points are stored one per row so each point is a contiguous span.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Point = std::span<const double>;

inline Point row_of(const PointMatrix& pts, Eigen::Index i) {
  return {pts.data() + i * pts.cols(), static_cast<std::size_t>(pts.cols())};
}

/// Invalid configuration or input. The CLI maps this to exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical precondition or postcondition failed. CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned box [lo, hi] in R^p.
struct DomainBox {
  Vector lo;
  Vector hi;

  static DomainBox unit(Eigen::Index dim) {
    return {Vector::Zero(dim), Vector::Ones(dim)};
  }
  Eigen::Index dim() const { return lo.size(); }
  double volume() const { return (hi - lo).prod(); }
  double diameter() const { return (hi - lo).norm(); }
  bool contains(Point x, double slack = 1e-12) const;
  void validate() const;
};

/// Deterministic 64-bit generator (splitmix64). Used instead of the
/// standard distributions so sampled points are identical on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal by Box-Muller.
  double normal();

 private:
  std::uint64_t state_;
};

/// Order-independent seed derivation for (base, n, trial).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t n, std::uint64_t trial);

}  // namespace speclab
