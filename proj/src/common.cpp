#include "speclab/common.hpp"

#include <cmath>
#include <numbers>

namespace speclab {

bool DomainBox::contains(Point x, double slack) const {
  if (static_cast<Eigen::Index>(x.size()) != dim()) return false;
  for (Eigen::Index d = 0; d < dim(); ++d) {
    if (x[d] < lo(d) - slack || x[d] > hi(d) + slack) return false;
  }
  return true;
}

void DomainBox::validate() const {
  if (lo.size() == 0 || lo.size() != hi.size()) {
    throw ConfigError("domain box: lo and hi must have the same positive dimension");
  }
  for (Eigen::Index d = 0; d < dim(); ++d) {
    if (!std::isfinite(lo(d)) || !std::isfinite(hi(d)) || !(hi(d) > lo(d))) {
      throw ConfigError("domain box: need finite lo < hi in every dimension");
    }
  }
}

double SplitMix64::normal() {
  // 1 - u keeps the logarithm argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t n, std::uint64_t trial) {
  SplitMix64 a(base);
  std::uint64_t h = a.next();
  SplitMix64 b(h ^ (n * 0xD1B54A32D192ED03ULL));
  h = b.next();
  SplitMix64 c(h ^ (trial * 0x8CB92BA72F3D8DD7ULL));
  return c.next();
}

}  // namespace speclab
