#pragma once

#include "speclab/common.hpp"

namespace speclab {

/// K real functions on a domain, evaluated together. Row r of evaluate()
/// holds (g_1(x_r), ..., g_K(x_r)).
class FunctionBasis {
 public:
  virtual ~FunctionBasis() = default;
  virtual Eigen::Index size() const = 0;
  virtual Matrix evaluate(const PointMatrix& points) const = 0;
};

}  // namespace speclab
