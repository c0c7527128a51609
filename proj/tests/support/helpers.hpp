#pragma once

#include "speclab/kernel.hpp"

#include <initializer_list>
#include <memory>

namespace testing {

inline speclab::SampleSet points_1d(std::initializer_list<double> xs) {
  speclab::SampleSet s{speclab::PointMatrix(static_cast<Eigen::Index>(xs.size()), 1), 0};
  Eigen::Index i = 0;
  for (double x : xs) s.points(i++, 0) = x;
  return s;
}

inline std::shared_ptr<const speclab::SampleSet> shared(speclab::SampleSet s) {
  return std::make_shared<const speclab::SampleSet>(std::move(s));
}

inline speclab::KernelSpec gaussian(double bandwidth, double offset, speclab::DomainBox domain = speclab::DomainBox::unit(1)) {
  speclab::KernelParams p;
  p.family = speclab::KernelFamily::Gaussian;
  p.bandwidth = bandwidth;
  p.offset = offset;
  p.domain = std::move(domain);
  return speclab::make_kernel(p);
}

inline speclab::KernelSpec constant(double c, speclab::DomainBox domain = speclab::DomainBox::unit(1)) {
  speclab::KernelParams p;
  p.family = speclab::KernelFamily::Constant;
  p.value = c;
  p.domain = std::move(domain);
  return speclab::make_kernel(p);
}

inline speclab::KernelSpec linear(speclab::DomainBox domain) {
  speclab::KernelParams p;
  p.family = speclab::KernelFamily::Linear;
  p.domain = std::move(domain);
  p.require_positive_lower_bound = false;
  return speclab::make_kernel(p);
}

inline speclab::DomainBox box(double lo, double hi, Eigen::Index dim = 1) {
  return {Eigen::VectorXd::Constant(dim, lo), Eigen::VectorXd::Constant(dim, hi)};
}

}  // namespace testing
