#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "xdrs/autodiff.hpp"

namespace xdrs {

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-4;
  // Denominator floor of the relative error, so that gradients that are
  // zero on both sides do not divide by zero.
  double floor = 1e-6;
  // Elements checked per parameter; 0 checks all of them. Sampled
  // elements are drawn with `seed`.
  std::size_t max_per_param = 0;
  std::uint64_t seed = 7;
};

struct GradCheckResult {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  std::string worst;  // "param[index]" of the worst element
  bool passed = false;
};

// Compares backward() against central differences of `loss` for every
// trainable element of `params`. `loss` must build a fresh scalar
// expression in the graph it is given and be deterministic.
GradCheckResult check_gradients(const std::string& name, const std::vector<Parameter*>& params,
                                const std::function<Expr(Graph&)>& loss, const GradCheckOptions& options = {});

}  // namespace xdrs
