#pragma once

#include <string>
#include <vector>

#include "xdrs/gradcheck.hpp"

namespace xdrs {

// Finite-difference checks of every composite module at small dims:
// bilstm, child_sum_cell, po_tree_input, bi_tree_stack, attention,
// copy_softmax, teacher_forced_loss.
struct GradSuiteOptions {
  int dim = 6;                 // all widths; must stay <= 8
  double init_scale = 0.5;
  GradCheckOptions check;
  std::vector<std::string> only;  // empty runs everything
};

std::vector<std::string> gradcheck_names();
std::vector<GradCheckResult> run_gradcheck_suite(const GradSuiteOptions& options = {});

}  // namespace xdrs
