#pragma once

#include <vector>

#include "xdrs/autodiff.hpp"

namespace xdrs {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam over the trainable parameters of a store. Frozen tables are never
// touched, not even their moment buffers.
class Adam {
 public:
  Adam(ParameterStore& store, AdamOptions options = {});

  void step();
  long steps() const { return t_; }
  const AdamOptions& options() const { return opt_; }
  void set_lr(double lr) { opt_.lr = lr; }

 private:
  struct Slot {
    Parameter* param;
    std::vector<double> m;
    std::vector<double> v;
  };
  AdamOptions opt_;
  std::vector<Slot> slots_;
  long t_ = 0;
};

double grad_norm(const std::vector<Parameter*>& params);
// Rescales gradients so their global L2 norm is at most max_norm; returns
// the norm before clipping. A non-finite norm raises NumericError.
double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm);
void scale_grads(const std::vector<Parameter*>& params, double factor);

}  // namespace xdrs
