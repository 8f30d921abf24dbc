#include "xdrs/optimizer.hpp"

#include <cmath>

#include "xdrs/error.hpp"

namespace xdrs {

Adam::Adam(ParameterStore& store, AdamOptions options) : opt_(options) {
  for (Parameter* p : store.trainable())
    slots_.push_back(Slot{p, std::vector<double>(p->value.size(), 0.0), std::vector<double>(p->value.size(), 0.0)});
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (auto& s : slots_) {
    auto& w = s.param->value;
    const auto& g = s.param->grad;
    for (std::size_t i = 0; i < w.size(); ++i) {
      s.m[i] = opt_.beta1 * s.m[i] + (1.0 - opt_.beta1) * g[i];
      s.v[i] = opt_.beta2 * s.v[i] + (1.0 - opt_.beta2) * g[i] * g[i];
      const double mhat = s.m[i] / c1;
      const double vhat = s.v[i] / c2;
      w[i] -= opt_.lr * mhat / (std::sqrt(vhat) + opt_.eps);
    }
  }
}

double grad_norm(const std::vector<Parameter*>& params) {
  double sq = 0.0;
  for (const Parameter* p : params)
    for (double g : p->grad) sq += g * g;
  return std::sqrt(sq);
}

double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm) {
  const double norm = grad_norm(params);
  if (!std::isfinite(norm)) fail(ErrorKind::NumericError, "gradient norm is not finite");
  if (norm > max_norm) scale_grads(params, max_norm / norm);
  return norm;
}

void scale_grads(const std::vector<Parameter*>& params, double factor) {
  for (Parameter* p : params)
    for (double& g : p->grad) g *= factor;
}

}  // namespace xdrs
