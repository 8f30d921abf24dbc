#include "xdrs/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xdrs/error.hpp"

namespace xdrs {

GradCheckResult check_gradients(const std::string& name, const std::vector<Parameter*>& params,
                                const std::function<Expr(Graph&)>& loss, const GradCheckOptions& opt) {
  for (Parameter* p : params) p->zero_grad();
  {
    Graph g;
    Expr l = loss(g);
    g.backward(l);
  }
  auto evaluate = [&] {
    Graph g;
    return g.scalar(loss(g));
  };

  GradCheckResult r;
  r.name = name;
  Rng rng(opt.seed);
  for (Parameter* p : params) {
    if (!p->trainable()) continue;
    std::vector<std::size_t> idx(p->value.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (opt.max_per_param && idx.size() > opt.max_per_param) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(opt.max_per_param);
      std::sort(idx.begin(), idx.end());
    }
    for (std::size_t i : idx) {
      const double saved = p->value[i];
      p->value[i] = saved + opt.step;
      const double up = evaluate();
      p->value[i] = saved - opt.step;
      const double down = evaluate();
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * opt.step);
      const double analytic = p->grad[i];
      if (!std::isfinite(numeric) || !std::isfinite(analytic))
        fail(ErrorKind::NumericError, "non-finite gradient for " + p->name());
      const double rel =
          std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), opt.floor});
      ++r.checked;
      if (rel > r.max_rel_error || r.worst.empty()) {
        r.max_rel_error = std::max(r.max_rel_error, rel);
        if (rel >= r.max_rel_error) r.worst = p->name() + "[" + std::to_string(i) + "]";
      }
    }
  }
  r.passed = r.checked > 0 && r.max_rel_error <= opt.tolerance;
  return r;
}

}  // namespace xdrs
