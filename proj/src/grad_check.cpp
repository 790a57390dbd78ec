#include "kws/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "kws/errors.hpp"
#include "kws/rng.hpp"

namespace kws {

GradCheckReport grad_check(const std::string& op_name,
                           const std::function<Tensor(const std::vector<Tensor>&)>& f,
                           const std::vector<Tensor>& inputs, double step, double tol,
                           int max_coords_per_input, std::uint64_t coord_seed) {
  if (!(step >= 1e-6 && step <= 1e-3)) {
    throw ParamError("grad_check: step must lie in [1e-6, 1e-3]");
  }

  Tensor out = f(inputs);
  if (out.size() != 1) {
    throw ContractError("grad_check: function output is not a scalar");
  }
  out.backward();

  // Snapshot analytic gradients before value perturbation rebuilds graphs.
  std::vector<std::vector<double>> analytic;
  analytic.reserve(inputs.size());
  for (const auto& in : inputs) {
    analytic.push_back(in.requires_grad() && in.has_grad()
                           ? in.grad()
                           : std::vector<double>(in.size(), 0.0));
  }

  GradCheckReport report{op_name, 0.0, tol, false};
  Rng pick(coord_seed == 0 ? 0x9c0ffee5u : coord_seed);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    Tensor in = inputs[k];
    if (!in.requires_grad()) continue;
    std::vector<std::size_t> coords;
    std::size_t n = in.size();
    if (max_coords_per_input > 0 && n > static_cast<std::size_t>(max_coords_per_input)) {
      Rng r = pick.split(k);
      std::vector<std::size_t> all(n);
      for (std::size_t i = 0; i < n; ++i) all[i] = i;
      r.shuffle(all);
      coords.assign(all.begin(), all.begin() + max_coords_per_input);
      std::sort(coords.begin(), coords.end());
    } else {
      coords.resize(n);
      for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    }

    for (std::size_t i : coords) {
      double saved = in.values()[i];
      in.values()[i] = saved + step;
      double up;
      {
        NoGradGuard ng;
        up = f(inputs).scalar_value();
      }
      in.values()[i] = saved - step;
      double down;
      {
        NoGradGuard ng;
        down = f(inputs).scalar_value();
      }
      in.values()[i] = saved;

      double numeric = (up - down) / (2.0 * step);
      double a = analytic[k][i];
      double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      report.max_rel_error = std::max(report.max_rel_error, rel);
    }
  }
  report.passed = report.max_rel_error <= tol;
  return report;
}

}  // namespace kws
