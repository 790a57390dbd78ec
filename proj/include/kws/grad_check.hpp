#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kws/tensor.hpp"

namespace kws {

struct GradCheckReport {
  std::string op_name;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Central finite-difference check of a scalar-valued function against its
/// reverse-mode gradient. Relative error uses max(|analytic|, |numeric|, 1e-8)
/// as denominator. `f` is re-evaluated with perturbed input values, so it
/// must be a pure function of the input tensors (fix any rng seeds inside).
///
/// max_coords_per_input > 0 checks a seeded random subset of coordinates per
/// input; <= 0 checks every coordinate.
GradCheckReport grad_check(const std::string& op_name,
                           const std::function<Tensor(const std::vector<Tensor>&)>& f,
                           const std::vector<Tensor>& inputs, double step, double tol,
                           int max_coords_per_input = -1,
                           std::uint64_t coord_seed = 0);

}  // namespace kws
