#pragma once

#include <functional>
#include <span>
#include <vector>

#include "metamix/tensor.hpp"

namespace metamix {

/// Central-difference gradient of a deterministic scalar function of a
/// parameter list: (f(p+eps) - f(p-eps)) / (2 eps) per coordinate. The
/// independent oracle used by the gradient-correctness checks.
std::vector<Tensor> finite_difference_gradient(const std::function<double(std::span<const Tensor>)>& f,
                                               std::vector<Tensor> params, double eps);

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor): relative disagreement between
/// two gradient lists with a floor guarding near-zero coordinates.
double max_relative_error(std::span<const Tensor> a, std::span<const Tensor> b, double floor = 1e-8);

}  // namespace metamix
