#include "metamix/gradcheck.hpp"

#include <cmath>

namespace metamix {

std::vector<Tensor> finite_difference_gradient(const std::function<double(std::span<const Tensor>)>& f,
                                               std::vector<Tensor> params, double eps) {
    if (!(eps > 0.0)) throw shape_error("finite_difference_gradient: eps must be positive");
    std::vector<Tensor> grads;
    grads.reserve(params.size());
    for (size_t p = 0; p < params.size(); ++p) {
        Tensor g(params[p].rows(), params[p].cols());
        for (int64_t i = 0; i < params[p].size(); ++i) {
            const double saved = params[p][i];
            params[p][i] = saved + eps;
            const double up = f(params);
            params[p][i] = saved - eps;
            const double down = f(params);
            params[p][i] = saved;
            if (!std::isfinite(up) || !std::isfinite(down))
                throw numeric_error("finite_difference_gradient: function returned a non-finite value");
            g[i] = (up - down) / (2.0 * eps);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

double max_relative_error(std::span<const Tensor> a, std::span<const Tensor> b, double floor) {
    if (a.size() != b.size()) throw shape_error("max_relative_error: list lengths differ");
    double worst = 0.0;
    for (size_t p = 0; p < a.size(); ++p) {
        if (!a[p].same_shape(b[p])) throw shape_error("max_relative_error: tensor shapes differ");
        for (int64_t i = 0; i < a[p].size(); ++i) {
            const double denom = std::max({std::fabs(a[p][i]), std::fabs(b[p][i]), floor});
            worst = std::max(worst, std::fabs(a[p][i] - b[p][i]) / denom);
        }
    }
    return worst;
}

}  // namespace metamix
