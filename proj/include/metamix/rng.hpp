#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace metamix {

/// Deterministic random stream. All draws are derived from the mt19937_64
/// engine through fixed arithmetic (no std::*_distribution), so sequences are
/// identical across standard libraries for a given seed.
class RngStream {
public:
    explicit RngStream(uint64_t seed) : engine_(seed) {}

    uint64_t raw() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform();

    /// Uniform on (0, 1) — never returns an exact endpoint.
    double uniform_open();

    /// Uniform integer in [0, n).
    int uniform_int(int n);

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Marsaglia polar method.
    double normal();

    /// Gamma(shape, 1) via Marsaglia–Tsang squeeze; shape < 1 handled by the
    /// usual boost Gamma(shape + 1) * U^{1/shape}.
    double gamma(double shape);

    /// Beta(a, b) as Ga/(Ga + Gb).
    double beta(double a, double b);

    /// k distinct integers from [0, n), in draw order.
    std::vector<int> sample_without_replacement(int n, int k);

    /// In-place Fisher–Yates shuffle of indices [0, n).
    std::vector<int> permutation(int n);

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Derives an independently seeded stream from a master seed and a stream
/// name. The same (seed, name) pair always yields the same stream, so turning
/// one consumer on or off never perturbs the others.
RngStream named_stream(uint64_t master_seed, std::string_view name);

}  // namespace metamix
