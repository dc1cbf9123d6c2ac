#pragma once

// Small hand-rolled generators for property tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace drsim::testing {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double normal(double mean, double sd) { return std::normal_distribution<double>(mean, sd)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

    std::vector<double> uniform_vec(std::size_t n, double lo, double hi) {
        std::vector<double> v(n);
        for (auto& x : v) x = uniform(lo, hi);
        return v;
    }

    /// Watt-like samples: mostly Gaussian, with occasional ties, spikes and
    /// plateaus so degenerate spreads are exercised.
    std::vector<double> power_samples(std::size_t n) {
        std::vector<double> v(n);
        const double centre = uniform(20.0, 90.0);
        const double spread = coin(0.15) ? 0.0 : uniform(0.01, 5.0);
        for (auto& x : v) {
            x = centre + (spread > 0.0 ? normal(0.0, spread) : 0.0);
            if (coin(0.2)) x = std::round(x);
            if (coin(0.05)) x += uniform(-60.0, 60.0);
        }
        return v;
    }

    /// Error streams mixing small noise, huge spikes and long one-signed runs.
    std::vector<double> error_stream(std::size_t n) {
        std::vector<double> v(n);
        double run_sign = 1.0;
        for (auto& e : v) {
            if (coin(0.05)) run_sign = -run_sign;
            switch (integer(0, 3)) {
            case 0: e = normal(0.0, 3.0); break;
            case 1: e = run_sign * uniform(0.0, 200.0); break;
            case 2: e = uniform(-1e6, 1e6); break;
            default: e = 0.0;
            }
        }
        return v;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

} // namespace drsim::testing
