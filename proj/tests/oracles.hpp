// Independent reference implementations used by the tests. None of these call
// into the library code they check.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

/// Fraction of customers of a FIFO M/M/1 queue whose sojourn time is within
/// `threshold`, by direct simulation (Lindley recursion on sojourn times).
inline double des_mm1_within(double lambda, double mu, double threshold, long customers, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> inter(lambda), service(mu);
    double sojourn = 0.0;
    long ok = 0;
    for (long n = 0; n < customers; ++n) {
        const double a = n == 0 ? 0.0 : inter(rng);
        sojourn = std::max(0.0, sojourn - a) + service(rng);
        ok += sojourn <= threshold;
    }
    return static_cast<double>(ok) / static_cast<double>(customers);
}

/// M/M/1 sojourn CDF written out directly.
inline double eta(double lambda, double mu, double threshold) {
    if (lambda == 0.0) return 1.0;
    if (lambda >= mu) return 0.0;
    return 1.0 - std::exp(-(mu - lambda) * threshold);
}

/// Linear scan for the smallest r meeting the threshold.
inline int scan_units(double lambda, double theta, double threshold_ms, double c, double gamma, int min_units) {
    for (int r = min_units;; ++r) {
        if (eta(lambda, r * c * gamma, threshold_ms) >= theta) return r;
    }
}

}  // namespace oracle
