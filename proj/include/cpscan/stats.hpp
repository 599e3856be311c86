#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpscan/weight_fn.hpp"

namespace cpscan {

/**
 * Cumulative sums of one observed sequence, S(t) = x(1) + ... + x(t) with
 * S(0) = 0, plus the noise scale used to standardize every statistic built
 * on top of them.  All downstream statistics are O(1) given this table.
 */
struct PrefixSums {
    std::vector<double> s; // length T + 1, s[0] == 0
    double sigma_x = 1.0;

    std::int64_t size_T() const noexcept {
        return static_cast<std::int64_t>(s.size()) - 1;
    }
};

inline PrefixSums prefix_sums(std::span<const double> x, double sigma_x) {
    if (x.empty()) throw std::invalid_argument("prefix_sums: empty sequence");
    if (!(sigma_x > 0.0) || !std::isfinite(sigma_x))
        throw std::invalid_argument("prefix_sums: sigma_x must be positive and finite");
    PrefixSums ps;
    ps.sigma_x = sigma_x;
    ps.s.resize(x.size() + 1);
    ps.s[0] = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (!std::isfinite(x[t]))
            throw std::invalid_argument("prefix_sums: x(" + std::to_string(t + 1) +
                                        ") is not finite");
        ps.s[t + 1] = ps.s[t] + x[t];
    }
    return ps;
}

/**
 * Symmetric two-window scan statistic at center t with half width ell:
 *   Z_ell(t) = [S(t+ell) + S(t-ell) - 2 S(t)] / sqrt(2 ell sigma_x^2),
 * i.e. the standardized difference of the window sums right and left of t.
 * Unit variance under iid noise.  Valid for ell <= t <= T - ell.
 */
inline double scan_stat(const PrefixSums& ps, std::int64_t ell, std::int64_t t) {
    const std::int64_t T = ps.size_T();
    if (ell < 1) throw std::domain_error("scan_stat: ell must be >= 1");
    if (t < ell || t > T - ell)
        throw std::domain_error("scan_stat: t = " + std::to_string(t) +
                                " outside valid range [" + std::to_string(ell) + ", " +
                                std::to_string(T - ell) + "]");
    const double num = ps.s[static_cast<std::size_t>(t + ell)] +
                       ps.s[static_cast<std::size_t>(t - ell)] -
                       2.0 * ps.s[static_cast<std::size_t>(t)];
    return num / std::sqrt(2.0 * static_cast<double>(ell) * ps.sigma_x * ps.sigma_x);
}

/** Open interval (u, v) of time indices; interior points are u+1 .. v-1. */
struct Interval {
    std::int64_t u = 0;
    std::int64_t v = 0;

    std::int64_t length() const noexcept { return v - u; }
    bool interior(std::int64_t t) const noexcept { return t > u && t < v; }
};

namespace detail {

inline void check_interval(const Interval& iv, std::int64_t T) {
    if (iv.u < 0 || iv.v > T || iv.v - iv.u < 2)
        throw std::domain_error("interval (" + std::to_string(iv.u) + ", " +
                                std::to_string(iv.v) + ") invalid for T = " +
                                std::to_string(T) + " (need 0 <= u, v <= T, v - u >= 2)");
}

} // namespace detail

/**
 * CUSUM statistic on interval I = (u, v) at interior point t:
 *   Z_I(t) = sqrt((v-t)(t-u) / ((v-u) sigma_x^2)) *
 *            ( (S(v)-S(t))/(v-t) - (S(t)-S(u))/(t-u) ),
 * the standardized contrast of the segment means right and left of t.
 */
inline double cusum_stat(const PrefixSums& ps, const Interval& iv, std::int64_t t) {
    detail::check_interval(iv, ps.size_T());
    if (!iv.interior(t))
        throw std::domain_error("cusum_stat: t = " + std::to_string(t) +
                                " not interior to (" + std::to_string(iv.u) + ", " +
                                std::to_string(iv.v) + ")");
    const double su = ps.s[static_cast<std::size_t>(iv.u)];
    const double st = ps.s[static_cast<std::size_t>(t)];
    const double sv = ps.s[static_cast<std::size_t>(iv.v)];
    const double right = (sv - st) / static_cast<double>(iv.v - t);
    const double left = (st - su) / static_cast<double>(t - iv.u);
    const double scale =
        std::sqrt(static_cast<double>(iv.v - t) * static_cast<double>(t - iv.u) /
                  (static_cast<double>(iv.v - iv.u) * ps.sigma_x * ps.sigma_x));
    return scale * (right - left);
}

/**
 * Log profile likelihood of a single change point inside I = (u, v):
 * log L_I(t) = Z_I(t)^2 / 2 for interior t, stored as a log-scale WeightFn
 * with offset u + 1.  The multiplicative normalization of L_I is dropped;
 * it cancels in every consumer (argmax, posterior weights, likelihoods up
 * to an additive constant per interval).
 */
inline WeightFn log_profile_likelihood(const PrefixSums& ps, const Interval& iv) {
    detail::check_interval(iv, ps.size_T());
    WeightFn lp;
    lp.offset = iv.u + 1;
    lp.w.resize(static_cast<std::size_t>(iv.v - iv.u - 1));
    for (std::int64_t t = iv.u + 1; t < iv.v; ++t) {
        const double z = cusum_stat(ps, iv, t);
        lp.w[static_cast<std::size_t>(t - iv.u - 1)] = 0.5 * z * z;
    }
    return lp;
}

/**
 * Robust noise scale from successive differences:
 *   sigma_hat = median |x(t+1) - x(t)| / (sqrt(2) * 0.674489750196082),
 * the denominator being the median of |N(0, 2)|.  Insensitive to a sparse
 * set of mean changes.  Requires T >= 2.
 */
inline double estimate_sigma(std::span<const double> x) {
    if (x.size() < 2) throw std::invalid_argument("estimate_sigma: need T >= 2");
    std::vector<double> d(x.size() - 1);
    for (std::size_t t = 0; t + 1 < x.size(); ++t) {
        if (!std::isfinite(x[t]) || !std::isfinite(x[t + 1]))
            throw std::invalid_argument("estimate_sigma: input not finite");
        d[t] = std::fabs(x[t + 1] - x[t]);
    }
    const std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
    double med = d[mid];
    if (d.size() % 2 == 0) {
        // lower middle is the max of the left partition
        const double lo = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
        med = 0.5 * (med + lo);
    }
    return med / (std::sqrt(2.0) * 0.674489750196082);
}

} // namespace cpscan
