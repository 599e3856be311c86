#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpscan {

/**
 * Finitely supported weight function on the integers: w[k] is the weight of
 * index offset + k; every index outside the array carries weight zero.
 *
 * Two conventions share this container.  Natural scale (entries >= 0) is
 * used for simulated likelihood ratios; log scale (entries may be any real,
 * -inf meaning weight zero) is used for profile likelihoods, where natural
 * values like exp(Z^2/2) would overflow.  The *_log routines below never
 * exponentiate without first subtracting the maximum.
 */
struct WeightFn {
    std::int64_t offset = 0;
    std::vector<double> w;

    std::int64_t first_index() const noexcept { return offset; }
    std::int64_t last_index() const noexcept {
        return offset + static_cast<std::int64_t>(w.size()) - 1;
    }
    bool contains(std::int64_t i) const noexcept {
        return i >= first_index() && i <= last_index();
    }
    double at(std::int64_t i) const noexcept {
        return contains(i) ? w[static_cast<std::size_t>(i - offset)] : 0.0;
    }
};

namespace detail {

inline void check_natural(const WeightFn& r) {
    if (r.w.empty()) throw std::domain_error("weight function has empty support");
    for (std::size_t k = 0; k < r.w.size(); ++k) {
        const double v = r.w[k];
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::domain_error("weight function entry at index " +
                                    std::to_string(r.offset + static_cast<std::int64_t>(k)) +
                                    " is negative or not finite");
    }
}

inline void check_log(const WeightFn& lr) {
    if (lr.w.empty()) throw std::domain_error("weight function has empty support");
    for (std::size_t k = 0; k < lr.w.size(); ++k) {
        const double v = lr.w[k];
        // -inf is a legitimate log weight (zero mass); NaN and +inf are not.
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
            throw std::domain_error("log weight entry at index " +
                                    std::to_string(lr.offset + static_cast<std::int64_t>(k)) +
                                    " is NaN or +inf");
    }
}

} // namespace detail

/**
 * Median of a weight function: the unique integer u with
 *   sum_{i <= u-1} r(i) < s/2 <= sum_{i <= u} r(i),   s = total mass.
 * Total mass must be positive and finite.
 */
inline std::int64_t med_of(const WeightFn& r) {
    detail::check_natural(r);
    double s = 0.0;
    for (double v : r.w) s += v;
    if (!(s > 0.0) || !std::isfinite(s))
        throw std::domain_error("weight function total mass must be positive and finite");
    const double half = 0.5 * s;
    double cum = 0.0;
    for (std::size_t k = 0; k < r.w.size(); ++k) {
        cum += r.w[k];
        if (cum >= half) return r.offset + static_cast<std::int64_t>(k);
    }
    return r.last_index(); // unreachable barring rounding; the median then sits at the top
}

/// Smallest index attaining the maximum weight.
inline std::int64_t mode_of(const WeightFn& r) {
    detail::check_natural(r);
    double best = -1.0;
    std::int64_t arg = r.offset;
    for (std::size_t k = 0; k < r.w.size(); ++k) {
        if (r.w[k] > best) {
            best = r.w[k];
            arg = r.offset + static_cast<std::int64_t>(k);
        }
    }
    if (!(best > 0.0))
        throw std::domain_error("weight function total mass must be positive");
    return arg;
}

/**
 * W(r) = sum_i |i| * min(1, r(i)/r(0)).  Scale invariant; requires r(0) > 0.
 * Bounds the median: |med(r)| <= 2 W(r).
 */
inline double w_functional(const WeightFn& r) {
    detail::check_natural(r);
    const double r0 = r.at(0);
    if (!(r0 > 0.0))
        throw std::domain_error("W functional requires positive weight at index 0");
    double acc = 0.0;
    for (std::size_t k = 0; k < r.w.size(); ++k) {
        const std::int64_t i = r.offset + static_cast<std::int64_t>(k);
        if (i == 0) continue;
        acc += static_cast<double>(std::llabs(i)) * std::min(1.0, r.w[k] / r0);
    }
    return acc;
}

/// Natural-scale version of a log weight function, normalized so the maximum
/// entry is exactly 1 (max subtraction, overflow free).
inline WeightFn exp_normalized(const WeightFn& lr) {
    detail::check_log(lr);
    const double m = *std::max_element(lr.w.begin(), lr.w.end());
    if (m == -std::numeric_limits<double>::infinity())
        throw std::domain_error("log weight function has zero total mass");
    WeightFn out;
    out.offset = lr.offset;
    out.w.resize(lr.w.size());
    for (std::size_t k = 0; k < lr.w.size(); ++k) out.w[k] = std::exp(lr.w[k] - m);
    return out;
}

inline std::int64_t med_of_log(const WeightFn& lr) { return med_of(exp_normalized(lr)); }

/// Mode straight off the logs; no exponentiation needed.
inline std::int64_t mode_of_log(const WeightFn& lr) {
    detail::check_log(lr);
    double best = -std::numeric_limits<double>::infinity();
    std::int64_t arg = lr.offset;
    for (std::size_t k = 0; k < lr.w.size(); ++k) {
        if (lr.w[k] > best) {
            best = lr.w[k];
            arg = lr.offset + static_cast<std::int64_t>(k);
        }
    }
    if (best == -std::numeric_limits<double>::infinity())
        throw std::domain_error("log weight function has zero total mass");
    return arg;
}

/// W functional on a log-scale weight function: min(1, r(i)/r(0)) computed as
/// exp(min(0, log r(i) - log r(0))), so huge logs never overflow.
inline double w_functional_log(const WeightFn& lr) {
    detail::check_log(lr);
    const double l0 = lr.contains(0) ? lr.at(0) : -std::numeric_limits<double>::infinity();
    if (l0 == -std::numeric_limits<double>::infinity())
        throw std::domain_error("W functional requires positive weight at index 0");
    double acc = 0.0;
    for (std::size_t k = 0; k < lr.w.size(); ++k) {
        const std::int64_t i = lr.offset + static_cast<std::int64_t>(k);
        if (i == 0) continue;
        const double d = lr.w[k] - l0;
        const double ratio = d >= 0.0 ? 1.0 : std::exp(d);
        acc += static_cast<double>(std::llabs(i)) * ratio;
    }
    return acc;
}

} // namespace cpscan
