#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cpscan/parallel.hpp"
#include "cpscan/rng.hpp"
#include "cpscan/stats.hpp"
#include "cpscan/weight_fn.hpp"

namespace cpscan {

struct DetectorConfig {
    enum class Mode { plain, extended };

    /**
     * Treatment of scan windows near the sequence ends.
     *
     * strict: scan centers t with ell_b <= t <= T - ell_b only, so every
     *   window (t - ell_b, t + ell_b) fits inside [0, T].  Changes closer
     *   to an end than the scale that would be needed to see them are
     *   undetectable at that scale.
     * clip: scan every interior center 1 <= t <= T - 1 and clip the window
     *   to (max(0, t - ell_b), min(T, t + ell_b)), scoring it with the
     *   interval CUSUM statistic, which coincides with the symmetric scan
     *   statistic whenever the window fits.  This restores sensitivity to
     *   changes near the ends (the benchmark campaigns use it).
     */
    enum class Boundary { strict, clip };

    double c_scan = 5.05;
    double rho = 2.0;    // window growth factor, ell_b = ceil(rho^b), 1 < rho <= 2
    double sigma_x = 1.0;
    Mode mode = Mode::plain;
    Boundary boundary = Boundary::strict;
};

/**
 * Output of one detector run.  All vectors are aligned and sorted by
 * estimate position.  intervals[j] is the window (u, v) that produced
 * tau_hat[j]; log_profiles[j] is the log profile likelihood on that window
 * (offset u + 1); window_exponent[j] is the scale index b at admission;
 * fallback[j] = 1 iff the extended rule had zero intensity mass on the
 * window interior and fell back to the plain argmax.
 */
struct DetectionResult {
    std::vector<std::int64_t> tau_hat;
    std::vector<Interval> intervals;
    std::vector<WeightFn> log_profiles;
    std::vector<int> window_exponent;
    std::vector<std::uint8_t> fallback;

    std::size_t size() const noexcept { return tau_hat.size(); }
};

namespace detail {

inline void check_detector_config(const DetectorConfig& cfg) {
    if (!(cfg.c_scan > 0.0) || !std::isfinite(cfg.c_scan))
        throw std::invalid_argument("detector: c_scan must be positive and finite");
    if (!(cfg.rho > 1.0 && cfg.rho <= 2.0))
        throw std::invalid_argument("detector: rho must lie in (1, 2]");
    if (!(cfg.sigma_x > 0.0) || !std::isfinite(cfg.sigma_x))
        throw std::invalid_argument("detector: sigma_x must be positive and finite");
}

/// Window half widths ell_b = ceil(rho^b) for b = 0, 1, ... while
/// 2*ell_b <= T - 1.  pow() noise is snapped to the nearest integer before
/// the ceiling so an exactly-integer rho^b is never bumped upward.
inline std::vector<std::pair<int, std::int64_t>> scan_scales(std::int64_t T, double rho) {
    std::vector<std::pair<int, std::int64_t>> scales;
    for (int b = 0;; ++b) {
        const double m = std::pow(rho, b);
        const double r = std::round(m);
        const std::int64_t ell = (std::fabs(m - r) < 1e-9 * std::max(1.0, m))
                                     ? static_cast<std::int64_t>(r)
                                     : static_cast<std::int64_t>(std::ceil(m));
        if (2 * ell > T - 1) break;
        scales.emplace_back(b, ell);
    }
    return scales;
}

inline bool any_estimate_within(const std::set<std::int64_t>& taken, std::int64_t t,
                                std::int64_t radius) {
    auto it = taken.lower_bound(t - radius);
    return it != taken.end() && *it <= t + radius;
}

/**
 * One full detector run over all scales.
 *
 * Per scale the statistic values never change; only the admissible set A
 * shrinks as estimates are placed.  So the while loop "place the argmax
 * over A, exclude its neighborhood" is executed as: collect every t with
 * |Z_b(t)| >= c once, sort by (-|Z|, t), and admit in order, skipping
 * positions that have come within ell_b - 1 of an existing estimate.
 */
inline DetectionResult run_scan(const PrefixSums& ps, const DetectorConfig& cfg,
                                std::span<const double> a, bool extended) {
    const std::int64_t T = ps.size_T();
    const bool clip = cfg.boundary == DetectorConfig::Boundary::clip;
    DetectionResult res;
    std::set<std::int64_t> taken;

    for (const auto& [b, ell] : scan_scales(T, cfg.rho)) {
        const double inv = 1.0 / std::sqrt(2.0 * static_cast<double>(ell) *
                                           ps.sigma_x * ps.sigma_x);
        std::vector<std::pair<double, std::int64_t>> cand;
        if (clip) {
            for (std::int64_t t = 1; t <= T - 1; ++t) {
                const Interval iv{std::max<std::int64_t>(0, t - ell),
                                  std::min<std::int64_t>(T, t + ell)};
                const double az = std::fabs(cusum_stat(ps, iv, t));
                if (az >= cfg.c_scan) cand.emplace_back(az, t);
            }
        } else {
            for (std::int64_t t = ell; t <= T - ell; ++t) {
                const double az = std::fabs((ps.s[static_cast<std::size_t>(t + ell)] +
                                             ps.s[static_cast<std::size_t>(t - ell)] -
                                             2.0 * ps.s[static_cast<std::size_t>(t)]) *
                                            inv);
                if (az >= cfg.c_scan) cand.emplace_back(az, t);
            }
        }
        std::sort(cand.begin(), cand.end(), [](const auto& l, const auto& r) {
            if (l.first != r.first) return l.first > r.first;
            return l.second < r.second;
        });

        for (const auto& [az, t] : cand) {
            if (any_estimate_within(taken, t, ell - 1)) continue;
            const Interval iv = clip ? Interval{std::max<std::int64_t>(0, t - ell),
                                                std::min<std::int64_t>(T, t + ell)}
                                     : Interval{t - ell, t + ell};
            WeightFn lp = log_profile_likelihood(ps, iv);

            std::int64_t tau = 0;
            std::uint8_t used_fallback = 0;
            bool have = false;
            if (extended) {
                double best = 0.0;
                for (std::int64_t s = iv.u + 1; s < iv.v; ++s) {
                    const double as = a[static_cast<std::size_t>(s - 1)];
                    if (!(as > 0.0)) continue;
                    const double score =
                        std::log(as) + lp.w[static_cast<std::size_t>(s - iv.u - 1)];
                    if (!have || score > best) {
                        best = score;
                        tau = s;
                        have = true;
                    }
                }
                if (!have) used_fallback = 1;
            }
            if (!have) {
                // plain rule (also the extended fallback): smallest argmax of |Z_I|
                double best = -1.0;
                for (std::size_t k = 0; k < lp.w.size(); ++k) {
                    if (lp.w[k] > best) {
                        best = lp.w[k];
                        tau = iv.u + 1 + static_cast<std::int64_t>(k);
                    }
                }
            }

            if (!taken.insert(tau).second)
                throw std::logic_error("detector: duplicate estimate placed");
            res.tau_hat.push_back(tau);
            res.intervals.push_back(iv);
            res.log_profiles.push_back(std::move(lp));
            res.window_exponent.push_back(b);
            res.fallback.push_back(used_fallback);
        }
    }

    // placement order -> position order
    std::vector<std::size_t> idx(res.tau_hat.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t l, std::size_t r) { return res.tau_hat[l] < res.tau_hat[r]; });
    DetectionResult sorted;
    sorted.tau_hat.reserve(idx.size());
    for (std::size_t k : idx) {
        sorted.tau_hat.push_back(res.tau_hat[k]);
        sorted.intervals.push_back(res.intervals[k]);
        sorted.log_profiles.push_back(std::move(res.log_profiles[k]));
        sorted.window_exponent.push_back(res.window_exponent[k]);
        sorted.fallback.push_back(res.fallback[k]);
    }
    return sorted;
}

/// Largest |Z_b(t)| over all scales and admissible centers; the statistic
/// whose null distribution calibrates c_scan (the detector triggers at
/// threshold c iff this maximum reaches c).
inline double null_scan_max(const PrefixSums& ps, double rho,
                            DetectorConfig::Boundary boundary) {
    const std::int64_t T = ps.size_T();
    const bool clip = boundary == DetectorConfig::Boundary::clip;
    double mx = 0.0;
    for (const auto& [b, ell] : scan_scales(T, rho)) {
        (void)b;
        if (clip) {
            for (std::int64_t t = 1; t <= T - 1; ++t) {
                const Interval iv{std::max<std::int64_t>(0, t - ell),
                                  std::min<std::int64_t>(T, t + ell)};
                const double az = std::fabs(cusum_stat(ps, iv, t));
                if (az > mx) mx = az;
            }
            continue;
        }
        const double inv = 1.0 / std::sqrt(2.0 * static_cast<double>(ell) *
                                           ps.sigma_x * ps.sigma_x);
        for (std::int64_t t = ell; t <= T - ell; ++t) {
            const double az = std::fabs((ps.s[static_cast<std::size_t>(t + ell)] +
                                         ps.s[static_cast<std::size_t>(t - ell)] -
                                         2.0 * ps.s[static_cast<std::size_t>(t)]) *
                                        inv);
            if (az > mx) mx = az;
        }
    }
    return mx;
}

} // namespace detail

/**
 * Multiscale scan-CUSUM detector.  For each window half width ell_b =
 * ceil(rho^b), repeatedly take the center t with the largest |Z_b(t)| at
 * least c_scan among centers farther than ell_b - 1 from every existing
 * estimate, and place inside (t - ell_b, t + ell_b) the interior argmax of
 * |Z_I|.  Estimates from different admissions never coincide.
 */
inline DetectionResult scan_cusum(std::span<const double> x, const DetectorConfig& cfg) {
    detail::check_detector_config(cfg);
    if (cfg.mode != DetectorConfig::Mode::plain)
        throw std::invalid_argument("scan_cusum: config mode must be plain");
    if (x.size() < 3) throw std::invalid_argument("scan_cusum: need T >= 3");
    const PrefixSums ps = prefix_sums(x, cfg.sigma_x);
    return detail::run_scan(ps, cfg, {}, false);
}

/**
 * Extended rule: identical scan phase, but within each admitted window the
 * estimate maximizes log a(t) + log L_I(t) over interior points with
 * a(t) > 0.  Windows whose interior carries no intensity mass fall back to
 * the plain argmax and are flagged.
 */
inline DetectionResult extended_scan_cusum(std::span<const double> x,
                                           std::span<const double> a,
                                           const DetectorConfig& cfg) {
    detail::check_detector_config(cfg);
    if (cfg.mode != DetectorConfig::Mode::extended)
        throw std::invalid_argument("extended_scan_cusum: config mode must be extended");
    if (x.size() < 3) throw std::invalid_argument("extended_scan_cusum: need T >= 3");
    if (a.size() + 1 != x.size())
        throw std::invalid_argument("extended_scan_cusum: intensity length must be T - 1");
    for (std::size_t k = 0; k < a.size(); ++k)
        if (!(a[k] >= 0.0) || !std::isfinite(a[k]))
            throw std::invalid_argument("extended_scan_cusum: a(" + std::to_string(k + 1) +
                                        ") must be finite and >= 0");
    const PrefixSums ps = prefix_sums(x, cfg.sigma_x);
    return detail::run_scan(ps, cfg, a, true);
}

/// Asymptotic threshold sqrt(2 log(T log T)); e.g. T = 10^4 -> 4.781.
inline double theoretical_threshold(std::int64_t T) {
    if (T < 3) throw std::invalid_argument("theoretical_threshold: need T >= 3");
    const double Td = static_cast<double>(T);
    return std::sqrt(2.0 * std::log(Td * std::log(Td)));
}

/**
 * Monte Carlo threshold calibration: simulate `reps` pure-noise sequences,
 * record each one's maximal |Z_b(t)| over all scales and centers, and
 * bisect c until the empirical trigger fraction P(max >= c) meets alpha.
 * Converges to the ceil(alpha*reps)-th largest maximum, so the fraction at
 * the returned c is within 1/reps of alpha.  Deterministic in (seed, T,
 * alpha, reps) for any thread count.
 */
inline double calibrate_threshold(
    std::int64_t T, double sigma_x, double alpha, std::int64_t reps, std::uint64_t seed,
    double rho = 2.0, int threads = 0,
    DetectorConfig::Boundary boundary = DetectorConfig::Boundary::strict) {
    if (T < 3) throw std::invalid_argument("calibrate_threshold: need T >= 3");
    if (!(sigma_x > 0.0) || !std::isfinite(sigma_x))
        throw std::invalid_argument("calibrate_threshold: sigma_x must be positive");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("calibrate_threshold: alpha must lie in (0, 1)");
    if (reps < 100) throw std::invalid_argument("calibrate_threshold: need reps >= 100");
    if (!(rho > 1.0 && rho <= 2.0))
        throw std::invalid_argument("calibrate_threshold: rho must lie in (1, 2]");

    std::vector<double> maxima(static_cast<std::size_t>(reps));
    parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
        Rng rng(derive_seed(seed, {seed_tag::calibrate, static_cast<std::uint64_t>(r)}));
        std::vector<double> x(static_cast<std::size_t>(T));
        for (auto& v : x) v = sigma_x * rng.normal();
        const PrefixSums ps = prefix_sums(x, sigma_x);
        maxima[r] = detail::null_scan_max(ps, rho, boundary);
    });

    std::sort(maxima.begin(), maxima.end());
    const auto frac_at = [&](double c) {
        const auto lo = std::lower_bound(maxima.begin(), maxima.end(), c);
        return static_cast<double>(maxima.end() - lo) / static_cast<double>(reps);
    };
    double lo = 0.0, hi = maxima.back() + 1.0;
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (frac_at(mid) >= alpha)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

} // namespace cpscan
