#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cpscan/genmodel.hpp"
#include "cpscan/parallel.hpp"
#include "cpscan/rng.hpp"
#include "cpscan/weight_fn.hpp"

namespace cpscan {

namespace detail {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Adaptive Simpson on [a, b] with absolute tolerance.
template <class F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int depth = 40) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Int_{v0}^inf Phi(-v)/v dv, via v = e^u so the doubly-exponential decay
/// is handled on a short interval.
inline double phi_tail_over_v(double v0) {
    const double v_stop = 10.0; // Phi(-10) ~ 7.6e-24; beyond is below double noise here
    if (v0 >= v_stop) return 0.0;
    auto f = [](double u) { return normal_cdf(-std::exp(u)); };
    return adaptive_simpson(f, std::log(v0), std::log(v_stop), 1e-15);
}

/**
 * S(|Delta|) = sum_{i>=1} Phi(-(sqrt(i)/2)|Delta|)/i.  Exact summation with
 * the geometric tail bound Phi(-x) <= exp(-x^2/2) and 1e-12 relative
 * stopping; if |Delta| is so small that convergence would need more than
 * 2e5 terms, the remainder is replaced by the integral tail
 * 2 * Int_{v0}^inf Phi(-v)/v dv with v0 = (|Delta|/2) sqrt(n0 + 1/2)
 * (midpoint Euler-Maclaurin; correction terms are below 1e-13 there).
 */
inline double overshoot_series(double abs_delta) {
    const double c = 0.5 * abs_delta;
    const double r = std::exp(-0.5 * c * c); // bound ratio per step
    const std::int64_t cap = 200000;
    double s = 0.0;
    double rpow = 1.0;
    for (std::int64_t i = 1; i <= cap; ++i) {
        s += normal_cdf(-c * std::sqrt(static_cast<double>(i))) / static_cast<double>(i);
        rpow *= r;
        if (i >= 8) {
            const double tail = rpow * r / (static_cast<double>(i + 1) * (1.0 - r));
            if (tail <= 1e-12 * s) return s;
        }
    }
    const double v0 = c * std::sqrt(static_cast<double>(cap) + 0.5);
    return s + 2.0 * phi_tail_over_v(v0);
}

} // namespace detail

/**
 * Probability that two independent unit-step Gaussian random walks with
 * drift -|Delta|/2 both stay strictly negative forever:
 *   (1/2) Delta^2 nu(Delta) = exp(-2 sum_{i>=1} Phi(-(sqrt(i)/2)|Delta|)/i).
 * This is the exact no-error kernel behind the localization upper bound.
 */
inline double half_delta2_nu(double delta) {
    if (delta == 0.0 || !std::isfinite(delta))
        throw std::domain_error("half_delta2_nu: delta must be nonzero and finite");
    return std::exp(-2.0 * detail::overshoot_series(std::fabs(delta)));
}

/// Overshoot correction nu(Delta) = (2/Delta^2) exp(-2 S(|Delta|));
/// decreasing in |Delta|, with nu(0+) = 1.
inline double overshoot_nu(double delta) {
    return 2.0 * half_delta2_nu(delta) / (delta * delta);
}

/// Truncation horizon policy for the random-walk likelihood: enough steps
/// for the drift to dominate, M = ceil(200 / Delta^2), capped at 1e6.
inline std::int64_t default_horizon(double delta) {
    if (delta == 0.0 || !std::isfinite(delta))
        throw std::domain_error("default_horizon: delta must be nonzero and finite");
    const double m = std::ceil(200.0 / (delta * delta));
    if (m >= 1e6) return 1000000;
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(m));
}

/**
 * Two-sided random-walk likelihood ratio around a change of size Delta,
 * truncated at +-horizon and kept in log scale:
 *   log p(i)  = Delta S+(i) - i Delta^2 / 2   (i > 0)
 *   log p(-i) = Delta S-(i) - i Delta^2 / 2   (i > 0)
 *   log p(0)  = 0 exactly,
 * with S+ and S- independent standard Gaussian walks.
 */
struct RandomWalkLik {
    double delta = 0.0;
    std::int64_t horizon = 0;
    WeightFn log_p; // offset -horizon, length 2*horizon + 1
};

inline RandomWalkLik simulate_rw_lik(double delta, std::int64_t horizon, Rng& rng) {
    if (delta == 0.0 || !std::isfinite(delta))
        throw std::invalid_argument("simulate_rw_lik: delta must be nonzero and finite");
    if (horizon < 1) throw std::invalid_argument("simulate_rw_lik: horizon must be >= 1");
    RandomWalkLik rw;
    rw.delta = delta;
    rw.horizon = horizon;
    rw.log_p.offset = -horizon;
    rw.log_p.w.assign(static_cast<std::size_t>(2 * horizon + 1), 0.0);
    const double half_d2 = 0.5 * delta * delta;
    double s = 0.0;
    for (std::int64_t i = 1; i <= horizon; ++i) {
        s += rng.normal();
        rw.log_p.w[static_cast<std::size_t>(horizon + i)] =
            delta * s - static_cast<double>(i) * half_d2;
    }
    s = 0.0;
    for (std::int64_t i = 1; i <= horizon; ++i) {
        s += rng.normal();
        rw.log_p.w[static_cast<std::size_t>(horizon - i)] =
            delta * s - static_cast<double>(i) * half_d2;
    }
    return rw;
}

/**
 * One scalar bound estimate plus its provenance.  `normalized` carries the
 * Delta^2-scaled form where that is meaningful (fixed-Delta gamma
 * constants); `horizon_warning` is set when any replicate's likelihood had
 * non-negligible boundary mass (within 1e-8 of the maximum), i.e. the
 * truncation horizon may bite.
 */
struct BoundReport {
    std::string quantity;
    double value = 0.0;
    std::optional<double> mc_se;
    std::optional<double> normalized, normalized_se;
    bool horizon_warning = false;
    std::int64_t horizon = 0;
    std::int64_t reps = 0;
    std::optional<double> delta, delta0;
    std::string jump; // echo of the jump law, empty when not applicable
};

namespace detail {

inline std::string jump_label(const JumpSpec& j) {
    switch (j.kind) {
        case JumpSpec::Kind::normal: return "normal(sd=" + std::to_string(j.param) + ")";
        case JumpSpec::Kind::point: return "point(delta=" + std::to_string(j.param) + ")";
        case JumpSpec::Kind::hmm_yao:
            return "hmm_yao(sigma_xi=" + std::to_string(j.param) + ")";
    }
    return "";
}

struct RwMcOut {
    double med_mean = 0.0, med_se = 0.0;
    double mode_mean = 0.0, mode_se = 0.0;
    std::int64_t warnings = 0;
};

constexpr double log_boundary_ratio = -18.420680743952367; // ln(1e-8)

/**
 * Shared driver: `reps` truncated walk likelihoods; per replicate both
 * |med(p)| and |mode(p)| from the same realization (common random numbers
 * across the med and mode columns).  The two walk sides use separate
 * derived substreams, so enlarging the horizon only appends draws and the
 * shared prefix of every replicate stays identical.
 */
inline RwMcOut rw_mc(const std::function<double(Rng&)>& delta_sampler, double fixed_delta,
                     std::int64_t horizon, std::int64_t reps, std::uint64_t seed,
                     int threads) {
    std::vector<double> med_abs(static_cast<std::size_t>(reps));
    std::vector<double> mode_abs(static_cast<std::size_t>(reps));
    std::vector<std::uint8_t> warned(static_cast<std::size_t>(reps), 0);

    parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
        double dlt = fixed_delta;
        if (delta_sampler) {
            Rng jrng(derive_seed(seed, {seed_tag::jump_draw, static_cast<std::uint64_t>(r)}));
            dlt = delta_sampler(jrng);
        }
        const std::int64_t M = horizon > 0 ? horizon : default_horizon(dlt);
        const double half_d2 = 0.5 * dlt * dlt;

        thread_local std::vector<double> w;
        w.assign(static_cast<std::size_t>(2 * M + 1), 0.0);
        Rng pos(derive_seed(seed, {seed_tag::walk, static_cast<std::uint64_t>(r)}));
        Rng neg(derive_seed(seed, {seed_tag::walk_side_neg, static_cast<std::uint64_t>(r)}));
        double s = 0.0;
        for (std::int64_t i = 1; i <= M; ++i) {
            s += pos.normal();
            w[static_cast<std::size_t>(M + i)] = dlt * s - static_cast<double>(i) * half_d2;
        }
        s = 0.0;
        for (std::int64_t i = 1; i <= M; ++i) {
            s += neg.normal();
            w[static_cast<std::size_t>(M - i)] = dlt * s - static_cast<double>(i) * half_d2;
        }

        // mode: smallest index attaining the maximal log weight
        double mx = w[0];
        std::size_t arg = 0;
        for (std::size_t k = 1; k < w.size(); ++k)
            if (w[k] > mx) {
                mx = w[k];
                arg = k;
            }
        mode_abs[r] = static_cast<double>(
            std::llabs(static_cast<std::int64_t>(arg) - M));
        if (w.front() > mx + log_boundary_ratio || w.back() > mx + log_boundary_ratio)
            warned[r] = 1;

        // median of the exponentiated weights (max-subtracted)
        double total = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            w[k] = std::exp(w[k] - mx);
            total += w[k];
        }
        const double half = 0.5 * total;
        double cum = 0.0;
        std::size_t medk = w.size() - 1;
        for (std::size_t k = 0; k < w.size(); ++k) {
            cum += w[k];
            if (cum >= half) {
                medk = k;
                break;
            }
        }
        med_abs[r] = static_cast<double>(
            std::llabs(static_cast<std::int64_t>(medk) - M));
    });

    RwMcOut out;
    const auto mean_se = [&](const std::vector<double>& v, double& mean, double& se) {
        double sum = 0.0;
        for (double x : v) sum += x;
        mean = sum / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        se = v.size() >= 2 ? std::sqrt(ss / (static_cast<double>(v.size() - 1) *
                                             static_cast<double>(v.size())))
                           : 0.0;
    };
    mean_se(med_abs, out.med_mean, out.med_se);
    mean_se(mode_abs, out.mode_mean, out.mode_se);
    for (auto b : warned) out.warnings += b;
    return out;
}

inline std::function<double(Rng&)> conditioned_jump_sampler(const JumpSpec& jump,
                                                            double delta0) {
    if (!(delta0 >= 0.0) || !std::isfinite(delta0))
        throw std::invalid_argument("gamma estimate: delta0 must be >= 0 and finite");
    switch (jump.kind) {
        case JumpSpec::Kind::point: {
            const double d = jump.param;
            if (std::fabs(d) < delta0)
                throw std::invalid_argument(
                    "gamma estimate: point jump smaller than delta0, conditioning event "
                    "is empty");
            return [d](Rng&) { return d; };
        }
        case JumpSpec::Kind::normal:
        case JumpSpec::Kind::hmm_yao: {
            const double sd = jump.kind == JumpSpec::Kind::normal
                                  ? jump.param
                                  : jump.param * std::sqrt(2.0);
            const double accept = 2.0 * normal_cdf(-delta0 / sd);
            if (accept < 1e-6)
                throw std::invalid_argument(
                    "gamma estimate: P(|Delta| >= delta0) below 1e-6, refusing to "
                    "condition by rejection");
            return [sd, delta0](Rng& rng) {
                for (;;) {
                    const double d = rng.normal(0.0, sd);
                    if (std::fabs(d) >= delta0 && d != 0.0) return d;
                }
            };
        }
    }
    throw std::logic_error("gamma estimate: unknown jump kind");
}

} // namespace detail

struct GammaEstimates {
    BoundReport lower; // E|med(p)|: the lower-bound constant
    BoundReport scan;  // E|mode(p)|: what the scan estimator attains
};

/// Fixed-Delta localization constants g_lower(Delta) = E|med(p)| and
/// g_scan(Delta) = E|mode(p)|, one MC pass for both (shared realizations).
/// horizon = 0 applies the default policy.  Normalized fields carry the
/// Delta^2-scaled values.
inline GammaEstimates gamma_both_mc(double delta, std::int64_t horizon, std::int64_t reps,
                                    std::uint64_t seed, int threads = 0) {
    if (delta == 0.0 || !std::isfinite(delta))
        throw std::invalid_argument("gamma_both_mc: delta must be nonzero and finite");
    if (reps < 2) throw std::invalid_argument("gamma_both_mc: need reps >= 2");
    if (horizon < 0) throw std::invalid_argument("gamma_both_mc: horizon must be >= 0");
    const auto mc = detail::rw_mc(nullptr, delta, horizon, reps, seed, threads);
    const std::int64_t M = horizon > 0 ? horizon : default_horizon(delta);
    const double d2 = delta * delta;

    GammaEstimates g;
    g.lower.quantity = "gamma_lower";
    g.lower.value = mc.med_mean;
    g.lower.mc_se = mc.med_se;
    g.lower.normalized = d2 * mc.med_mean;
    g.lower.normalized_se = d2 * mc.med_se;
    g.lower.horizon_warning = mc.warnings > 0;
    g.lower.horizon = M;
    g.lower.reps = reps;
    g.lower.delta = delta;
    g.scan = g.lower;
    g.scan.quantity = "gamma_scan";
    g.scan.value = mc.mode_mean;
    g.scan.mc_se = mc.mode_se;
    g.scan.normalized = d2 * mc.mode_mean;
    g.scan.normalized_se = d2 * mc.mode_se;
    return g;
}

/// Jump-law-integrated localization constants gamma(Delta0) =
/// E(|med/mode(p)| given |Delta| >= Delta0), Delta drawn from the jump law
/// by rejection.  No Delta^2 normalization is defined for random Delta.
inline GammaEstimates gamma_both_mc(const JumpSpec& jump, double delta0,
                                    std::int64_t horizon, std::int64_t reps,
                                    std::uint64_t seed, int threads = 0) {
    if (reps < 2) throw std::invalid_argument("gamma_both_mc: need reps >= 2");
    if (horizon < 0) throw std::invalid_argument("gamma_both_mc: horizon must be >= 0");
    const auto sampler = detail::conditioned_jump_sampler(jump, delta0);
    const auto mc = detail::rw_mc(sampler, 0.0, horizon, reps, seed, threads);

    GammaEstimates g;
    g.lower.quantity = "gamma_lower";
    g.lower.value = mc.med_mean;
    g.lower.mc_se = mc.med_se;
    g.lower.horizon_warning = mc.warnings > 0;
    g.lower.horizon = horizon; // 0 means per-replicate policy
    g.lower.reps = reps;
    g.lower.delta0 = delta0;
    g.lower.jump = detail::jump_label(jump);
    g.scan = g.lower;
    g.scan.quantity = "gamma_scan";
    g.scan.value = mc.mode_mean;
    g.scan.mc_se = mc.mode_se;
    return g;
}

inline BoundReport gamma_lower_mc(double delta, std::int64_t horizon, std::int64_t reps,
                                  std::uint64_t seed, int threads = 0) {
    return gamma_both_mc(delta, horizon, reps, seed, threads).lower;
}
inline BoundReport gamma_scan_mc(double delta, std::int64_t horizon, std::int64_t reps,
                                 std::uint64_t seed, int threads = 0) {
    return gamma_both_mc(delta, horizon, reps, seed, threads).scan;
}
inline BoundReport gamma_lower_mc(const JumpSpec& jump, double delta0, std::int64_t horizon,
                                  std::int64_t reps, std::uint64_t seed, int threads = 0) {
    return gamma_both_mc(jump, delta0, horizon, reps, seed, threads).lower;
}
inline BoundReport gamma_scan_mc(const JumpSpec& jump, double delta0, std::int64_t horizon,
                                 std::int64_t reps, std::uint64_t seed, int threads = 0) {
    return gamma_both_mc(jump, delta0, horizon, reps, seed, threads).scan;
}

/**
 * False-positive rate upper bound (1/2) E[Delta^2 nu(Delta)] under the jump
 * law.  Exact kernel for point jumps; for Gaussian jump sizes (hmm_yao
 * being N(0, 2 sigma_xi^2)) the expectation is an adaptive-Simpson
 * quadrature of the kernel against the density, relative tolerance 1e-6.
 */
inline BoundReport beta_upper(const JumpSpec& jump) {
    BoundReport rep;
    rep.quantity = "beta_upper";
    rep.jump = detail::jump_label(jump);
    if (jump.kind == JumpSpec::Kind::point) {
        rep.value = half_delta2_nu(jump.param);
        rep.delta = jump.param;
        return rep;
    }
    const double sd = jump.kind == JumpSpec::Kind::normal ? jump.param
                                                          : jump.param * std::sqrt(2.0);
    auto integrand = [sd](double d) {
        if (d <= 0.0) return 0.0; // kernel vanishes like d^2/2 at the origin
        const double z = d / sd;
        const double dens = std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
        return 2.0 * half_delta2_nu(d) * dens; // even integrand, fold onto d > 0
    };
    const double hi = 12.0 * sd;
    // coarse magnitude estimate sets the absolute tolerance for the
    // adaptive pass (relative 1e-6 overall)
    double coarse = 0.0;
    const int n0 = 64;
    for (int k = 0; k < n0; ++k)
        coarse += integrand((k + 0.5) * hi / n0) * hi / n0;
    rep.value = detail::adaptive_simpson(integrand, 0.0, hi,
                                         std::max(coarse, 1e-300) * 1e-6);
    return rep;
}

/**
 * Monte Carlo check of the same kernel from its probabilistic definition:
 * the fraction of replicates in which both drifted walks
 * S(i) - i|Delta|/2 stay strictly negative up to the horizon (early exit
 * on the first crossing).
 */
inline BoundReport beta_upper_walk_mc(double delta, std::int64_t reps, std::uint64_t seed,
                                      std::int64_t horizon = 0, int threads = 0) {
    if (delta == 0.0 || !std::isfinite(delta))
        throw std::invalid_argument("beta_upper_walk_mc: delta must be nonzero and finite");
    if (reps < 2) throw std::invalid_argument("beta_upper_walk_mc: need reps >= 2");
    const std::int64_t M = horizon > 0 ? horizon : default_horizon(delta);
    const double drift = 0.5 * std::fabs(delta);

    std::vector<std::uint8_t> ind(static_cast<std::size_t>(reps), 0);
    parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
        Rng pos(derive_seed(seed, {seed_tag::walk, static_cast<std::uint64_t>(r)}));
        Rng neg(derive_seed(seed, {seed_tag::walk_side_neg, static_cast<std::uint64_t>(r)}));
        const auto survives = [&](Rng& rng) {
            double s = 0.0;
            for (std::int64_t i = 1; i <= M; ++i) {
                s += rng.normal();
                if (s - static_cast<double>(i) * drift >= 0.0) return false;
            }
            return true;
        };
        ind[r] = survives(pos) && survives(neg) ? 1 : 0;
    });

    std::int64_t hits = 0;
    for (auto b : ind) hits += b;
    const double p = static_cast<double>(hits) / static_cast<double>(reps);

    BoundReport rep;
    rep.quantity = "beta_upper_walk_mc";
    rep.value = p;
    rep.mc_se = std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
    rep.horizon = M;
    rep.reps = reps;
    rep.delta = delta;
    return rep;
}

} // namespace cpscan
