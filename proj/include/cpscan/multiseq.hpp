#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cpscan/detect.hpp"
#include "cpscan/genmodel.hpp"
#include "cpscan/metrics.hpp"

namespace cpscan {

namespace detail {

inline void check_intensity_vector(std::span<const double> a, std::int64_t T,
                                   const char* who) {
    if (static_cast<std::int64_t>(a.size()) != T - 1)
        throw std::invalid_argument(std::string(who) + ": intensity length must be T - 1");
    for (std::size_t k = 0; k < a.size(); ++k)
        if (!(a[k] >= 0.0) || !std::isfinite(a[k]))
            throw std::invalid_argument(std::string(who) + ": a(" + std::to_string(k + 1) +
                                        ") must be finite and >= 0");
}

inline void check_results_against_T(const std::vector<DetectionResult>& results,
                                    std::int64_t T, const char* who) {
    for (std::size_t n = 0; n < results.size(); ++n)
        for (std::size_t j = 0; j < results[n].size(); ++j) {
            const Interval& iv = results[n].intervals[j];
            if (iv.u < 0 || iv.v > T || iv.v - iv.u < 2)
                throw std::invalid_argument(std::string(who) + ": interval of sequence " +
                                            std::to_string(n) + " out of range for T = " +
                                            std::to_string(T));
            if (results[n].log_profiles[j].offset != iv.u + 1 ||
                results[n].log_profiles[j].w.size() !=
                    static_cast<std::size_t>(iv.v - iv.u - 1))
                throw std::invalid_argument(std::string(who) +
                                            ": log profile misaligned with its interval");
        }
}

/**
 * One shared sweep over all detection windows under intensity `a`:
 * per window the log marginal lse_j = log sum_{t in I} a(t) L_j(t)
 * (logsumexp with max subtraction), and optionally the responsibility-
 * weighted accumulation of the next EM iterate.
 */
struct EmPass {
    double sum_lse = 0.0; // sum over windows of lse_j; -inf if any window degenerate
    std::vector<std::pair<std::int64_t, std::int64_t>> degenerate; // (n, j)
    std::vector<double> a_next;
};

inline EmPass em_pass(std::span<const double> a,
                      const std::vector<DetectionResult>& results, std::int64_t T,
                      bool want_update) {
    const double neg_inf = -std::numeric_limits<double>::infinity();
    const std::int64_t N = static_cast<std::int64_t>(results.size());
    EmPass out;
    if (want_update) out.a_next.assign(static_cast<std::size_t>(T - 1), 0.0);

    std::vector<double> terms;
    for (std::int64_t n = 0; n < N; ++n) {
        const auto& det = results[static_cast<std::size_t>(n)];
        for (std::size_t j = 0; j < det.size(); ++j) {
            const Interval& iv = det.intervals[j];
            const WeightFn& lp = det.log_profiles[j];
            terms.clear();
            double mx = neg_inf;
            for (std::int64_t t = iv.u + 1; t < iv.v; ++t) {
                const double at = a[static_cast<std::size_t>(t - 1)];
                if (!(at > 0.0)) {
                    terms.push_back(neg_inf);
                    continue;
                }
                const double v = std::log(at) + lp.w[static_cast<std::size_t>(t - iv.u - 1)];
                terms.push_back(v);
                if (v > mx) mx = v;
            }
            if (mx == neg_inf) {
                out.degenerate.emplace_back(n, static_cast<std::int64_t>(j));
                out.sum_lse = neg_inf;
                continue;
            }
            double se = 0.0;
            for (double v : terms) se += v == neg_inf ? 0.0 : std::exp(v - mx);
            const double lse = mx + std::log(se);
            if (out.sum_lse != neg_inf) out.sum_lse += lse;
            if (want_update) {
                for (std::int64_t t = iv.u + 1; t < iv.v; ++t) {
                    const double v = terms[static_cast<std::size_t>(t - iv.u - 1)];
                    if (v == neg_inf) continue;
                    out.a_next[static_cast<std::size_t>(t - 1)] +=
                        std::exp(v - lse) / static_cast<double>(N);
                }
            }
        }
    }
    return out;
}

} // namespace detail

/** Log likelihood of an intensity path given all detection windows:
 *    ell(a) = sum_{n,j} log sum_{t in I_j^n} a(t) L_j^n(t) - N sum_t a(t).
 *  Windows whose interior carries no intensity mass drive the value to
 *  -inf; they are returned as (sequence, window) offenders. */
struct IntensityLogLik {
    double value = 0.0;
    std::vector<std::pair<std::int64_t, std::int64_t>> degenerate;
};

inline IntensityLogLik intensity_loglik(std::span<const double> a,
                                        const std::vector<DetectionResult>& results,
                                        std::int64_t T) {
    if (T < 2) throw std::invalid_argument("intensity_loglik: need T >= 2");
    if (results.empty()) throw std::invalid_argument("intensity_loglik: need N >= 1");
    detail::check_intensity_vector(a, T, "intensity_loglik");
    detail::check_results_against_T(results, T, "intensity_loglik");

    auto pass = detail::em_pass(a, results, T, false);
    double mass = 0.0;
    for (double v : a) mass += v;

    IntensityLogLik out;
    out.degenerate = std::move(pass.degenerate);
    out.value = pass.sum_lse - static_cast<double>(results.size()) * mass;
    return out;
}

/// One EM update of the intensity path.  Every window must carry positive
/// posterior mass (guaranteed when starting from the standard flat init).
inline std::vector<double> em_step(std::span<const double> a,
                                   const std::vector<DetectionResult>& results,
                                   std::int64_t T) {
    if (T < 2) throw std::invalid_argument("em_step: need T >= 2");
    if (results.empty()) throw std::invalid_argument("em_step: need N >= 1");
    detail::check_intensity_vector(a, T, "em_step");
    detail::check_results_against_T(results, T, "em_step");
    auto pass = detail::em_pass(a, results, T, true);
    if (!pass.degenerate.empty())
        throw std::invalid_argument(
            "em_step: window (sequence " + std::to_string(pass.degenerate.front().first) +
            ", index " + std::to_string(pass.degenerate.front().second) +
            ") has zero posterior mass");
    return std::move(pass.a_next);
}

/** EM output: the intensity estimate, the log-likelihood trace ell(a_0),
 *  ..., ell(a_final) (non-decreasing), and the number of updates applied. */
struct EmResult {
    std::vector<double> a_hat;
    std::vector<double> loglik_trace;
    std::int64_t iterations = 0;
};

/**
 * Pooled intensity estimation across sequences.  Init is flat at
 * (total detections) / (N (T-1)), which fixes the total mass
 * sum_t a_k(t) = (sum_n J_n)/N for every iterate; iteration stops when the
 * log likelihood improves by less than `tol` or after `max_iters` updates.
 * With no detections at all the estimate is identically zero.
 */
inline EmResult em_estimate_intensity(const std::vector<DetectionResult>& results,
                                      std::int64_t T, std::int64_t max_iters = 50,
                                      double tol = 1e-8) {
    if (T < 2) throw std::invalid_argument("em_estimate_intensity: need T >= 2");
    if (results.empty()) throw std::invalid_argument("em_estimate_intensity: need N >= 1");
    if (max_iters < 0) throw std::invalid_argument("em_estimate_intensity: max_iters < 0");
    if (!(tol >= 0.0)) throw std::invalid_argument("em_estimate_intensity: tol must be >= 0");
    detail::check_results_against_T(results, T, "em_estimate_intensity");

    const std::int64_t N = static_cast<std::int64_t>(results.size());
    std::int64_t total = 0;
    for (const auto& det : results) total += static_cast<std::int64_t>(det.size());

    EmResult out;
    if (total == 0) {
        out.a_hat.assign(static_cast<std::size_t>(T - 1), 0.0);
        out.loglik_trace.push_back(0.0); // no windows, no mass penalty
        return out;
    }

    out.a_hat.assign(static_cast<std::size_t>(T - 1),
                     static_cast<double>(total) /
                         (static_cast<double>(N) * static_cast<double>(T - 1)));
    const double mass = static_cast<double>(total) / static_cast<double>(N);

    double prev_ll = -std::numeric_limits<double>::infinity();
    for (std::int64_t k = 0; k < max_iters; ++k) {
        auto pass = detail::em_pass(out.a_hat, results, T, true);
        const double ll = pass.sum_lse - static_cast<double>(N) * mass;
        out.loglik_trace.push_back(ll);
        if (k > 0 && ll - prev_ll < tol) return out; // a_k is final; trace ends at ell(a_k)
        prev_ll = ll;
        out.a_hat = std::move(pass.a_next);
        ++out.iterations;
    }
    // ran out of iterations: close the trace at the returned iterate
    auto pass = detail::em_pass(out.a_hat, results, T, false);
    out.loglik_trace.push_back(pass.sum_lse - static_cast<double>(N) * mass);
    return out;
}

/** Per window the refined estimate argmax_t [log a_hat(t) + log L(t)];
 *  fallback[n][j] = 1 where a_hat vanishes on the whole interior and the
 *  original estimate is kept. */
struct RefineResult {
    std::vector<std::vector<std::int64_t>> tau; // per sequence, in window order
    std::vector<std::vector<std::uint8_t>> fallback;
};

inline RefineResult refine_changepoints(const std::vector<DetectionResult>& results,
                                        std::span<const double> a_hat, std::int64_t T) {
    if (results.empty()) throw std::invalid_argument("refine_changepoints: need N >= 1");
    detail::check_intensity_vector(a_hat, T, "refine_changepoints");
    detail::check_results_against_T(results, T, "refine_changepoints");

    RefineResult out;
    out.tau.resize(results.size());
    out.fallback.resize(results.size());
    for (std::size_t n = 0; n < results.size(); ++n) {
        const auto& det = results[n];
        out.tau[n].reserve(det.size());
        out.fallback[n].reserve(det.size());
        for (std::size_t j = 0; j < det.size(); ++j) {
            const Interval& iv = det.intervals[j];
            const WeightFn& lp = det.log_profiles[j];
            bool have = false;
            double best = 0.0;
            std::int64_t arg = det.tau_hat[j];
            for (std::int64_t t = iv.u + 1; t < iv.v; ++t) {
                const double at = a_hat[static_cast<std::size_t>(t - 1)];
                if (!(at > 0.0)) continue;
                const double score =
                    std::log(at) + lp.w[static_cast<std::size_t>(t - iv.u - 1)];
                if (!have || score > best) {
                    best = score;
                    arg = t;
                    have = true;
                }
            }
            out.tau[n].push_back(arg);
            out.fallback[n].push_back(have ? 0 : 1);
        }
    }
    return out;
}

/** Everything one shared-intensity analysis produces. */
struct PipelineResult {
    std::vector<DetectionResult> detections;
    EmResult em;
    RefineResult refined;
    std::vector<std::vector<std::int64_t>> refined_tau; // per sequence, sorted, deduplicated
    ReplicateEval no_share;   // detector estimates scored as-is
    ReplicateEval with_share; // refined estimates
};

/**
 * Full shared-intensity pipeline on one dataset: per-sequence scan-CUSUM
 * detection, pooled EM intensity estimate, window-wise refinement, and
 * scoring of both arms on the J > 0 sequences.  Refined positions of one
 * sequence may collide across windows; they are deduplicated before
 * scoring.
 */
inline PipelineResult run_pipeline(const MultiseqDataset& ds, const DetectorConfig& cfg,
                                   std::int64_t em_iters, double em_tol, double delta0) {
    if (ds.seqs.empty()) throw std::invalid_argument("run_pipeline: empty dataset");
    const std::int64_t T = ds.size_T();

    PipelineResult out;
    out.detections.reserve(ds.seqs.size());
    for (const auto& seq : ds.seqs) out.detections.push_back(scan_cusum(seq.x, cfg));

    out.em = em_estimate_intensity(out.detections, T, em_iters, em_tol);
    out.refined = refine_changepoints(out.detections, out.em.a_hat, T);

    out.refined_tau.resize(ds.seqs.size());
    for (std::size_t n = 0; n < ds.seqs.size(); ++n) {
        auto taus = out.refined.tau[n];
        std::sort(taus.begin(), taus.end());
        taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
        out.refined_tau[n] = std::move(taus);
    }

    std::vector<SeqEval> plain_evs, refined_evs;
    for (std::size_t n = 0; n < ds.seqs.size(); ++n) {
        const GroundTruth& truth = ds.seqs[n].truth;
        if (truth.tau.empty()) continue;
        plain_evs.push_back(evaluate_sequence(truth, out.detections[n], delta0, T));
        refined_evs.push_back(evaluate_sequence(
            truth, std::span<const std::int64_t>(out.refined_tau[n]), delta0, T));
    }
    out.no_share = mean_over_sequences(std::move(plain_evs));
    out.with_share = mean_over_sequences(std::move(refined_evs));
    return out;
}

} // namespace cpscan
