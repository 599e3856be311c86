#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpscan/detect.hpp"
#include "cpscan/genmodel.hpp"

namespace cpscan {

namespace detail {

inline void check_positions(std::span<const std::int64_t> v, std::int64_t T,
                            const char* what, bool required_nonempty) {
    if (required_nonempty && v.empty())
        throw std::domain_error(std::string(what) + " must be non-empty");
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (v[k] < 1 || v[k] > T - 1)
            throw std::domain_error(std::string(what) + " entry " + std::to_string(v[k]) +
                                    " outside 1 .. T-1");
        if (k > 0 && v[k] <= v[k - 1])
            throw std::domain_error(std::string(what) + " must be strictly increasing");
    }
}

} // namespace detail

/**
 * Per true change point tau_j, the number of estimates falling strictly
 * within half the distance to its nearest neighbor (with tau_0 = 0 and
 * tau_{J+1} = T as virtual neighbors):
 *   kappa_j = #{ tau_hat : |tau_j - tau_hat| < min(tau_{j+1}-tau_j,
 *                                                  tau_j-tau_{j-1}) / 2 }.
 * Strict inequality makes the windows of neighboring tau_j disjoint.
 */
inline std::vector<std::int64_t> kappa_counts(std::span<const std::int64_t> tau,
                                              std::span<const std::int64_t> tau_hat,
                                              std::int64_t T) {
    if (T < 2) throw std::domain_error("kappa_counts: need T >= 2");
    detail::check_positions(tau, T, "kappa_counts: tau", true);
    detail::check_positions(tau_hat, T, "kappa_counts: tau_hat", false);

    std::vector<std::int64_t> kappa(tau.size(), 0);
    for (std::size_t j = 0; j < tau.size(); ++j) {
        const std::int64_t left = j == 0 ? 0 : tau[j - 1];
        const std::int64_t right = j + 1 == tau.size() ? T : tau[j + 1];
        const double w = 0.5 * static_cast<double>(std::min(tau[j] - left, right - tau[j]));
        for (std::int64_t th : tau_hat)
            if (std::fabs(static_cast<double>(th - tau[j])) < w) ++kappa[j];
    }
    return kappa;
}

/** Per-sequence detection scores; gamma_hat is absent when no true change
 *  qualifies (kappa = 1 and |delta| >= delta0). */
struct SeqEval {
    double alpha_hat = 0.0;           // fraction of true changes with kappa != 1
    double beta_hat = 0.0;            // fraction exactly recovered (kappa = 1, tau in tau_hat)
    std::optional<double> gamma_hat;  // mean |tau_j - nearest estimate| over qualifying j
    std::int64_t j_count = 0;         // J, the number of true changes
};

/**
 * Score one sequence's estimate set against its ground truth.  Requires at
 * least one true change (callers drop J = 0 sequences before scoring).
 */
inline SeqEval evaluate_sequence(const GroundTruth& truth,
                                 std::span<const std::int64_t> tau_hat, double delta0,
                                 std::int64_t T) {
    if (truth.tau.empty())
        throw std::domain_error("evaluate_sequence: sequence has no true changes");
    if (truth.delta.size() != truth.tau.size())
        throw std::domain_error("evaluate_sequence: tau/delta length mismatch");
    if (!(delta0 >= 0.0))
        throw std::domain_error("evaluate_sequence: delta0 must be >= 0");

    const auto kappa = kappa_counts(truth.tau, tau_hat, T);
    const std::int64_t J = static_cast<std::int64_t>(truth.tau.size());

    std::int64_t miss = 0, exact = 0;
    double gamma_sum = 0.0;
    std::int64_t gamma_n = 0;
    for (std::size_t j = 0; j < truth.tau.size(); ++j) {
        if (kappa[j] != 1) {
            ++miss;
            continue;
        }
        if (std::binary_search(tau_hat.begin(), tau_hat.end(), truth.tau[j])) ++exact;
        if (std::fabs(truth.delta[j]) >= delta0) {
            std::int64_t best = T;
            for (std::int64_t th : tau_hat)
                best = std::min<std::int64_t>(best, std::abs(th - truth.tau[j]));
            gamma_sum += static_cast<double>(best);
            ++gamma_n;
        }
    }

    SeqEval ev;
    ev.alpha_hat = static_cast<double>(miss) / static_cast<double>(J);
    ev.beta_hat = static_cast<double>(exact) / static_cast<double>(J);
    if (gamma_n > 0) ev.gamma_hat = gamma_sum / static_cast<double>(gamma_n);
    ev.j_count = J;
    return ev;
}

inline SeqEval evaluate_sequence(const GroundTruth& truth, const DetectionResult& result,
                                 double delta0, std::int64_t T) {
    return evaluate_sequence(truth, std::span<const std::int64_t>(result.tau_hat), delta0, T);
}

/** Scores of one replicate: the J > 0 sequences plus their plain means. */
struct ReplicateEval {
    std::vector<SeqEval> per_seq;
    std::optional<double> alpha_mean, beta_mean, gamma_mean;
};

inline ReplicateEval mean_over_sequences(std::vector<SeqEval> evs) {
    ReplicateEval rep;
    rep.per_seq = std::move(evs);
    if (rep.per_seq.empty()) return rep;
    double a = 0.0, b = 0.0, g = 0.0;
    std::int64_t gn = 0;
    for (const auto& e : rep.per_seq) {
        a += e.alpha_hat;
        b += e.beta_hat;
        if (e.gamma_hat) {
            g += *e.gamma_hat;
            ++gn;
        }
    }
    const double n = static_cast<double>(rep.per_seq.size());
    rep.alpha_mean = a / n;
    rep.beta_mean = b / n;
    if (gn > 0) rep.gamma_mean = g / static_cast<double>(gn);
    return rep;
}

/**
 * Campaign-level report: replicate means averaged across replicates, with
 * the standard error of those means (SD over replicates divided by
 * sqrt(#replicates); absent below 2 replicates).
 */
struct EvalReport {
    std::vector<ReplicateEval> reps;
    double alpha_T_hat = 0.0;
    double beta_T_hat = 0.0;
    std::optional<double> gamma_T_hat;
    std::optional<double> se_alpha, se_beta, se_gamma;
    double delta0 = 0.0;
};

namespace detail {

struct MeanSe {
    double mean = 0.0;
    std::optional<double> se;
    std::int64_t n = 0;
};

inline MeanSe mean_se(const std::vector<double>& v) {
    MeanSe m;
    m.n = static_cast<std::int64_t>(v.size());
    if (v.empty()) return m;
    double s = 0.0;
    for (double x : v) s += x;
    m.mean = s / static_cast<double>(v.size());
    if (v.size() >= 2) {
        double ss = 0.0;
        for (double x : v) ss += (x - m.mean) * (x - m.mean);
        const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
        m.se = sd / std::sqrt(static_cast<double>(v.size()));
    }
    return m;
}

} // namespace detail

/// Aggregate replicate summaries.  Replicates without any J > 0 sequence
/// carry no information and are skipped; at least one informative replicate
/// is required.
inline EvalReport aggregate(std::vector<ReplicateEval> reps) {
    std::vector<double> alphas, betas, gammas;
    for (const auto& r : reps) {
        if (r.alpha_mean) alphas.push_back(*r.alpha_mean);
        if (r.beta_mean) betas.push_back(*r.beta_mean);
        if (r.gamma_mean) gammas.push_back(*r.gamma_mean);
    }
    if (alphas.empty())
        throw std::domain_error("aggregate: no replicate carries evaluable sequences");

    EvalReport rep;
    rep.reps = std::move(reps);
    const auto a = detail::mean_se(alphas);
    const auto b = detail::mean_se(betas);
    rep.alpha_T_hat = a.mean;
    rep.se_alpha = a.se;
    rep.beta_T_hat = b.mean;
    rep.se_beta = b.se;
    if (!gammas.empty()) {
        const auto g = detail::mean_se(gammas);
        rep.gamma_T_hat = g.mean;
        rep.se_gamma = g.se;
    }
    return rep;
}

} // namespace cpscan
