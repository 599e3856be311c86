#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpscan/rng.hpp"

namespace cpscan {

/**
 * Law of the per-step change intensity a(t).  Conditional on the sampled
 * value, changes arrive as independent Bernoulli(a(t)) events.
 *
 *  - constant(q):           a(t) = q always
 *  - two_point(q, m, s):    a(t) = s*q with probability m, else 0
 *  - beta(q):               a(t) ~ Beta(q/(1-q), 1), mean exactly q
 *  - custom(x, cdf):        tabulated CDF on [0, 1], piecewise linear
 */
struct IntensitySpec {
    enum class Kind { constant, two_point, beta, custom };

    Kind kind = Kind::constant;
    double q = 0.0;       // nominal intensity parameter
    double mass_hi = 0.0; // two_point only
    double scale = 0.0;   // two_point only
    std::vector<double> table_x, table_cdf; // custom only

    static IntensitySpec constant(double q) {
        if (!(q >= 0.0 && q <= 1.0))
            throw std::invalid_argument("constant intensity: q must be in [0, 1]");
        IntensitySpec s;
        s.kind = Kind::constant;
        s.q = q;
        return s;
    }

    static IntensitySpec two_point(double q, double mass_hi, double scale) {
        if (!(q > 0.0 && q <= 1.0))
            throw std::invalid_argument("two_point intensity: q must be in (0, 1]");
        if (!(mass_hi >= 0.0 && mass_hi <= 1.0))
            throw std::invalid_argument("two_point intensity: mass_hi must be in [0, 1]");
        if (!(scale >= 0.0) || !(scale * q <= 1.0))
            throw std::invalid_argument("two_point intensity: need 0 <= scale*q <= 1");
        IntensitySpec s;
        s.kind = Kind::two_point;
        s.q = q;
        s.mass_hi = mass_hi;
        s.scale = scale;
        return s;
    }

    static IntensitySpec beta(double q) {
        if (!(q > 0.0 && q < 1.0))
            throw std::invalid_argument("beta intensity: q must be in (0, 1)");
        IntensitySpec s;
        s.kind = Kind::beta;
        s.q = q;
        return s;
    }

    static IntensitySpec custom(std::vector<double> x, std::vector<double> cdf) {
        if (x.size() != cdf.size() || x.size() < 2)
            throw std::invalid_argument("custom intensity: need >= 2 matching table points");
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (!std::isfinite(x[k]) || !std::isfinite(cdf[k]))
                throw std::invalid_argument("custom intensity: table entry not finite");
            if (x[k] < 0.0 || x[k] > 1.0)
                throw std::invalid_argument("custom intensity: support must lie in [0, 1]");
            if (k > 0 && (x[k] <= x[k - 1] || cdf[k] < cdf[k - 1]))
                throw std::invalid_argument("custom intensity: table must be strictly "
                                            "increasing in x, nondecreasing in cdf");
        }
        if (cdf.front() < 0.0 || std::fabs(cdf.back() - 1.0) > 1e-9)
            throw std::invalid_argument("custom intensity: cdf must start >= 0 and end at 1");
        IntensitySpec s;
        s.kind = Kind::custom;
        s.table_x = std::move(x);
        s.table_cdf = std::move(cdf);
        s.table_cdf.back() = 1.0;
        s.q = s.mean();
        return s;
    }

    /// Mean of the law.  For the parametric kinds this is closed form; for
    /// custom it is the exact integral of 1 - F (F piecewise linear, 0 left
    /// of the first knot, 1 right of the last).
    double mean() const {
        switch (kind) {
            case Kind::constant: return q;
            case Kind::two_point: return mass_hi * scale * q;
            case Kind::beta: return q;
            case Kind::custom: {
                double m = table_x.front() * (1.0 - 0.0); // F = 0 left of first knot
                for (std::size_t k = 0; k + 1 < table_x.size(); ++k)
                    m += 0.5 * ((1.0 - table_cdf[k]) + (1.0 - table_cdf[k + 1])) *
                         (table_x[k + 1] - table_x[k]);
                return m;
            }
        }
        return q;
    }

    double sample(Rng& rng) const {
        switch (kind) {
            case Kind::constant: return q;
            case Kind::two_point: return rng.uniform01() < mass_hi ? scale * q : 0.0;
            case Kind::beta: return std::pow(rng.uniform01_pos(), (1.0 - q) / q);
            case Kind::custom: {
                const double u = rng.uniform01();
                if (u <= table_cdf.front()) return table_x.front();
                for (std::size_t k = 1; k < table_x.size(); ++k) {
                    if (u <= table_cdf[k]) {
                        const double dc = table_cdf[k] - table_cdf[k - 1];
                        if (dc <= 0.0) return table_x[k];
                        const double f = (u - table_cdf[k - 1]) / dc;
                        return table_x[k - 1] + f * (table_x[k] - table_x[k - 1]);
                    }
                }
                return table_x.back();
            }
        }
        return 0.0;
    }
};

/**
 * Sharpness diagnostic of an intensity law,
 *   vg = (1/q) * Int_0^1 [1 - G_q(x)]^2 dx,
 * q being the nominal intensity parameter (the mean, for custom tables).
 * Closed forms: constant -> 1, two_point -> mass_hi^2 * scale,
 * beta -> 2q/(1+q); custom uses the trapezoid rule on the table knots.
 */
inline double vg_diagnostic(const IntensitySpec& spec) {
    switch (spec.kind) {
        case IntensitySpec::Kind::constant:
            if (!(spec.q > 0.0))
                throw std::domain_error("vg_diagnostic: q must be positive");
            return 1.0;
        case IntensitySpec::Kind::two_point:
            return spec.mass_hi * spec.mass_hi * spec.scale;
        case IntensitySpec::Kind::beta:
            return 2.0 * spec.q / (1.0 + spec.q);
        case IntensitySpec::Kind::custom: {
            const auto& x = spec.table_x;
            const auto& c = spec.table_cdf;
            double acc = x.front(); // (1 - 0)^2 over [0, x_0)
            for (std::size_t k = 0; k + 1 < x.size(); ++k) {
                const double a = 1.0 - c[k], b = 1.0 - c[k + 1];
                acc += 0.5 * (a * a + b * b) * (x[k + 1] - x[k]);
            }
            const double q = spec.mean();
            if (!(q > 0.0))
                throw std::domain_error("vg_diagnostic: law has zero mean");
            return acc / q;
        }
    }
    throw std::logic_error("vg_diagnostic: unknown kind");
}

/**
 * Law of the jump size Delta at a change.
 *  - normal(sd):      Delta ~ N(0, sd^2), drawn fresh at each change
 *  - point(delta):    Delta = delta deterministically
 *  - hmm_yao(sig):    level model; at a change the mean is REPLACED by an
 *                     independent N(0, sig^2) draw, so Delta = xi - mu(t).
 *                     Marginally Delta ~ N(0, 2 sig^2), but jumps are
 *                     dependent across changes.
 */
struct JumpSpec {
    enum class Kind { normal, point, hmm_yao };

    Kind kind = Kind::normal;
    double param = 1.0; // sd | delta | sigma_xi

    static JumpSpec normal(double sd) {
        if (!(sd > 0.0) || !std::isfinite(sd))
            throw std::invalid_argument("normal jump: sd must be positive and finite");
        return JumpSpec{Kind::normal, sd};
    }
    static JumpSpec point(double delta) {
        if (delta == 0.0 || !std::isfinite(delta))
            throw std::invalid_argument("point jump: delta must be nonzero and finite");
        return JumpSpec{Kind::point, delta};
    }
    static JumpSpec hmm_yao(double sigma_xi) {
        if (!(sigma_xi > 0.0) || !std::isfinite(sigma_xi))
            throw std::invalid_argument("hmm_yao jump: sigma_xi must be positive and finite");
        return JumpSpec{Kind::hmm_yao, sigma_xi};
    }
};

/** Everything the generator knows about one simulated sequence. */
struct GroundTruth {
    std::vector<std::int64_t> tau; // positions t with mu(t+1) != mu(t), ascending
    std::vector<double> delta;     // matching jump sizes mu(t+1) - mu(t)
    std::vector<double> mu;        // mean path, length T
    std::vector<double> a;         // realized intensities, length T - 1
};

struct Sequence {
    std::vector<double> x;
    GroundTruth truth;
};

/// One realized intensity path a(1..T-1) from the law.
inline std::vector<double> sample_intensity(const IntensitySpec& spec, std::int64_t T,
                                            Rng& rng) {
    if (T < 2) throw std::invalid_argument("sample_intensity: need T >= 2");
    std::vector<double> a(static_cast<std::size_t>(T - 1));
    for (auto& v : a) v = spec.sample(rng);
    return a;
}

/**
 * Simulate one sequence of length T = len(a) + 1 given realized intensities:
 * mean path with Bernoulli(a(t)) changes of law `jump`, plus iid N(0,
 * sigma_x^2) observation noise.  truth.tau records exactly the positions
 * where the mean actually moved.
 *
 * Draw order is fixed (initial level if hmm_yao; then per t the Bernoulli
 * and, on a change, the jump; then the T noise draws), so a given stream
 * always produces the same sequence.
 */
inline Sequence sample_sequence(std::span<const double> a, const JumpSpec& jump,
                                double sigma_x, Rng& rng) {
    if (a.empty()) throw std::invalid_argument("sample_sequence: need T >= 2");
    if (!(sigma_x > 0.0) || !std::isfinite(sigma_x))
        throw std::invalid_argument("sample_sequence: sigma_x must be positive and finite");
    for (std::size_t k = 0; k < a.size(); ++k)
        if (!(a[k] >= 0.0 && a[k] <= 1.0))
            throw std::invalid_argument("sample_sequence: a(" + std::to_string(k + 1) +
                                        ") outside [0, 1]");
    const std::int64_t T = static_cast<std::int64_t>(a.size()) + 1;

    Sequence out;
    out.truth.a.assign(a.begin(), a.end());
    out.truth.mu.resize(static_cast<std::size_t>(T));

    double mu = jump.kind == JumpSpec::Kind::hmm_yao ? rng.normal(0.0, jump.param) : 0.0;
    out.truth.mu[0] = mu;
    for (std::int64_t t = 1; t < T; ++t) {
        if (rng.bernoulli(a[static_cast<std::size_t>(t - 1)])) {
            double next = mu;
            switch (jump.kind) {
                case JumpSpec::Kind::normal: next = mu + rng.normal(0.0, jump.param); break;
                case JumpSpec::Kind::point: next = mu + jump.param; break;
                case JumpSpec::Kind::hmm_yao: next = rng.normal(0.0, jump.param); break;
            }
            if (next != mu) {
                out.truth.tau.push_back(t);
                out.truth.delta.push_back(next - mu);
                mu = next;
            }
        }
        out.truth.mu[static_cast<std::size_t>(t)] = mu;
    }

    out.x.resize(static_cast<std::size_t>(T));
    for (std::int64_t t = 0; t < T; ++t)
        out.x[static_cast<std::size_t>(t)] =
            out.truth.mu[static_cast<std::size_t>(t)] + sigma_x * rng.normal();
    return out;
}

/** N sequences sharing one realized intensity path. */
struct MultiseqDataset {
    std::vector<double> a; // shared realized intensities, length T - 1
    std::vector<Sequence> seqs;
    double sigma_x = 1.0;

    std::int64_t size_T() const noexcept {
        return static_cast<std::int64_t>(a.size()) + 1;
    }
    std::int64_t size_N() const noexcept {
        return static_cast<std::int64_t>(seqs.size());
    }
};

/**
 * Shared-intensity dataset: one intensity path from `spec`, then N
 * conditionally independent sequences.  Streams are derived from (seed,
 * tag, sequence index), so sequence n is reproducible in isolation and
 * N = 1 coincides exactly with sample_sequence on the derived stream.
 */
inline MultiseqDataset sample_multiseq(const IntensitySpec& spec, std::int64_t N,
                                       std::int64_t T, const JumpSpec& jump,
                                       double sigma_x, std::uint64_t seed) {
    if (N < 1) throw std::invalid_argument("sample_multiseq: need N >= 1");
    MultiseqDataset ds;
    ds.sigma_x = sigma_x;
    Rng intensity_rng(derive_seed(seed, {seed_tag::intensity}));
    ds.a = sample_intensity(spec, T, intensity_rng);
    ds.seqs.reserve(static_cast<std::size_t>(N));
    for (std::int64_t n = 0; n < N; ++n) {
        Rng rng(derive_seed(seed, {seed_tag::sequence, static_cast<std::uint64_t>(n)}));
        ds.seqs.push_back(sample_sequence(ds.a, jump, sigma_x, rng));
    }
    return ds;
}

} // namespace cpscan
