#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "cpscan/bounds.hpp"
#include "cpscan/detect.hpp"
#include "cpscan/genmodel.hpp"
#include "cpscan/metrics.hpp"
#include "cpscan/multiseq.hpp"
#include "cpscan/parallel.hpp"

namespace cpscan {

/// Optional progress sink for long campaigns: (stage label, done, total).
using ProgressFn = std::function<void(const std::string&, std::int64_t, std::int64_t)>;

/** One row per jump size: both localization constants from shared
 *  realizations, reported Delta^2-normalized. */
struct Table1Report {
    std::vector<double> grid;
    std::vector<GammaEstimates> rows; // aligned with grid
    std::int64_t reps = 0;
    std::int64_t horizon = 0; // 0 = per-Delta policy
    std::uint64_t seed = 0;
};

inline Table1Report table1_campaign(std::vector<double> grid, std::int64_t reps,
                                    std::int64_t horizon, std::uint64_t seed,
                                    int threads = 0, const ProgressFn& progress = {}) {
    if (grid.empty()) throw std::invalid_argument("table1_campaign: empty grid");
    Table1Report rep;
    rep.grid = std::move(grid);
    rep.reps = reps;
    rep.horizon = horizon;
    rep.seed = seed;
    rep.rows.reserve(rep.grid.size());
    for (std::size_t d = 0; d < rep.grid.size(); ++d) {
        const std::uint64_t row_seed =
            derive_seed(seed, {seed_tag::table1, static_cast<std::uint64_t>(d)});
        rep.rows.push_back(gamma_both_mc(rep.grid[d], horizon, reps, row_seed, threads));
        if (progress)
            progress("table1 delta=" + std::to_string(rep.grid[d]),
                     static_cast<std::int64_t>(d + 1),
                     static_cast<std::int64_t>(rep.grid.size()));
    }
    return rep;
}

struct Table2Config {
    std::int64_t N = 100;
    std::int64_t T = 10000;
    double q = 1e-4;
    std::vector<std::string> labels;      // e.g. {"constant", "two_point", "beta"}
    std::vector<IntensitySpec> laws;      // aligned with labels
    JumpSpec jump = JumpSpec::hmm_yao(1.0);
    double sigma_x = 1.0;
    DetectorConfig detector{5.05, 2.0, 1.0, DetectorConfig::Mode::plain};
    std::int64_t reps = 100;
    std::int64_t em_iters = 50;
    double em_tol = 1e-8;
    double delta0 = 0.3;
    std::uint64_t seed = 1;
    int threads = 0;
};

/// The standard three intensity laws at nominal rate q: constant,
/// two-point (rate 100q with probability 1%), and the Beta law with mean q.
inline void table2_default_laws(Table2Config& cfg) {
    cfg.labels = {"constant", "two_point", "beta"};
    cfg.laws = {IntensitySpec::constant(cfg.q),
                IntensitySpec::two_point(cfg.q, 0.01, 100.0),
                IntensitySpec::beta(cfg.q)};
}

struct Table2Row {
    std::string label;
    double vg = 0.0;     // sharpness diagnostic of the law
    EvalReport no_share; // detector estimates scored directly
    EvalReport with_share;
};

struct Table2Report {
    Table2Config cfg;
    std::vector<Table2Row> rows;
};

/**
 * Shared-intensity benchmark: per intensity law, `reps` independent
 * datasets of N sequences are generated, run through the full pipeline,
 * and both arms are aggregated across replicates.  Replicate r of law g
 * draws from the seed path (seed, table2, g, r); results are bit-identical
 * for any thread count.
 */
inline Table2Report table2_campaign(const Table2Config& cfg,
                                    const ProgressFn& progress = {}) {
    if (cfg.labels.size() != cfg.laws.size() || cfg.laws.empty())
        throw std::invalid_argument("table2_campaign: need matching labels and laws");
    if (cfg.reps < 1) throw std::invalid_argument("table2_campaign: need reps >= 1");

    Table2Report report;
    report.cfg = cfg;
    std::mutex progress_mu;

    for (std::size_t g = 0; g < cfg.laws.size(); ++g) {
        std::vector<ReplicateEval> no_share(static_cast<std::size_t>(cfg.reps));
        std::vector<ReplicateEval> with_share(static_cast<std::size_t>(cfg.reps));
        std::int64_t done = 0;

        parallel_for(static_cast<std::size_t>(cfg.reps), cfg.threads, [&](std::size_t r) {
            const std::uint64_t rep_seed = derive_seed(
                cfg.seed, {seed_tag::table2, static_cast<std::uint64_t>(g),
                           static_cast<std::uint64_t>(r)});
            const MultiseqDataset ds = sample_multiseq(cfg.laws[g], cfg.N, cfg.T, cfg.jump,
                                                       cfg.sigma_x, rep_seed);
            PipelineResult pr =
                run_pipeline(ds, cfg.detector, cfg.em_iters, cfg.em_tol, cfg.delta0);
            no_share[r] = std::move(pr.no_share);
            with_share[r] = std::move(pr.with_share);
            if (progress) {
                std::lock_guard<std::mutex> lock(progress_mu);
                progress("table2 " + cfg.labels[g], ++done, cfg.reps);
            }
        });

        Table2Row row;
        row.label = cfg.labels[g];
        row.vg = vg_diagnostic(cfg.laws[g]);
        row.no_share = aggregate(std::move(no_share));
        row.no_share.delta0 = cfg.delta0;
        row.with_share = aggregate(std::move(with_share));
        row.with_share.delta0 = cfg.delta0;
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace cpscan
