#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpscan/campaigns.hpp"
#include "cpscan/io.hpp"
#include "cpscan/multiseq.hpp"
#include "cpscan/tables.hpp"
#include "cpscan/version.hpp"

namespace {

using nlohmann::json;
using namespace cpscan;

constexpr int exit_ok = 0;
constexpr int exit_usage = 2; // bad arguments or contract violations
constexpr int exit_io = 3;    // unreadable or malformed artifacts

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        io::write_text_file(path, text);
}

std::string kv_lines(const json& j) {
    std::string out = "# cpscan ";
    out += version_string;
    out += '\n';
    for (auto it = j.begin(); it != j.end(); ++it) {
        out += it.key();
        out += ' ';
        if (it.value().is_string())
            out += it.value().get<std::string>();
        else
            out += it.value().dump();
        out += '\n';
    }
    return out;
}

IntensitySpec law_by_name(const std::string& name, double q, double mass_hi, double scale) {
    if (name == "constant") return IntensitySpec::constant(q);
    if (name == "two_point") return IntensitySpec::two_point(q, mass_hi, scale);
    if (name == "beta") return IntensitySpec::beta(q);
    throw std::invalid_argument("unknown intensity law '" + name +
                                "' (expected constant, two_point or beta)");
}

JumpSpec jump_by_name(const std::string& name, double param) {
    if (name == "hmm") return JumpSpec::hmm_yao(param);
    if (name == "normal") return JumpSpec::normal(param);
    if (name == "point") return JumpSpec::point(param);
    throw std::invalid_argument("unknown jump law '" + name +
                                "' (expected hmm, normal or point)");
}

struct GenerateArgs {
    std::int64_t N = 3, T = 1000;
    double q = 1e-4;
    std::string law = "constant";
    double mass_hi = 0.01, scale = 100.0;
    std::string jump = "hmm";
    double jump_param = 1.0;
    double sigma = 1.0;
    std::uint64_t seed = 1;
    std::string out_prefix;
};

int cmd_generate(const GenerateArgs& a) {
    const IntensitySpec law = law_by_name(a.law, a.q, a.mass_hi, a.scale);
    const JumpSpec jump = jump_by_name(a.jump, a.jump_param);
    const MultiseqDataset ds = sample_multiseq(law, a.N, a.T, jump, a.sigma, a.seed);

    const json cfg{{"command", "generate"}, {"version", version_string},
                   {"N", a.N},             {"T", a.T},
                   {"q", a.q},             {"law", a.law},
                   {"mass_hi", a.mass_hi}, {"scale", a.scale},
                   {"jump", a.jump},       {"jump_param", a.jump_param},
                   {"sigma_x", a.sigma},   {"seed", a.seed},
                   {"vg", vg_diagnostic(law)}};
    io::write_text_file(a.out_prefix + ".csv", io::dataset_to_csv(ds));
    io::write_text_file(a.out_prefix + ".truth.json",
                        io::truth_to_json(ds, cfg).dump(2) + "\n");
    std::cerr << "wrote " << a.out_prefix << ".csv and " << a.out_prefix
              << ".truth.json\n";
    return exit_ok;
}

DetectorConfig::Boundary boundary_by_name(const std::string& name) {
    if (name == "strict") return DetectorConfig::Boundary::strict;
    if (name == "clip") return DetectorConfig::Boundary::clip;
    throw std::invalid_argument("boundary must be strict or clip");
}

struct DetectArgs {
    std::string data;
    double sigma = 1.0;
    bool estimate_sigma_flag = false;
    double c_scan = 5.05;
    double rho = 2.0;
    std::string mode = "plain";
    std::string boundary = "strict";
    std::string intensity;
    std::string output;
};

int cmd_detect(const DetectArgs& a) {
    const io::DatasetCsv data = io::parse_dataset_csv(io::read_text_file(a.data));
    std::vector<double> intensity;
    const bool extended = a.mode == "extended";
    if (a.mode != "plain" && a.mode != "extended")
        throw std::invalid_argument("mode must be plain or extended");
    if (extended) {
        if (a.intensity.empty())
            throw std::invalid_argument("extended mode requires --intensity");
        intensity = io::parse_intensity_csv(io::read_text_file(a.intensity));
    }

    std::vector<DetectionResult> results;
    std::vector<double> sigmas;
    DetectorConfig cfg;
    cfg.c_scan = a.c_scan;
    cfg.rho = a.rho;
    cfg.mode = extended ? DetectorConfig::Mode::extended : DetectorConfig::Mode::plain;
    cfg.boundary = boundary_by_name(a.boundary);
    for (const auto& x : data.cols) {
        cfg.sigma_x = a.estimate_sigma_flag ? estimate_sigma(x) : a.sigma;
        sigmas.push_back(cfg.sigma_x);
        results.push_back(extended ? extended_scan_cusum(x, intensity, cfg)
                                   : scan_cusum(x, cfg));
    }

    json out = io::detections_to_json(results, cfg, data.T);
    out["config"] = json{{"command", "detect"},
                         {"version", version_string},
                         {"data", a.data},
                         {"sigma_x", a.sigma},
                         {"sigma_estimated", a.estimate_sigma_flag},
                         {"sigma_per_sequence", sigmas},
                         {"intensity", a.intensity}};
    emit(a.output, out.dump(2) + "\n");
    return exit_ok;
}

struct EvaluateArgs {
    std::string truth, detections;
    double delta0 = 0.3;
    std::string output;
};

int cmd_evaluate(const EvaluateArgs& a) {
    const io::TruthFile tf =
        io::truth_from_json(io::parse_json_text(io::read_text_file(a.truth), "truth JSON"));
    const io::DetectionFile df = io::detections_from_json(
        io::parse_json_text(io::read_text_file(a.detections), "detection JSON"));
    if (df.T != tf.T)
        throw io::io_error("truth and detections disagree on T");
    if (df.results.size() != tf.truths.size())
        throw io::io_error("truth and detections disagree on the number of sequences");

    std::vector<SeqEval> evs;
    for (std::size_t n = 0; n < tf.truths.size(); ++n)
        if (!tf.truths[n].tau.empty())
            evs.push_back(evaluate_sequence(tf.truths[n], df.results[n], a.delta0, tf.T));
    EvalReport rep = aggregate({mean_over_sequences(std::move(evs))});
    rep.delta0 = a.delta0;

    json out = io::eval_report_to_json(rep);
    out["config"] = json{{"command", "evaluate"},
                         {"version", version_string},
                         {"truth", a.truth},
                         {"detections", a.detections},
                         {"delta0", a.delta0}};
    emit(a.output, out.dump(2) + "\n");
    return exit_ok;
}

struct CalibrateArgs {
    std::int64_t T = 10000;
    double alpha = 0.05;
    std::int64_t reps = 2000;
    double sigma = 1.0;
    double rho = 2.0;
    std::string boundary = "strict";
    std::uint64_t seed = 1;
    int threads = 0;
    std::string format = "json";
    std::string output;
};

int cmd_calibrate(const CalibrateArgs& a) {
    const double c = calibrate_threshold(a.T, a.sigma, a.alpha, a.reps, a.seed, a.rho,
                                         a.threads, boundary_by_name(a.boundary));
    const json out{{"command", "calibrate"}, {"version", version_string},
                   {"T", a.T},               {"alpha", a.alpha},
                   {"reps", a.reps},         {"sigma_x", a.sigma},
                   {"rho", a.rho},           {"boundary", a.boundary},
                   {"seed", a.seed},         {"threads", a.threads},
                   {"c_scan", c}};
    emit(a.output, a.format == "table" ? kv_lines(out) : out.dump(2) + "\n");
    return exit_ok;
}

struct BoundsArgs {
    std::string quantity;
    double delta = 0.0;
    bool has_delta = false;
    std::string jump = "normal";
    double jump_param = 1.0;
    double delta0 = 0.0;
    std::int64_t horizon = 0;
    std::int64_t reps = 10000;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string format = "json";
    std::string output;
};

int cmd_bounds(const BoundsArgs& a) {
    json out;
    if (a.quantity == "nu") {
        if (!a.has_delta) throw std::invalid_argument("nu requires --delta");
        out = json{{"quantity", "overshoot_nu"},
                   {"delta", a.delta},
                   {"value", overshoot_nu(a.delta)}};
    } else if (a.quantity == "beta-upper") {
        out = io::bound_report_to_json(beta_upper(jump_by_name(a.jump, a.jump_param)));
    } else if (a.quantity == "beta-upper-mc") {
        if (!a.has_delta) throw std::invalid_argument("beta-upper-mc requires --delta");
        out = io::bound_report_to_json(
            beta_upper_walk_mc(a.delta, a.reps, a.seed, a.horizon, a.threads));
        out["exact"] = half_delta2_nu(a.delta);
    } else if (a.quantity == "gamma-lower" || a.quantity == "gamma-scan") {
        BoundReport rep;
        if (a.has_delta) {
            rep = a.quantity == "gamma-lower"
                      ? gamma_lower_mc(a.delta, a.horizon, a.reps, a.seed, a.threads)
                      : gamma_scan_mc(a.delta, a.horizon, a.reps, a.seed, a.threads);
        } else {
            const JumpSpec jump = jump_by_name(a.jump, a.jump_param);
            rep = a.quantity == "gamma-lower"
                      ? gamma_lower_mc(jump, a.delta0, a.horizon, a.reps, a.seed, a.threads)
                      : gamma_scan_mc(jump, a.delta0, a.horizon, a.reps, a.seed, a.threads);
        }
        out = io::bound_report_to_json(rep);
    } else {
        throw std::invalid_argument(
            "unknown quantity '" + a.quantity +
            "' (expected nu, beta-upper, beta-upper-mc, gamma-lower or gamma-scan)");
    }
    out["version"] = version_string;
    out["seed"] = a.seed;
    emit(a.output, a.format == "table" ? kv_lines(out) : out.dump(2) + "\n");
    return exit_ok;
}

struct Table1Args {
    std::vector<double> grid = {1.0, 0.3, 0.1, 0.03};
    std::int64_t reps = 10000;
    std::int64_t horizon = 0;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string format = "table";
    std::string output;
};

int cmd_table1(const Table1Args& a) {
    const auto progress = [](const std::string& label, std::int64_t done,
                             std::int64_t total) {
        std::cerr << label << " (" << done << "/" << total << " rows)\n";
    };
    const Table1Report rep =
        table1_campaign(a.grid, a.reps, a.horizon, a.seed, a.threads, progress);
    emit(a.output, a.format == "json" ? tables::table1_to_json(rep).dump(2) + "\n"
                                      : tables::render_table1(rep));
    return exit_ok;
}

struct Table2Args {
    Table2Config cfg;
    std::vector<std::string> laws = {"constant", "two_point", "beta"};
    double mass_hi = 0.01, scale = 100.0;
    std::string jump = "hmm";
    double jump_param = 1.0;
    std::string boundary = io::boundary_name(Table2Config{}.detector.boundary);
    std::string format = "table";
    std::string output;
};

int cmd_table2(Table2Args& a) {
    a.cfg.labels.clear();
    a.cfg.laws.clear();
    for (const auto& name : a.laws) {
        a.cfg.labels.push_back(name);
        a.cfg.laws.push_back(law_by_name(name, a.cfg.q, a.mass_hi, a.scale));
    }
    a.cfg.jump = jump_by_name(a.jump, a.jump_param);
    a.cfg.detector.sigma_x = a.cfg.sigma_x;
    a.cfg.detector.boundary = boundary_by_name(a.boundary);
    std::int64_t stride = std::max<std::int64_t>(1, a.cfg.reps / 10);
    const auto progress = [stride](const std::string& label, std::int64_t done,
                                   std::int64_t total) {
        if (done % stride == 0 || done == total)
            std::cerr << label << ": " << done << "/" << total << " replicates\n";
    };
    const Table2Report rep = table2_campaign(a.cfg, progress);
    emit(a.output, a.format == "json" ? tables::table2_to_json(rep).dump(2) + "\n"
                                      : tables::render_table2(rep));
    return exit_ok;
}

struct PipelineArgs {
    std::string data, truth;
    double c_scan = 5.05;
    double rho = 2.0;
    std::string boundary = "strict";
    double sigma = 0.0; // 0 = take from the truth sidecar
    std::int64_t em_iters = 50;
    double em_tol = 1e-8;
    double delta0 = 0.3;
    std::string ahat_out;
    std::string output;
};

int cmd_pipeline(const PipelineArgs& a) {
    const io::DatasetCsv data = io::parse_dataset_csv(io::read_text_file(a.data));
    const io::TruthFile tf =
        io::truth_from_json(io::parse_json_text(io::read_text_file(a.truth), "truth JSON"));
    if (tf.T != data.T || tf.N != data.N)
        throw io::io_error("truth sidecar does not match the dataset dimensions");

    MultiseqDataset ds;
    ds.a = tf.a;
    ds.sigma_x = a.sigma > 0.0 ? a.sigma : tf.sigma_x;
    for (std::int64_t n = 0; n < data.N; ++n) {
        Sequence s;
        s.x = data.cols[static_cast<std::size_t>(n)];
        s.truth = tf.truths[static_cast<std::size_t>(n)];
        ds.seqs.push_back(std::move(s));
    }

    DetectorConfig cfg;
    cfg.c_scan = a.c_scan;
    cfg.rho = a.rho;
    cfg.sigma_x = ds.sigma_x;
    cfg.boundary = boundary_by_name(a.boundary);
    const PipelineResult pr = run_pipeline(ds, cfg, a.em_iters, a.em_tol, a.delta0);

    EvalReport no_share = aggregate({pr.no_share});
    no_share.delta0 = a.delta0;
    EvalReport with_share = aggregate({pr.with_share});
    with_share.delta0 = a.delta0;

    std::int64_t fallbacks = 0, windows = 0;
    for (const auto& fb : pr.refined.fallback)
        for (auto f : fb) {
            ++windows;
            fallbacks += f;
        }
    json out{{"version", version_string},
             {"config", json{{"command", "pipeline"},
                             {"data", a.data},
                             {"truth", a.truth},
                             {"c_scan", a.c_scan},
                             {"rho", a.rho},
                             {"boundary", a.boundary},
                             {"sigma_x", ds.sigma_x},
                             {"em_iters", a.em_iters},
                             {"em_tol", a.em_tol},
                             {"delta0", a.delta0}}},
             {"no_share", io::eval_report_to_json(no_share)},
             {"with_share", io::eval_report_to_json(with_share)},
             {"em", json{{"iterations", pr.em.iterations},
                         {"loglik_trace", pr.em.loglik_trace},
                         {"windows", windows},
                         {"refine_fallbacks", fallbacks}}}};
    if (!a.ahat_out.empty())
        io::write_text_file(a.ahat_out, io::intensity_to_csv(pr.em.a_hat));
    emit(a.output, out.dump(2) + "\n");
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"change-point estimation toolkit"};
    app.set_config("--config", "", "read options from an INI file (sections per command)");
    app.set_version_flag("--version", std::string(version_string));
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "simulate a shared-intensity dataset");
    g->add_option("--N", gen.N, "number of sequences")->capture_default_str();
    g->add_option("--T", gen.T, "sequence length")->capture_default_str();
    g->add_option("--q", gen.q, "nominal intensity")->capture_default_str();
    g->add_option("--law", gen.law, "intensity law: constant|two_point|beta")
        ->capture_default_str();
    g->add_option("--mass-hi", gen.mass_hi, "two_point: high-state probability")
        ->capture_default_str();
    g->add_option("--scale", gen.scale, "two_point: high-state value is scale*q")
        ->capture_default_str();
    g->add_option("--jump", gen.jump, "jump law: hmm|normal|point")->capture_default_str();
    g->add_option("--jump-param", gen.jump_param, "sigma_xi | sd | delta")
        ->capture_default_str();
    g->add_option("--sigma", gen.sigma, "observation noise sd")->capture_default_str();
    g->add_option("--seed", gen.seed, "root seed")->capture_default_str();
    g->add_option("--out", gen.out_prefix, "output prefix (.csv, .truth.json)")->required();

    DetectArgs det;
    auto* d = app.add_subcommand("detect", "run the scan detector on a dataset CSV");
    d->add_option("--data", det.data, "dataset CSV")->required();
    d->add_option("--sigma", det.sigma, "noise sd")->capture_default_str();
    d->add_flag("--estimate-sigma", det.estimate_sigma_flag,
                "estimate the noise sd per sequence instead");
    d->add_option("--c-scan", det.c_scan, "detection threshold")->capture_default_str();
    d->add_option("--rho", det.rho, "window growth factor")->capture_default_str();
    d->add_option("--mode", det.mode, "plain|extended")->capture_default_str();
    d->add_option("--boundary", det.boundary, "window policy at the ends: strict|clip")
        ->capture_default_str();
    d->add_option("--intensity", det.intensity, "intensity CSV (extended mode)");
    d->add_option("--output,-o", det.output, "output path (default stdout)");

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "score detections against ground truth");
    e->add_option("--truth", ev.truth, "truth sidecar JSON")->required();
    e->add_option("--detections", ev.detections, "detection JSON")->required();
    e->add_option("--delta0", ev.delta0, "gamma jump-size floor")->capture_default_str();
    e->add_option("--output,-o", ev.output, "output path (default stdout)");

    CalibrateArgs cal;
    auto* c = app.add_subcommand("calibrate", "Monte Carlo threshold calibration");
    c->add_option("--T", cal.T, "sequence length")->capture_default_str();
    c->add_option("--alpha", cal.alpha, "target null trigger probability")
        ->capture_default_str();
    c->add_option("--reps", cal.reps, "null replicates")->capture_default_str();
    c->add_option("--sigma", cal.sigma, "noise sd")->capture_default_str();
    c->add_option("--rho", cal.rho, "window growth factor")->capture_default_str();
    c->add_option("--boundary", cal.boundary, "window policy at the ends: strict|clip")
        ->capture_default_str();
    c->add_option("--seed", cal.seed, "root seed")->capture_default_str();
    c->add_option("--threads", cal.threads, "worker threads (0 = auto)")
        ->capture_default_str();
    c->add_option("--format", cal.format, "json|table")->capture_default_str();
    c->add_option("--output,-o", cal.output, "output path (default stdout)");

    BoundsArgs bo;
    auto* b = app.add_subcommand("bounds", "localization constants and error bounds");
    b->add_option("quantity", bo.quantity,
                  "nu | beta-upper | beta-upper-mc | gamma-lower | gamma-scan")
        ->required();
    auto* bdelta = b->add_option("--delta", bo.delta, "fixed jump size");
    b->add_option("--jump", bo.jump, "jump law: hmm|normal|point")->capture_default_str();
    b->add_option("--jump-param", bo.jump_param, "sigma_xi | sd | delta")
        ->capture_default_str();
    b->add_option("--delta0", bo.delta0, "conditioning floor |Delta| >= delta0")
        ->capture_default_str();
    b->add_option("--horizon", bo.horizon, "walk truncation (0 = policy)")
        ->capture_default_str();
    b->add_option("--reps", bo.reps, "MC replicates")->capture_default_str();
    b->add_option("--seed", bo.seed, "root seed")->capture_default_str();
    b->add_option("--threads", bo.threads, "worker threads (0 = auto)")
        ->capture_default_str();
    b->add_option("--format", bo.format, "json|table")->capture_default_str();
    b->add_option("--output,-o", bo.output, "output path (default stdout)");

    Table1Args t1;
    auto* t1c = app.add_subcommand("table1", "localization-constant table");
    t1c->add_option("--grid", t1.grid, "jump sizes")->delimiter(',')->capture_default_str();
    t1c->add_option("--reps", t1.reps, "MC replicates per jump size")
        ->capture_default_str();
    t1c->add_option("--horizon", t1.horizon, "walk truncation (0 = policy)")
        ->capture_default_str();
    t1c->add_option("--seed", t1.seed, "root seed")->capture_default_str();
    t1c->add_option("--threads", t1.threads, "worker threads (0 = auto)")
        ->capture_default_str();
    t1c->add_option("--format", t1.format, "table|json")->capture_default_str();
    t1c->add_option("--output,-o", t1.output, "output path (default stdout)");

    Table2Args t2;
    auto* t2c = app.add_subcommand("table2", "shared-intensity benchmark table");
    t2c->add_option("--N", t2.cfg.N, "sequences per dataset")->capture_default_str();
    t2c->add_option("--T", t2.cfg.T, "sequence length")->capture_default_str();
    t2c->add_option("--q", t2.cfg.q, "nominal intensity")->capture_default_str();
    t2c->add_option("--laws", t2.laws, "intensity laws to benchmark")
        ->delimiter(',')
        ->capture_default_str();
    t2c->add_option("--mass-hi", t2.mass_hi, "two_point: high-state probability")
        ->capture_default_str();
    t2c->add_option("--scale", t2.scale, "two_point: high-state value is scale*q")
        ->capture_default_str();
    t2c->add_option("--jump", t2.jump, "jump law: hmm|normal|point")
        ->capture_default_str();
    t2c->add_option("--jump-param", t2.jump_param, "sigma_xi | sd | delta")
        ->capture_default_str();
    t2c->add_option("--sigma", t2.cfg.sigma_x, "noise sd")->capture_default_str();
    t2c->add_option("--c-scan", t2.cfg.detector.c_scan, "detection threshold")
        ->capture_default_str();
    t2c->add_option("--boundary", t2.boundary, "window policy at the ends: strict|clip")
        ->capture_default_str();
    t2c->add_option("--rho", t2.cfg.detector.rho, "window growth factor")
        ->capture_default_str();
    t2c->add_option("--reps", t2.cfg.reps, "replicate datasets per law")
        ->capture_default_str();
    t2c->add_option("--em-iters", t2.cfg.em_iters, "max EM updates")->capture_default_str();
    t2c->add_option("--em-tol", t2.cfg.em_tol, "EM improvement tolerance")
        ->capture_default_str();
    t2c->add_option("--delta0", t2.cfg.delta0, "gamma jump-size floor")
        ->capture_default_str();
    t2c->add_option("--seed", t2.cfg.seed, "root seed")->capture_default_str();
    t2c->add_option("--threads", t2.cfg.threads, "worker threads (0 = auto)")
        ->capture_default_str();
    t2c->add_option("--format", t2.format, "table|json")->capture_default_str();
    t2c->add_option("--output,-o", t2.output, "output path (default stdout)");

    PipelineArgs pl;
    auto* p = app.add_subcommand("pipeline",
                                 "detect + pooled intensity EM + refinement on one dataset");
    p->add_option("--data", pl.data, "dataset CSV")->required();
    p->add_option("--truth", pl.truth, "truth sidecar JSON")->required();
    p->add_option("--c-scan", pl.c_scan, "detection threshold")->capture_default_str();
    p->add_option("--rho", pl.rho, "window growth factor")->capture_default_str();
    p->add_option("--boundary", pl.boundary, "window policy at the ends: strict|clip")
        ->capture_default_str();
    p->add_option("--sigma", pl.sigma, "noise sd (default: from the sidecar)");
    p->add_option("--em-iters", pl.em_iters, "max EM updates")->capture_default_str();
    p->add_option("--em-tol", pl.em_tol, "EM improvement tolerance")->capture_default_str();
    p->add_option("--delta0", pl.delta0, "gamma jump-size floor")->capture_default_str();
    p->add_option("--ahat-out", pl.ahat_out, "write the intensity estimate CSV here");
    p->add_option("--output,-o", pl.output, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        const int rc = app.exit(ex);
        return rc == 0 ? exit_ok : exit_usage;
    }

    try {
        bo.has_delta = bdelta->count() > 0;
        if (g->parsed()) return cmd_generate(gen);
        if (d->parsed()) return cmd_detect(det);
        if (e->parsed()) return cmd_evaluate(ev);
        if (c->parsed()) return cmd_calibrate(cal);
        if (b->parsed()) return cmd_bounds(bo);
        if (t1c->parsed()) return cmd_table1(t1);
        if (t2c->parsed()) return cmd_table2(t2);
        if (p->parsed()) return cmd_pipeline(pl);
        std::cerr << "no command given\n";
        return exit_usage;
    } catch (const io::io_error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return exit_io;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return exit_usage;
    } catch (const std::domain_error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return exit_usage;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return exit_io;
    }
}
