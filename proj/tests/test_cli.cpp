#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cpscan/io.hpp"
#include "cpscan/tables.hpp"

using namespace cpscan;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "cpscan_cli_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string tmp_path(const std::string& name) {
    static int counter = 0;
    return (work_dir() / (std::to_string(counter++) + "_" + name)).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliResult run_cli(const std::string& args) {
    const std::string out = tmp_path("stdout"), err = tmp_path("stderr");
    const std::string cmd =
        std::string(CPSCAN_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
    const int rc = std::system(cmd.c_str());
    CliResult r;
    r.code = (rc != -1 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

json run_json(const std::string& args) {
    const auto r = run_cli(args);
    INFO(r.err);
    REQUIRE(r.code == 0);
    return io::parse_json_text(r.out, "cli stdout");
}

}  // namespace

TEST_CASE("cli: version and usage errors") {
    const auto v = run_cli("--version");
    CHECK(v.code == 0);
    CHECK(!v.out.empty());

    CHECK(run_cli("frobnicate").code == 2);
    CHECK(run_cli("").code == 2);                  // a subcommand is required
    CHECK(run_cli("generate --T 100").code == 2);  // --out is required
    CHECK(run_cli("bounds nu").code == 2);         // nu requires --delta
    CHECK(run_cli("bounds wat --delta 1").code == 2);
    CHECK(run_cli("generate --law cauchy --out " + tmp_path("x")).code == 2);
    CHECK(run_cli("detect --data /nonexistent/file.csv").code == 3);
    CHECK(run_cli("evaluate --truth /nope.json --detections /nope2.json").code == 3);
}

TEST_CASE("cli: generate is deterministic and parseable") {
    const std::string p1 = tmp_path("gen1"), p2 = tmp_path("gen2");
    const std::string args = " --N 2 --T 300 --q 0.01 --law beta --jump normal"
                             " --jump-param 2.5 --seed 7 --out ";
    REQUIRE(run_cli("generate" + args + p1).code == 0);
    REQUIRE(run_cli("generate" + args + p2).code == 0);
    CHECK(slurp(p1 + ".csv") == slurp(p2 + ".csv"));
    CHECK(slurp(p1 + ".truth.json") == slurp(p2 + ".truth.json"));

    const auto data = io::parse_dataset_csv(slurp(p1 + ".csv"));
    CHECK(data.N == 2);
    CHECK(data.T == 300);
    const auto tf = io::truth_from_json(
        io::parse_json_text(slurp(p1 + ".truth.json"), "truth"));
    CHECK(tf.T == 300);
    CHECK(tf.N == 2);
    CHECK(tf.a.size() == 299);
    CHECK(tf.config.at("law") == "beta");
    CHECK(tf.config.at("vg").get<double>() ==
          Catch::Approx(2.0 * 0.01 / 1.01).epsilon(1e-12));
}

TEST_CASE("cli: generate / detect / evaluate round trip") {
    const std::string prefix = tmp_path("e2e");
    REQUIRE(run_cli("generate --N 2 --T 800 --q 0.01 --law constant --jump point"
                    " --jump-param 8 --sigma 1 --seed 5 --out " + prefix).code == 0);

    const std::string det = tmp_path("det.json");
    REQUIRE(run_cli("detect --data " + prefix + ".csv --sigma 1 --c-scan 4.5 -o " +
                    det).code == 0);
    const auto df = io::detections_from_json(io::parse_json_text(slurp(det), "det"));
    CHECK(df.T == 800);
    REQUIRE(df.results.size() == 2);
    std::size_t found = df.results[0].size() + df.results[1].size();
    CHECK(found > 0);

    const std::string ev = tmp_path("eval.json");
    REQUIRE(run_cli("evaluate --truth " + prefix + ".truth.json --detections " + det +
                    " --delta0 0.3 -o " + ev).code == 0);
    const json j = io::parse_json_text(slurp(ev), "eval");
    const double alpha = j.at("alpha_T_hat").get<double>();
    const double beta = j.at("beta_T_hat").get<double>();
    CHECK(alpha >= 0.0);
    CHECK(alpha <= 0.6);
    CHECK(beta >= 0.3);
    CHECK(beta <= 1.0 - alpha + 1e-12);
    CHECK(j.at("replicates_used") == 1);

    // detections from a different geometry are rejected
    const std::string other = tmp_path("other");
    REQUIRE(run_cli("generate --N 2 --T 400 --q 0.01 --seed 5 --out " + other).code == 0);
    CHECK(run_cli("evaluate --truth " + other + ".truth.json --detections " + det)
              .code == 3);
}

TEST_CASE("cli: detect end-policy contract") {
    const std::string prefix = tmp_path("bnd");
    REQUIRE(run_cli("generate --N 1 --T 400 --q 0.01 --jump point --jump-param 6"
                    " --seed 7 --out " + prefix).code == 0);
    CHECK(run_cli("detect --data " + prefix + ".csv --boundary loose").code == 2);

    const std::string det = tmp_path("clip.json");
    REQUIRE(run_cli("detect --data " + prefix + ".csv --boundary clip -o " +
                    det).code == 0);
    const auto df = io::detections_from_json(io::parse_json_text(slurp(det), "det"));
    CHECK(df.cfg.boundary == DetectorConfig::Boundary::clip);
}

TEST_CASE("cli: detect extended mode contract") {
    const std::string prefix = tmp_path("ext");
    REQUIRE(run_cli("generate --N 1 --T 200 --q 0.02 --jump point --jump-param 6"
                    " --seed 3 --out " + prefix).code == 0);
    CHECK(run_cli("detect --data " + prefix + ".csv --mode extended").code == 2);
    CHECK(run_cli("detect --data " + prefix + ".csv --mode sideways").code == 2);

    const auto tf = io::truth_from_json(
        io::parse_json_text(slurp(prefix + ".truth.json"), "truth"));
    const std::string acsv = tmp_path("a.csv");
    io::write_text_file(acsv, io::intensity_to_csv(tf.a));
    const auto j = run_json("detect --data " + prefix + ".csv --mode extended"
                            " --intensity " + acsv + " --c-scan 4.5");
    CHECK(j.at("mode") == "extended");
}

TEST_CASE("cli: calibrate is reproducible across runs") {
    const std::string args = "calibrate --T 200 --reps 100 --alpha 0.1 --seed 4";
    const json a = run_json(args);
    const json b = run_json(args);
    const double c = a.at("c_scan").get<double>();
    CHECK(c == b.at("c_scan").get<double>());
    CHECK(c > 1.0);
    CHECK(c < 10.0);

    const auto table = run_cli(args + " --format table");
    CHECK(table.code == 0);
    CHECK(table.out.find("c_scan") != std::string::npos);
}

TEST_CASE("cli: bounds quantities") {
    const json nu = run_json("bounds nu --delta 10");
    CHECK(nu.at("quantity") == "overshoot_nu");
    CHECK_THAT(nu.at("value").get<double>(),
               Catch::Matchers::WithinAbs(0.02, 1e-3));

    const json bu = run_json("bounds beta-upper --jump point --jump-param 10");
    CHECK(bu.at("quantity") == "beta_upper");
    CHECK_THAT(bu.at("value").get<double>(),
               Catch::Matchers::WithinAbs(1.0, 1e-4));

    const json mc = run_json("bounds beta-upper-mc --delta 1 --reps 2000 --seed 6");
    CHECK(mc.at("value").get<double>() > 0.1);
    CHECK(mc.contains("exact"));

    const json gl = run_json("bounds gamma-lower --delta 1 --reps 500 --seed 6");
    CHECK(gl.at("quantity") == "gamma_lower");
    CHECK(gl.at("delta").get<double>() == 1.0);
    const json gs = run_json("bounds gamma-scan --jump normal --jump-param 1"
                             " --delta0 0.5 --reps 500 --seed 6");
    CHECK(gs.at("quantity") == "gamma_scan");
    CHECK(gs.at("delta0").get<double>() == 0.5);
}

TEST_CASE("cli: table1 text and json agree") {
    const std::string f1 = tmp_path("t1.txt"), f2 = tmp_path("t1.json");
    REQUIRE(run_cli("table1 --grid 1.0,0.3 --reps 100 --seed 3 -o " + f1).code == 0);
    REQUIRE(run_cli("table1 --grid 1.0,0.3 --reps 100 --seed 3 --format json -o " +
                    f2).code == 0);

    const auto rows = tables::parse_table1(slurp(f1));
    const json j = io::parse_json_text(slurp(f2), "table1");
    REQUIRE(rows.size() == 2);
    REQUIRE(j.at("rows").size() == 2);
    for (std::size_t d = 0; d < rows.size(); ++d) {
        const auto& jr = j.at("rows")[d];
        CHECK(rows[d].delta == jr.at("delta").get<double>());
        CHECK(*rows[d].d2_g_lower == jr.at("g_lower").at("normalized").get<double>());
        CHECK(*rows[d].d2_g_scan == jr.at("g_scan").at("normalized").get<double>());
        CHECK(*rows[d].d2_g_scan >= *rows[d].d2_g_lower);
        CHECK(*rows[d].d2_g_lower > 0.5);
        CHECK(*rows[d].d2_g_scan < 6.0);
    }
}

TEST_CASE("cli: table2 scaled-down run") {
    const std::string f = tmp_path("t2.json");
    REQUIRE(run_cli("table2 --N 4 --T 400 --q 0.01 --laws constant,beta"
                    " --jump point --jump-param 6 --c-scan 4.5 --reps 2"
                    " --em-iters 10 --seed 2 --format json -o " + f).code == 0);
    const json j = io::parse_json_text(slurp(f), "table2");
    CHECK(j.at("N") == 4);
    CHECK(j.at("reps") == 2);
    REQUIRE(j.at("rows").size() == 2);
    CHECK(j.at("rows")[0].at("law") == "constant");
    CHECK(j.at("rows")[0].at("vg").get<double>() == 1.0);
    CHECK(j.at("rows")[1].at("law") == "beta");
    CHECK_THAT(j.at("rows")[1].at("vg").get<double>(),
               Catch::Matchers::WithinRel(2.0 * 0.01 / 1.01, 1e-12));
    for (const auto& row : j.at("rows"))
        for (const char* arm : {"no_share", "with_share"}) {
            const double alpha = row.at(arm).at("alpha_T_hat").get<double>();
            CHECK(alpha >= 0.0);
            CHECK(alpha <= 1.0);
        }

    const std::string ft = tmp_path("t2.txt");
    REQUIRE(run_cli("table2 --N 4 --T 400 --q 0.01 --laws constant,beta"
                    " --jump point --jump-param 6 --c-scan 4.5 --reps 2"
                    " --em-iters 10 --seed 2 -o " + ft).code == 0);
    const auto rows = tables::parse_table2(slurp(ft));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].alpha_no_share == j.at("rows")[0].at("no_share").at("alpha_T_hat"));
}

TEST_CASE("cli: pipeline writes reports and the pooled estimate") {
    const std::string prefix = tmp_path("pl");
    REQUIRE(run_cli("generate --N 3 --T 400 --q 0.01 --law constant --jump point"
                    " --jump-param 6 --seed 11 --out " + prefix).code == 0);
    const std::string ahat = tmp_path("ahat.csv"), out = tmp_path("pl.json");
    REQUIRE(run_cli("pipeline --data " + prefix + ".csv --truth " + prefix +
                    ".truth.json --c-scan 4.5 --ahat-out " + ahat + " -o " +
                    out).code == 0);

    const json j = io::parse_json_text(slurp(out), "pipeline");
    CHECK(j.contains("no_share"));
    CHECK(j.contains("with_share"));
    const auto iters = j.at("em").at("iterations").get<std::int64_t>();
    CHECK(iters >= 0);
    CHECK(j.at("em").at("loglik_trace").size() ==
          static_cast<std::size_t>(iters) + 1);

    const auto a_hat = io::parse_intensity_csv(slurp(ahat));
    REQUIRE(a_hat.size() == 399);
    for (double v : a_hat) CHECK(v >= 0.0);

    // dimension mismatch between data and sidecar is an artifact error
    const std::string other = tmp_path("plo");
    REQUIRE(run_cli("generate --N 3 --T 200 --q 0.01 --seed 11 --out " + other)
                .code == 0);
    CHECK(run_cli("pipeline --data " + prefix + ".csv --truth " + other +
                  ".truth.json").code == 3);
}

TEST_CASE("cli: options can come from a config file") {
    const std::string ini = tmp_path("conf.ini");
    io::write_text_file(ini,
                        "[calibrate]\nT=200\nreps=100\nalpha=0.1\nseed=4\n");
    const auto r = run_cli("--config " + ini + " calibrate");
    INFO(r.err);
    REQUIRE(r.code == 0);
    const json a = io::parse_json_text(r.out, "calibrate");
    const json b = run_json("calibrate --T 200 --reps 100 --alpha 0.1 --seed 4");
    CHECK(a.at("c_scan").get<double>() == b.at("c_scan").get<double>());
    CHECK(a.at("T") == 200);
}
