#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "cpscan/multiseq.hpp"
#include "cpscan/rng.hpp"

using namespace cpscan;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DetectionResult make_result(const std::vector<Interval>& ivs,
                            const std::vector<std::vector<double>>& profiles) {
  DetectionResult det;
  for (std::size_t j = 0; j < ivs.size(); ++j) {
    WeightFn lp;
    lp.offset = ivs[j].u + 1;
    lp.w = profiles[j];
    det.tau_hat.push_back(ivs[j].u + 1);
    det.intervals.push_back(ivs[j]);
    det.log_profiles.push_back(std::move(lp));
    det.window_exponent.push_back(0);
    det.fallback.push_back(0);
  }
  return det;
}

std::vector<DetectionResult> random_results(Rng& rng, std::int64_t N, std::int64_t T) {
  std::vector<DetectionResult> results;
  for (std::int64_t n = 0; n < N; ++n) {
    std::vector<Interval> ivs;
    std::vector<std::vector<double>> profs;
    const int J = static_cast<int>(rng.below(4));
    for (int j = 0; j < J; ++j) {
      const std::int64_t u = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(T - 2)));
      const std::int64_t len =
          2 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(std::min<std::int64_t>(T - u, 12) - 1)));
      ivs.push_back(Interval{u, u + len});
      std::vector<double> lp(static_cast<std::size_t>(len - 1));
      for (auto& v : lp) v = rng.normal() * 2.0;
      profs.push_back(std::move(lp));
    }
    results.push_back(make_result(ivs, profs));
  }
  return results;
}

double total_windows(const std::vector<DetectionResult>& results) {
  double t = 0.0;
  for (const auto& r : results) t += static_cast<double>(r.size());
  return t;
}

}  // namespace

TEST_CASE("intensity log likelihood: no windows, zero mass, hand case") {
  const std::int64_t T = 4;
  const std::vector<DetectionResult> empty2(2);

  // no windows: only the exposure penalty -N sum a
  auto ll = intensity_loglik(std::vector<double>{0.1, 0.2, 0.3}, empty2, T);
  CHECK_THAT(ll.value, Catch::Matchers::WithinRel(-1.2, 1e-12));
  CHECK(ll.degenerate.empty());
  ll = intensity_loglik(std::vector<double>{0.0, 0.0, 0.0}, empty2, T);
  CHECK(ll.value == 0.0);

  // one window (0, 4): ell = log(sum_t a_t e^{l_t}) - sum_t a_t
  const std::vector<DetectionResult> one{
      make_result({Interval{0, 4}}, {{1.5, -0.5, 0.25}})};
  const std::vector<double> a{0.3, 0.1, 0.05};
  ll = intensity_loglik(a, one, T);
  const double direct =
      std::log(0.3 * std::exp(1.5) + 0.1 * std::exp(-0.5) + 0.05 * std::exp(0.25)) -
      (0.3 + 0.1 + 0.05);
  CHECK_THAT(ll.value, Catch::Matchers::WithinRel(direct, 1e-13));

  // zero mass on the window interior: -inf plus the offender's coordinates
  ll = intensity_loglik(std::vector<double>{0.0, 0.0, 0.0}, one, T);
  CHECK(ll.value == -kInf);
  REQUIRE(ll.degenerate.size() == 1);
  CHECK(ll.degenerate[0].first == 0);
  CHECK(ll.degenerate[0].second == 0);

  CHECK_THROWS_AS(intensity_loglik(std::vector<double>{0.1}, one, T),
                  std::invalid_argument);
  CHECK_THROWS_AS(intensity_loglik(a, std::vector<DetectionResult>{}, T),
                  std::invalid_argument);
}

TEST_CASE("intensity log likelihood: invariant under huge profile offsets") {
  // log-scale path must not overflow when profiles sit at +-1000
  const std::vector<DetectionResult> one{
      make_result({Interval{0, 4}}, {{1001.5, 999.5, 1000.25}})};
  const std::vector<double> a{0.3, 0.1, 0.05};
  const auto hi = intensity_loglik(a, one, 4);
  const std::vector<DetectionResult> base{
      make_result({Interval{0, 4}}, {{1.5, -0.5, 0.25}})};
  const auto lo = intensity_loglik(a, base, 4);
  CHECK_THAT(hi.value - lo.value, Catch::Matchers::WithinAbs(1000.0, 1e-9));
}

TEST_CASE("EM step: softmax responsibility on a single window") {
  const std::int64_t T = 6;
  const std::vector<double> lp{2.0, -1.0, 0.5, 1.0, -3.0};
  const std::vector<DetectionResult> one{make_result({Interval{0, 6}}, {lp})};

  // flat init: responsibilities are softmax(lp)
  const std::vector<double> flat(5, 1.0 / 5.0);
  const auto next = em_step(flat, one, T);
  REQUIRE(next.size() == 5);
  double z = 0.0;
  for (double v : lp) z += std::exp(v);
  for (std::size_t k = 0; k < 5; ++k)
    CHECK_THAT(next[k], Catch::Matchers::WithinRel(std::exp(lp[k]) / z, 1e-12));

  // zeros are preserved, the rest renormalizes within the window
  const std::vector<double> holes{0.2, 0.0, 0.2, 0.2, 0.0};
  const auto nh = em_step(holes, one, T);
  CHECK(nh[1] == 0.0);
  CHECK(nh[4] == 0.0);
  const double zz = std::exp(lp[0]) + std::exp(lp[2]) + std::exp(lp[3]);
  CHECK_THAT(nh[0], Catch::Matchers::WithinRel(std::exp(lp[0]) / zz, 1e-12));

  // zero mass on the interior is a hard error
  CHECK_THROWS_AS(em_step(std::vector<double>(5, 0.0), one, T), std::invalid_argument);
}

TEST_CASE("EM estimate: no detections at all") {
  const std::vector<DetectionResult> empty3(3);
  const auto em = em_estimate_intensity(empty3, 12);
  CHECK(em.a_hat == std::vector<double>(11, 0.0));
  CHECK(em.loglik_trace == std::vector<double>{0.0});
  CHECK(em.iterations == 0);
}

TEST_CASE("EM estimate: trace is non-decreasing, mass is pinned") {
  Rng rng(88);
  int informative = 0;
  for (int rep = 0; rep < 40; ++rep) {
    const std::int64_t N = 1 + static_cast<std::int64_t>(rng.below(4));
    const std::int64_t T = 10 + static_cast<std::int64_t>(rng.below(50));
    const auto results = random_results(rng, N, T);
    const double total = total_windows(results);
    const auto em = em_estimate_intensity(results, T, 40, 1e-10);

    REQUIRE(em.loglik_trace.size() >= 1);
    for (std::size_t k = 1; k < em.loglik_trace.size(); ++k)
      CHECK(em.loglik_trace[k] >= em.loglik_trace[k - 1] - 1e-9);

    double mass = 0.0;
    for (double v : em.a_hat) {
      CHECK(v >= 0.0);
      mass += v;
    }
    if (total == 0.0) {
      CHECK(mass == 0.0);
      continue;
    }
    ++informative;
    CHECK_THAT(mass, Catch::Matchers::WithinRel(total / static_cast<double>(N), 1e-9));

    // after the first update, mass lives only on covered interiors
    if (em.iterations >= 1) {
      std::vector<bool> covered(static_cast<std::size_t>(T - 1), false);
      for (const auto& det : results)
        for (const auto& iv : det.intervals)
          for (std::int64_t t = iv.u + 1; t < iv.v; ++t)
            covered[static_cast<std::size_t>(t - 1)] = true;
      for (std::size_t k = 0; k < em.a_hat.size(); ++k)
        if (!covered[k]) CHECK(em.a_hat[k] == 0.0);
    }
  }
  CHECK(informative > 20);
}

TEST_CASE("EM estimate: converged runs sit at a fixed point") {
  // single window, distinct profile values: EM converges to a point mass
  const std::int64_t T = 8;
  const std::vector<DetectionResult> one{
      make_result({Interval{0, 8}}, {{0.9, 0.2, 1.7, -0.4, 0.8, 0.1, 1.1}})};
  const auto em = em_estimate_intensity(one, T, 500, 1e-12);
  REQUIRE(em.iterations < 500);
  const auto next = em_step(em.a_hat, one, T);
  for (std::size_t k = 0; k < next.size(); ++k)
    CHECK_THAT(next[k], Catch::Matchers::WithinAbs(em.a_hat[k], 1e-7));
  // the final iterate concentrates on the argmax of the profile
  CHECK(em.a_hat[2] > 0.999);

  // trace bookkeeping: early stop leaves the trace ending at ell(a_final)
  const auto ll = intensity_loglik(em.a_hat, one, T);
  CHECK_THAT(em.loglik_trace.back(), Catch::Matchers::WithinAbs(ll.value, 1e-12));
  CHECK(em.loglik_trace.size() == static_cast<std::size_t>(em.iterations) + 1);
}

TEST_CASE("EM estimate: iteration cap closes the trace at the returned iterate") {
  const std::int64_t T = 8;
  const std::vector<DetectionResult> one{
      make_result({Interval{0, 8}}, {{0.9, 0.2, 1.7, -0.4, 0.8, 0.1, 1.1}})};
  const auto em = em_estimate_intensity(one, T, 3, 0.0);
  CHECK(em.iterations == 3);
  REQUIRE(em.loglik_trace.size() == 4);
  const auto ll = intensity_loglik(em.a_hat, one, T);
  CHECK_THAT(em.loglik_trace.back(), Catch::Matchers::WithinAbs(ll.value, 1e-12));
}

TEST_CASE("EM estimate: copies of one sequence change nothing") {
  Rng rng(89);
  auto results1 = random_results(rng, 1, 40);
  while (results1[0].size() == 0) results1 = random_results(rng, 1, 40);
  std::vector<DetectionResult> results3{results1[0], results1[0], results1[0]};
  const auto em1 = em_estimate_intensity(results1, 40, 60, 1e-11);
  const auto em3 = em_estimate_intensity(results3, 40, 60, 1e-11);
  REQUIRE(em1.a_hat.size() == em3.a_hat.size());
  for (std::size_t k = 0; k < em1.a_hat.size(); ++k)
    CHECK_THAT(em3.a_hat[k], Catch::Matchers::WithinAbs(em1.a_hat[k], 1e-12));
}

TEST_CASE("refinement: constant, spiky, and vanishing intensities") {
  Rng rng(90);
  std::vector<double> x(120);
  for (auto& v : x) v = rng.normal();
  for (std::size_t t = 60; t < 120; ++t) x[t] += 8.0;
  DetectorConfig cfg;
  cfg.c_scan = 4.0;
  const auto det = scan_cusum(x, cfg);
  REQUIRE(det.size() >= 1);
  const std::vector<DetectionResult> results{det};

  // constant positive intensity keeps every estimate in place
  const std::vector<double> flat(119, 0.01);
  auto ref = refine_changepoints(results, flat, 120);
  REQUIRE(ref.tau[0].size() == det.size());
  CHECK(ref.tau[0] == det.tau_hat);
  for (auto f : ref.fallback[0]) CHECK(f == 0);

  // all-zero intensity: fallback to the original estimates
  const std::vector<double> zero(119, 0.0);
  ref = refine_changepoints(results, zero, 120);
  CHECK(ref.tau[0] == det.tau_hat);
  for (auto f : ref.fallback[0]) CHECK(f == 1);

  // a dominant spike interior to the window pulls the refined estimate
  const Interval iv = det.intervals[0];
  std::vector<double> spike(119, 0.0);
  const std::int64_t target = iv.u + 1;
  spike[static_cast<std::size_t>(target - 1)] = 1.0;
  ref = refine_changepoints(results, spike, 120);
  CHECK(ref.tau[0][0] == target);
  CHECK(ref.fallback[0][0] == 0);
}

TEST_CASE("pipeline: structure and bookkeeping on a simulated dataset") {
  const auto ds = sample_multiseq(IntensitySpec::beta(0.02), 6, 400,
                                  JumpSpec::hmm_yao(2.0), 1.0, 77);
  DetectorConfig cfg;
  cfg.c_scan = 4.0;
  const auto out = run_pipeline(ds, cfg, 50, 1e-8, 0.3);

  REQUIRE(out.detections.size() == 6);
  REQUIRE(out.refined.tau.size() == 6);
  REQUIRE(out.refined_tau.size() == 6);

  double total = total_windows(out.detections);
  double mass = 0.0;
  for (double v : out.em.a_hat) mass += v;
  if (total > 0.0)
    CHECK_THAT(mass, Catch::Matchers::WithinRel(total / 6.0, 1e-9));

  for (std::size_t n = 0; n < 6; ++n) {
    CHECK(out.refined.tau[n].size() == out.detections[n].size());
    for (std::size_t k = 1; k < out.refined_tau[n].size(); ++k)
      CHECK(out.refined_tau[n][k] > out.refined_tau[n][k - 1]);
  }
  for (std::size_t k = 1; k < out.em.loglik_trace.size(); ++k)
    CHECK(out.em.loglik_trace[k] >= out.em.loglik_trace[k - 1] - 1e-9);

  // both arms scored over the same J > 0 sequences
  CHECK(out.no_share.per_seq.size() == out.with_share.per_seq.size());
}
