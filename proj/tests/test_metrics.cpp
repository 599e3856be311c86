#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "cpscan/metrics.hpp"
#include "cpscan/rng.hpp"

using namespace cpscan;

namespace {

GroundTruth truth_of(std::vector<std::int64_t> tau, std::vector<double> delta) {
  GroundTruth t;
  t.tau = std::move(tau);
  t.delta = std::move(delta);
  return t;
}

// literal restatement of the scoring definitions
struct BruteScores {
  std::vector<std::int64_t> kappa;
  double alpha = 0.0, beta = 0.0;
  std::optional<double> gamma;
};

BruteScores brute_scores(const std::vector<std::int64_t>& tau,
                         const std::vector<double>& delta,
                         const std::vector<std::int64_t>& tau_hat, double delta0,
                         std::int64_t T) {
  BruteScores out;
  const std::size_t J = tau.size();
  out.kappa.assign(J, 0);
  for (std::size_t j = 0; j < J; ++j) {
    const double dl = static_cast<double>(tau[j] - (j == 0 ? 0 : tau[j - 1]));
    const double dr = static_cast<double>((j + 1 == J ? T : tau[j + 1]) - tau[j]);
    const double w = std::min(dl, dr) / 2.0;
    for (std::int64_t th : tau_hat)
      if (std::abs(static_cast<double>(th - tau[j])) < w) ++out.kappa[j];
  }
  double miss = 0.0, hit = 0.0, gsum = 0.0;
  int gn = 0;
  for (std::size_t j = 0; j < J; ++j) {
    if (out.kappa[j] != 1) {
      miss += 1.0;
      continue;
    }
    if (std::find(tau_hat.begin(), tau_hat.end(), tau[j]) != tau_hat.end()) hit += 1.0;
    if (std::abs(delta[j]) >= delta0) {
      std::int64_t d = T;
      for (std::int64_t th : tau_hat) d = std::min<std::int64_t>(d, std::abs(th - tau[j]));
      gsum += static_cast<double>(d);
      ++gn;
    }
  }
  out.alpha = miss / static_cast<double>(J);
  out.beta = hit / static_cast<double>(J);
  if (gn > 0) out.gamma = gsum / gn;
  return out;
}

}  // namespace

TEST_CASE("kappa counts: hand-checked windows") {
  const std::int64_t T = 100;
  const std::vector<std::int64_t> tau{50};
  // window is (50 - 25, 50 + 25), exclusive
  CHECK(kappa_counts(tau, std::vector<std::int64_t>{49}, T) == std::vector<std::int64_t>{1});
  CHECK(kappa_counts(tau, std::vector<std::int64_t>{25}, T) == std::vector<std::int64_t>{0});
  CHECK(kappa_counts(tau, std::vector<std::int64_t>{26}, T) == std::vector<std::int64_t>{1});
  CHECK(kappa_counts(tau, std::vector<std::int64_t>{30, 70}, T) == std::vector<std::int64_t>{2});
  CHECK(kappa_counts(tau, std::vector<std::int64_t>{}, T) == std::vector<std::int64_t>{0});

  // two true changes: windows are half the smaller gap on each side
  const std::vector<std::int64_t> tau2{30, 60};
  CHECK(kappa_counts(tau2, std::vector<std::int64_t>{44, 46}, T) ==
        std::vector<std::int64_t>{1, 1});
  CHECK(kappa_counts(tau2, std::vector<std::int64_t>{45}, T) == std::vector<std::int64_t>{0, 0});
}

TEST_CASE("kappa counts: input validation") {
  CHECK_THROWS_AS(kappa_counts(std::vector<std::int64_t>{}, std::vector<std::int64_t>{5}, 10),
                  std::domain_error);
  CHECK_THROWS_AS(kappa_counts(std::vector<std::int64_t>{5, 5}, std::vector<std::int64_t>{}, 10),
                  std::domain_error);
  CHECK_THROWS_AS(kappa_counts(std::vector<std::int64_t>{7, 5}, std::vector<std::int64_t>{}, 10),
                  std::domain_error);
  CHECK_THROWS_AS(kappa_counts(std::vector<std::int64_t>{10}, std::vector<std::int64_t>{}, 10),
                  std::domain_error);
  CHECK_THROWS_AS(kappa_counts(std::vector<std::int64_t>{5}, std::vector<std::int64_t>{3, 2}, 10),
                  std::domain_error);
}

TEST_CASE("sequence scores: hand-checked") {
  const std::int64_t T = 100;
  const auto t1 = truth_of({50}, {1.0});

  auto ev = evaluate_sequence(t1, std::vector<std::int64_t>{50}, 0.3, T);
  CHECK(ev.alpha_hat == 0.0);
  CHECK(ev.beta_hat == 1.0);
  REQUIRE(ev.gamma_hat.has_value());
  CHECK(*ev.gamma_hat == 0.0);

  ev = evaluate_sequence(t1, std::vector<std::int64_t>{49}, 0.3, T);
  CHECK(ev.alpha_hat == 0.0);
  CHECK(ev.beta_hat == 0.0);
  CHECK(*ev.gamma_hat == 1.0);

  // kappa = 2: missed, no gamma contribution
  ev = evaluate_sequence(t1, std::vector<std::int64_t>{40, 60}, 0.3, T);
  CHECK(ev.alpha_hat == 1.0);
  CHECK(ev.beta_hat == 0.0);
  CHECK_FALSE(ev.gamma_hat.has_value());

  // small jump excluded from gamma by delta0
  ev = evaluate_sequence(truth_of({50}, {0.1}), std::vector<std::int64_t>{49}, 0.3, T);
  CHECK(ev.alpha_hat == 0.0);
  CHECK_FALSE(ev.gamma_hat.has_value());

  CHECK_THROWS_AS(evaluate_sequence(truth_of({}, {}), std::vector<std::int64_t>{5}, 0.3, T),
                  std::domain_error);
}

TEST_CASE("sequence scores: match a literal restatement on random inputs") {
  Rng rng(55);
  for (int rep = 0; rep < 3000; ++rep) {
    const std::int64_t T = 20 + static_cast<std::int64_t>(rng.below(180));
    std::set<std::int64_t> tset;
    const int J = 1 + static_cast<int>(rng.below(6));
    while (static_cast<int>(tset.size()) < J)
      tset.insert(1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(T - 1))));
    std::vector<std::int64_t> tau(tset.begin(), tset.end());
    std::vector<double> delta;
    for (std::size_t j = 0; j < tau.size(); ++j) delta.push_back(rng.normal());
    std::set<std::int64_t> hset;
    const int H = static_cast<int>(rng.below(8));
    while (static_cast<int>(hset.size()) < H)
      hset.insert(1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(T - 1))));
    const std::vector<std::int64_t> tau_hat(hset.begin(), hset.end());
    const double delta0 = rng.uniform01();

    const auto brute = brute_scores(tau, delta, tau_hat, delta0, T);
    CHECK(kappa_counts(tau, tau_hat, T) == brute.kappa);

    const auto ev = evaluate_sequence(truth_of(tau, delta), tau_hat, delta0, T);
    CHECK(ev.alpha_hat == brute.alpha);
    CHECK(ev.beta_hat == brute.beta);
    CHECK(ev.gamma_hat.has_value() == brute.gamma.has_value());
    if (ev.gamma_hat) CHECK(*ev.gamma_hat == *brute.gamma);

    // structural invariants: disjoint windows, score bounds
    std::int64_t ksum = 0;
    for (auto k : brute.kappa) ksum += k;
    CHECK(ksum <= static_cast<std::int64_t>(tau_hat.size()));
    CHECK(ev.beta_hat <= 1.0 - ev.alpha_hat + 1e-15);
    CHECK(ev.j_count == J);
  }
}

TEST_CASE("replicate and campaign aggregation") {
  // two replicates with alpha means 0.2 and 0.4 aggregate to 0.3 +- 0.1
  SeqEval e1;
  e1.alpha_hat = 0.2;
  e1.beta_hat = 0.5;
  e1.gamma_hat = 2.0;
  e1.j_count = 5;
  SeqEval e2;
  e2.alpha_hat = 0.4;
  e2.beta_hat = 0.3;
  e2.j_count = 5;

  const auto r1 = mean_over_sequences({e1});
  const auto r2 = mean_over_sequences({e2});
  REQUIRE(r1.alpha_mean.has_value());
  CHECK(*r1.alpha_mean == 0.2);
  CHECK(*r1.gamma_mean == 2.0);
  CHECK_FALSE(r2.gamma_mean.has_value());

  const auto rep = aggregate({r1, r2});
  CHECK_THAT(rep.alpha_T_hat, Catch::Matchers::WithinRel(0.3, 1e-12));
  REQUIRE(rep.se_alpha.has_value());
  CHECK_THAT(*rep.se_alpha, Catch::Matchers::WithinRel(0.1, 1e-12));
  CHECK_THAT(rep.beta_T_hat, Catch::Matchers::WithinRel(0.4, 1e-12));
  // only one replicate has gamma: mean present, SE absent
  REQUIRE(rep.gamma_T_hat.has_value());
  CHECK(*rep.gamma_T_hat == 2.0);
  CHECK_FALSE(rep.se_gamma.has_value());

  // replicate means average sequences within the replicate first
  const auto rboth = mean_over_sequences({e1, e2});
  CHECK_THAT(*rboth.alpha_mean, Catch::Matchers::WithinRel(0.3, 1e-12));
  const auto single = aggregate({rboth});
  CHECK_FALSE(single.se_alpha.has_value());

  // empty replicates are skipped; all-empty is an error
  const auto rempty = mean_over_sequences({});
  const auto skip = aggregate({rempty, r1, r2});
  CHECK_THAT(skip.alpha_T_hat, Catch::Matchers::WithinRel(0.3, 1e-12));
  CHECK_THROWS_AS(aggregate({rempty}), std::domain_error);
}
