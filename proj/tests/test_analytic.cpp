#include <cmath>
#include <vector>

#include "doctest.h"
#include "dyncover/analytic.hpp"
#include "dyncover/simulate.hpp"
#include "dyncover/stats.hpp"

using namespace dyncover;
using namespace dyncover::analytic;
using doctest::Approx;

namespace {

// ---- Test-only oracles, independent of the closed forms under test. ----

// Poisson(lambda) pmf, iterated.
std::vector<double> poisson_pmf(double lambda, int terms) {
  std::vector<double> pmf(terms);
  pmf[0] = std::exp(-lambda);
  for (int m = 1; m < terms; ++m) pmf[m] = pmf[m - 1] * lambda / m;
  return pmf;
}

// P(vertex j unvisited by T) by conditioning on the move counts of every
// interval: prod_s E[(1 - 1/(n_s - 1))^{M_s}], each expectation a truncated
// series. n_s = k0 + s - 1 vertices live during interval s.
double unvisited_series(VertexId j, int T, int k0, double lambda) {
  const auto pmf = poisson_pmf(lambda, 80);
  const int first_interval = j <= k0 ? 1 : static_cast<int>(j - k0) + 1;
  double prob = 1.0;
  for (int s = first_interval; s <= T; ++s) {
    const double miss = 1.0 - 1.0 / (k0 + s - 2);
    double e = 0.0;
    double power = 1.0;
    for (double p : pmf) {
      e += p * power;
      power *= miss;
    }
    prob *= e;
  }
  return prob;
}

double expected_covered_series(int T, int k0, double lambda) {
  double e = 1.0;
  for (VertexId j = 2; j <= k0 + T - 1; ++j) e += 1.0 - unvisited_series(j, T, k0, lambda);
  return e;
}

// Occupation probability after one unit interval: condition on the number
// of moves and push the point mass through the kernel by brute force.
double unit_time_series(double p, int k0, double lambda) {
  const auto pmf = poisson_pmf(lambda, 60);
  std::vector<double> dist(k0, (1.0 - p) / (k0 - 1));
  dist[0] = p;
  double total = 0.0;
  for (std::size_t r = 0; r < pmf.size(); ++r) {
    total += pmf[r] * dist[0];
    dist = brute_force_step_distribution(dist, 1);
  }
  return total;
}

// Expected arrivals at v during one unit interval: E[sum_{i<=M} p_i].
double arrivals_series(double p, int k0, double lambda) {
  const auto pmf = poisson_pmf(lambda, 60);
  std::vector<double> dist(k0, (1.0 - p) / (k0 - 1));
  dist[0] = p;
  double cumulative = 0.0;  // sum_{i=1}^r p_i
  double total = 0.0;
  for (std::size_t r = 1; r < pmf.size(); ++r) {
    dist = brute_force_step_distribution(dist, 1);
    cumulative += dist[0];
    total += pmf[r] * cumulative;
  }
  return total;
}

ModelConfig config(int k0, double lambda, int T, std::uint64_t seed = 7) {
  ModelConfig c;
  c.k0 = k0;
  c.lambda = lambda;
  c.horizon = T;
  c.seed = seed;
  return c;
}

bool within_sigmas(double analytic, const stats::McEstimate& e, double k) {
  return std::abs(e.mean - analytic) <= k * e.stderr_;
}

const std::vector<double> kLambdas = {0.1, 0.5, 1.0, 2.0, 5.0};

}  // namespace

TEST_CASE("visit_prob edge cases") {
  CHECK(visit_prob(1, 5, 3, 1.0) == 1.0);
  CHECK(visit_prob(8, 5, 3, 1.0) == 0.0);   // j = k0 + T
  CHECK(visit_prob(20, 5, 3, 1.0) == 0.0);
  CHECK(visit_prob(2, 1, 3, 1.0) == Approx(1.0 - std::exp(-0.5)).epsilon(1e-15));
  CHECK_THROWS_AS(visit_prob(2, 0, 3, 1.0), ConfigError);
  CHECK_THROWS_AS(visit_prob(0, 2, 3, 1.0), ConfigError);
  CHECK_THROWS_AS(visit_prob(2, 2, 2, 1.0), ConfigError);
}

TEST_CASE("visit_prob matches the move-count series oracle") {
  for (int k0 : {3, 4, 7}) {
    for (double lambda : {0.3, 1.0, 2.5}) {
      for (int T : {1, 2, 6}) {
        for (VertexId j = 2; j <= k0 + T - 1; ++j) {
          CHECK(visit_prob(j, T, k0, lambda) ==
                Approx(1.0 - unvisited_series(j, T, k0, lambda)).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("visit_prob for v2 over the first interval matches Monte Carlo") {
  // Frequency with which v2 is reached before time 1, 10^6 runs.
  const auto c = config(3, 1.0, 1, 11);
  Walker walker(c);
  std::uint64_t hits = 0;
  const std::uint64_t n = 1'000'000;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto r = walker.run(i, {.record_first_visits = true});
    hits += r.summary.first_visit_time.count(2);
  }
  const double freq = static_cast<double>(hits) / n;
  const double u = visit_prob(2, 1, 3, 1.0);
  CHECK(std::abs(freq - u) <= 4.0 * std::sqrt(u * (1 - u) / n));
}

TEST_CASE("expected_covered") {
  CHECK(expected_covered(1, 3, 0.0) == 1.0);
  CHECK(expected_covered(0, 3, 1.0) == 1.0);
  CHECK(expected_covered(1, 3, 1.0) ==
        Approx(3.0 - 2.0 * std::exp(-0.5)).epsilon(1e-15));
  CHECK(expected_covered(1, 3, 1.0) == Approx(1.7869386805747332).epsilon(1e-14));
  CHECK(expected_covered(2000, 3, 1.0) / 2000 == Approx(0.5).epsilon(0.05));

  for (int T : {1, 3, 9}) {
    CHECK(expected_covered(T, 4, 1.7) ==
          Approx(expected_covered_series(T, 4, 1.7)).epsilon(1e-12));
  }
}

TEST_CASE("expected_covered agrees with the sum of visit probabilities") {
  for (int k0 = 3; k0 <= 10; ++k0) {
    for (double lambda : kLambdas) {
      for (int T = 1; T <= 200; T += 13) {
        double sum = 1.0;
        for (VertexId j = 2; j <= k0 + T - 1; ++j) sum += visit_prob(j, T, k0, lambda);
        CHECK(expected_covered(T, k0, lambda) == Approx(sum).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("asymptotes") {
  CHECK(expected_covered_asymptote(0) == 0.0);
  CHECK(expected_covered_asymptote(1) == 0.5);
  CHECK(expected_covered_asymptote(3) == 0.75);
  CHECK(variance_covered_asymptote(0) == 0.0);
  CHECK(variance_covered_asymptote(1) == Approx(1.0 / 6.0));
  CHECK(variance_covered_asymptote(2) == Approx(2.0 / 15.0));
  for (double lambda : {0.5, 1.0, 2.0}) {
    CHECK(expected_covered(2000, 3, lambda) / 2000 ==
          Approx(expected_covered_asymptote(lambda)).epsilon(0.05));
    CHECK(variance_covered(2000, 3, lambda) / 2000 ==
          Approx(variance_covered_asymptote(lambda)).epsilon(0.05));
  }
}

TEST_CASE("variance_covered") {
  CHECK(variance_covered(5, 3, 0.0) == 0.0);
  CHECK(variance_covered(0, 3, 1.0) == 0.0);
  const double u = 1.0 - unvisited_series(2, 1, 3, 1.0);
  CHECK(variance_covered(1, 3, 1.0) == Approx(2.0 * u * (1.0 - u)).epsilon(1e-12));
  CHECK(variance_covered(1, 3, 1.0) == Approx(0.4773024370823822).epsilon(1e-13));
}

TEST_CASE("azuma_tail_bound") {
  CHECK(azuma_tail_bound(0.0, 17, 4) == 1.0);
  CHECK(azuma_tail_bound(std::sqrt(13.0), 10, 3) == Approx(std::exp(-2.0)));
  CHECK(azuma_tail_bound(10.0, 100, 3) == Approx(std::exp(-200.0 / 103.0)));
  CHECK(azuma_tail_bound(10.0, 100, 3) == Approx(0.1434).epsilon(1e-3));
  CHECK_THROWS_AS(azuma_tail_bound(-1.0, 10, 3), ConfigError);
}

TEST_CASE("no_return_prob and its recursion") {
  CHECK(no_return_prob(0, 5, 2.0) == 1.0);
  CHECK(no_return_prob_recursive(0, 3, 1.0) == 1.0);

  // One unrolling at T = 1: e^{-1} P(0, 4) + (2/1) e^{-(H(2)-H(1))}.
  const double unrolled = std::exp(-1.0) + 2.0 * std::exp(-0.5);
  CHECK(no_return_prob_recursive(1, 3, 1.0) == Approx(unrolled).epsilon(1e-15));
  CHECK(no_return_prob(1, 3, 1.0) == Approx(unrolled).epsilon(1e-15));

  CHECK(no_return_prob(3, 4, 1.0) ==
        Approx(no_return_prob_recursive(3, 4, 1.0)).epsilon(1e-12));
  CHECK(no_return_prob(50, 10, 0.7) ==
        Approx(no_return_prob_recursive(50, 10, 0.7)).epsilon(1e-12));

  // The verbatim expression leaves [0, 1] at lambda = 0.
  CHECK(no_return_prob(2, 3, 0.0) > 1.0);
  CHECK(no_return_prob(2, 3, 0.0) == Approx(1.0 + 2.0 + 1.5));
}

TEST_CASE("step_return_prob") {
  CHECK(step_return_prob(0, 0.37, 5) == Approx(0.37).epsilon(1e-15));
  CHECK(step_return_prob(7, 0.25, 4) == Approx(0.25).epsilon(1e-15));
  CHECK(step_return_prob(2, 1.0, 3) == Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(step_return_prob(1, 1.5, 3), ConfigError);
  CHECK_THROWS_AS(step_return_prob(-1, 0.5, 3), ConfigError);
}

TEST_CASE("step_return_prob matches the kernel iteration") {
  for (int k0 = 3; k0 <= 10; ++k0) {
    for (double p : {0.0, 1.0 / k0, 1.0}) {
      std::vector<double> dist(k0, (1.0 - p) / (k0 - 1));
      dist[0] = p;
      for (int r = 0; r <= 50; ++r) {
        CHECK(std::abs(step_return_prob(r, p, k0) - dist[0]) <= 1e-12);
        dist = brute_force_step_distribution(dist, 1);
      }
    }
  }
}

TEST_CASE("step_return_prob contracts geometrically toward 1/k0") {
  for (int k0 : {3, 5, 10}) {
    for (double p : {0.0, 0.5 / k0, 1.0}) {
      double prev = std::abs(step_return_prob(0, p, k0) - 1.0 / k0);
      // Stop before the gap drops below double resolution around 1/k0.
      for (int r = 1; std::pow(k0 - 1.0, -r) > 1e-11; ++r) {
        const double gap = std::abs(step_return_prob(r, p, k0) - 1.0 / k0);
        CHECK(gap < prev);
        CHECK(gap == Approx(prev / (k0 - 1)).epsilon(1e-9));
        prev = gap;
      }
    }
  }
}

TEST_CASE("unit_time_at_v") {
  CHECK(unit_time_at_v(1.0 / 6.0, 6, 2.3) == Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(unit_time_at_v(0.8, 4, 0.0) == Approx(0.8).epsilon(1e-15));
  CHECK(unit_time_at_v(1.0, 3, 1.0) ==
        Approx(1.0 / 3.0 + 2.0 / 3.0 * std::exp(-1.5)).epsilon(1e-15));
  for (int k0 : {3, 6}) {
    for (double p : {0.0, 0.4, 1.0}) {
      CHECK(unit_time_at_v(p, k0, 1.3) == Approx(unit_time_series(p, k0, 1.3)).epsilon(1e-12));
    }
  }
}

TEST_CASE("unit_time_at_v matches Monte Carlo on three fixed vertices") {
  // With T = 1 the only insertion is at the horizon, so the walk runs on
  // exactly three vertices.
  const auto e = stats::estimate(config(3, 1.0, 1, 3), stats::Statistic::AtStartAtT,
                                 1'000'000);
  CHECK(within_sigmas(unit_time_at_v(1.0, 3, 1.0), e, 4.0));
}

TEST_CASE("at_start_prob") {
  CHECK(at_start_prob(0, 7, 1.0) == 1.0);
  CHECK(at_start_prob_recursive(0, 7, 1.0) == 1.0);
  CHECK(at_start_prob(1, 3, 1.0) == Approx(unit_time_at_v(1.0, 3, 1.0)).epsilon(1e-14));
  CHECK(at_start_prob_recursive(1, 3, 1.0) ==
        Approx(1.0 / 3.0 + 2.0 / 3.0 * std::exp(-1.5)).epsilon(1e-15));
  CHECK(at_start_prob(30, 5, 0.3) ==
        Approx(at_start_prob_recursive(30, 5, 0.3)).epsilon(1e-12));
  CHECK(at_start_prob(7, 4, 0.0) == 1.0);

  // Large horizons stay finite and close to 1/(k0+T-1).
  const double q = at_start_prob(100'000, 3, 5.0);
  CHECK(std::isfinite(q));
  CHECK(q == Approx(1.0 / 100'002).epsilon(1e-3));
}

TEST_CASE("at_start_prob matches Monte Carlo at T = 4") {
  const auto e =
      stats::estimate(config(3, 1.5, 4, 5), stats::Statistic::AtStartAtT, 1'000'000);
  CHECK(within_sigmas(at_start_prob(4, 3, 1.5), e, 3.0));
}

TEST_CASE("expected_visits_unit") {
  CHECK(expected_visits_unit(0.5, 4, 0.0) == 0.0);
  CHECK(expected_visits_unit(0.2, 5, 2.0) == Approx(0.4).epsilon(1e-15));
  CHECK(expected_visits_unit(1.0, 3, 1.0) ==
        Approx(1.0 / 3.0 - 2.0 / 9.0 * (1.0 - std::exp(-1.5))).epsilon(1e-15));
  CHECK(expected_visits_unit(1.0, 3, 1.0) == Approx(0.1606950).epsilon(1e-6));
  for (double p : {0.0, 0.3, 1.0}) {
    CHECK(expected_visits_unit(p, 5, 0.9) == Approx(arrivals_series(p, 5, 0.9)).epsilon(1e-12));
  }
  const auto e = stats::estimate(config(3, 1.0, 1, 13), stats::Statistic::VisitsToStart,
                                 1'000'000);
  CHECK(within_sigmas(expected_visits_unit(1.0, 3, 1.0), e, 4.0));
}

TEST_CASE("expected_visits") {
  CHECK(expected_visits(0, 3, 1.0) == 0.0);
  CHECK(expected_visits(1, 3, 1.0) == Approx(expected_visits_unit(1.0, 3, 1.0)).epsilon(1e-15));
  CHECK(expected_visits(12, 6, 0.0) == 0.0);
  const auto e =
      stats::estimate(config(3, 1.0, 5, 17), stats::Statistic::VisitsToStart, 1'000'000);
  CHECK(within_sigmas(expected_visits(5, 3, 1.0), e, 3.0));
}

TEST_CASE("identities and bounds over the grid") {
  for (int k0 = 3; k0 <= 10; ++k0) {
    for (double lambda : kLambdas) {
      const auto q = at_start_prob_sequence(200, k0, lambda);
      for (int T = 0; T <= 200; T += 7) {
        CHECK(no_return_prob(T, k0, lambda) ==
              Approx(no_return_prob_recursive(T, k0, lambda)).epsilon(1e-12));
        CHECK(at_start_prob(T, k0, lambda) == Approx(q[T]).epsilon(1e-12));
        CHECK(q[T] >= 0.0);
        CHECK(q[T] <= 1.0);
        if (T == 0) continue;
        double prev = 1.0;
        for (VertexId j = 2; j <= k0 + T; ++j) {
          const double u = visit_prob(j, T, k0, lambda);
          CHECK(u >= 0.0);
          CHECK(u <= 1.0);
          if (j >= k0 + 1) CHECK(u <= prev);
          prev = u;
        }
      }
    }
  }
}

TEST_CASE("full_report") {
  auto c = config(3, 1.0, 1);
  const auto r = full_report(c);
  CHECK(r.values.at(kExpectedCovered) == Approx(1.7869387).epsilon(1e-7));
  CHECK(r.values.at(kVarianceCovered) == Approx(0.4773024).epsilon(1e-7));
  CHECK(r.values.at(kAtStart) == Approx(0.4820868).epsilon(1e-7));
  CHECK(r.values.size() == r.refs.size());

  const auto frozen = full_report(config(3, 0.0, 10));
  CHECK(frozen.values.at(kExpectedCovered) == 1.0);
  CHECK(frozen.values.at(kVarianceCovered) == 0.0);
  CHECK(frozen.values.at(kExpectedVisits) == 0.0);
  CHECK(frozen.values.at(kAtStart) == 1.0);

  c.insertion = PoissonInsertion{1.0};
  CHECK_THROWS_WITH_AS(full_report(c), "analytic report requires deterministic insertion",
                       ConfigError);

  const auto doc = to_json(r);
  CHECK(doc.at("values").at("E[N_T]").get<double>() == r.values.at(kExpectedCovered));
  CHECK(doc.at("refs").contains("Var(N_T)"));
  CHECK(doc.at("config").at("k0") == 3);
}

TEST_CASE("report invariants") {
  for (int T : {1, 10, 100}) {
    for (double lambda : kLambdas) {
      const auto r = full_report(config(4, lambda, T));
      const double e = r.values.at(kExpectedCovered);
      CHECK(e >= 1.0);
      CHECK(e <= 4 + T - 1);
      CHECK(r.values.at(kVarianceCovered) >= 0.0);
      CHECK(r.values.at(kAtStart) >= 0.0);
      CHECK(r.values.at(kAtStart) <= 1.0);
    }
  }
}
