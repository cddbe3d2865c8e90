#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "dyncover/simulate.hpp"
#include "dyncover/stats.hpp"

using namespace dyncover;

namespace {

ModelConfig config(int k0, double lambda, int T, std::uint64_t seed = 1) {
  ModelConfig c;
  c.k0 = k0;
  c.lambda = lambda;
  c.horizon = T;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("frozen walker") {
  const auto r = run_walk(config(3, 0.0, 10), 0, {.record_log = true});
  CHECK(r.summary.covered == 1);
  CHECK(r.summary.visits_to_start == 0);
  CHECK(r.summary.at_start_at_T);
  CHECK(r.summary.no_second_visit);
  CHECK(r.summary.final_vertex_count == 13);
  REQUIRE(r.log.has_value());
  CHECK(r.log->events.size() == 10);  // insertions only
  for (int t = 1; t <= 10; ++t) CHECK(moves_in_interval(*r.log, t, 10) == 0);
}

TEST_CASE("empty horizon") {
  const auto r = run_walk(config(3, 1.0, 0), 4, {.record_log = true});
  CHECK(r.summary.covered == 1);
  CHECK(r.summary.final_vertex_count == 3);
  CHECK(r.log->events.empty());
}

TEST_CASE("runs are reproducible and independent of execution order") {
  const auto c = config(4, 1.3, 25, 99);
  const WalkOptions all{.record_log = true, .record_first_visits = true};
  Walker walker(c);
  std::vector<WalkResult> forward;
  for (std::uint64_t i = 0; i < 20; ++i) forward.push_back(walker.run(i, all));
  Walker other(c);
  for (std::uint64_t i = 20; i-- > 0;) {
    CHECK(other.run(i, all).summary == forward[i].summary);
    CHECK(run_walk(c, i, all).log == forward[i].log);
  }

  auto reseeded = c;
  reseeded.seed = 100;
  int differing = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    differing += run_walk(reseeded, i, all).log != forward[i].log;
  }
  CHECK(differing == 20);
}

TEST_CASE("logs and summaries satisfy their invariants") {
  for (double lambda : {0.0, 0.4, 1.0, 6.0}) {
    for (int T : {0, 1, 7, 40}) {
      for (int k0 : {3, 5}) {
        const auto c = config(k0, lambda, T, 5);
        Walker walker(c);
        for (std::uint64_t i = 0; i < 50; ++i) {
          const auto r = walker.run(i, {.record_log = true, .record_first_visits = true});
          const auto log_error = check_event_log(*r.log, c);
          CHECK_MESSAGE(!log_error, *log_error);
          const auto summary_error = check_summary(r.summary, true);
          CHECK_MESSAGE(!summary_error, *summary_error);
          CHECK(r.summary.final_vertex_count == k0 + T);

          // Recount everything from the log.
          std::int64_t visits = 0;
          VertexId at = kStartVertex;
          std::vector<bool> seen(k0 + T + 1, false);
          seen[kStartVertex] = true;
          std::int64_t covered = 1;
          for (const auto& ev : r.log->events) {
            if (const auto* mv = std::get_if<MoveEvent>(&ev.kind)) {
              CHECK(mv->from == at);
              at = mv->to;
              visits += at == kStartVertex;
              if (!seen[at]) {
                seen[at] = true;
                ++covered;
                CHECK(r.summary.first_visit_time.at(at) == ev.time);
              }
            }
          }
          CHECK(visits == r.summary.visits_to_start);
          CHECK(covered == r.summary.covered);
          CHECK(r.summary.at_start_at_T == (at == kStartVertex));
        }
      }
    }
  }
}

TEST_CASE("Poisson insertion") {
  auto c = config(3, 1.0, 20, 8);
  c.insertion = PoissonInsertion{0.5};
  Walker walker(c);
  stats::Histogram inserted;
  for (std::uint64_t i = 0; i < 20'000; ++i) {
    const auto r = walker.run(i, {.record_log = true});
    const auto err = check_event_log(*r.log, c);
    CHECK_MESSAGE(!err, *err);
    CHECK_FALSE(check_summary(r.summary, false));
    inserted.add(r.summary.final_vertex_count - 3);
  }
  // Insertions over [0, T] are Poisson(beta T): mean and variance both 10.
  const auto e = stats::make_estimate(inserted);
  CHECK(std::abs(e.mean - 10.0) <= 4.0 * e.stderr_);
  CHECK(e.sample_variance == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("moves_in_interval") {
  EventLog log;
  log.events = {{0.0, MoveEvent{1, 2}},
                {0.99, MoveEvent{2, 3}},
                {1.0, InsertEvent{4}},
                {1.0, MoveEvent{3, 4}},
                {2.5, MoveEvent{4, 1}}};
  CHECK(moves_in_interval(log, 1, 3) == 2);
  CHECK(moves_in_interval(log, 2, 3) == 1);
  CHECK(moves_in_interval(log, 3, 3) == 1);
  CHECK_THROWS_AS(moves_in_interval(log, 0, 3), std::out_of_range);
  CHECK_THROWS_AS(moves_in_interval(log, 4, 3), std::out_of_range);
}

TEST_CASE("per-interval move counts are Poisson(lambda) and uncorrelated") {
  const auto c = config(3, 1.0, 3, 21);
  const auto counts = stats::interval_move_counts(c, 20'000);
  std::vector<std::vector<double>> by_interval(3);
  for (int t = 0; t < 3; ++t) {
    std::vector<int> column;
    for (const auto& row : counts) {
      column.push_back(row[t]);
      by_interval[t].push_back(row[t]);
    }
    CHECK(stats::chi_square_poisson(column, 1.0).p_value > 1e-3);
  }
  CHECK(std::abs(stats::sample_correlation(by_interval[0], by_interval[2])) < 0.03);
}

TEST_CASE("brute-force kernel") {
  const std::vector<double> p0 = {0.1, 0.2, 0.3, 0.4};
  CHECK(brute_force_step_distribution(p0, 0) == p0);

  const std::vector<double> uniform(5, 0.2);
  for (double v : brute_force_step_distribution(uniform, 9)) {
    CHECK(v == doctest::Approx(0.2).epsilon(1e-15));
  }

  const auto two = brute_force_step_distribution(std::vector<double>{1, 0, 0}, 2);
  CHECK(two[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(two[1] == doctest::Approx(0.25).epsilon(1e-15));

  CHECK_THROWS(brute_force_step_distribution(std::vector<double>{1.0}, 1));
}

TEST_CASE("event log CSV") {
  EventLog log;
  log.events = {{0.25, MoveEvent{1, 3}}, {1.0, InsertEvent{4}}};
  std::ostringstream out;
  write_event_log_csv(out, log);
  CHECK(out.str() == "time,kind,from,to\n0.25,move,1,3\n1,insert,,4\n");
}

TEST_CASE("RngStream") {
  RngStream a(5, 0), b(5, 0), c(5, 1), d(6, 0);
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  CHECK(x != d.next_u64());

  RngStream r(3, 3);
  std::vector<int> bins(7, 0);
  double sum = 0.0;
  for (int i = 0; i < 70'000; ++i) {
    ++bins[r.uniform_index(7)];
    const double u = r.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += r.exponential(2.0);
  }
  for (int b_count : bins) CHECK(std::abs(b_count - 10'000) < 500);
  CHECK(sum / 70'000 == doctest::Approx(0.5).epsilon(0.02));
}
