#include "dyncover/simulate.hpp"

#include <limits>
#include <ostream>
#include <stdexcept>

#include "dyncover/format.hpp"

namespace dyncover {

namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();

}  // namespace

Walker::Walker(ModelConfig config) : config_(validate(config)) {}

WalkResult Walker::run(std::uint64_t run_index, WalkOptions options) {
  const double horizon = config_.horizon;
  const double lambda = config_.lambda;
  const auto* poisson = std::get_if<PoissonInsertion>(&config_.insertion);

  RngStream rng(config_.seed, run_index);
  WalkResult result;
  if (options.record_log) result.log.emplace();

  WalkState& s = state_;
  s.current_vertex = kStartVertex;
  s.vertex_count = config_.k0;
  s.clock = 0.0;
  s.covered = 1;
  s.visits_to_start = 0;
  s.visited.assign(static_cast<std::size_t>(config_.k0) + 1, 0);
  if (!poisson) s.visited.reserve(s.visited.size() + config_.horizon);
  s.visited[kStartVertex] = 1;
  if (options.record_first_visits) {
    result.summary.first_visit_time.emplace(kStartVertex, 0.0);
  }

  double next_move = lambda > 0.0 ? rng.exponential(lambda) : kNever;
  double next_insert = poisson ? rng.exponential(poisson->beta) : 1.0;

  while (true) {
    if (next_insert <= horizon && next_insert <= next_move) {
      s.clock = next_insert;
      ++s.vertex_count;
      s.visited.push_back(0);
      if (result.log) {
        result.log->events.push_back({s.clock, InsertEvent{s.vertex_count}});
      }
      next_insert = poisson ? next_insert + rng.exponential(poisson->beta)
                            : next_insert + 1.0;
      continue;
    }
    if (next_move >= horizon) break;

    s.clock = next_move;
    // Uniform over the vertex_count - 1 vertices other than the current one.
    auto to = static_cast<VertexId>(
                  rng.uniform_index(static_cast<std::uint64_t>(s.vertex_count - 1))) +
              1;
    if (to >= s.current_vertex) ++to;
    if (result.log) {
      result.log->events.push_back({s.clock, MoveEvent{s.current_vertex, to}});
    }
    s.current_vertex = to;
    if (to == kStartVertex) ++s.visits_to_start;
    if (!s.visited[static_cast<std::size_t>(to)]) {
      s.visited[static_cast<std::size_t>(to)] = 1;
      ++s.covered;
      if (options.record_first_visits) {
        result.summary.first_visit_time.emplace(to, s.clock);
      }
    }
    next_move += rng.exponential(lambda);
  }

  SimulationSummary& out = result.summary;
  out.covered = s.covered;
  out.visits_to_start = s.visits_to_start;
  out.at_start_at_T = s.current_vertex == kStartVertex;
  out.no_second_visit = s.visits_to_start == 0;
  out.final_vertex_count = s.vertex_count;
  return result;
}

WalkResult run_walk(const ModelConfig& config, std::uint64_t run_index,
                    WalkOptions options) {
  Walker walker(config);
  return walker.run(run_index, options);
}

int moves_in_interval(const EventLog& log, int t, int horizon) {
  if (t < 1 || t > horizon) {
    throw std::out_of_range("interval index " + std::to_string(t) +
                            " outside [1, " + std::to_string(horizon) + "]");
  }
  const double lo = t - 1;
  const double hi = t;
  int count = 0;
  for (const auto& ev : log.events) {
    if (ev.is_move() && ev.time >= lo && ev.time < hi) ++count;
  }
  return count;
}

std::vector<double> brute_force_step_distribution(std::span<const double> p0,
                                                  int r) {
  if (p0.size() < 2) {
    throw std::invalid_argument("step distribution needs at least 2 vertices");
  }
  if (r < 0) throw std::invalid_argument("step count must be >= 0");
  const double others = static_cast<double>(p0.size() - 1);
  std::vector<double> p(p0.begin(), p0.end());
  std::vector<double> next(p.size());
  for (int step = 0; step < r; ++step) {
    for (std::size_t v = 0; v < p.size(); ++v) {
      // Mass arrives at v from every u != v, each sending 1/(k-1) of its mass.
      double in = 0.0;
      for (std::size_t u = 0; u < p.size(); ++u) {
        if (u != v) in += p[u] / others;
      }
      next[v] = in;
    }
    p.swap(next);
  }
  return p;
}

void write_event_log_csv(std::ostream& out, const EventLog& log) {
  out << "time,kind,from,to\n";
  for (const auto& ev : log.events) {
    out << detail::format_double(ev.time);
    if (const auto* mv = std::get_if<MoveEvent>(&ev.kind)) {
      out << ",move," << mv->from << ',' << mv->to << '\n';
    } else {
      out << ",insert,," << std::get<InsertEvent>(ev.kind).vertex << '\n';
    }
  }
}

}  // namespace dyncover
