#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "dyncover/model.hpp"
#include "dyncover/rng.hpp"

namespace dyncover {

/// Mutable state of one walk in progress.
struct WalkState {
  VertexId current_vertex = kStartVertex;
  std::int64_t vertex_count = 0;
  double clock = 0.0;
  std::vector<std::uint8_t> visited;  // indexed by vertex id; slot 0 unused
  std::int64_t covered = 1;
  std::int64_t visits_to_start = 0;
};

struct WalkOptions {
  bool record_log = false;
  bool record_first_visits = false;
};

struct WalkResult {
  SimulationSummary summary;
  std::optional<EventLog> log;
};

/// Event-driven simulator for one configuration.
///
/// Moves form a rate-lambda Poisson process; each move jumps to a vertex
/// drawn uniformly from the current vertices other than the walker's own.
/// Insertions happen at integer times 1..T or at the arrivals of a rate-beta
/// Poisson process. An insertion tied with a move is processed first. Moves
/// at time T or later are not part of the realization.
///
/// A Walker keeps its buffers between runs, so looping `run` over run
/// indices does not allocate on the hot path. Not thread-safe; use one
/// Walker per thread.
class Walker {
 public:
  explicit Walker(ModelConfig config);

  WalkResult run(std::uint64_t run_index, WalkOptions options = {});

  [[nodiscard]] const ModelConfig& config() const { return config_; }

 private:
  ModelConfig config_;
  WalkState state_;
};

/// One-shot convenience wrapper around Walker.
WalkResult run_walk(const ModelConfig& config, std::uint64_t run_index,
                    WalkOptions options = {});

/// Number of moves with time in [t-1, t). Throws std::out_of_range unless
/// 1 <= t <= horizon.
int moves_in_interval(const EventLog& log, int t, int horizon);

/// Applies the uniform-move kernel of a fixed complete graph r times:
/// p'(v) = (1 - p(v)) / (k - 1), with k = p0.size() >= 2.
std::vector<double> brute_force_step_distribution(std::span<const double> p0,
                                                  int r);

/// CSV with header `time,kind,from,to`; insertion rows leave `from` empty
/// and put the new vertex id in `to`.
void write_event_log_csv(std::ostream& out, const EventLog& log);

}  // namespace dyncover
