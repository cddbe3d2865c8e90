#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace dyncover {

/// 1-based vertex identifier; v1..vk0 exist at time 0, later vertices are
/// numbered in insertion order.
using VertexId = std::int64_t;

inline constexpr VertexId kStartVertex = 1;

/// Thrown when a configuration or argument violates a model constraint.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A new vertex at every integer time 1..T.
struct DeterministicInsertion {
  friend bool operator==(const DeterministicInsertion&,
                         const DeterministicInsertion&) = default;
};

/// New vertices at the arrival times of a rate-beta Poisson process on [0,T].
struct PoissonInsertion {
  double beta = 1.0;
  friend bool operator==(const PoissonInsertion&,
                         const PoissonInsertion&) = default;
};

using Insertion = std::variant<DeterministicInsertion, PoissonInsertion>;

struct ModelConfig {
  int k0 = 3;
  double lambda = 1.0;  // walker moves per unit time
  int horizon = 0;      // T, number of unit intervals
  Insertion insertion = DeterministicInsertion{};
  std::uint64_t seed = 0;

  [[nodiscard]] bool deterministic() const {
    return std::holds_alternative<DeterministicInsertion>(insertion);
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Returns `config` unchanged, or throws ConfigError naming the violated
/// constraint.
ModelConfig validate(const ModelConfig& config);

// JSON form: {"k0", "lambda", "horizon", "insertion": "deterministic" |
// {"poisson": beta}, "seed"}. Missing keys keep their defaults.
nlohmann::json to_json(const ModelConfig& config);
ModelConfig config_from_json(const nlohmann::json& doc,
                             ModelConfig base = ModelConfig{});

std::string insertion_name(const Insertion& insertion);

struct MoveEvent {
  VertexId from = 0;
  VertexId to = 0;
  friend bool operator==(const MoveEvent&, const MoveEvent&) = default;
};

struct InsertEvent {
  VertexId vertex = 0;
  friend bool operator==(const InsertEvent&, const InsertEvent&) = default;
};

struct Event {
  double time = 0.0;
  std::variant<MoveEvent, InsertEvent> kind;

  [[nodiscard]] bool is_move() const {
    return std::holds_alternative<MoveEvent>(kind);
  }
  friend bool operator==(const Event&, const Event&) = default;
};

struct EventLog {
  std::vector<Event> events;
  friend bool operator==(const EventLog&, const EventLog&) = default;
};

/// Checks the structural invariants of a log produced under `config`.
/// Returns a description of the first violation, or nullopt.
std::optional<std::string> check_event_log(const EventLog& log,
                                           const ModelConfig& config);

/// Per-run statistics of one realization.
struct SimulationSummary {
  std::int64_t covered = 1;          // N_T, start vertex included
  std::int64_t visits_to_start = 0;  // moves landing on v1
  bool at_start_at_T = true;
  bool no_second_visit = true;
  std::int64_t final_vertex_count = 0;
  // Only populated when first-visit recording is enabled; v1 maps to 0.
  std::map<VertexId, double> first_visit_time;

  friend bool operator==(const SimulationSummary&,
                         const SimulationSummary&) = default;
};

/// Empty when every invariant holds.
std::optional<std::string> check_summary(const SimulationSummary& summary,
                                         bool first_visits_recorded);

/// Sum of 1/i for i = 1..n; harmonic(0) == 0.
///
/// Values up to 10^6 come from an ascending-summation table built on first
/// use; larger arguments continue the summation from the end of the table.
double harmonic(std::int64_t n);

/// H(b) - H(a) for 0 <= a <= b, formed without exponentiating either term.
double harmonic_diff(std::int64_t a, std::int64_t b);

inline constexpr double kEulerGamma = 0.57721566490153286060651209;

struct HarmonicBounds {
  double lower;
  double upper;
};

/// 1/(2(n+1)) + ln n + gamma < H(n) < 1/(2n) + ln n + gamma, n >= 1.
HarmonicBounds harmonic_bounds(std::int64_t n);

}  // namespace dyncover
