#include "dyncover/model.hpp"

#include <cmath>
#include <sstream>

namespace dyncover {

namespace {

constexpr std::int64_t kHarmonicTableSize = 1'000'000;

const std::vector<double>& harmonic_table() {
  static const std::vector<double> table = [] {
    // Ascending summation with Neumaier compensation; plain summation
    // drifts by ~1e-10 at n = 10^6, more than the 1/(12 n^2) slack between
    // H(n) and its upper bound.
    std::vector<double> h(kHarmonicTableSize + 1);
    h[0] = 0.0;
    double sum = 0.0;
    double compensation = 0.0;
    for (std::int64_t i = 1; i <= kHarmonicTableSize; ++i) {
      const double term = 1.0 / static_cast<double>(i);
      const double t = sum + term;
      compensation += std::abs(sum) >= term ? (sum - t) + term : (term - t) + sum;
      sum = t;
      h[i] = sum + compensation;
    }
    return h;
  }();
  return table;
}

}  // namespace

ModelConfig validate(const ModelConfig& config) {
  if (config.k0 < 3) {
    throw ConfigError("k0 must be >= 3 (got " + std::to_string(config.k0) + ")");
  }
  if (!(config.lambda >= 0.0) || !std::isfinite(config.lambda)) {
    std::ostringstream msg;
    msg << "lambda must be a finite value >= 0 (got " << config.lambda << ")";
    throw ConfigError(msg.str());
  }
  if (config.horizon < 0) {
    throw ConfigError("horizon must be >= 0 (got " +
                      std::to_string(config.horizon) + ")");
  }
  if (const auto* p = std::get_if<PoissonInsertion>(&config.insertion)) {
    if (!(p->beta > 0.0) || !std::isfinite(p->beta)) {
      std::ostringstream msg;
      msg << "beta must be a finite value > 0 (got " << p->beta << ")";
      throw ConfigError(msg.str());
    }
  }
  return config;
}

std::string insertion_name(const Insertion& insertion) {
  if (const auto* p = std::get_if<PoissonInsertion>(&insertion)) {
    std::ostringstream out;
    out.precision(17);
    out << "poisson:" << p->beta;
    return out.str();
  }
  return "deterministic";
}

nlohmann::json to_json(const ModelConfig& config) {
  nlohmann::json doc;
  doc["k0"] = config.k0;
  doc["lambda"] = config.lambda;
  doc["horizon"] = config.horizon;
  if (const auto* p = std::get_if<PoissonInsertion>(&config.insertion)) {
    doc["insertion"] = {{"poisson", p->beta}};
  } else {
    doc["insertion"] = "deterministic";
  }
  doc["seed"] = config.seed;
  return doc;
}

ModelConfig config_from_json(const nlohmann::json& doc, ModelConfig base) {
  if (!doc.is_object()) {
    throw ConfigError("config document must be a JSON object");
  }
  try {
    if (doc.contains("k0")) base.k0 = doc.at("k0").get<int>();
    if (doc.contains("lambda")) base.lambda = doc.at("lambda").get<double>();
    if (doc.contains("horizon")) base.horizon = doc.at("horizon").get<int>();
    if (doc.contains("seed")) base.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("insertion")) {
      const auto& ins = doc.at("insertion");
      if (ins.is_string() && ins.get<std::string>() == "deterministic") {
        base.insertion = DeterministicInsertion{};
      } else if (ins.is_object() && ins.size() == 1 && ins.contains("poisson")) {
        base.insertion = PoissonInsertion{ins.at("poisson").get<double>()};
      } else {
        throw ConfigError(
            R"(insertion must be "deterministic" or {"poisson": beta})");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config document: ") + e.what());
  }
  return base;
}

std::optional<std::string> check_event_log(const EventLog& log,
                                           const ModelConfig& config) {
  const double horizon = config.horizon;
  std::int64_t vertex_count = config.k0;
  std::int64_t expected_insert_time = 1;
  bool prev_was_insert = false;
  double prev_time = -1.0;

  for (std::size_t i = 0; i < log.events.size(); ++i) {
    const Event& ev = log.events[i];
    const std::string where = "event " + std::to_string(i) + ": ";
    if (ev.time < 0.0 || ev.time > horizon) {
      return where + "time outside [0, T]";
    }
    if (i > 0) {
      // A move may share its timestamp with an insertion processed just
      // before it; everything else is strictly increasing.
      const bool tie_ok = prev_was_insert && ev.is_move();
      if (ev.time < prev_time || (ev.time == prev_time && !tie_ok)) {
        return where + "times not strictly increasing";
      }
    }
    if (const auto* mv = std::get_if<MoveEvent>(&ev.kind)) {
      if (mv->from == mv->to) return where + "move to the current vertex";
      if (mv->to < 1 || mv->to > vertex_count) {
        return where + "move to a vertex not yet inserted";
      }
      if (mv->from < 1 || mv->from > vertex_count) {
        return where + "move from a vertex not yet inserted";
      }
      prev_was_insert = false;
    } else {
      const auto& ins = std::get<InsertEvent>(ev.kind);
      if (ins.vertex != vertex_count + 1) {
        return where + "insertion ids must be consecutive";
      }
      if (config.deterministic()) {
        if (ev.time != static_cast<double>(expected_insert_time)) {
          return where + "deterministic insertion off an integer time";
        }
        ++expected_insert_time;
      }
      ++vertex_count;
      prev_was_insert = true;
    }
    prev_time = ev.time;
  }
  if (config.deterministic() && expected_insert_time != config.horizon + 1) {
    return std::string("deterministic log must insert exactly T vertices");
  }
  return std::nullopt;
}

std::optional<std::string> check_summary(const SimulationSummary& summary,
                                         bool first_visits_recorded) {
  if (summary.covered < 1 || summary.covered > summary.final_vertex_count) {
    return std::string("covered outside [1, final_vertex_count]");
  }
  if (summary.no_second_visit != (summary.visits_to_start == 0)) {
    return std::string("no_second_visit disagrees with visits_to_start");
  }
  if (first_visits_recorded) {
    if (static_cast<std::int64_t>(summary.first_visit_time.size()) !=
        summary.covered) {
      return std::string("first_visit_time size differs from covered");
    }
    auto it = summary.first_visit_time.find(kStartVertex);
    if (it == summary.first_visit_time.end() || it->second != 0.0) {
      return std::string("start vertex must be recorded at time 0");
    }
  }
  return std::nullopt;
}

double harmonic(std::int64_t n) {
  if (n <= 0) return 0.0;
  const auto& table = harmonic_table();
  if (n <= kHarmonicTableSize) return table[static_cast<std::size_t>(n)];
  double h = table.back();
  for (std::int64_t i = kHarmonicTableSize + 1; i <= n; ++i) {
    h += 1.0 / static_cast<double>(i);
  }
  return h;
}

double harmonic_diff(std::int64_t a, std::int64_t b) {
  if (a < 0 || b < a) {
    throw std::invalid_argument("harmonic_diff requires 0 <= a <= b");
  }
  if (b <= kHarmonicTableSize) {
    const auto& table = harmonic_table();
    return table[static_cast<std::size_t>(b)] - table[static_cast<std::size_t>(a)];
  }
  double sum = 0.0;
  for (std::int64_t i = b; i > a; --i) sum += 1.0 / static_cast<double>(i);
  return sum;
}

HarmonicBounds harmonic_bounds(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("harmonic_bounds requires n >= 1");
  const double x = static_cast<double>(n);
  const double base = std::log(x) + kEulerGamma;
  return {1.0 / (2.0 * (x + 1.0)) + base, 1.0 / (2.0 * x) + base};
}

}  // namespace dyncover
