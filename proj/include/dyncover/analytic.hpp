#pragma once

// Closed-form quantities for the walk on a complete graph that gains one
// vertex per unit time, plus the recursions they were derived from.
//
// Arguments follow one convention throughout: T is the integer horizon, k0
// the initial vertex count (>= 3), lambda the move rate. Functions validate
// their arguments and throw ConfigError on violation.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dyncover/model.hpp"

namespace dyncover::analytic {

/// Probability u_j that vertex j has been visited by time T (T >= 1).
double visit_prob(VertexId j, int T, int k0, double lambda);

/// E[N_T]. Returns exactly 1 at T = 0.
double expected_covered(int T, int k0, double lambda);

/// lambda / (1 + lambda): the limit of E[N_T]/T.
double expected_covered_asymptote(double lambda);

/// Var(N_T) = sum_j u_j (1 - u_j). Returns 0 at T = 0.
double variance_covered(int T, int k0, double lambda);

/// lambda / ((lambda + 1)(2 lambda + 1)): the limit of Var(N_T)/T.
double variance_covered_asymptote(double lambda);

/// exp(-2 t^2 / (k0 + T)), the bounded-differences tail bound on
/// P(|N_T - E[N_T]| >= t).
double azuma_tail_bound(double t, int T, int k0);

/// Closed-form P(T, k0) for never re-entering the start vertex.
///
/// Evaluated verbatim, without clamping; the expression exceeds 1 for small
/// lambda (already at T = 1, lambda = 1, k0 = 3), so callers must not treat
/// it as a bounded probability.
double no_return_prob(int T, int k0, double lambda);

/// The same quantity by iterating
///   P(T,k) = e^{-lambda} P(T-1,k+1) + (k-1)/(k-2) e^{-lambda (H(k+T-2) - H(k-2))}
/// from P(0, .) = 1.
double no_return_prob_recursive(int T, int k0, double lambda);

/// Probability of being at a designated vertex after r uniform moves on a
/// fixed complete graph of k0 vertices, starting there with probability p.
double step_return_prob(int r, double p, int k0);

/// Probability of being at the designated vertex after one unit interval
/// (Poisson(lambda) moves, no insertion), starting there with probability p.
double unit_time_at_v(double p, int k0, double lambda);

/// Q(T, k0): probability the walker sits on v1 at integer time T, from the
/// product/sum closed form.
double at_start_prob(int T, int k0, double lambda);

/// Q(T, k0) by forward iteration of
///   Q(T) = Q(T-1) a_T + (1 - a_T) / (k0 + T - 1),
///   a_T = exp(-lambda (k0+T-1)/(k0+T-2)).
double at_start_prob_recursive(int T, int k0, double lambda);

/// Q(0..T, k0) from the recursion, memoized in one pass.
std::vector<double> at_start_prob_sequence(int T, int k0, double lambda);

/// Expected arrivals at the designated vertex during one unit interval on a
/// fixed graph of k0 vertices, starting there with probability p.
double expected_visits_unit(double p, int k0, double lambda);

/// E_1^{k0}[T]: expected arrivals at v1 during [0, T]. O(T).
double expected_visits(int T, int k0, double lambda);

/// Evaluated closed forms for one configuration.
struct AnalyticReport {
  ModelConfig config;
  std::map<std::string, double> values;
  std::map<std::string, std::string> refs;
};

// Report keys.
inline constexpr const char* kExpectedCovered = "E[N_T]";
inline constexpr const char* kVarianceCovered = "Var(N_T)";
inline constexpr const char* kCoveredRateLimit = "lim E[N_T]/T";
inline constexpr const char* kVarianceRateLimit = "lim Var(N_T)/T";
inline constexpr const char* kNoReturn = "P(T,k0)";
inline constexpr const char* kNoReturnRecursive = "P(T,k0) recursive";
inline constexpr const char* kAtStart = "Q(T,k0)";
inline constexpr const char* kAtStartRecursive = "Q(T,k0) recursive";
inline constexpr const char* kExpectedVisits = "E1[T]";

/// Evaluates every quantity for a validated, deterministic-insertion config.
/// Throws ConfigError for Poisson insertion.
AnalyticReport full_report(const ModelConfig& config);

/// {"config": ..., "values": {...}, "refs": {...}}
nlohmann::json to_json(const AnalyticReport& report);

}  // namespace dyncover::analytic
