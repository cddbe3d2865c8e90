#include "dyncover/analytic.hpp"

#include <cmath>
#include <string>

namespace dyncover::analytic {

namespace {

void require_k0(int k0) {
  if (k0 < 3) throw ConfigError("k0 must be >= 3 (got " + std::to_string(k0) + ")");
}

void require_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be a finite value >= 0");
  }
}

void require_horizon(int T, int min_value) {
  if (T < min_value) {
    throw ConfigError("horizon must be >= " + std::to_string(min_value) +
                      " (got " + std::to_string(T) + ")");
  }
}

void require_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError("start probability must lie in [0, 1]");
  }
}

void require_common(int T, int k0, double lambda, int min_T) {
  require_k0(k0);
  require_lambda(lambda);
  require_horizon(T, min_T);
}

// 1 - exp(-x) without cancellation for small x.
double one_minus_exp_neg(double x) { return -std::expm1(-x); }

// Exponent of a unit interval with n vertices at its start, for the
// occupation and arrival formulas: lambda * n / (n - 1).
double interval_exponent(double lambda, std::int64_t n) {
  return lambda * static_cast<double>(n) / static_cast<double>(n - 1);
}

// Harmonic span for a vertex: the rate of hitting an unvisited vertex while
// n vertices exist is lambda/(n-1), summed over the intervals it is alive.
double unvisited_exponent(VertexId j, int T, int k0, double lambda) {
  const std::int64_t top = static_cast<std::int64_t>(k0) + T - 2;
  const std::int64_t bottom = j <= k0 ? k0 - 2 : j - 2;
  return lambda * harmonic_diff(bottom, top);
}

}  // namespace

double visit_prob(VertexId j, int T, int k0, double lambda) {
  require_common(T, k0, lambda, 1);
  if (j < 1) throw ConfigError("vertex ids start at 1");
  if (j == kStartVertex) return 1.0;
  if (j >= static_cast<VertexId>(k0) + T) return 0.0;
  return one_minus_exp_neg(unvisited_exponent(j, T, k0, lambda));
}

double expected_covered(int T, int k0, double lambda) {
  require_common(T, k0, lambda, 0);
  if (T == 0) return 1.0;
  const std::int64_t top = static_cast<std::int64_t>(k0) + T - 2;
  // (k0+T-1) - [(k0-1) e^{-l(H(top)-H(k0-2))} + sum_j e^{-l(H(top)-H(j-2))}]
  double unvisited = (k0 - 1) * std::exp(-lambda * harmonic_diff(k0 - 2, top));
  for (std::int64_t j = k0 + 1; j <= top + 1; ++j) {
    unvisited += std::exp(-lambda * harmonic_diff(j - 2, top));
  }
  return static_cast<double>(top + 1) - unvisited;
}

double expected_covered_asymptote(double lambda) {
  require_lambda(lambda);
  return lambda / (1.0 + lambda);
}

double variance_covered(int T, int k0, double lambda) {
  require_common(T, k0, lambda, 0);
  if (T == 0) return 0.0;
  double var = 0.0;
  for (VertexId j = 2; j <= static_cast<VertexId>(k0) + T - 1; ++j) {
    const double u = visit_prob(j, T, k0, lambda);
    var += u * (1.0 - u);
  }
  return var;
}

double variance_covered_asymptote(double lambda) {
  require_lambda(lambda);
  return lambda / ((lambda + 1.0) * (2.0 * lambda + 1.0));
}

double azuma_tail_bound(double t, int T, int k0) {
  require_k0(k0);
  require_horizon(T, 0);
  if (!(t >= 0.0)) throw ConfigError("deviation t must be >= 0");
  return std::exp(-2.0 * t * t / static_cast<double>(k0 + T));
}

double no_return_prob(int T, int k0, double lambda) {
  require_common(T, k0, lambda, 0);
  if (T == 0) return 1.0;
  const std::int64_t top = static_cast<std::int64_t>(k0) + T - 2;
  double p = std::exp(-lambda * T);
  for (int i = 0; i < T; ++i) {
    const std::int64_t base = static_cast<std::int64_t>(k0) - 2 + i;
    const double weight = 1.0 + 1.0 / static_cast<double>(base);
    p += weight * std::exp(-lambda * (i + harmonic_diff(base, top)));
  }
  return p;
}

double no_return_prob_recursive(int T, int k0, double lambda) {
  require_common(T, k0, lambda, 0);
  const std::int64_t top = static_cast<std::int64_t>(k0) + T - 2;
  const double stay = std::exp(-lambda);
  // P(m, k0 + T - m) for m = 0..T; every level shares H(k0+T-2).
  double p = 1.0;
  for (int m = 1; m <= T; ++m) {
    const std::int64_t k = static_cast<std::int64_t>(k0) + T - m;
    const double ratio = static_cast<double>(k - 1) / static_cast<double>(k - 2);
    p = stay * p + ratio * std::exp(-lambda * harmonic_diff(k - 2, top));
  }
  return p;
}

double step_return_prob(int r, double p, int k0) {
  require_k0(k0);
  require_probability(p);
  if (r < 0) throw ConfigError("step count must be >= 0");
  const double n = k0;
  const double contraction = std::pow(-1.0 / (n - 1.0), r);
  return 1.0 / n - (1.0 - p * n) / n * contraction;
}

double unit_time_at_v(double p, int k0, double lambda) {
  require_k0(k0);
  require_probability(p);
  require_lambda(lambda);
  const double n = k0;
  return 1.0 / n - (1.0 - p * n) / n * std::exp(-interval_exponent(lambda, k0));
}

double at_start_prob(int T, int k0, double lambda) {
  require_common(T, k0, lambda, 0);
  // Q(T) = prod_{i<=T} e^{-a_i} * (1 + sum_j (1 - e^{-a_j}) / ((k0+j-1) prod_{i<=j} e^{-a_i}))
  // with the prefactor distributed into the sum so every exponential is a
  // suffix sum and nothing under- or overflows.
  double suffix = 0.0;
  double sum = 0.0;
  for (int j = T; j >= 1; --j) {
    const std::int64_t n = static_cast<std::int64_t>(k0) + j - 1;
    const double a = interval_exponent(lambda, n);
    sum += one_minus_exp_neg(a) / static_cast<double>(n) * std::exp(-suffix);
    suffix += a;
  }
  return std::exp(-suffix) + sum;
}

std::vector<double> at_start_prob_sequence(int T, int k0, double lambda) {
  require_common(T, k0, lambda, 0);
  std::vector<double> q(static_cast<std::size_t>(T) + 1);
  q[0] = 1.0;
  for (int t = 1; t <= T; ++t) {
    const std::int64_t n = static_cast<std::int64_t>(k0) + t - 1;
    const double a = interval_exponent(lambda, n);
    q[t] = q[t - 1] * std::exp(-a) + one_minus_exp_neg(a) / static_cast<double>(n);
  }
  return q;
}

double at_start_prob_recursive(int T, int k0, double lambda) {
  return at_start_prob_sequence(T, k0, lambda).back();
}

double expected_visits_unit(double p, int k0, double lambda) {
  require_k0(k0);
  require_probability(p);
  require_lambda(lambda);
  const double n = k0;
  return lambda / n +
         (1.0 - p * n) / (n * n) * one_minus_exp_neg(interval_exponent(lambda, k0));
}

double expected_visits(int T, int k0, double lambda) {
  require_common(T, k0, lambda, 0);
  const auto q = at_start_prob_sequence(T, k0, lambda);
  double total = 0.0;
  for (int i = 0; i < T; ++i) {
    const double n = static_cast<double>(k0 + i);
    total += lambda / n + (1.0 - q[i] * n) / (n * n) *
                              one_minus_exp_neg(interval_exponent(lambda, k0 + i));
  }
  return total;
}

AnalyticReport full_report(const ModelConfig& config) {
  validate(config);
  if (!config.deterministic()) {
    throw ConfigError("analytic report requires deterministic insertion");
  }
  const int T = config.horizon;
  const int k0 = config.k0;
  const double lambda = config.lambda;

  AnalyticReport report;
  report.config = config;
  auto put = [&](const char* key, double value, const char* ref) {
    report.values[key] = value;
    report.refs[key] = ref;
  };
  put(kExpectedCovered, expected_covered(T, k0, lambda),
      "expected covered count, harmonic closed form");
  put(kVarianceCovered, variance_covered(T, k0, lambda),
      "variance of covered count, sum of u_j(1-u_j)");
  put(kCoveredRateLimit, expected_covered_asymptote(lambda),
      "large-T limit of E[N_T]/T");
  put(kVarianceRateLimit, variance_covered_asymptote(lambda),
      "large-T limit of Var(N_T)/T");
  put(kNoReturn, no_return_prob(T, k0, lambda),
      "no-second-visit closed form (unclamped; may exceed 1)");
  put(kNoReturnRecursive, no_return_prob_recursive(T, k0, lambda),
      "no-second-visit one-step recursion (unclamped; may exceed 1)");
  put(kAtStart, at_start_prob(T, k0, lambda),
      "probability of occupying v1 at time T, product/sum closed form");
  put(kAtStartRecursive, at_start_prob_recursive(T, k0, lambda),
      "probability of occupying v1 at time T, forward recursion");
  put(kExpectedVisits, expected_visits(T, k0, lambda),
      "expected arrivals at v1 up to time T");
  return report;
}

nlohmann::json to_json(const AnalyticReport& report) {
  nlohmann::json doc;
  doc["config"] = dyncover::to_json(report.config);
  doc["values"] = report.values;
  doc["refs"] = report.refs;
  return doc;
}

}  // namespace dyncover::analytic
