#include "dyncover/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>

#include "dyncover/analytic.hpp"
#include "dyncover/format.hpp"
#include "dyncover/simulate.hpp"

namespace dyncover::stats {

namespace {

using Int128 = __int128;

struct Moments {
  std::uint64_t n = 0;
  Int128 s1 = 0;  // sum of x
  Int128 s2 = 0;  // sum of x^2
};

Moments moments(const Histogram& h) {
  Moments m;
  m.n = h.n();
  for (const auto& [x, c] : h.counts()) {
    m.s1 += static_cast<Int128>(x) * c;
    m.s2 += static_cast<Int128>(x) * x * c;
  }
  return m;
}

// Unbiased variance from exact power sums; the numerator n*s2 - s1^2 is
// formed in integer arithmetic.
double variance_from(std::uint64_t n, Int128 s1, Int128 s2) {
  const Int128 num = static_cast<Int128>(n) * s2 - s1 * s1;
  return static_cast<double>(static_cast<long double>(num) /
                             (static_cast<long double>(n) * (n - 1)));
}

std::int64_t statistic_value(const SimulationSummary& s, Statistic stat) {
  switch (stat) {
    case Statistic::Covered:
      return s.covered;
    case Statistic::VisitsToStart:
      return s.visits_to_start;
    case Statistic::AtStartAtT:
      return s.at_start_at_T ? 1 : 0;
    case Statistic::NoSecondVisit:
      return s.no_second_visit ? 1 : 0;
  }
  return 0;
}

McEstimate with_interval(McEstimate e) {
  e.ci95 = {e.mean - kCi95Z * e.stderr_, e.mean + kCi95Z * e.stderr_};
  return e;
}

void require_deterministic(const ModelConfig& config) {
  if (!config.deterministic()) {
    throw ConfigError("analytic comparison requires deterministic insertion");
  }
}

}  // namespace

std::string statistic_name(Statistic s) {
  switch (s) {
    case Statistic::Covered:
      return "covered";
    case Statistic::VisitsToStart:
      return "visits_to_start";
    case Statistic::AtStartAtT:
      return "at_start_at_T";
    case Statistic::NoSecondVisit:
      return "no_second_visit";
  }
  return "unknown";
}

void Histogram::add(std::int64_t value, std::uint64_t count) {
  if (count == 0) return;
  counts_[value] += count;
  n_ += count;
}

void Histogram::merge(const Histogram& other) {
  for (const auto& [x, c] : other.counts_) add(x, c);
}

McEstimate make_estimate(const Histogram& h) {
  if (h.n() < 2) throw std::invalid_argument("estimate needs at least 2 runs");
  const Moments m = moments(h);
  McEstimate e;
  e.n_runs = m.n;
  e.mean = static_cast<double>(static_cast<long double>(m.s1) / m.n);
  e.sample_variance = variance_from(m.n, m.s1, m.s2);
  e.stderr_ = std::sqrt(e.sample_variance / static_cast<double>(m.n));
  return with_interval(e);
}

McEstimate variance_estimate(const Histogram& h) {
  if (h.n() < 3) {
    throw std::invalid_argument("jackknife variance needs at least 3 runs");
  }
  const Moments m = moments(h);
  const std::uint64_t n = m.n;

  // Leave-one-out variances are shared by all runs with the same value.
  std::vector<std::pair<long double, std::uint64_t>> loo;
  loo.reserve(h.counts().size());
  long double loo_mean = 0.0L;
  for (const auto& [x, c] : h.counts()) {
    const double v = variance_from(n - 1, m.s1 - x,
                                   m.s2 - static_cast<Int128>(x) * x);
    loo.emplace_back(v, c);
    loo_mean += static_cast<long double>(v) * c;
  }
  loo_mean /= n;
  long double ss = 0.0L;
  for (const auto& [v, c] : loo) ss += (v - loo_mean) * (v - loo_mean) * c;
  const long double jk_var = ss * (n - 1) / n;

  McEstimate e;
  e.n_runs = n;
  e.mean = variance_from(n, m.s1, m.s2);
  e.stderr_ = static_cast<double>(std::sqrt(jk_var));
  e.sample_variance = static_cast<double>(jk_var * n);
  return with_interval(e);
}

unsigned resolve_threads(unsigned threads) {
  if (threads != 0) return threads;
  return std::max(1U, std::thread::hardware_concurrency());
}

Batch run_batch(const ModelConfig& config, std::uint64_t n_runs,
                unsigned threads) {
  validate(config);
  const unsigned workers = static_cast<unsigned>(
      std::min<std::uint64_t>(resolve_threads(threads), std::max<std::uint64_t>(n_runs, 1)));

  std::vector<std::array<Histogram, kStatisticCount>> partial(workers);
  auto work = [&](unsigned w) {
    const std::uint64_t begin = n_runs * w / workers;
    const std::uint64_t end = n_runs * (w + 1) / workers;
    Walker walker(config);
    auto& hist = partial[w];
    for (std::uint64_t i = begin; i < end; ++i) {
      const auto summary = walker.run(i).summary;
      for (std::size_t s = 0; s < kStatisticCount; ++s) {
        hist[s].add(statistic_value(summary, static_cast<Statistic>(s)));
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  Batch batch;
  batch.config = config;
  batch.n_runs = n_runs;
  for (const auto& hist : partial) {
    for (std::size_t s = 0; s < kStatisticCount; ++s) {
      batch.histograms[s].merge(hist[s]);
    }
  }
  return batch;
}

McEstimate estimate(const ModelConfig& config, Statistic statistic,
                    std::uint64_t n_runs, unsigned threads) {
  if (n_runs < 2) throw std::invalid_argument("estimate needs n_runs >= 2");
  return make_estimate(run_batch(config, n_runs, threads).of(statistic));
}

double z_score(double analytic, const McEstimate& estimate) {
  const double diff = estimate.mean - analytic;
  if (estimate.stderr_ > 0.0) return diff / estimate.stderr_;
  if (std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(analytic))) return 0.0;
  return diff > 0 ? std::numeric_limits<double>::infinity()
                  : -std::numeric_limits<double>::infinity();
}

Verdict make_verdict(std::string quantity, double analytic,
                     const McEstimate& estimate, bool informational) {
  Verdict v;
  v.quantity = std::move(quantity);
  v.analytic = analytic;
  v.estimate = estimate;
  v.z_score = z_score(analytic, estimate);
  v.pass = std::abs(v.z_score) <= kZThreshold;
  v.informational = informational;
  return v;
}

std::vector<Verdict> verify(const Batch& batch) {
  const ModelConfig& c = batch.config;
  require_deterministic(c);
  const auto report = analytic::full_report(c);
  const auto& val = report.values;

  std::vector<Verdict> out;
  out.push_back(make_verdict(analytic::kExpectedCovered,
                             val.at(analytic::kExpectedCovered),
                             make_estimate(batch.of(Statistic::Covered))));
  out.push_back(make_verdict(analytic::kVarianceCovered,
                             val.at(analytic::kVarianceCovered),
                             variance_estimate(batch.of(Statistic::Covered))));
  out.push_back(make_verdict(analytic::kAtStart, val.at(analytic::kAtStart),
                             make_estimate(batch.of(Statistic::AtStartAtT))));
  out.push_back(make_verdict(analytic::kExpectedVisits,
                             val.at(analytic::kExpectedVisits),
                             make_estimate(batch.of(Statistic::VisitsToStart))));
  out.push_back(make_verdict(analytic::kNoReturn, val.at(analytic::kNoReturn),
                             make_estimate(batch.of(Statistic::NoSecondVisit)),
                             /*informational=*/true));
  return out;
}

std::vector<Verdict> verify(const ModelConfig& config, std::uint64_t n_runs,
                            unsigned threads) {
  require_deterministic(config);
  return verify(run_batch(config, n_runs, threads));
}

bool all_required_pass(const std::vector<Verdict>& verdicts) {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) {
    return v.informational || v.pass;
  });
}

std::vector<LlnPoint> lln_trace(const ModelConfig& base,
                                std::span<const int> horizons,
                                std::uint64_t n_runs, unsigned threads) {
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < 1) throw ConfigError("LLN horizons must be >= 1");
    if (i > 0 && horizons[i] <= horizons[i - 1]) {
      throw ConfigError("LLN horizon grid must be strictly increasing");
    }
  }
  std::vector<LlnPoint> trace;
  for (const int T : horizons) {
    ModelConfig c = base;
    c.horizon = T;
    const McEstimate covered =
        make_estimate(run_batch(c, n_runs, threads).of(Statistic::Covered));
    LlnPoint pt;
    pt.horizon = T;
    pt.ratio = covered;
    pt.ratio.mean /= T;
    pt.ratio.stderr_ /= T;
    pt.ratio.sample_variance /= static_cast<double>(T) * T;
    pt.ratio = with_interval(pt.ratio);
    pt.limit = analytic::expected_covered_asymptote(c.lambda);
    trace.push_back(pt);
  }
  return trace;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_distance(std::vector<double> samples,
                   const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_distance needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f,
                  f - static_cast<double>(i) / n});
  }
  return d;
}

CltResult clt_check(const Batch& batch) {
  const ModelConfig& c = batch.config;
  require_deterministic(c);
  CltResult r;
  r.mean = analytic::expected_covered(c.horizon, c.k0, c.lambda);
  r.variance = analytic::variance_covered(c.horizon, c.k0, c.lambda);
  if (!(r.variance > 0.0)) throw ConfigError("degenerate variance");
  const double sd = std::sqrt(r.variance);
  const Histogram& h = batch.of(Statistic::Covered);
  if (h.n() == 0) throw std::invalid_argument("clt_check needs runs");

  std::vector<double> standardized;
  standardized.reserve(h.n());
  for (const auto& [x, count] : h.counts()) {
    standardized.insert(standardized.end(), count,
                        (static_cast<double>(x) - r.mean) / sd);
  }
  r.ks_distance = ks_distance(std::move(standardized), normal_cdf);

  // Lattice comparison: F_n is a step function on the integers, so the
  // supremum is attained at integer points between min-1 and max.
  const double n = static_cast<double>(h.n());
  const std::int64_t lo = h.counts().begin()->first - 1;
  const std::int64_t hi = h.counts().rbegin()->first;
  auto it = h.counts().begin();
  std::uint64_t cumulative = 0;
  double d = 0.0;
  for (std::int64_t k = lo; k <= hi; ++k) {
    while (it != h.counts().end() && it->first <= k) cumulative += (it++)->second;
    const double ref = normal_cdf((static_cast<double>(k) + 0.5 - r.mean) / sd);
    d = std::max(d, std::abs(static_cast<double>(cumulative) / n - ref));
  }
  // Tails beyond the observed support: F_n is 0 below lo and 1 above hi.
  d = std::max(d, normal_cdf((static_cast<double>(lo) + 0.5 - r.mean) / sd));
  r.ks_distance_lattice = d;

  r.pass = r.ks_distance < kKsThreshold;
  r.in_domain = c.horizon >= kCltMinHorizon && batch.n_runs >= kCltMinRuns;
  return r;
}

CltResult clt_check(const ModelConfig& config, std::uint64_t n_runs,
                    unsigned threads) {
  require_deterministic(config);
  validate(config);
  if (!(analytic::variance_covered(config.horizon, config.k0, config.lambda) > 0.0)) {
    throw ConfigError("degenerate variance");
  }
  return clt_check(run_batch(config, n_runs, threads));
}

std::vector<AzumaPoint> azuma_check(const Batch& batch,
                                    std::span<const double> t_grid) {
  const ModelConfig& c = batch.config;
  const Histogram& h = batch.of(Statistic::Covered);
  if (h.n() == 0) throw std::invalid_argument("azuma_check needs runs");
  const double center =
      c.deterministic() ? analytic::expected_covered(c.horizon, c.k0, c.lambda)
                        : make_estimate(h).mean;
  const double n = static_cast<double>(h.n());

  std::vector<AzumaPoint> out;
  for (const double t : t_grid) {
    if (!(t >= 0.0)) throw ConfigError("deviation t must be >= 0");
    std::uint64_t hits = 0;
    for (const auto& [x, count] : h.counts()) {
      if (std::abs(static_cast<double>(x) - center) >= t) hits += count;
    }
    AzumaPoint p;
    p.t = t;
    p.empirical_tail = static_cast<double>(hits) / n;
    p.stderr_ = std::sqrt(p.empirical_tail * (1.0 - p.empirical_tail) / n);
    p.bound = analytic::azuma_tail_bound(t, c.horizon, c.k0);
    p.pass = p.empirical_tail <= p.bound + 3.0 * p.stderr_;
    out.push_back(p);
  }
  return out;
}

std::vector<std::vector<int>> interval_move_counts(const ModelConfig& config,
                                                   std::uint64_t n_runs) {
  require_deterministic(config);
  Walker walker(config);
  std::vector<std::vector<int>> out;
  out.reserve(n_runs);
  for (std::uint64_t i = 0; i < n_runs; ++i) {
    const auto result = walker.run(i, {.record_log = true});
    std::vector<int> row(static_cast<std::size_t>(config.horizon), 0);
    for (const auto& ev : result.log->events) {
      if (ev.is_move()) ++row[static_cast<std::size_t>(ev.time)];
    }
    out.push_back(std::move(row));
  }
  return out;
}

ChiSquareResult chi_square_poisson(std::span<const int> counts, double mean) {
  if (counts.empty()) throw std::invalid_argument("chi-square needs counts");
  if (!(mean > 0.0)) throw std::invalid_argument("Poisson mean must be > 0");
  const double n = static_cast<double>(counts.size());

  // Single-value bins 0..last-1 while each expects >= 5; `last` collects the
  // upper tail.
  std::vector<double> pmf;
  double p = std::exp(-mean);
  double tail = 1.0;
  while (n * p >= 5.0 && n * (tail - p) >= 5.0) {
    pmf.push_back(p);
    tail -= p;
    p *= mean / static_cast<double>(pmf.size());
  }
  const std::size_t last = pmf.size();
  std::vector<double> observed(last + 1, 0.0);
  for (const int m : counts) {
    if (m < 0) throw std::invalid_argument("counts must be non-negative");
    observed[std::min<std::size_t>(static_cast<std::size_t>(m), last)] += 1.0;
  }
  pmf.push_back(std::max(tail, 0.0));

  ChiSquareResult r;
  for (std::size_t b = 0; b <= last; ++b) {
    const double expected = n * pmf[b];
    r.statistic += (observed[b] - expected) * (observed[b] - expected) / expected;
  }
  r.dof = static_cast<int>(last);
  if (r.dof < 1) throw std::invalid_argument("too few observations to bin");
  boost::math::chi_squared_distribution<double> dist(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

double sample_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("correlation needs two equal-length samples");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

void write_verdicts_csv(std::ostream& out, const std::vector<Verdict>& verdicts) {
  using detail::format_double;
  out << "quantity,analytic,mc_mean,stderr,z,pass\n";
  for (const auto& v : verdicts) {
    out << v.quantity << ',' << format_double(v.analytic) << ','
        << format_double(v.estimate.mean) << ','
        << format_double(v.estimate.stderr_) << ',' << format_double(v.z_score)
        << ',' << (v.informational ? "informational" : (v.pass ? "true" : "false"))
        << '\n';
  }
}

nlohmann::json verdicts_to_json(const std::vector<Verdict>& verdicts) {
  auto number = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return detail::format_double(x);
  };
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : verdicts) {
    arr.push_back({{"quantity", v.quantity},
                   {"analytic", v.analytic},
                   {"mc_mean", v.estimate.mean},
                   {"stderr", v.estimate.stderr_},
                   {"n_runs", v.estimate.n_runs},
                   {"ci95", {v.estimate.ci95.lower, v.estimate.ci95.upper}},
                   {"z", number(v.z_score)},
                   {"pass", v.pass},
                   {"informational", v.informational}});
  }
  return arr;
}

}  // namespace dyncover::stats
