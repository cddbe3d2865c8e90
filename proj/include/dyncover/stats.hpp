#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dyncover/model.hpp"

namespace dyncover::stats {

enum class Statistic { Covered = 0, VisitsToStart, AtStartAtT, NoSecondVisit };

inline constexpr std::size_t kStatisticCount = 4;

std::string statistic_name(Statistic s);

/// Exact counts of an integer-valued per-run statistic.
///
/// Every summary field is an integer (booleans as 0/1), so keeping counts
/// instead of floating sums makes merging exactly associative and
/// commutative: any split of runs across workers yields identical bits.
class Histogram {
 public:
  void add(std::int64_t value, std::uint64_t count = 1);
  void merge(const Histogram& other);

  [[nodiscard]] std::uint64_t n() const { return n_; }
  [[nodiscard]] const std::map<std::int64_t, std::uint64_t>& counts() const {
    return counts_;
  }
  friend bool operator==(const Histogram&, const Histogram&) = default;

 private:
  std::map<std::int64_t, std::uint64_t> counts_;
  std::uint64_t n_ = 0;
};

struct Interval {
  double lower;
  double upper;
};

struct McEstimate {
  double mean = 0.0;
  double sample_variance = 0.0;
  double stderr_ = 0.0;  // sqrt(sample_variance / n_runs)
  std::uint64_t n_runs = 0;
  Interval ci95{0.0, 0.0};
};

inline constexpr double kCi95Z = 1.96;

/// Mean, unbiased sample variance, standard error and 95% interval.
/// Requires at least two observations.
McEstimate make_estimate(const Histogram& h);

/// The sample variance as an estimate, with a delete-one jackknife
/// standard error: mean = s^2, stderr_ = jackknife SE, sample_variance =
/// n * SE^2 so the McEstimate relations still hold.
McEstimate variance_estimate(const Histogram& h);

/// Per-statistic histograms over runs 0..n_runs-1 of one configuration.
struct Batch {
  ModelConfig config;
  std::uint64_t n_runs = 0;
  std::array<Histogram, kStatisticCount> histograms;

  [[nodiscard]] const Histogram& of(Statistic s) const {
    return histograms[static_cast<std::size_t>(s)];
  }
};

/// 0 selects std::thread::hardware_concurrency().
unsigned resolve_threads(unsigned threads);

/// Runs the simulator for indices 0..n_runs-1, fanned out over `threads`
/// workers. The result does not depend on the worker count.
Batch run_batch(const ModelConfig& config, std::uint64_t n_runs,
                unsigned threads = 0);

McEstimate estimate(const ModelConfig& config, Statistic statistic,
                    std::uint64_t n_runs, unsigned threads = 0);

inline constexpr double kZThreshold = 4.0;

struct Verdict {
  std::string quantity;
  double analytic = 0.0;
  McEstimate estimate;
  double z_score = 0.0;
  bool pass = false;
  // Informational verdicts are reported but never gate acceptance; their
  // `pass` records whether |z| <= threshold.
  bool informational = false;
};

/// z = (mean - analytic) / stderr; 0 when both sides agree exactly and the
/// estimate has no spread, +-inf when they disagree with no spread.
double z_score(double analytic, const McEstimate& estimate);

Verdict make_verdict(std::string quantity, double analytic,
                     const McEstimate& estimate, bool informational = false);

/// Pairs E[N_T], Var(N_T), Q(T,k0) and E1[T] with Monte Carlo estimates;
/// appends the no-second-visit comparison as informational.
std::vector<Verdict> verify(const Batch& batch);
std::vector<Verdict> verify(const ModelConfig& config, std::uint64_t n_runs,
                            unsigned threads = 0);

/// True when every non-informational verdict passes.
bool all_required_pass(const std::vector<Verdict>& verdicts);

struct LlnPoint {
  int horizon = 0;
  McEstimate ratio;  // N_T / T
  double limit = 0.0;
};

/// Monte Carlo N_T / T along a strictly increasing grid of horizons.
std::vector<LlnPoint> lln_trace(const ModelConfig& base,
                                std::span<const int> horizons,
                                std::uint64_t n_runs, unsigned threads = 0);

double normal_cdf(double x);

/// One-sample Kolmogorov-Smirnov distance sup_x |F_n(x) - F(x)|, with the
/// left limits of the empirical function included (correct under ties).
double ks_distance(std::vector<double> samples,
                   const std::function<double(double)>& cdf);

inline constexpr double kKsThreshold = 0.02;
inline constexpr int kCltMinHorizon = 500;
inline constexpr std::uint64_t kCltMinRuns = 10'000;

struct CltResult {
  double ks_distance = 0.0;  // (N_T - E[N_T]) / sqrt(Var(N_T)) against Phi
  // sup over integers k of |F_n(k) - Phi((k + 1/2 - E[N_T]) / sd)|: the
  // same comparison with a half-unit continuity correction for the lattice.
  double ks_distance_lattice = 0.0;
  bool pass = false;       // ks_distance < kKsThreshold
  bool in_domain = false;  // T >= kCltMinHorizon and n_runs >= kCltMinRuns
  double mean = 0.0;
  double variance = 0.0;
};

/// Standardizes N_T with the analytic mean and variance and measures its
/// distance to the standard normal. Throws ConfigError("degenerate
/// variance") when Var(N_T) == 0, and for Poisson insertion.
CltResult clt_check(const Batch& batch);
CltResult clt_check(const ModelConfig& config, std::uint64_t n_runs,
                    unsigned threads = 0);

struct AzumaPoint {
  double t = 0.0;
  double empirical_tail = 0.0;
  double stderr_ = 0.0;
  double bound = 0.0;
  bool pass = false;  // empirical_tail <= bound + 3 stderr_
};

/// Empirical P(|N_T - E[N_T]| >= t) against exp(-2t^2/(k0+T)). Centers on
/// the analytic mean under deterministic insertion, the sample mean
/// otherwise.
std::vector<AzumaPoint> azuma_check(const Batch& batch,
                                    std::span<const double> t_grid);

/// Moves per unit interval: result[run][t-1] = M_t for t = 1..T.
std::vector<std::vector<int>> interval_move_counts(const ModelConfig& config,
                                                   std::uint64_t n_runs);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Pearson goodness of fit of non-negative counts to Poisson(mean). Bins
/// below 5 expected observations are pooled into the upper tail.
ChiSquareResult chi_square_poisson(std::span<const int> counts, double mean);

double sample_correlation(std::span<const double> x, std::span<const double> y);

// Serialization; CSV columns: quantity,analytic,mc_mean,stderr,z,pass.
void write_verdicts_csv(std::ostream& out, const std::vector<Verdict>& verdicts);
nlohmann::json verdicts_to_json(const std::vector<Verdict>& verdicts);

}  // namespace dyncover::stats
