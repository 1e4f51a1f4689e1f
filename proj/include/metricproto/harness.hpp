#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metricproto/metric.hpp"
#include "metricproto/synthetic.hpp"

namespace metricproto {

/// Configuration of a rate experiment. Schedules are expression strings over
/// n (and k, for the nucleus schedule), e.g. "floor(pow(n,2/3))".
struct ExperimentConfig {
    std::string family;
    std::string classifier;  // knn | proto_nn | proto_knn | optinet_lite | bayes
    std::string metric = "euclidean";
    double delta = 0.0;      // 0 disables augmentation
    bool auto_delta = false; // derive delta from a pilot sample
    std::vector<std::size_t> n_grid;
    std::string k_schedule = "floor(pow(n,2/3))";
    std::string m_schedule;  // default depends on the classifier
    std::size_t trials = 100;
    std::size_t test_points = 100000;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument on any violated invariant (empty or
    /// non-increasing n grid, schedules out of range for some n, ...).
    void validate() const;

    static ExperimentConfig from_json_file(const std::string& path);
    static ExperimentConfig from_json_text(const std::string& text);
};

/// Rao-Blackwellized conditional risk of a fitted classifier against known
/// posteriors.
struct RiskEstimate {
    double risk;            // mean over test draws of 1 - P_{g(x)}(x)
    double risk_stderr;
    double excess;          // mean of P_{g*(x)}(x) - P_{g(x)}(x); pointwise >= 0
    double excess_stderr;
};

/// Measures the conditional risk of `classify` over test_points marginal
/// draws. When `aug` is given, drawn points get tie coordinates attached
/// before classification (posteriors ignore them). The excess estimator uses
/// the per-point Bayes gap, so it shares the draw with the risk estimate and
/// carries far less Monte-Carlo variance.
RiskEstimate conditional_risk(const DistributionSpec& spec,
                              const std::function<int(const Point&)>& classify,
                              std::size_t test_points, std::uint64_t seed,
                              const AugmentedSpace* aug = nullptr);

struct TrialRow {
    std::size_t n;
    std::size_t trial;
    long k;  // 0 when the classifier takes no k
    long m;  // 0 when the classifier takes no nucleus sample
    double risk;
    double bayes_risk;
    double excess;
    double stderr_;
};

struct AggregateRow {
    std::size_t n;
    double mean_risk;
    double mean_excess;
    double sem_excess;  // standard error of the mean across trials
};

struct RiskReport {
    ExperimentConfig config;
    double bayes_risk = 0.0;
    std::vector<TrialRow> rows;          // ordered by (n, trial)
    std::vector<AggregateRow> aggregates;
};

/// Runs the configured sweep: for every n and trial, draws fresh labeled
/// (and nucleus) samples from trial-derived seeds, fits the classifier with
/// k(n) and m(n), and measures conditional risk. Trials run in parallel;
/// output order is deterministic.
RiskReport rate_sweep(const ExperimentConfig& config);

struct SlopeFit {
    double slope;
    double stderr_;
    std::size_t points_used;
    std::vector<std::size_t> excluded_n;  // grid points with non-positive mean excess
};

/// Ordinary least squares of log mean-excess on log n. Grid points with
/// non-positive mean excess are excluded and reported; fewer than 3 usable
/// points is an error.
SlopeFit fit_log_slope(std::span<const AggregateRow> aggregates);

/// n^-exponent predicted by the declared (margin, Lipschitz) parameters:
/// gamma_h (1+alpha) / (2 gamma_h + 1); absent when the family declares
/// neither or alpha is unbounded.
std::optional<double> theoretical_exponent(const DistributionSpec& spec);

/// Columns: n,trial,k,m,risk,bayes_risk,excess,stderr. Doubles are written
/// round-trip exactly, so identical reports produce identical bytes.
void write_risk_csv(std::ostream& os, const RiskReport& report);

/// Summary JSON: {slope, slope_stderr, theoretical_exponent, grid, mean_excess}.
std::string summary_json(const RiskReport& report, const SlopeFit& fit);

/// A fitted classifier plus the schedule values it consumed.
struct FittedClassifier {
    std::function<int(const Point&)> classify;
    long k = 0;
    long m = 0;
};

/// Fits the named classifier for one trial. Nucleus samples (proto rules)
/// come from a stream independent of the labeled data, matching the
/// independent-unlabeled-sample assumption.
FittedClassifier fit_classifier(const std::string& kind, const DistributionSpec& spec, MetricPtr space,
                                const AugmentedSpace* aug, std::size_t n, long k, long m,
                                std::uint64_t trial_seed);

} // namespace metricproto
