#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "metricproto/dataset.hpp"
#include "metricproto/metric.hpp"
#include "metricproto/rng.hpp"

namespace metricproto {

struct MarginParams {
    double alpha;   // margin exponent
    double c_star;  // margin constant
};

struct LipschitzParams {
    double c_star;  // constant in h(s) = c_star * s^gamma
    double gamma;   // exponent
    double h(double s) const;
};

/// Midpoint concavity of h on a uniform grid over [0,1]:
/// h((a+b)/2) >= (h(a)+h(b))/2 at every adjacent pair. A grid diagnostic,
/// not a proof; the hybrid rule's rate analysis asks for concave h.
bool h_concavity_diagnostic(const LipschitzParams& params, std::size_t grid_points = 1000);

/// A synthetic distribution with closed-form posteriors, a known Bayes risk,
/// and (where derived) declared margin and generalized-Lipschitz parameters.
/// The marginal of X is Uniform[0,1]^d for every built-in family. Immutable;
/// sampling takes explicit seeds, so parallel trials never share a stream.
class DistributionSpec {
public:
    virtual ~DistributionSpec() = default;

    virtual std::string name() const = 0;
    virtual int dimension() const = 0;
    virtual int num_classes() const = 0;

    virtual Point sample_x(Rng& rng) const;

    /// Posterior vector (P_1(x), ..., P_M(x)); sums to 1.
    virtual std::vector<double> posterior(const Point& x) const = 0;
    double posterior(const Point& x, int j) const;

    /// Bayes-optimal label: lowest-index argmax of the posterior.
    int bayes_label(const Point& x) const;

    /// P{g*(X) != Y} = E[1 - max_j P_j(X)], closed form where available,
    /// otherwise quadrature to 1e-6 absolute (quasi-random for d > 3, with
    /// its error estimate accepted as the provenance caveat).
    virtual double bayes_risk() const = 0;

    /// How bayes_risk() was obtained ("closed-form" or "quadrature").
    virtual std::string bayes_risk_provenance() const { return "closed-form"; }

    virtual std::optional<MarginParams> margin() const { return std::nullopt; }
    virtual std::optional<LipschitzParams> lipschitz() const { return std::nullopt; }
};

using SpecPtr = std::shared_ptr<const DistributionSpec>;

/// Draws n i.i.d. labeled pairs; y follows the categorical posterior at x.
/// Deterministic given the seed.
LabeledDataset sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

/// Draws n unlabeled points from the marginal.
std::vector<Point> sample_points(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

/// Numeric Bayes risk through the generic quadrature path, ignoring any
/// closed form; kept as the independent route for cross-checking.
double bayes_risk_quadrature(const DistributionSpec& spec, double abs_tol = 1e-6);

/// Family selection from a config string:
///   "purenoise:M=3[,d=2]" | "noiseless:d=2" | "margin:beta=1.0" |
///   "linear1d" | "simplex:d=2,M=3"
SpecPtr parse_family(const std::string& config);

struct FamilyInfo {
    std::string config_example;
    std::string description;
};
std::vector<FamilyInfo> list_families();

// ---------------------------------------------------------------------------
// Empirical condition checks

struct MarginCheckRow {
    double t;
    double empirical_cdf;  // MC estimate of P{P_(1)(X) - P_(2)(X) <= t}
    double stderr_;
    double bound;          // c_star * t^alpha
    bool flagged;          // empirical exceeds bound + 3 stderr
};

struct MarginCheckReport {
    double alpha;
    double c_star;
    std::vector<MarginCheckRow> rows;
    bool any_flagged() const;
};

/// Monte-Carlo check of the margin condition. Uses the family's declared
/// (alpha, c_star) unless an override is supplied; throws when neither is
/// available.
MarginCheckReport check_margin(const DistributionSpec& spec, std::span<const double> t_grid,
                               std::size_t n_mc, std::uint64_t seed,
                               std::optional<MarginParams> override_params = std::nullopt);

struct LipschitzViolation {
    Point x, z;
    double distance;
    double ball_mass_estimate;
    double gap;        // max_j |P_j(x) - P_j(z)|
    double threshold;  // h(mass + 3 stderr)
};

struct LipschitzCheckReport {
    std::size_t pairs_checked;
    std::vector<LipschitzViolation> violations;
    bool any_flagged() const { return !violations.empty(); }
};

/// Monte-Carlo check of the generalized Lipschitz condition under the given
/// metric: ball masses mu(S_{x, rho(x,z)}) are estimated by n_ball_mc draws
/// from the marginal, and the monotone h absorbs the 3-sigma mass error.
LipschitzCheckReport check_generalized_lipschitz(const DistributionSpec& spec, const MetricSpace& space,
                                                 std::size_t n_pairs, std::size_t n_ball_mc,
                                                 std::uint64_t seed,
                                                 std::optional<LipschitzParams> override_params = std::nullopt);

} // namespace metricproto
