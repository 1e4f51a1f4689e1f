#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "metricproto/metric.hpp"
#include "metricproto/rng.hpp"

namespace metricproto {

using Rational = boost::multiprecision::cpp_rational;

/// A finite-support distribution with rational marginal and posteriors over a
/// catalog of points under a table metric. Small enough for exhaustive label
/// enumeration: support <= 8, classes <= 4.
struct FiniteSpec {
    std::shared_ptr<const TableMetric> space;
    std::vector<Rational> marginal;                // [support], sums to 1
    std::vector<std::vector<Rational>> posterior;  // [support][class], rows sum to 1
    int num_classes = 0;

    std::size_t support_size() const { return marginal.size(); }
    int bayes_label(std::size_t s) const;                 // lowest-index argmax
    Rational delta_star(std::size_t s, int label) const;  // P_{g*(z_s)}(z_s) - P_label(z_s)
    Rational bayes_risk() const;
    void validate() const;
};

/// A plug-in rule whose posterior estimates at the support points are a pure
/// function of the training labels (positions are fixed and conditioned on).
class EnumerablePlugin {
public:
    virtual ~EnumerablePlugin() = default;
    virtual std::string name() const = 0;
    /// Fills out[s][j] with the estimate of P_j at support point s.
    virtual void estimates(std::span<const int> labels,
                           std::vector<std::vector<Rational>>& out) const = 0;
};

/// Prototype rule over fixed training positions: per-cell class frequencies
/// with the 0/0 = 0 convention.
std::unique_ptr<EnumerablePlugin> make_enumerable_proto_nn(const FiniteSpec& spec,
                                                           std::span<const int> train_ids,
                                                           std::span<const int> nucleus_ids);

/// k-NN rule over fixed training positions with (distance, index) ordering.
std::unique_ptr<EnumerablePlugin> make_enumerable_knn(const FiniteSpec& spec,
                                                      std::span<const int> train_ids, int k);

/// Degenerate rule whose estimates equal the true posteriors.
std::unique_ptr<EnumerablePlugin> make_enumerable_exact(const FiniteSpec& spec);

/// Exact evaluation of the excess-risk decomposition: the excess and every
/// J term are computed by enumerating all M^n training label patterns,
/// weighted by their exact probabilities given the fixed positions.
struct DecompositionReport {
    Rational excess;                                // E{L(g_n)} - L*
    std::vector<std::vector<Rational>> j_terms;     // [j][l]
    std::vector<std::vector<Rational>> delta_star;  // [support][l]
    Rational bound() const;
    bool holds() const { return excess <= bound(); }
};

/// Enumerates exhaustively and asserts nothing: callers inspect holds().
/// Throws when the instance exceeds the enumeration limits (support 8,
/// classes 4, training size 12) or train_ids reference unknown support points.
DecompositionReport verify_decomposition(const FiniteSpec& spec, const EnumerablePlugin& model,
                                         std::span<const int> train_ids);

/// Randomized instance for property tests: rational marginal/posteriors from
/// small integer weights and a table metric realized by distinct points on a
/// line (axioms hold by construction).
struct FiniteInstance {
    FiniteSpec spec;
    std::vector<int> train_ids;
    std::vector<int> nucleus_ids;
    int k = 1;
};
FiniteInstance random_finite_instance(Rng& rng);

} // namespace metricproto
