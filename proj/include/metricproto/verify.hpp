#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace metricproto {

struct CheckResult {
    std::string name;
    bool pass;
    std::string detail;
};

/// Metric axioms on random triples from every built-in metric plus an
/// augmented space; exact identities, 1e-12 triangle slack for floating-point
/// metrics.
CheckResult check_metric_axioms(std::size_t triples_per_metric, std::uint64_t seed);

/// Augmentation kills ties: repeated query/dataset draws over the discrete
/// metric with tie coordinates attached never produce an exact distance tie.
CheckResult check_no_ties_augmented(std::size_t draws, std::uint64_t seed);

/// Pruned search (and the sorted-line engine where applicable) returns
/// bit-identical results to brute force on randomized instances per metric,
/// including tie-heavy quantized data.
CheckResult check_knn_oracle(std::size_t instances_per_metric, std::uint64_t seed);

/// Proto-NN predictions equal from-scratch cell majority votes on randomized
/// instances.
CheckResult check_protonn_compression(std::size_t instances, std::uint64_t seed);

/// Margin condition: holds empirically where declared, and the degenerate
/// pure-noise family is flagged.
CheckResult check_margin_conditions(std::uint64_t seed);

/// Generalized Lipschitz condition: holds where declared; the discontinuous
/// halfspace family is flagged under a power-law h.
CheckResult check_lipschitz_conditions(std::uint64_t seed);

/// Excess <= sum of J terms on randomized finite-support instances, exact
/// rational arithmetic, alternating prototype and k-NN plug-ins; plus the
/// zero-excess exact-posterior rule.
CheckResult check_decomposition(std::size_t instances, std::uint64_t seed);

/// Posterior vectors of every family sum to 1 within 1e-12.
CheckResult check_posterior_normalization(std::size_t points_per_family, std::uint64_t seed);

/// Gamma-net separation and maximality, checked exhaustively on random builds.
CheckResult check_gamma_net_invariants(std::size_t instances, std::uint64_t seed);

/// The same sweep config produces byte-identical CSV output when run twice.
CheckResult check_reproducibility();

/// The full battery at CLI scale (the rate-reproduction criteria live in the
/// acceptance suite, not here).
std::vector<CheckResult> run_verify_battery();

} // namespace metricproto
