#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "metricproto/point.hpp"

namespace metricproto {

enum class MetricKind { vector_lp, discrete, edit, table, augmented };

/// Distance oracle over an opaque point universe. Implementations are
/// immutable after construction; concurrent distance evaluations are safe.
class MetricSpace {
public:
    virtual ~MetricSpace() = default;

    /// Returns rho(a, b). Throws std::invalid_argument on a universe or
    /// dimension mismatch.
    virtual double distance(const Point& a, const Point& b) const = 0;

    virtual MetricKind kind() const = 0;

    /// The config string this space was built from ("euclidean", "lp:3", ...).
    virtual std::string descriptor() const = 0;
};

using MetricPtr = std::shared_ptr<const MetricSpace>;

/// L_p metric over dense real vectors; p = 2 is Euclidean. For 1-dimensional
/// vectors every L_p reduces to |a - b| and is computed that way, so ordering
/// never suffers a square/sqrt round trip.
class LpMetric final : public MetricSpace {
public:
    explicit LpMetric(double p);
    double distance(const Point& a, const Point& b) const override;
    MetricKind kind() const override { return MetricKind::vector_lp; }
    std::string descriptor() const override;
    double exponent() const { return p_; }

private:
    double p_;
};

/// 0/1 metric: distance 1 between any two points with different payloads.
class DiscreteMetric final : public MetricSpace {
public:
    double distance(const Point& a, const Point& b) const override;
    MetricKind kind() const override { return MetricKind::discrete; }
    std::string descriptor() const override { return "discrete"; }
};

/// Levenshtein distance over symbol sequences (unit insert/delete/substitute).
class EditMetric final : public MetricSpace {
public:
    double distance(const Point& a, const Point& b) const override;
    MetricKind kind() const override { return MetricKind::edit; }
    std::string descriptor() const override { return "edit"; }
};

/// Lookup metric over a finite catalog. The table is validated against all
/// four metric axioms at construction.
class TableMetric final : public MetricSpace {
public:
    TableMetric(std::vector<std::string> symbols, std::vector<std::vector<double>> table);

    double distance(const Point& a, const Point& b) const override;
    MetricKind kind() const override { return MetricKind::table; }
    std::string descriptor() const override;

    std::size_t catalog_size() const { return symbols_.size(); }
    const std::vector<std::string>& symbols() const { return symbols_; }
    const std::vector<std::vector<double>>& table() const { return table_; }

    /// Resolves a symbol name to its catalog point. Throws on unknown symbols.
    Point point_for(const std::string& symbol) const;

    /// Parses a CSV file with a header row/column of symbol names.
    static std::shared_ptr<const TableMetric> load_csv(const std::string& path);

    void set_source_path(std::string path) { source_path_ = std::move(path); }

private:
    std::vector<std::string> symbols_;
    std::vector<std::vector<double>> table_;
    std::string source_path_;
};

/// Base space extended with a [0,1] tie-breaking coordinate:
/// distance((x,u),(z,v)) = base(x,z) + delta * |u - v|. With the coordinates
/// drawn uniformly, exact distance ties among sampled points have
/// probability zero while the base geometry is perturbed by at most delta.
class AugmentedSpace final : public MetricSpace {
public:
    AugmentedSpace(MetricPtr base, double delta, std::uint64_t rng_seed);

    double distance(const Point& a, const Point& b) const override;
    MetricKind kind() const override { return MetricKind::augmented; }
    std::string descriptor() const override;

    const MetricPtr& base() const { return base_; }
    double delta() const { return delta_; }
    std::uint64_t seed() const { return seed_; }

    /// Attaches the tie coordinate for the draw_index-th sampled point. The
    /// coordinate is a pure function of (rng_seed, draw_index), so augmented
    /// datasets are replayable.
    Point attach(Point p, std::uint64_t draw_index) const;

private:
    MetricPtr base_;
    double delta_;
    std::uint64_t seed_;
};

/// Builds an augmented space; throws if delta <= 0.
std::shared_ptr<const AugmentedSpace> augment(MetricPtr base, double delta, std::uint64_t rng_seed);

/// Scale-free default weight for augmentation: 1e-6 times the median pairwise
/// distance of a pilot sample (at most 100 points are used).
double default_delta(const MetricSpace& base, std::span<const Point> pilot);

/// Metric selection from a config string:
///   "euclidean" | "lp:<p>" | "discrete" | "edit" | "table:<path>"
MetricPtr parse_metric(const std::string& config);

} // namespace metricproto
