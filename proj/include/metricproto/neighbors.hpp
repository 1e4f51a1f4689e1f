#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "metricproto/metric.hpp"
#include "metricproto/point.hpp"

namespace metricproto {

struct Neighbor {
    std::size_t index;  // position in the dataset
    double distance;
};

/// Result of an exact k-nearest-neighbor query. Entries are sorted by
/// (distance, index) lexicographically: distances non-decreasing, and equal
/// distances ordered by increasing dataset index.
struct NeighborList {
    std::vector<Neighbor> entries;
};

/// Brute-force exact k-NN under the (distance, index) total order.
/// Throws if k is out of [1, |dataset|] or the dataset is empty.
NeighborList k_nearest(const MetricSpace& space, std::span<const Point> dataset, const Point& query,
                       std::size_t k);

/// Precomputed pivot distances for triangle-inequality pruning. Pivots are a
/// greedy far-point sweep of ceil(sqrt(n)) dataset points starting at index 0;
/// only the metric is used, no coordinates are assumed.
class PivotIndex {
public:
    PivotIndex(MetricPtr space, std::vector<Point> dataset);

    /// Exact k-NN; bit-identical to k_nearest on every input. Pruning skips a
    /// point only when its triangle-inequality lower bound strictly exceeds
    /// the current k-th best distance.
    NeighborList k_nearest_pruned(const Point& query, std::size_t k) const;

    std::span<const Point> points() const { return dataset_; }
    const MetricPtr& space() const { return space_; }
    std::size_t pivot_count() const { return pivots_.size(); }

private:
    MetricPtr space_;
    std::vector<Point> dataset_;
    std::vector<std::size_t> pivots_;
    std::vector<std::vector<double>> pivot_dist_;  // [pivot][point]
    std::vector<std::ptrdiff_t> pivot_of_;         // dataset index -> pivot slot or -1
};

/// Free-function form of the pruned search.
inline NeighborList k_nearest_pruned(const PivotIndex& index, const Point& query, std::size_t k) {
    return index.k_nearest_pruned(query, k);
}

/// Exact k-NN query service over a fixed dataset. All implementations obey
/// the same (distance, index) contract as k_nearest, so they are
/// interchangeable; make() picks the cheapest one for the space at hand.
/// Immutable after construction; concurrent queries are safe.
class KnnEngine {
public:
    virtual ~KnnEngine() = default;

    virtual NeighborList query(const Point& q, std::size_t k) const = 0;
    virtual Neighbor nearest(const Point& q) const;

    /// Class frequencies among the k nearest neighbors. labels[i] in {1..M}
    /// parallel to the dataset; out is resized to num_classes.
    virtual void class_counts(const Point& q, std::size_t k, std::span<const int> labels, int num_classes,
                              std::vector<std::int64_t>& out) const;

    virtual std::span<const Point> points() const = 0;

    /// Picks an engine: the sorted-line engine when the dataset lives on a
    /// 1-D L_p line, a pivot index for larger datasets, brute force otherwise.
    /// Passing labels lets engines precompute class-count acceleration.
    static std::unique_ptr<KnnEngine> make(MetricPtr space, std::vector<Point> dataset,
                                           std::span<const int> labels = {}, int num_classes = 0);
};

/// Sorted-order engine for 1-dimensional vector points under an L_p metric,
/// where the distance is |x - z|. The k-th neighbor distance is selected from
/// the two monotone distance sequences around the query, and boundary
/// distance ties are resolved by original index, so results match brute
/// force exactly. With labels attached, class-count queries run in
/// O(log n + M) via per-class prefix sums.
class LineKnnEngine final : public KnnEngine {
public:
    LineKnnEngine(MetricPtr space, std::vector<Point> dataset, std::span<const int> labels = {},
                  int num_classes = 0);

    NeighborList query(const Point& q, std::size_t k) const override;
    Neighbor nearest(const Point& q) const override;
    void class_counts(const Point& q, std::size_t k, std::span<const int> labels, int num_classes,
                      std::vector<std::int64_t>& out) const override;
    std::span<const Point> points() const override { return dataset_; }

    /// True when every point is a plain 1-D vector and the space is an L_p
    /// metric, i.e. the engine's |x - z| shortcut is exact.
    static bool applicable(const MetricSpace& space, std::span<const Point> dataset);

private:
    struct Selection {
        double kth_distance = 0.0;
        std::size_t strict_lo = 0, strict_hi = 0;  // sorted positions with distance < kth
        std::vector<std::size_t> tie_positions;    // fill to k, lowest original index first
    };
    Selection select(double x, std::size_t k) const;
    double query_coord(const Point& q) const;

    MetricPtr space_;
    std::vector<Point> dataset_;
    std::vector<double> coord_;                       // sorted
    std::vector<std::size_t> orig_;                   // original index per sorted position
    std::vector<std::vector<std::int64_t>> prefix_;   // per-class prefix sums over sorted order
    std::vector<int> sorted_labels_;                  // labels in sorted order (tie fills)
};

} // namespace metricproto
