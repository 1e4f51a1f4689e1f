#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "metricproto/dataset.hpp"
#include "metricproto/metric.hpp"
#include "metricproto/neighbors.hpp"
#include "metricproto/point.hpp"

namespace metricproto {

/// Voronoi partition induced by an ordered nucleus list. Cell assignment is
/// 1-nearest-neighbor over the nuclei with ties broken by lowest nucleus
/// index, so every point maps to exactly one cell. Immutable after build;
/// concurrent assignment is safe.
class VoronoiPartition {
public:
    VoronoiPartition(MetricPtr space, std::vector<Point> nuclei);

    /// Index (0-based) of the closest nucleus, lowest index on ties. Agrees
    /// with k_nearest(space, nuclei, x, 1) by construction.
    std::size_t assign_cell(const Point& x) const;

    std::size_t cell_count() const { return engine_->points().size(); }
    std::span<const Point> nuclei() const { return engine_->points(); }
    const MetricPtr& space() const { return space_; }

private:
    MetricPtr space_;
    std::shared_ptr<const KnnEngine> engine_;
};

/// Per-cell label statistics. counts[c] is the number of data points in cell
/// c; class_counts[c][j-1] splits it by class (classification mode) and
/// sums[c] accumulates targets (regression mode).
struct CellStats {
    std::vector<std::int64_t> counts;
    std::vector<std::vector<std::int64_t>> class_counts;
    std::vector<double> sums;
};

/// Exact per-cell tallies of a labeled sample; cells with no data keep zero
/// counts. Invariant to dataset order.
CellStats tally(const VoronoiPartition& partition, const LabeledDataset& data);

} // namespace metricproto
