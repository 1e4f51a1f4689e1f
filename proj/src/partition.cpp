#include "metricproto/partition.hpp"

#include <stdexcept>

namespace metricproto {

VoronoiPartition::VoronoiPartition(MetricPtr space, std::vector<Point> nuclei) : space_(space) {
    if (nuclei.empty()) throw std::invalid_argument("VoronoiPartition: empty nucleus list");
    engine_ = KnnEngine::make(std::move(space), std::move(nuclei));
}

std::size_t VoronoiPartition::assign_cell(const Point& x) const {
    return engine_->nearest(x).index;
}

CellStats tally(const VoronoiPartition& partition, const LabeledDataset& data) {
    const std::size_t m = partition.cell_count();
    CellStats stats;
    stats.counts.assign(m, 0);
    if (data.classification())
        stats.class_counts.assign(m, std::vector<std::int64_t>(static_cast<std::size_t>(data.num_classes), 0));
    else
        stats.sums.assign(m, 0.0);

    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t cell = partition.assign_cell(data.points[i]);
        ++stats.counts[cell];
        if (data.classification()) {
            const int y = data.labels[i];
            if (y < 1 || y > data.num_classes) throw std::invalid_argument("tally: label out of range");
            ++stats.class_counts[cell][static_cast<std::size_t>(y - 1)];
        } else {
            stats.sums[cell] += data.targets[i];
        }
    }
    return stats;
}

} // namespace metricproto
