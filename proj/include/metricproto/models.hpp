#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "metricproto/dataset.hpp"
#include "metricproto/metric.hpp"
#include "metricproto/neighbors.hpp"
#include "metricproto/partition.hpp"

namespace metricproto {

/// Lowest-index argmax over a score vector; the tie rule shared by every
/// plug-in rule here, including the all-zero vector of an empty cell. Returns
/// a class label in {1..M}.
int argmax_class(std::span<const double> scores);

/// Prototype rule: each Voronoi cell carries the class frequencies of the
/// training points that fell into it (empty cells keep the all-zero vector,
/// the 0/0 = 0 convention), and prediction is the majority vote of the
/// query's cell. Construction is O(m*n) distance evaluations, queries O(m).
class ProtoNNModel {
public:
    ProtoNNModel(std::shared_ptr<const VoronoiPartition> partition,
                 std::vector<std::vector<double>> posteriors, int num_classes);

    int predict(const Point& x) const;
    const std::vector<double>& posterior(std::size_t cell) const { return posteriors_[cell]; }
    const VoronoiPartition& partition() const { return *partition_; }
    int num_classes() const { return num_classes_; }

private:
    std::shared_ptr<const VoronoiPartition> partition_;
    std::vector<std::vector<double>> posteriors_;  // [cell][class-1], rows sum to 1 or are all zero
    int num_classes_;
};

ProtoNNModel fit_proto_nn(const LabeledDataset& data, std::vector<Point> nuclei, MetricPtr space);

/// Hybrid rule: each nucleus stores the class frequencies among its k nearest
/// labeled points; a query routes to its nearest nucleus and returns that
/// nucleus's argmax. Piecewise constant on the nucleus cells.
class ProtoKNNModel {
public:
    ProtoKNNModel(std::shared_ptr<const VoronoiPartition> partition,
                  std::vector<std::vector<double>> nucleus_posteriors, int num_classes, int k);

    int predict(const Point& x) const;
    const std::vector<double>& posterior_at_nucleus(std::size_t nucleus) const {
        return posteriors_[nucleus];
    }
    const VoronoiPartition& partition() const { return *partition_; }
    int num_classes() const { return num_classes_; }
    int k() const { return k_; }

private:
    std::shared_ptr<const VoronoiPartition> partition_;
    std::vector<std::vector<double>> posteriors_;  // entries in {0, 1/k, ..., 1}, rows sum to 1
    int num_classes_;
    int k_;
};

ProtoKNNModel fit_proto_knn(const LabeledDataset& data, std::vector<Point> nuclei, int k,
                            MetricPtr space);

struct KnnPrediction {
    int label;
    std::vector<double> posterior;  // class frequencies among the k nearest
};

/// One-shot k-NN prediction with (distance, index) tie breaking.
KnnPrediction predict_knn(const LabeledDataset& data, const Point& x, int k, MetricPtr space);

/// Standard k-NN rule packaged as a fitted model: keeps the training sample
/// and serves queries through an exact engine.
class KNNModel {
public:
    KNNModel(LabeledDataset data, int k, MetricPtr space);

    int predict(const Point& x) const;
    KnnPrediction predict_with_posterior(const Point& x) const;
    const LabeledDataset& data() const { return data_; }
    int k() const { return k_; }
    const MetricPtr& space() const { return space_; }

private:
    LabeledDataset data_;
    int k_;
    MetricPtr space_;
    std::unique_ptr<KnnEngine> engine_;
};

/// Greedy gamma-net in index order: a point joins the net iff its distance to
/// every accepted point is >= gamma. The result is gamma-separated and
/// maximal (every input point is within gamma of some net point).
std::vector<Point> build_gamma_net(std::span<const Point> points, double gamma,
                                   const MetricSpace& space);

/// Voronoi-majority classifier over a gamma-net, with gamma chosen on a
/// hold-out set.
class GammaNetModel {
public:
    GammaNetModel(double gamma_star, std::shared_ptr<const VoronoiPartition> net_partition,
                  std::vector<int> cell_labels, int num_classes, double holdout_error);

    int predict(const Point& x) const;
    double gamma_star() const { return gamma_star_; }
    std::span<const Point> net() const { return partition_->nuclei(); }
    const VoronoiPartition& partition() const { return *partition_; }
    const std::vector<int>& cell_labels() const { return cell_labels_; }
    int num_classes() const { return num_classes_; }
    double holdout_error() const { return holdout_error_; }

private:
    double gamma_star_;
    std::shared_ptr<const VoronoiPartition> partition_;
    std::vector<int> cell_labels_;  // majority label per net cell, empty cells resolve to class 1
    int num_classes_;
    double holdout_error_;
};

/// For each candidate gamma: build the net, build the Voronoi-majority
/// classifier over it, and score 0-1 error on the hold-out set. Returns the
/// model with the error-minimizing gamma, ties resolved to the smallest one.
GammaNetModel fit_optinet_lite(const LabeledDataset& train, const LabeledDataset& holdout,
                               std::vector<double> gammas, MetricPtr space);

/// Geometric candidate grid gamma_max * 2^-i, i = 0..ceil(log2 n), with
/// gamma_max the empirical diameter of the training points.
std::vector<double> default_gamma_grid(std::span<const Point> points, const MetricSpace& space);

/// Partitioning regression estimate: the per-cell mean of the training
/// targets, 0 on empty cells. The truncated mode zeroes cells holding fewer
/// than ln(n) points.
class PartitionRegressor {
public:
    PartitionRegressor(std::shared_ptr<const VoronoiPartition> partition, std::vector<double> cell_means,
                       std::vector<std::int64_t> cell_counts, std::size_t train_size);

    double predict(const Point& x, bool truncated) const;
    const VoronoiPartition& partition() const { return *partition_; }
    const std::vector<double>& cell_means() const { return means_; }
    const std::vector<std::int64_t>& cell_counts() const { return counts_; }
    std::size_t train_size() const { return n_; }

private:
    std::shared_ptr<const VoronoiPartition> partition_;
    std::vector<double> means_;
    std::vector<std::int64_t> counts_;
    std::size_t n_;
};

PartitionRegressor fit_partition_regressor(const LabeledDataset& data, std::vector<Point> nuclei,
                                           MetricPtr space);

/// Hold-out selection over a grid of nucleus counts for the prototype rule:
/// nuclei are the first m points of the provided pool; the m minimizing
/// hold-out error wins, ties to the smallest m. No rate claim attaches to
/// this selector; it mirrors the gamma selection of the net baseline.
struct MSelection {
    int m;
    double holdout_error;
};
MSelection select_m_holdout(const LabeledDataset& train, const LabeledDataset& holdout,
                            std::span<const Point> nucleus_pool, std::span<const int> m_grid,
                            MetricPtr space);

} // namespace metricproto
