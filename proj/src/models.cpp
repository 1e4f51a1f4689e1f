#include "metricproto/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace metricproto {

int argmax_class(std::span<const double> scores) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < scores.size(); ++j)
        if (scores[j] > scores[best]) best = j;
    return static_cast<int>(best) + 1;
}

namespace {

void require_classification(const LabeledDataset& data) {
    if (!data.classification())
        throw std::invalid_argument("classification fit called with regression-mode data");
}

std::shared_ptr<const VoronoiPartition> make_partition(MetricPtr space, std::vector<Point> nuclei) {
    return std::make_shared<VoronoiPartition>(std::move(space), std::move(nuclei));
}

} // namespace

// ---------------------------------------------------------------------------
// Proto-NN

ProtoNNModel::ProtoNNModel(std::shared_ptr<const VoronoiPartition> partition,
                           std::vector<std::vector<double>> posteriors, int num_classes)
    : partition_(std::move(partition)), posteriors_(std::move(posteriors)), num_classes_(num_classes) {
    if (posteriors_.size() != partition_->cell_count())
        throw std::invalid_argument("ProtoNNModel: posterior table size mismatch");
}

int ProtoNNModel::predict(const Point& x) const {
    return argmax_class(posteriors_[partition_->assign_cell(x)]);
}

ProtoNNModel fit_proto_nn(const LabeledDataset& data, std::vector<Point> nuclei, MetricPtr space) {
    require_classification(data);
    auto partition = make_partition(std::move(space), std::move(nuclei));
    const CellStats stats = tally(*partition, data);
    const std::size_t m = partition->cell_count();
    std::vector<std::vector<double>> posteriors(m, std::vector<double>(static_cast<std::size_t>(data.num_classes), 0.0));
    for (std::size_t cell = 0; cell < m; ++cell) {
        if (stats.counts[cell] == 0) continue;  // empty cell keeps the all-zero vector
        const double denom = static_cast<double>(stats.counts[cell]);
        for (int j = 0; j < data.num_classes; ++j)
            posteriors[cell][static_cast<std::size_t>(j)] =
                static_cast<double>(stats.class_counts[cell][static_cast<std::size_t>(j)]) / denom;
    }
    return ProtoNNModel(std::move(partition), std::move(posteriors), data.num_classes);
}

// ---------------------------------------------------------------------------
// Proto-k-NN

ProtoKNNModel::ProtoKNNModel(std::shared_ptr<const VoronoiPartition> partition,
                             std::vector<std::vector<double>> nucleus_posteriors, int num_classes, int k)
    : partition_(std::move(partition)),
      posteriors_(std::move(nucleus_posteriors)),
      num_classes_(num_classes),
      k_(k) {
    if (posteriors_.size() != partition_->cell_count())
        throw std::invalid_argument("ProtoKNNModel: posterior table size mismatch");
}

int ProtoKNNModel::predict(const Point& x) const {
    return argmax_class(posteriors_[partition_->assign_cell(x)]);
}

ProtoKNNModel fit_proto_knn(const LabeledDataset& data, std::vector<Point> nuclei, int k,
                            MetricPtr space) {
    require_classification(data);
    if (k < 1 || static_cast<std::size_t>(k) > data.size())
        throw std::invalid_argument("fit_proto_knn: k out of range [1, n]");
    auto engine = KnnEngine::make(space, data.points, data.labels, data.num_classes);
    auto partition = make_partition(space, std::move(nuclei));
    const std::size_t m = partition->cell_count();
    std::vector<std::vector<double>> posteriors(m);
    std::vector<std::int64_t> counts;
    for (std::size_t nucleus = 0; nucleus < m; ++nucleus) {
        engine->class_counts(partition->nuclei()[nucleus], static_cast<std::size_t>(k), data.labels,
                             data.num_classes, counts);
        std::vector<double> row(static_cast<std::size_t>(data.num_classes));
        for (int j = 0; j < data.num_classes; ++j)
            row[static_cast<std::size_t>(j)] =
                static_cast<double>(counts[static_cast<std::size_t>(j)]) / static_cast<double>(k);
        posteriors[nucleus] = std::move(row);
    }
    return ProtoKNNModel(std::move(partition), std::move(posteriors), data.num_classes, k);
}

// ---------------------------------------------------------------------------
// k-NN

KnnPrediction predict_knn(const LabeledDataset& data, const Point& x, int k, MetricPtr space) {
    require_classification(data);
    if (k < 1 || static_cast<std::size_t>(k) > data.size())
        throw std::invalid_argument("predict_knn: k out of range [1, n]");
    const NeighborList nl = k_nearest(*space, data.points, x, static_cast<std::size_t>(k));
    std::vector<double> posterior(static_cast<std::size_t>(data.num_classes), 0.0);
    for (const auto& nb : nl.entries)
        posterior[static_cast<std::size_t>(data.labels[nb.index] - 1)] += 1.0 / static_cast<double>(k);
    return KnnPrediction{argmax_class(posterior), std::move(posterior)};
}

KNNModel::KNNModel(LabeledDataset data, int k, MetricPtr space)
    : data_(std::move(data)), k_(k), space_(std::move(space)) {
    require_classification(data_);
    if (k_ < 1 || static_cast<std::size_t>(k_) > data_.size())
        throw std::invalid_argument("KNNModel: k out of range [1, n]");
    engine_ = KnnEngine::make(space_, data_.points, data_.labels, data_.num_classes);
}

int KNNModel::predict(const Point& x) const {
    std::vector<std::int64_t> counts;
    engine_->class_counts(x, static_cast<std::size_t>(k_), data_.labels, data_.num_classes, counts);
    std::size_t best = 0;
    for (std::size_t j = 1; j < counts.size(); ++j)
        if (counts[j] > counts[best]) best = j;
    return static_cast<int>(best) + 1;
}

KnnPrediction KNNModel::predict_with_posterior(const Point& x) const {
    std::vector<std::int64_t> counts;
    engine_->class_counts(x, static_cast<std::size_t>(k_), data_.labels, data_.num_classes, counts);
    std::vector<double> posterior(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j)
        posterior[j] = static_cast<double>(counts[j]) / static_cast<double>(k_);
    return KnnPrediction{argmax_class(posterior), std::move(posterior)};
}

// ---------------------------------------------------------------------------
// Gamma net

std::vector<Point> build_gamma_net(std::span<const Point> points, double gamma,
                                   const MetricSpace& space) {
    if (points.empty()) throw std::invalid_argument("build_gamma_net: empty point list");
    if (!(gamma > 0.0)) throw std::invalid_argument("build_gamma_net: gamma must be positive");
    std::vector<Point> net;
    for (const Point& p : points) {
        bool separated = true;
        for (const Point& q : net) {
            if (space.distance(p, q) < gamma) {
                separated = false;
                break;
            }
        }
        if (separated) net.push_back(p);
    }
    return net;
}

GammaNetModel::GammaNetModel(double gamma_star, std::shared_ptr<const VoronoiPartition> net_partition,
                             std::vector<int> cell_labels, int num_classes, double holdout_error)
    : gamma_star_(gamma_star),
      partition_(std::move(net_partition)),
      cell_labels_(std::move(cell_labels)),
      num_classes_(num_classes),
      holdout_error_(holdout_error) {
    if (cell_labels_.size() != partition_->cell_count())
        throw std::invalid_argument("GammaNetModel: label table size mismatch");
}

int GammaNetModel::predict(const Point& x) const {
    return cell_labels_[partition_->assign_cell(x)];
}

namespace {

GammaNetModel fit_gamma_net_single(const LabeledDataset& train, double gamma, MetricPtr space,
                                   double holdout_error) {
    auto net = build_gamma_net(train.points, gamma, *space);
    auto partition = make_partition(space, std::move(net));
    const CellStats stats = tally(*partition, train);
    std::vector<int> cell_labels(partition->cell_count());
    std::vector<double> freq(static_cast<std::size_t>(train.num_classes));
    for (std::size_t cell = 0; cell < partition->cell_count(); ++cell) {
        for (int j = 0; j < train.num_classes; ++j)
            freq[static_cast<std::size_t>(j)] =
                static_cast<double>(stats.class_counts[cell][static_cast<std::size_t>(j)]);
        cell_labels[cell] = argmax_class(freq);  // empty cell: all-zero vector, class 1
    }
    return GammaNetModel(gamma, std::move(partition), std::move(cell_labels), train.num_classes,
                         holdout_error);
}

double holdout_error_of(const GammaNetModel& model, const LabeledDataset& holdout) {
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < holdout.size(); ++i)
        if (model.predict(holdout.points[i]) != holdout.labels[i]) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(holdout.size());
}

} // namespace

GammaNetModel fit_optinet_lite(const LabeledDataset& train, const LabeledDataset& holdout,
                               std::vector<double> gammas, MetricPtr space) {
    require_classification(train);
    require_classification(holdout);
    if (gammas.empty()) throw std::invalid_argument("fit_optinet_lite: empty candidate list");
    if (holdout.size() == 0) throw std::invalid_argument("fit_optinet_lite: empty hold-out set");
    std::sort(gammas.begin(), gammas.end());  // ties resolve to the smallest gamma
    gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());

    double best_gamma = gammas.front();
    double best_error = std::numeric_limits<double>::infinity();
    for (const double gamma : gammas) {
        const GammaNetModel model = fit_gamma_net_single(train, gamma, space, 0.0);
        const double error = holdout_error_of(model, holdout);
        if (error < best_error) {
            best_error = error;
            best_gamma = gamma;
        }
    }
    return fit_gamma_net_single(train, best_gamma, space, best_error);
}

std::vector<double> default_gamma_grid(std::span<const Point> points, const MetricSpace& space) {
    double diameter = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            diameter = std::max(diameter, space.distance(points[i], points[j]));
    if (diameter <= 0.0) return {1.0};
    const int levels = static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(points.size(), 2)))));
    std::vector<double> grid;
    for (int i = 0; i <= levels; ++i) grid.push_back(diameter * std::pow(2.0, -i));
    return grid;
}

// ---------------------------------------------------------------------------
// Partitioning regression

PartitionRegressor::PartitionRegressor(std::shared_ptr<const VoronoiPartition> partition,
                                       std::vector<double> cell_means,
                                       std::vector<std::int64_t> cell_counts, std::size_t train_size)
    : partition_(std::move(partition)),
      means_(std::move(cell_means)),
      counts_(std::move(cell_counts)),
      n_(train_size) {
    if (means_.size() != partition_->cell_count() || counts_.size() != partition_->cell_count())
        throw std::invalid_argument("PartitionRegressor: cell table size mismatch");
}

double PartitionRegressor::predict(const Point& x, bool truncated) const {
    const std::size_t cell = partition_->assign_cell(x);
    if (truncated &&
        static_cast<double>(counts_[cell]) < std::log(static_cast<double>(n_)))
        return 0.0;
    return means_[cell];
}

PartitionRegressor fit_partition_regressor(const LabeledDataset& data, std::vector<Point> nuclei,
                                           MetricPtr space) {
    if (data.classification())
        throw std::invalid_argument("fit_partition_regressor called with classification-mode data");
    auto partition = make_partition(std::move(space), std::move(nuclei));
    const CellStats stats = tally(*partition, data);
    std::vector<double> means(partition->cell_count(), 0.0);
    for (std::size_t cell = 0; cell < partition->cell_count(); ++cell)
        if (stats.counts[cell] > 0)
            means[cell] = stats.sums[cell] / static_cast<double>(stats.counts[cell]);
    return PartitionRegressor(std::move(partition), std::move(means), stats.counts, data.size());
}

// ---------------------------------------------------------------------------
// Hold-out selection of the nucleus count

MSelection select_m_holdout(const LabeledDataset& train, const LabeledDataset& holdout,
                            std::span<const Point> nucleus_pool, std::span<const int> m_grid,
                            MetricPtr space) {
    require_classification(train);
    if (m_grid.empty()) throw std::invalid_argument("select_m_holdout: empty m grid");
    std::vector<int> grid(m_grid.begin(), m_grid.end());
    std::sort(grid.begin(), grid.end());
    std::optional<MSelection> best;
    for (const int m : grid) {
        if (m < 1 || static_cast<std::size_t>(m) > nucleus_pool.size())
            throw std::invalid_argument("select_m_holdout: m out of range for the nucleus pool");
        std::vector<Point> nuclei(nucleus_pool.begin(), nucleus_pool.begin() + m);
        const ProtoNNModel model = fit_proto_nn(train, std::move(nuclei), space);
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < holdout.size(); ++i)
            if (model.predict(holdout.points[i]) != holdout.labels[i]) ++wrong;
        const double error = static_cast<double>(wrong) / static_cast<double>(holdout.size());
        if (!best || error < best->holdout_error) best = MSelection{m, error};
    }
    return *best;
}

} // namespace metricproto
