#pragma once

#include <string>
#include <vector>

#include "metricproto/metric.hpp"
#include "metricproto/point.hpp"

namespace metricproto {

/// An indexed sample of labeled points. Classification labels live in
/// {1..M} with M = num_classes; regression targets are finite reals and
/// num_classes is 0.
struct LabeledDataset {
    std::vector<Point> points;
    std::vector<int> labels;       // classification mode
    std::vector<double> targets;   // regression mode
    int num_classes = 0;

    bool classification() const { return num_classes > 0; }
    std::size_t size() const { return points.size(); }
};

/// Builds a classification dataset, validating labels against {1..M}.
LabeledDataset make_classification(std::vector<Point> points, std::vector<int> labels, int num_classes);

/// Builds a regression dataset, validating that targets are finite.
LabeledDataset make_regression(std::vector<Point> points, std::vector<double> targets);

enum class LabelMode { automatic, classification, regression };

/// Reads a dataset CSV: header row with feature columns x1..xd and a final
/// "label" column. Feature values are numeric except under a table metric,
/// where the single x1 column holds catalog symbol names resolved through
/// `table`. In automatic mode, an all-integral label column (values >= 1)
/// means classification; anything else means regression.
LabeledDataset load_dataset_csv(const std::string& path, LabelMode mode = LabelMode::automatic,
                                const TableMetric* table = nullptr);

/// Reads unlabeled query points: same layout as a dataset CSV, with the
/// label column optional (ignored when present).
std::vector<Point> load_points_csv(const std::string& path, const TableMetric* table = nullptr);

/// Writes points plus one predicted value per row. Numeric output is
/// round-trip exact ("%.17g").
void save_predictions_csv(const std::string& path, std::span<const Point> points,
                          std::span<const double> predicted, bool integral_labels,
                          const TableMetric* table = nullptr);

/// Round-trip exact formatting for doubles, shared by all CSV writers.
std::string format_double(double v);

} // namespace metricproto
