#pragma once

#include <string>
#include <variant>

#include "metricproto/models.hpp"

namespace metricproto {

/// Any fitted predictor, for persistence and the CLI.
using AnyModel = std::variant<ProtoNNModel, ProtoKNNModel, KNNModel, GammaNetModel, PartitionRegressor>;

/// Predicts with whichever model is held; regression models use the
/// truncated flag, classifiers ignore it and return the label as a double.
double predict_any(const AnyModel& model, const Point& x, bool truncated = false);

bool is_classifier(const AnyModel& model);

/// Versioned JSON persistence. Doubles are serialized losslessly, so a
/// loaded model reproduces bit-identical predictions. Table metrics are
/// inlined so the file stands alone.
void save_model(const std::string& path, const AnyModel& model);
AnyModel load_model(const std::string& path);

} // namespace metricproto
