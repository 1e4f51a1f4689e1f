#include "metricproto/model_io.hpp"

#include <fstream>

#include <json.hpp>

namespace metricproto {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json point_to_json(const Point& p) {
    json j;
    if (const auto* v = p.as_vec())
        j["v"] = *v;
    else if (const auto* s = p.as_sym())
        j["s"] = *s;
    else if (const auto* c = p.as_cat())
        j["c"] = *c;
    if (p.tie_coord) j["u"] = *p.tie_coord;
    return j;
}

Point point_from_json(const json& j) {
    Point p;
    if (j.contains("v"))
        p = Point::vec(j.at("v").get<std::vector<double>>());
    else if (j.contains("s"))
        p = Point::sym(j.at("s").get<std::string>());
    else if (j.contains("c"))
        p = Point::cat(j.at("c").get<std::int32_t>());
    else
        throw std::invalid_argument("model file: malformed point");
    if (j.contains("u")) p.tie_coord = j.at("u").get<double>();
    return p;
}

json points_to_json(std::span<const Point> pts) {
    json arr = json::array();
    for (const Point& p : pts) arr.push_back(point_to_json(p));
    return arr;
}

std::vector<Point> points_from_json(const json& arr) {
    std::vector<Point> pts;
    pts.reserve(arr.size());
    for (const auto& j : arr) pts.push_back(point_from_json(j));
    return pts;
}

json metric_to_json(const MetricSpace& space) {
    json j;
    j["descriptor"] = space.descriptor();
    if (space.kind() == MetricKind::table) {
        const auto& t = static_cast<const TableMetric&>(space);
        j["table"] = {{"symbols", t.symbols()}, {"distances", t.table()}};
    } else if (space.kind() == MetricKind::augmented) {
        const auto& a = static_cast<const AugmentedSpace&>(space);
        j["augmented"] = {{"delta", a.delta()}, {"seed", a.seed()}, {"base", metric_to_json(*a.base())}};
    }
    return j;
}

MetricPtr metric_from_json(const json& j) {
    if (j.contains("table")) {
        const auto& t = j.at("table");
        return std::make_shared<TableMetric>(t.at("symbols").get<std::vector<std::string>>(),
                                             t.at("distances").get<std::vector<std::vector<double>>>());
    }
    if (j.contains("augmented")) {
        const auto& a = j.at("augmented");
        return augment(metric_from_json(a.at("base")), a.at("delta").get<double>(),
                       a.at("seed").get<std::uint64_t>());
    }
    return parse_metric(j.at("descriptor").get<std::string>());
}

std::shared_ptr<const VoronoiPartition> partition_from_json(const json& j, MetricPtr space) {
    return std::make_shared<VoronoiPartition>(std::move(space), points_from_json(j));
}

json serialize(const AnyModel& model) {
    json j;
    j["format"] = "metricproto-model";
    j["version"] = kFormatVersion;
    if (const auto* m = std::get_if<ProtoNNModel>(&model)) {
        j["kind"] = "proto_nn";
        j["metric"] = metric_to_json(*m->partition().space());
        j["num_classes"] = m->num_classes();
        j["nuclei"] = points_to_json(m->partition().nuclei());
        json rows = json::array();
        for (std::size_t c = 0; c < m->partition().cell_count(); ++c) rows.push_back(m->posterior(c));
        j["posteriors"] = rows;
    } else if (const auto* m = std::get_if<ProtoKNNModel>(&model)) {
        j["kind"] = "proto_knn";
        j["metric"] = metric_to_json(*m->partition().space());
        j["num_classes"] = m->num_classes();
        j["k"] = m->k();
        j["nuclei"] = points_to_json(m->partition().nuclei());
        json rows = json::array();
        for (std::size_t c = 0; c < m->partition().cell_count(); ++c)
            rows.push_back(m->posterior_at_nucleus(c));
        j["posteriors"] = rows;
    } else if (const auto* m = std::get_if<KNNModel>(&model)) {
        j["kind"] = "knn";
        j["metric"] = metric_to_json(*m->space());
        j["num_classes"] = m->data().num_classes;
        j["k"] = m->k();
        j["points"] = points_to_json(m->data().points);
        j["labels"] = m->data().labels;
    } else if (const auto* m = std::get_if<GammaNetModel>(&model)) {
        j["kind"] = "gamma_net";
        j["metric"] = metric_to_json(*m->partition().space());
        j["num_classes"] = m->num_classes();
        j["gamma_star"] = m->gamma_star();
        j["holdout_error"] = m->holdout_error();
        j["net"] = points_to_json(m->net());
        j["cell_labels"] = m->cell_labels();
    } else if (const auto* m = std::get_if<PartitionRegressor>(&model)) {
        j["kind"] = "partition_regressor";
        j["metric"] = metric_to_json(*m->partition().space());
        j["nuclei"] = points_to_json(m->partition().nuclei());
        j["cell_means"] = m->cell_means();
        j["cell_counts"] = m->cell_counts();
        j["train_size"] = m->train_size();
    }
    return j;
}

AnyModel deserialize(const json& j) {
    if (j.value("format", "") != "metricproto-model")
        throw std::invalid_argument("model file: unrecognized format");
    if (j.at("version").get<int>() != kFormatVersion)
        throw std::invalid_argument("model file: unsupported version");
    const std::string kind = j.at("kind").get<std::string>();
    MetricPtr space = metric_from_json(j.at("metric"));
    if (kind == "proto_nn") {
        auto partition = partition_from_json(j.at("nuclei"), space);
        return ProtoNNModel(std::move(partition),
                            j.at("posteriors").get<std::vector<std::vector<double>>>(),
                            j.at("num_classes").get<int>());
    }
    if (kind == "proto_knn") {
        auto partition = partition_from_json(j.at("nuclei"), space);
        return ProtoKNNModel(std::move(partition),
                             j.at("posteriors").get<std::vector<std::vector<double>>>(),
                             j.at("num_classes").get<int>(), j.at("k").get<int>());
    }
    if (kind == "knn") {
        auto data = make_classification(points_from_json(j.at("points")),
                                        j.at("labels").get<std::vector<int>>(),
                                        j.at("num_classes").get<int>());
        return KNNModel(std::move(data), j.at("k").get<int>(), std::move(space));
    }
    if (kind == "gamma_net") {
        auto partition = partition_from_json(j.at("net"), space);
        return GammaNetModel(j.at("gamma_star").get<double>(), std::move(partition),
                             j.at("cell_labels").get<std::vector<int>>(),
                             j.at("num_classes").get<int>(), j.at("holdout_error").get<double>());
    }
    if (kind == "partition_regressor") {
        auto partition = partition_from_json(j.at("nuclei"), space);
        return PartitionRegressor(std::move(partition), j.at("cell_means").get<std::vector<double>>(),
                                  j.at("cell_counts").get<std::vector<std::int64_t>>(),
                                  j.at("train_size").get<std::size_t>());
    }
    throw std::invalid_argument("model file: unknown kind '" + kind + "'");
}

} // namespace

double predict_any(const AnyModel& model, const Point& x, bool truncated) {
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PartitionRegressor>)
                return m.predict(x, truncated);
            else
                return static_cast<double>(m.predict(x));
        },
        model);
}

bool is_classifier(const AnyModel& model) {
    return !std::holds_alternative<PartitionRegressor>(model);
}

void save_model(const std::string& path, const AnyModel& model) {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot write model to '" + path + "'");
    out << serialize(model).dump(2) << "\n";
    if (!out) throw std::ios_base::failure("error while writing '" + path + "'");
}

AnyModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open model '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("model file '" + path + "': " + e.what());
    }
    return deserialize(j);
}

} // namespace metricproto
