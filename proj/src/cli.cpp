#include "metricproto/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include <CLI11.hpp>

#include "metricproto/dataset.hpp"
#include "metricproto/harness.hpp"
#include "metricproto/model_io.hpp"
#include "metricproto/models.hpp"
#include "metricproto/rng.hpp"
#include "metricproto/synthetic.hpp"
#include "metricproto/verify.hpp"

namespace metricproto {

namespace {

constexpr int kOk = 0;
constexpr int kValidationError = 1;
constexpr int kIoError = 2;

struct FitOptions {
    std::string data_path;
    std::string model_path;
    std::string classifier = "proto_nn";
    std::string metric = "euclidean";
    std::string task = "auto";
    int k = 0;
    int m = 0;
    double holdout_fraction = 0.3;
    std::uint64_t seed = 1;
};

const TableMetric* table_of(const MetricSpace& space) {
    return space.kind() == MetricKind::table ? static_cast<const TableMetric*>(&space) : nullptr;
}

int k_default(std::size_t n) {
    return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n)))));
}

// Seeded split: the first m shuffled points become the (unlabeled) nucleus
// sample, the rest stay labeled. Used when there is no sampler to draw an
// independent unlabeled sample from.
std::pair<std::vector<Point>, LabeledDataset> split_nuclei(const LabeledDataset& data, int m,
                                                           std::uint64_t seed) {
    if (m < 1 || static_cast<std::size_t>(m) >= data.size())
        throw std::invalid_argument("fit: nucleus count m must be in [1, n-1]");
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng = derive_rng(seed, {0x7370u});
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.uniform_below(i)]);

    std::vector<Point> nuclei;
    LabeledDataset rest;
    rest.num_classes = data.num_classes;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::size_t src = order[i];
        if (i < static_cast<std::size_t>(m)) {
            nuclei.push_back(data.points[src]);  // labels of the split-off part are discarded
        } else {
            rest.points.push_back(data.points[src]);
            if (data.classification())
                rest.labels.push_back(data.labels[src]);
            else
                rest.targets.push_back(data.targets[src]);
        }
    }
    return {std::move(nuclei), std::move(rest)};
}

std::pair<LabeledDataset, LabeledDataset> split_holdout(const LabeledDataset& data, double fraction,
                                                        std::uint64_t seed) {
    const auto n_hold = static_cast<std::size_t>(static_cast<double>(data.size()) * fraction);
    if (n_hold < 1 || n_hold >= data.size())
        throw std::invalid_argument("fit: hold-out fraction leaves an empty split");
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng = derive_rng(seed, {0x686fu});
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.uniform_below(i)]);
    LabeledDataset train, holdout;
    train.num_classes = holdout.num_classes = data.num_classes;
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto& dst = i < n_hold ? holdout : train;
        dst.points.push_back(data.points[order[i]]);
        dst.labels.push_back(data.labels[order[i]]);
    }
    return {std::move(train), std::move(holdout)};
}

int cmd_fit(const FitOptions& opt) {
    const MetricPtr space = parse_metric(opt.metric);
    const LabelMode mode = opt.task == "classification" ? LabelMode::classification
                          : opt.task == "regression"    ? LabelMode::regression
                                                        : LabelMode::automatic;
    const LabeledDataset data = load_dataset_csv(opt.data_path, mode, table_of(*space));
    if (data.size() == 0) throw std::invalid_argument("fit: dataset is empty");

    const int m = opt.m > 0 ? opt.m
                            : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(data.size()))));

    AnyModel model = [&]() -> AnyModel {
        if (opt.classifier == "knn") {
            const int k = opt.k > 0 ? opt.k : k_default(data.size());
            return KNNModel(data, k, space);
        }
        if (opt.classifier == "proto_nn") {
            auto [nuclei, rest] = split_nuclei(data, m, opt.seed);
            return fit_proto_nn(rest, std::move(nuclei), space);
        }
        if (opt.classifier == "proto_knn") {
            auto [nuclei, rest] = split_nuclei(data, m, opt.seed);
            const int k = opt.k > 0 ? opt.k : k_default(rest.size());
            return fit_proto_knn(rest, std::move(nuclei), k, space);
        }
        if (opt.classifier == "optinet_lite") {
            auto [train, holdout] = split_holdout(data, opt.holdout_fraction, opt.seed);
            auto gammas = default_gamma_grid(train.points, *space);
            return fit_optinet_lite(train, holdout, std::move(gammas), space);
        }
        if (opt.classifier == "regressor") {
            auto [nuclei, rest] = split_nuclei(data, m, opt.seed);
            return fit_partition_regressor(rest, std::move(nuclei), space);
        }
        throw std::invalid_argument("fit: unknown classifier '" + opt.classifier + "'");
    }();

    save_model(opt.model_path, model);
    std::cout << "saved " << opt.classifier << " model to " << opt.model_path << "\n";
    return kOk;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path, bool truncated) {
    const AnyModel model = load_model(model_path);
    const MetricSpace* space = std::visit(
        [](const auto& m) -> const MetricSpace* {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KNNModel>)
                return m.space().get();
            else
                return m.partition().space().get();
        },
        model);
    const std::vector<Point> points = load_points_csv(data_path, table_of(*space));
    std::vector<double> predicted(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        predicted[i] = predict_any(model, points[i], truncated);
    save_predictions_csv(out_path, points, predicted, is_classifier(model), table_of(*space));
    std::cout << "wrote " << points.size() << " predictions to " << out_path << "\n";
    return kOk;
}

int cmd_rates(const std::string& config_path, const std::string& out_path,
              std::string summary_path) {
    const ExperimentConfig config = ExperimentConfig::from_json_file(config_path);
    const RiskReport report = rate_sweep(config);

    std::ofstream out(out_path);
    if (!out) throw std::ios_base::failure("cannot write results to '" + out_path + "'");
    write_risk_csv(out, report);
    if (!out) throw std::ios_base::failure("error while writing '" + out_path + "'");

    SlopeFit fit{};
    std::string slope_note;
    try {
        fit = fit_log_slope(report.aggregates);
    } catch (const std::invalid_argument& e) {
        slope_note = e.what();
        fit.slope = std::numeric_limits<double>::quiet_NaN();
        fit.stderr_ = std::numeric_limits<double>::quiet_NaN();
    }
    if (summary_path.empty()) summary_path = out_path + ".summary.json";
    std::ofstream summary(summary_path);
    if (!summary) throw std::ios_base::failure("cannot write summary to '" + summary_path + "'");
    summary << summary_json(report, fit) << "\n";

    std::cout << "wrote " << report.rows.size() << " rows to " << out_path << "\n";
    for (const auto& agg : report.aggregates)
        std::cout << "n=" << agg.n << " mean_excess=" << agg.mean_excess << " sem=" << agg.sem_excess
                  << "\n";
    if (slope_note.empty())
        std::cout << "fitted slope " << fit.slope << " +- " << fit.stderr_ << " (summary: "
                  << summary_path << ")\n";
    else
        std::cout << "slope not fitted: " << slope_note << "\n";
    return kOk;
}

int cmd_verify() {
    const auto results = run_verify_battery();
    bool all_pass = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  " << r.detail << "\n";
        all_pass = all_pass && r.pass;
    }
    std::cout << (all_pass ? "all checks passed" : "some checks FAILED") << "\n";
    return all_pass ? kOk : kValidationError;
}

int cmd_list_families() {
    for (const auto& info : list_families())
        std::cout << info.config_example << "\n    " << info.description << "\n";
    return kOk;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"prototype nearest-neighbor rules on metric spaces"};
    app.require_subcommand(1);

    FitOptions fit_opt;
    auto* fit = app.add_subcommand("fit", "train a model from a CSV dataset and persist it");
    fit->add_option("--data", fit_opt.data_path, "dataset CSV (x1..xd,label)")->required();
    fit->add_option("--model", fit_opt.model_path, "output model JSON")->required();
    fit->add_option("--classifier", fit_opt.classifier,
                    "knn | proto_nn | proto_knn | optinet_lite | regressor");
    fit->add_option("--metric", fit_opt.metric, "euclidean | lp:<p> | discrete | edit | table:<path>");
    fit->add_option("--task", fit_opt.task, "auto | classification | regression");
    fit->add_option("-k", fit_opt.k, "neighbor count (knn, proto_knn)");
    fit->add_option("-m", fit_opt.m, "nucleus count (default ceil(sqrt(n)))");
    fit->add_option("--holdout-fraction", fit_opt.holdout_fraction, "hold-out share for optinet_lite");
    fit->add_option("--seed", fit_opt.seed, "seed for the nucleus/hold-out splits");

    std::string model_path, data_path, out_path, config_path, summary_path;
    bool truncated = false;
    auto* predict = app.add_subcommand("predict", "classify CSV rows with a persisted model");
    predict->add_option("--model", model_path, "model JSON")->required();
    predict->add_option("--data", data_path, "points CSV")->required();
    predict->add_option("--out", out_path, "output CSV")->required();
    predict->add_flag("--truncated", truncated, "truncated mode for regression models");

    auto* rates = app.add_subcommand("rates", "run a convergence-rate sweep from a config file");
    rates->add_option("--config", config_path, "experiment config JSON")->required();
    rates->add_option("--out", out_path, "results CSV")->required();
    rates->add_option("--summary", summary_path, "summary JSON (default <out>.summary.json)");

    app.add_subcommand("verify", "run the property battery and report PASS/FAIL per check");
    app.add_subcommand("list-families", "list built-in synthetic families");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kValidationError;
    }

    try {
        if (fit->parsed()) return cmd_fit(fit_opt);
        if (predict->parsed()) return cmd_predict(model_path, data_path, out_path, truncated);
        if (rates->parsed()) return cmd_rates(config_path, out_path, summary_path);
        if (app.get_subcommand("verify")->parsed()) return cmd_verify();
        if (app.get_subcommand("list-families")->parsed()) return cmd_list_families();
    } catch (const std::ios_base::failure& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidationError;
    }
    return kValidationError;
}

} // namespace metricproto
