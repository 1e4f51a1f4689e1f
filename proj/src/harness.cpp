#include "metricproto/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "metricproto/dataset.hpp"
#include "metricproto/models.hpp"
#include "metricproto/rng.hpp"
#include "metricproto/schedule.hpp"
#include "metricproto/threads.hpp"

namespace metricproto {

namespace {

using nlohmann::json;

// Stream tags for per-trial seed derivation.
constexpr std::uint64_t kTagLabeled = 1;
constexpr std::uint64_t kTagNuclei = 2;
constexpr std::uint64_t kTagTest = 3;
constexpr std::uint64_t kTagTieTrain = 4;
constexpr std::uint64_t kTagTieNuclei = 5;
constexpr std::uint64_t kTagTieTest = 6;
constexpr std::uint64_t kTagAugment = 7;

std::uint64_t trial_seed(std::uint64_t base, std::size_t n, std::size_t trial) {
    return hash_combine(hash_combine(base, static_cast<std::uint64_t>(n)),
                        static_cast<std::uint64_t>(trial));
}

bool needs_k(const std::string& kind) { return kind == "knn" || kind == "proto_knn"; }
bool needs_m(const std::string& kind) { return kind == "proto_nn" || kind == "proto_knn"; }

std::string default_m_schedule(const std::string& kind) {
    if (kind == "proto_nn") return "ceil(pow(n,0.5))";
    if (kind == "proto_knn") return "ceil(n/k)";
    return "";
}

void attach_ties(std::vector<Point>& pts, const AugmentedSpace& aug, std::uint64_t stream_seed) {
    for (std::size_t i = 0; i < pts.size(); ++i)
        pts[i] = aug.attach(std::move(pts[i]), hash_combine(stream_seed, i));
}

} // namespace

void ExperimentConfig::validate() const {
    static const char* kinds[] = {"knn", "proto_nn", "proto_knn", "optinet_lite", "bayes"};
    if (std::find_if(std::begin(kinds), std::end(kinds),
                     [&](const char* k) { return classifier == k; }) == std::end(kinds))
        throw std::invalid_argument("config: unknown classifier '" + classifier + "'");
    parse_family(family);  // throws on unknown family
    parse_metric(metric);
    if (n_grid.empty()) throw std::invalid_argument("config: empty n_grid");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1])
            throw std::invalid_argument("config: n_grid must be strictly increasing");
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (test_points < 1) throw std::invalid_argument("config: test_points must be >= 1");
    if (delta < 0.0) throw std::invalid_argument("config: delta must be >= 0");

    const std::string m_expr = m_schedule.empty() ? default_m_schedule(classifier) : m_schedule;
    for (const std::size_t n : n_grid) {
        std::map<std::string, double> vars{{"n", static_cast<double>(n)}};
        long k = 0;
        if (needs_k(classifier))
            k = eval_schedule_int(k_schedule, vars, 1, static_cast<long>(n));
        if (needs_m(classifier)) {
            vars["k"] = static_cast<double>(k);
            eval_schedule_int(m_expr, vars, 1, static_cast<long>(1) << 40);
        }
    }
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        cfg.family = j.at("family").get<std::string>();
        cfg.classifier = j.at("classifier").get<std::string>();
        if (j.contains("metric")) cfg.metric = j.at("metric").get<std::string>();
        if (j.contains("delta")) {
            if (j.at("delta").is_string()) {
                if (j.at("delta").get<std::string>() != "auto")
                    throw std::invalid_argument("config: delta must be a number or \"auto\"");
                cfg.auto_delta = true;
            } else {
                cfg.delta = j.at("delta").get<double>();
            }
        }
        cfg.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
        if (j.contains("k_schedule")) cfg.k_schedule = j.at("k_schedule").get<std::string>();
        if (j.contains("m_schedule")) cfg.m_schedule = j.at("m_schedule").get<std::string>();
        if (j.contains("trials")) cfg.trials = j.at("trials").get<std::size_t>();
        if (j.contains("test_points")) cfg.test_points = j.at("test_points").get<std::size_t>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

RiskEstimate conditional_risk(const DistributionSpec& spec,
                              const std::function<int(const Point&)>& classify,
                              std::size_t test_points, std::uint64_t seed,
                              const AugmentedSpace* aug) {
    Rng rng = derive_rng(seed, {kTagTest});
    const std::uint64_t tie_seed = hash_combine(seed, kTagTieTest);
    double sum_a = 0.0, sum_a2 = 0.0;  // 1 - P_{g(x)}(x)
    double sum_b = 0.0, sum_b2 = 0.0;  // P_{g*(x)}(x) - P_{g(x)}(x)
    for (std::size_t i = 0; i < test_points; ++i) {
        Point x = spec.sample_x(rng);
        if (aug) x = aug->attach(std::move(x), hash_combine(tie_seed, i));
        const auto p = spec.posterior(x);
        const int g = classify(x);
        const double p_g = p[static_cast<std::size_t>(g - 1)];
        const double p_star = *std::max_element(p.begin(), p.end());
        const double a = 1.0 - p_g;
        const double b = p_star - p_g;
        sum_a += a;
        sum_a2 += a * a;
        sum_b += b;
        sum_b2 += b * b;
    }
    const double t = static_cast<double>(test_points);
    RiskEstimate est;
    est.risk = sum_a / t;
    est.excess = sum_b / t;
    est.risk_stderr = std::sqrt(std::max(0.0, sum_a2 / t - est.risk * est.risk) / t);
    est.excess_stderr = std::sqrt(std::max(0.0, sum_b2 / t - est.excess * est.excess) / t);
    return est;
}

FittedClassifier fit_classifier(const std::string& kind, const DistributionSpec& spec, MetricPtr space,
                                const AugmentedSpace* aug, std::size_t n, long k, long m,
                                std::uint64_t trial_seed_value) {
    FittedClassifier out;
    if (kind == "bayes") {
        const DistributionSpec* s = &spec;
        out.classify = [s](const Point& x) { return s->bayes_label(x); };
        return out;
    }

    LabeledDataset train = sample(spec, n, hash_combine(trial_seed_value, kTagLabeled));
    if (aug) attach_ties(train.points, *aug, hash_combine(trial_seed_value, kTagTieTrain));

    auto draw_nuclei = [&](std::size_t count) {
        auto nuclei = sample_points(spec, count, hash_combine(trial_seed_value, kTagNuclei));
        if (aug) attach_ties(nuclei, *aug, hash_combine(trial_seed_value, kTagTieNuclei));
        return nuclei;
    };

    if (kind == "knn") {
        out.k = k;
        auto model = std::make_shared<KNNModel>(std::move(train), static_cast<int>(k), space);
        out.classify = [model](const Point& x) { return model->predict(x); };
        return out;
    }
    if (kind == "proto_nn") {
        out.m = m;
        auto model = std::make_shared<ProtoNNModel>(
            fit_proto_nn(train, draw_nuclei(static_cast<std::size_t>(m)), space));
        out.classify = [model](const Point& x) { return model->predict(x); };
        return out;
    }
    if (kind == "proto_knn") {
        out.k = k;
        out.m = m;
        auto model = std::make_shared<ProtoKNNModel>(
            fit_proto_knn(train, draw_nuclei(static_cast<std::size_t>(m)), static_cast<int>(k), space));
        out.classify = [model](const Point& x) { return model->predict(x); };
        return out;
    }
    if (kind == "optinet_lite") {
        // Deterministic 70/30 split of the i.i.d. training draw.
        const std::size_t n_train = std::max<std::size_t>(1, (train.size() * 7) / 10);
        LabeledDataset fit_part, holdout_part;
        fit_part.num_classes = holdout_part.num_classes = train.num_classes;
        for (std::size_t i = 0; i < train.size(); ++i) {
            auto& dst = i < n_train ? fit_part : holdout_part;
            dst.points.push_back(train.points[i]);
            dst.labels.push_back(train.labels[i]);
        }
        if (holdout_part.size() == 0) {
            holdout_part.points.push_back(fit_part.points.back());
            holdout_part.labels.push_back(fit_part.labels.back());
        }
        auto gammas = default_gamma_grid(fit_part.points, *space);
        auto model = std::make_shared<GammaNetModel>(
            fit_optinet_lite(fit_part, holdout_part, std::move(gammas), space));
        out.classify = [model](const Point& x) { return model->predict(x); };
        return out;
    }
    throw std::invalid_argument("unknown classifier '" + kind + "'");
}

RiskReport rate_sweep(const ExperimentConfig& config) {
    config.validate();
    const SpecPtr spec = parse_family(config.family);
    MetricPtr base_space = parse_metric(config.metric);

    double delta = config.delta;
    if (config.auto_delta) {
        const auto pilot = sample_points(*spec, 100, hash_combine(config.seed, kTagAugment));
        delta = default_delta(*base_space, pilot);
    }
    std::shared_ptr<const AugmentedSpace> aug;
    MetricPtr space = base_space;
    if (delta > 0.0) {
        aug = augment(base_space, delta, hash_combine(config.seed, kTagAugment));
        space = aug;
    }

    const std::string m_expr =
        config.m_schedule.empty() ? default_m_schedule(config.classifier) : config.m_schedule;

    RiskReport report;
    report.config = config;
    report.bayes_risk = spec->bayes_risk();

    const std::size_t total = config.n_grid.size() * config.trials;
    report.rows.resize(total);
    parallel_for(total, [&](std::size_t task) {
        const std::size_t n_idx = task / config.trials;
        const std::size_t trial = task % config.trials;
        const std::size_t n = config.n_grid[n_idx];

        std::map<std::string, double> vars{{"n", static_cast<double>(n)}};
        long k = 0, m = 0;
        if (needs_k(config.classifier))
            k = eval_schedule_int(config.k_schedule, vars, 1, static_cast<long>(n));
        if (needs_m(config.classifier)) {
            vars["k"] = static_cast<double>(k);
            m = eval_schedule_int(m_expr, vars, 1, static_cast<long>(1) << 40);
        }

        const std::uint64_t ts = trial_seed(config.seed, n, trial);
        const FittedClassifier fitted =
            fit_classifier(config.classifier, *spec, space, aug.get(), n, k, m, ts);
        const RiskEstimate est =
            conditional_risk(*spec, fitted.classify, config.test_points, ts, aug.get());

        report.rows[task] = TrialRow{n,       trial,    fitted.k,   fitted.m,
                                     est.risk, report.bayes_risk, est.excess, est.excess_stderr};
    });

    for (std::size_t n_idx = 0; n_idx < config.n_grid.size(); ++n_idx) {
        double sum = 0.0, sum_sq = 0.0, sum_risk = 0.0;
        for (std::size_t t = 0; t < config.trials; ++t) {
            const TrialRow& row = report.rows[n_idx * config.trials + t];
            sum += row.excess;
            sum_sq += row.excess * row.excess;
            sum_risk += row.risk;
        }
        const double tr = static_cast<double>(config.trials);
        const double mean = sum / tr;
        double sem = 0.0;
        if (config.trials > 1) {
            const double var = std::max(0.0, (sum_sq - tr * mean * mean) / (tr - 1.0));
            sem = std::sqrt(var / tr);
        }
        report.aggregates.push_back({config.n_grid[n_idx], sum_risk / tr, mean, sem});
    }
    return report;
}

SlopeFit fit_log_slope(std::span<const AggregateRow> aggregates) {
    SlopeFit fit;
    std::vector<double> xs, ys;
    for (const auto& row : aggregates) {
        if (row.mean_excess > 0.0) {
            xs.push_back(std::log(static_cast<double>(row.n)));
            ys.push_back(std::log(row.mean_excess));
        } else {
            fit.excluded_n.push_back(row.n);
        }
    }
    if (xs.size() < 3)
        throw std::invalid_argument("fit_log_slope: fewer than 3 grid points with positive mean excess");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    fit.slope = sxy / sxx;
    const double intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (intercept + fit.slope * xs[i]);
        rss += r * r;
    }
    fit.stderr_ = xs.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
    fit.points_used = xs.size();
    return fit;
}

std::optional<double> theoretical_exponent(const DistributionSpec& spec) {
    const auto margin = spec.margin();
    const auto lip = spec.lipschitz();
    if (!margin || !lip) return std::nullopt;
    if (!std::isfinite(margin->alpha)) return std::nullopt;
    const double g = lip->gamma;
    return g * (1.0 + margin->alpha) / (2.0 * g + 1.0);
}

void write_risk_csv(std::ostream& os, const RiskReport& report) {
    os << "n,trial,k,m,risk,bayes_risk,excess,stderr\n";
    for (const TrialRow& row : report.rows) {
        os << row.n << ',' << row.trial << ',' << row.k << ',' << row.m << ','
           << format_double(row.risk) << ',' << format_double(row.bayes_risk) << ','
           << format_double(row.excess) << ',' << format_double(row.stderr_) << '\n';
    }
}

std::string summary_json(const RiskReport& report, const SlopeFit& fit) {
    json j;
    j["slope"] = fit.slope;
    j["slope_stderr"] = fit.stderr_;
    const auto spec = parse_family(report.config.family);
    if (const auto expo = theoretical_exponent(*spec))
        j["theoretical_exponent"] = *expo;
    else
        j["theoretical_exponent"] = nullptr;
    json grid = json::array(), excess = json::array();
    for (const auto& agg : report.aggregates) {
        grid.push_back(agg.n);
        excess.push_back(agg.mean_excess);
    }
    j["grid"] = grid;
    j["mean_excess"] = excess;
    return j.dump(2);
}

} // namespace metricproto
