#include "metricproto/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include "metricproto/decomposition.hpp"
#include "metricproto/harness.hpp"
#include "metricproto/models.hpp"
#include "metricproto/neighbors.hpp"
#include "metricproto/rng.hpp"
#include "metricproto/synthetic.hpp"

namespace metricproto {

namespace {

Point random_vec(Rng& rng, std::size_t d, bool quantized) {
    std::vector<double> v(d);
    for (auto& c : v) {
        c = rng.uniform01();
        if (quantized) c = std::floor(c * 8.0) / 8.0;  // exact ties on the 1/8 grid
    }
    return Point::vec(std::move(v));
}

Point random_sym(Rng& rng) {
    const std::size_t len = rng.uniform_below(8);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s.push_back(rng.uniform_below(2) == 0 ? 'a' : 'b');
    return Point::sym(std::move(s));
}

std::shared_ptr<const TableMetric> random_table(Rng& rng, std::size_t size) {
    std::vector<int> positions;
    std::set<int> used;
    while (positions.size() < size) {
        const int p = static_cast<int>(rng.uniform_below(10 * size));
        if (used.insert(p).second) positions.push_back(p);
    }
    std::vector<std::string> symbols;
    std::vector<std::vector<double>> table(size, std::vector<double>(size));
    for (std::size_t i = 0; i < size; ++i) {
        symbols.push_back("s" + std::to_string(i));
        for (std::size_t j = 0; j < size; ++j)
            table[i][j] = std::abs(positions[i] - positions[j]);
    }
    return std::make_shared<TableMetric>(std::move(symbols), std::move(table));
}

struct MetricCase {
    std::string name;
    MetricPtr space;
    std::function<Point(Rng&)> draw;
};

std::vector<MetricCase> metric_cases(Rng& rng) {
    std::vector<MetricCase> cases;
    cases.push_back({"euclidean-d3", parse_metric("euclidean"),
                     [](Rng& r) { return random_vec(r, 3, false); }});
    cases.push_back({"lp1.5-d2", parse_metric("lp:1.5"),
                     [](Rng& r) { return random_vec(r, 2, false); }});
    cases.push_back({"discrete", parse_metric("discrete"),
                     [](Rng& r) { return random_vec(r, 1, true); }});
    cases.push_back({"edit", parse_metric("edit"), [](Rng& r) { return random_sym(r); }});
    auto table = random_table(rng, 6);
    cases.push_back({"table", table, [table](Rng& r) {
                         return Point::cat(static_cast<std::int32_t>(r.uniform_below(table->catalog_size())));
                     }});
    auto aug = augment(parse_metric("euclidean"), 0.25, 77);
    std::uint64_t counter = 0;
    cases.push_back({"augmented-euclidean", aug,
                     [aug, counter](Rng& r) mutable {
                         return aug->attach(random_vec(r, 2, true), counter++);
                     }});
    return cases;
}

std::string fail(const std::string& what) { return what; }

} // namespace

CheckResult check_metric_axioms(std::size_t triples_per_metric, std::uint64_t seed) {
    Rng rng = derive_rng(seed, {0xA1});
    for (auto& mc : metric_cases(rng)) {
        for (std::size_t i = 0; i < triples_per_metric; ++i) {
            const Point a = mc.draw(rng), b = mc.draw(rng), c = mc.draw(rng);
            const double dab = mc.space->distance(a, b);
            const double dba = mc.space->distance(b, a);
            const double dac = mc.space->distance(a, c);
            const double dbc = mc.space->distance(b, c);
            if (mc.space->distance(a, a) != 0.0)
                return {"metric-axioms", false, fail(mc.name + ": d(a,a) != 0")};
            if (dab < 0.0) return {"metric-axioms", false, fail(mc.name + ": negative distance")};
            if (std::abs(dab - dba) > 1e-12)
                return {"metric-axioms", false, fail(mc.name + ": asymmetry")};
            if (dac > dab + dbc + 1e-12)
                return {"metric-axioms", false, fail(mc.name + ": triangle inequality violated")};
        }
    }
    return {"metric-axioms", true,
            std::to_string(triples_per_metric) + " triples per metric, tolerance 1e-12"};
}

CheckResult check_no_ties_augmented(std::size_t draws, std::uint64_t seed) {
    Rng rng = derive_rng(seed, {0xA2});
    const auto aug = augment(parse_metric("discrete"), 1e-3, 4242);
    std::uint64_t counter = 0;
    for (std::size_t i = 0; i < draws; ++i) {
        const std::size_t n = 2 + rng.uniform_below(31);
        std::vector<Point> pts;
        for (std::size_t p = 0; p < n; ++p)
            pts.push_back(aug->attach(random_vec(rng, 1, true), counter++));
        const Point q = aug->attach(random_vec(rng, 1, true), counter++);
        std::set<double> seen;
        for (const Point& p : pts)
            if (!seen.insert(aug->distance(q, p)).second)
                return {"augmentation-no-ties", false, "exact tie in draw " + std::to_string(i)};
    }
    return {"augmentation-no-ties", true, std::to_string(draws) + " draws without an exact tie"};
}

CheckResult check_knn_oracle(std::size_t instances_per_metric, std::uint64_t seed) {
    Rng rng = derive_rng(seed, {0xA3});
    auto cases = metric_cases(rng);
    // A plain 1-D case exercises the sorted-line engine against brute force.
    cases.push_back({"euclidean-d1", parse_metric("euclidean"),
                     [](Rng& r) { return random_vec(r, 1, true); }});
    std::size_t total = 0;
    for (auto& mc : cases) {
        for (std::size_t inst = 0; inst < instances_per_metric; ++inst) {
            const std::size_t n = 1 + rng.uniform_below(60);
            std::vector<Point> pts;
            for (std::size_t i = 0; i < n; ++i) pts.push_back(mc.draw(rng));
            const Point q = mc.draw(rng);
            const std::size_t k = 1 + rng.uniform_below(n);

            const NeighborList brute = k_nearest(*mc.space, pts, q, k);
            const PivotIndex index(mc.space, pts);
            const NeighborList pruned = index.k_nearest_pruned(q, k);
            auto equal = [](const NeighborList& x, const NeighborList& y) {
                if (x.entries.size() != y.entries.size()) return false;
                for (std::size_t i = 0; i < x.entries.size(); ++i)
                    if (x.entries[i].index != y.entries[i].index ||
                        x.entries[i].distance != y.entries[i].distance)
                        return false;
                return true;
            };
            if (!equal(brute, pruned))
                return {"knn-oracle", false,
                        mc.name + ": pruned != brute at instance " + std::to_string(inst)};
            const auto engine = KnnEngine::make(mc.space, pts);
            if (!equal(brute, engine->query(q, k)))
                return {"knn-oracle", false,
                        mc.name + ": engine != brute at instance " + std::to_string(inst)};
            ++total;
        }
    }
    return {"knn-oracle", true,
            std::to_string(total) + " randomized instances bit-identical to brute force"};
}

CheckResult check_protonn_compression(std::size_t instances, std::uint64_t seed) {
    Rng rng = derive_rng(seed, {0xA4});
    const MetricPtr space = parse_metric("euclidean");
    for (std::size_t inst = 0; inst < instances; ++inst) {
        const std::size_t n = 1 + rng.uniform_below(200);
        const std::size_t m = 1 + rng.uniform_below(20);
        const int M = 2 + static_cast<int>(rng.uniform_below(3));
        std::vector<Point> pts;
        std::vector<int> labels;
        for (std::size_t i = 0; i < n; ++i) {
            pts.push_back(random_vec(rng, 2, true));
            labels.push_back(1 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(M))));
        }
        std::vector<Point> nuclei;
        for (std::size_t c = 0; c < m; ++c) nuclei.push_back(random_vec(rng, 2, true));
        const auto data = make_classification(pts, labels, M);
        const ProtoNNModel model = fit_proto_nn(data, nuclei, space);

        for (std::size_t probe = 0; probe < 20; ++probe) {
            const Point x = random_vec(rng, 2, true);
            // From-scratch majority vote over the training points sharing x's cell.
            auto cell_of = [&](const Point& p) {
                std::size_t best = 0;
                double best_d = space->distance(p, nuclei[0]);
                for (std::size_t c = 1; c < nuclei.size(); ++c) {
                    const double d = space->distance(p, nuclei[c]);
                    if (d < best_d) {
                        best_d = d;
                        best = c;
                    }
                }
                return best;
            };
            const std::size_t cell = cell_of(x);
            std::vector<double> freq(static_cast<std::size_t>(M), 0.0);
            for (std::size_t i = 0; i < n; ++i)
                if (cell_of(pts[i]) == cell) freq[static_cast<std::size_t>(labels[i] - 1)] += 1.0;
            const int want = argmax_class(freq);
            if (model.predict(x) != want)
                return {"protonn-compression-oracle", false,
                        "mismatch at instance " + std::to_string(inst)};
        }
    }
    return {"protonn-compression-oracle", true,
            std::to_string(instances) + " instances match from-scratch majority votes"};
}

CheckResult check_margin_conditions(std::uint64_t seed) {
    const std::vector<double> t_grid{0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
    {
        const auto spec = parse_family("margin:beta=1.0");
        const auto report = check_margin(*spec, t_grid, 20000, seed);
        if (report.any_flagged())
            return {"margin-conditions", false, "margin:beta=1.0 flagged unexpectedly"};
        const auto mid = report.rows[2];  // t = 0.5, gap CDF should be ~0.5
        if (std::abs(mid.empirical_cdf - 0.5) > 0.02)
            return {"margin-conditions", false, "margin:beta=1.0 gap CDF far from t at t=0.5"};
    }
    {
        const auto spec = parse_family("noiseless:d=2");
        const auto report = check_margin(*spec, t_grid, 5000, seed);
        if (report.any_flagged())
            return {"margin-conditions", false, "noiseless flagged unexpectedly"};
    }
    {
        const auto spec = parse_family("purenoise:M=3,d=1");
        const auto report = check_margin(*spec, t_grid, 5000, seed, MarginParams{1.0, 1.0});
        if (!report.any_flagged())
            return {"margin-conditions", false, "degenerate pure-noise gap was not flagged"};
    }
    return {"margin-conditions", true,
            "declared families hold; pure-noise flagged under alpha=1 as expected"};
}

CheckResult check_lipschitz_conditions(std::uint64_t seed) {
    const MetricPtr space = parse_metric("euclidean");
    {
        const auto spec = parse_family("linear1d");
        const auto report = check_generalized_lipschitz(*spec, *space, 200, 4000, seed);
        if (report.any_flagged())
            return {"lipschitz-conditions", false,
                    "linear1d flagged " + std::to_string(report.violations.size()) + " pairs"};
    }
    {
        const auto spec = parse_family("purenoise:M=3,d=2");
        const auto report = check_generalized_lipschitz(*spec, *space, 100, 1000, seed);
        if (report.any_flagged())
            return {"lipschitz-conditions", false, "pure-noise flagged under constant posteriors"};
    }
    {
        const auto spec = parse_family("noiseless:d=1");
        const auto report =
            check_generalized_lipschitz(*spec, *space, 200, 2000, seed, LipschitzParams{1.0, 1.0});
        if (!report.any_flagged())
            return {"lipschitz-conditions", false,
                    "discontinuous halfspace posterior was not flagged"};
    }
    return {"lipschitz-conditions", true,
            "declared families hold; halfspace discontinuity flagged as expected"};
}

CheckResult check_decomposition(std::size_t instances, std::uint64_t seed) {
    Rng rng = derive_rng(seed, {0xA5});
    for (std::size_t inst = 0; inst < instances; ++inst) {
        const FiniteInstance fi = random_finite_instance(rng);
        std::unique_ptr<EnumerablePlugin> model;
        if (inst % 2 == 0)
            model = make_enumerable_proto_nn(fi.spec, fi.train_ids, fi.nucleus_ids);
        else
            model = make_enumerable_knn(fi.spec, fi.train_ids, fi.k);
        const DecompositionReport report = verify_decomposition(fi.spec, *model, fi.train_ids);
        if (!report.holds())
            return {"decomposition-bound", false,
                    "excess exceeds the J-term bound at instance " + std::to_string(inst)};
        if (report.excess < 0)
            return {"decomposition-bound", false,
                    "negative excess at instance " + std::to_string(inst)};
        if (inst % 10 == 0) {
            const auto exact = make_enumerable_exact(fi.spec);
            const DecompositionReport r2 = verify_decomposition(fi.spec, *exact, fi.train_ids);
            if (r2.excess != 0 || !r2.holds())
                return {"decomposition-bound", false,
                        "exact-posterior rule has nonzero excess at instance " + std::to_string(inst)};
        }
    }
    return {"decomposition-bound", true,
            std::to_string(instances) + " exact rational instances satisfy the bound"};
}

CheckResult check_posterior_normalization(std::size_t points_per_family, std::uint64_t seed) {
    for (const auto& info : list_families()) {
        const auto spec = parse_family(info.config_example);
        Rng rng = derive_rng(seed, {0xA6, std::hash<std::string>{}(info.config_example)});
        for (std::size_t i = 0; i < points_per_family; ++i) {
            const auto p = spec->posterior(spec->sample_x(rng));
            double sum = 0.0;
            for (const double v : p) {
                if (v < 0.0 || v > 1.0)
                    return {"posterior-normalization", false, info.config_example + ": value outside [0,1]"};
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                return {"posterior-normalization", false, info.config_example + ": sum deviates"};
        }
    }
    return {"posterior-normalization", true,
            std::to_string(points_per_family) + " points per family within 1e-12"};
}

CheckResult check_gamma_net_invariants(std::size_t instances, std::uint64_t seed) {
    Rng rng = derive_rng(seed, {0xA7});
    const MetricPtr space = parse_metric("euclidean");
    for (std::size_t inst = 0; inst < instances; ++inst) {
        const std::size_t n = 1 + rng.uniform_below(300);
        std::vector<Point> pts;
        for (std::size_t i = 0; i < n; ++i) pts.push_back(random_vec(rng, 2, inst % 2 == 0));
        const double gamma = 0.05 + rng.uniform01();
        const auto net = build_gamma_net(pts, gamma, *space);
        for (std::size_t i = 0; i < net.size(); ++i)
            for (std::size_t j = i + 1; j < net.size(); ++j)
                if (space->distance(net[i], net[j]) < gamma)
                    return {"gamma-net-invariants", false, "separation violated"};
        for (const Point& p : pts) {
            double best = std::numeric_limits<double>::infinity();
            for (const Point& q : net) best = std::min(best, space->distance(p, q));
            if (!(best < gamma))
                return {"gamma-net-invariants", false, "maximality violated"};
        }
    }
    return {"gamma-net-invariants", true,
            std::to_string(instances) + " builds separated and maximal, checked exhaustively"};
}

CheckResult check_reproducibility() {
    ExperimentConfig cfg;
    cfg.family = "margin:beta=1.0";
    cfg.classifier = "knn";
    cfg.n_grid = {64, 128, 256};
    cfg.k_schedule = "floor(pow(n,2/3))";
    cfg.trials = 3;
    cfg.test_points = 2000;
    cfg.seed = 99;
    std::ostringstream a, b;
    write_risk_csv(a, rate_sweep(cfg));
    write_risk_csv(b, rate_sweep(cfg));
    if (a.str() != b.str()) return {"reproducibility", false, "CSV bytes differ between runs"};
    return {"reproducibility", true, "identical CSV bytes across two sweeps of the same config"};
}

std::vector<CheckResult> run_verify_battery() {
    std::vector<CheckResult> results;
    results.push_back(check_metric_axioms(10000, 1001));
    results.push_back(check_no_ties_augmented(1000, 1002));
    results.push_back(check_knn_oracle(1000, 1003));
    results.push_back(check_protonn_compression(100, 1004));
    results.push_back(check_posterior_normalization(10000, 1005));
    results.push_back(check_margin_conditions(1006));
    results.push_back(check_lipschitz_conditions(1007));
    results.push_back(check_decomposition(100, 1008));
    results.push_back(check_gamma_net_invariants(50, 1009));
    results.push_back(check_reproducibility());
    return results;
}

} // namespace metricproto
