#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "metricproto/model_io.hpp"
#include "metricproto/models.hpp"
#include "metricproto/rng.hpp"
#include "metricproto/verify.hpp"

using namespace metricproto;

namespace {

std::vector<Point> line_points(std::initializer_list<double> xs) {
    std::vector<Point> pts;
    for (const double x : xs) pts.push_back(Point::vec1(x));
    return pts;
}

const MetricPtr kEuclid = parse_metric("euclidean");

// A scaled decorator over an existing space; predictions must be invariant
// to it.
class ScaledSpace final : public MetricSpace {
public:
    ScaledSpace(MetricPtr base, double factor) : base_(std::move(base)), factor_(factor) {}
    double distance(const Point& a, const Point& b) const override {
        return factor_ * base_->distance(a, b);
    }
    MetricKind kind() const override { return base_->kind(); }
    std::string descriptor() const override { return base_->descriptor(); }

private:
    MetricPtr base_;
    double factor_;
};

} // namespace

TEST_CASE("proto-nn fit and predict") {
    const auto data = make_classification(line_points({1, 2, 9}), {1, 1, 2}, 2);
    const auto model = fit_proto_nn(data, line_points({0, 10}), kEuclid);
    CHECK(model.posterior(0) == std::vector<double>{1.0, 0.0});
    CHECK(model.posterior(1) == std::vector<double>{0.0, 1.0});
    CHECK(model.predict(Point::vec1(4.0)) == 1);
    CHECK(model.predict(Point::vec1(8.0)) == 2);
}

TEST_CASE("proto-nn empty cell keeps the all-zero vector and predicts class 1") {
    const auto data = make_classification(line_points({0.5, 1.0}), {2, 2}, 3);
    const auto model = fit_proto_nn(data, line_points({0, 100}), kEuclid);
    CHECK(model.posterior(1) == std::vector<double>{0.0, 0.0, 0.0});  // 0/0 = 0
    CHECK(model.predict(Point::vec1(99.0)) == 1);                     // all-zero vector, tie rule
}

TEST_CASE("proto-nn posterior ratios") {
    const auto data = make_classification(line_points({1, 2, 3}), {1, 1, 2}, 2);
    const auto model = fit_proto_nn(data, line_points({2.0}), kEuclid);
    CHECK(model.posterior(0)[0] == doctest::Approx(2.0 / 3.0));
    CHECK(model.posterior(0)[1] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("argmax tie goes to the lowest class") {
    CHECK(argmax_class(std::vector<double>{0.5, 0.5}) == 1);
    CHECK(argmax_class(std::vector<double>{0.0, 0.0, 0.0}) == 1);
    CHECK(argmax_class(std::vector<double>{0.2, 0.5, 0.3}) == 2);
}

TEST_CASE("proto-nn rejects regression data") {
    const auto data = make_regression(line_points({1, 2}), {0.5, 0.7});
    CHECK_THROWS_AS(fit_proto_nn(data, line_points({0.0}), kEuclid), std::invalid_argument);
}

TEST_CASE("proto-knn stores neighbor votes at nuclei") {
    const auto data = make_classification(line_points({4, 6, 100}), {1, 1, 2}, 2);
    const auto model = fit_proto_knn(data, line_points({5.0}), 2, kEuclid);
    CHECK(model.posterior_at_nucleus(0) == std::vector<double>{1.0, 0.0});
    CHECK(model.predict(Point::vec1(-50.0)) == 1);
    CHECK(model.predict(Point::vec1(1000.0)) == 1);  // routes to the only nucleus
}

TEST_CASE("proto-knn with k = n stores global frequencies") {
    const auto data = make_classification(line_points({0, 1, 2, 3}), {1, 2, 2, 2}, 2);
    const auto model = fit_proto_knn(data, line_points({0.0, 3.0}), 4, kEuclid);
    CHECK(model.posterior_at_nucleus(0) == std::vector<double>{0.25, 0.75});
    CHECK(model.posterior_at_nucleus(1) == std::vector<double>{0.25, 0.75});
}

TEST_CASE("proto-knn with nuclei = training points and k = 1 matches 1-NN") {
    Rng rng(21);
    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t n = 1 + rng.uniform_below(40);
        std::vector<Point> pts;
        std::vector<int> labels;
        for (std::size_t i = 0; i < n; ++i) {
            pts.push_back(Point::vec({rng.uniform01(), rng.uniform01()}));
            labels.push_back(1 + static_cast<int>(rng.uniform_below(3)));
        }
        const auto data = make_classification(pts, labels, 3);
        const auto model = fit_proto_knn(data, pts, 1, kEuclid);
        for (int probe = 0; probe < 10; ++probe) {
            const Point x = Point::vec({rng.uniform01(), rng.uniform01()});
            const auto nn = k_nearest(*kEuclid, pts, x, 1);  // brute-force 1-NN oracle
            CHECK(model.predict(x) == labels[nn.entries[0].index]);
        }
    }
}

TEST_CASE("proto-knn validates k") {
    const auto data = make_classification(line_points({1, 2}), {1, 2}, 2);
    CHECK_THROWS_AS(fit_proto_knn(data, line_points({0.0}), 0, kEuclid), std::invalid_argument);
    CHECK_THROWS_AS(fit_proto_knn(data, line_points({0.0}), 3, kEuclid), std::invalid_argument);
}

TEST_CASE("predict_knn basics") {
    {
        const auto data = make_classification(line_points({3.0}), {2}, 2);
        CHECK(predict_knn(data, Point::vec1(-100.0), 1, kEuclid).label == 2);
    }
    {
        const auto data = make_classification(line_points({0, 1, 2}), {1, 1, 2}, 2);
        const auto pred = predict_knn(data, Point::vec1(0.6), 3, kEuclid);
        CHECK(pred.label == 1);
        CHECK(pred.posterior[0] == doctest::Approx(2.0 / 3.0));
        CHECK(pred.posterior[1] == doctest::Approx(1.0 / 3.0));
    }
}

TEST_CASE("predict_knn agrees with a full re-sort oracle") {
    Rng rng(22);
    for (int inst = 0; inst < 1000; ++inst) {
        const std::size_t n = 1 + rng.uniform_below(30);
        std::vector<Point> pts;
        std::vector<int> labels;
        for (std::size_t i = 0; i < n; ++i) {
            pts.push_back(Point::vec1(std::floor(rng.uniform01() * 8.0) / 8.0));
            labels.push_back(1 + static_cast<int>(rng.uniform_below(3)));
        }
        const auto data = make_classification(pts, labels, 3);
        const int k = 1 + static_cast<int>(rng.uniform_below(n));
        const Point q = Point::vec1(std::floor(rng.uniform01() * 8.0) / 8.0);

        // Oracle: full sort of (distance, index), count the first k labels.
        std::vector<std::pair<double, std::size_t>> order;
        for (std::size_t i = 0; i < n; ++i) order.push_back({kEuclid->distance(q, pts[i]), i});
        std::sort(order.begin(), order.end());
        std::vector<double> freq(3, 0.0);
        for (int i = 0; i < k; ++i) freq[static_cast<std::size_t>(labels[order[static_cast<std::size_t>(i)].second] - 1)] += 1.0;
        const int want = argmax_class(freq);

        CHECK(predict_knn(data, q, k, kEuclid).label == want);
    }
}

TEST_CASE("gamma net greedy construction") {
    const auto pts = line_points({0, 0.5, 1.2, 2.0});
    const auto net = build_gamma_net(pts, 1.0, *kEuclid);
    REQUIRE(net.size() == 2);
    CHECK(*net[0].as_vec() == std::vector<double>{0.0});
    CHECK(*net[1].as_vec() == std::vector<double>{1.2});
}

TEST_CASE("gamma larger than the diameter keeps only the first point") {
    const auto pts = line_points({3, 4, 5});
    const auto net = build_gamma_net(pts, 100.0, *kEuclid);
    REQUIRE(net.size() == 1);
    CHECK(*net[0].as_vec() == std::vector<double>{3.0});
}

TEST_CASE("gamma below the minimal spacing keeps all points") {
    const auto pts = line_points({0, 1, 2});
    CHECK(build_gamma_net(pts, 0.5, *kEuclid).size() == 3);
    CHECK_THROWS_AS(build_gamma_net({}, 1.0, *kEuclid), std::invalid_argument);
    CHECK_THROWS_AS(build_gamma_net(pts, 0.0, *kEuclid), std::invalid_argument);
}

TEST_CASE("optinet-lite selects gamma on the hold-out") {
    // Linearly separated classes; a huge gamma collapses to one prototype.
    std::vector<Point> train_pts = line_points({0.0, 0.1, 0.2, 5.0, 5.1, 5.2});
    const auto train = make_classification(train_pts, {1, 1, 1, 2, 2, 2}, 2);
    const auto holdout = make_classification(line_points({0.05, 5.05}), {1, 2}, 2);

    SUBCASE("single candidate") {
        const auto model = fit_optinet_lite(train, holdout, {0.7}, kEuclid);
        CHECK(model.gamma_star() == 0.7);
    }
    SUBCASE("collapsing gamma loses to the fine one") {
        const auto model = fit_optinet_lite(train, holdout, {0.01, 10.0}, kEuclid);
        CHECK(model.gamma_star() == 0.01);
        CHECK(model.holdout_error() == 0.0);
        CHECK(model.predict(Point::vec1(0.0)) == 1);
        CHECK(model.predict(Point::vec1(5.0)) == 2);
    }
    SUBCASE("equal errors resolve to the smaller gamma") {
        const auto model = fit_optinet_lite(train, holdout, {0.3, 0.2}, kEuclid);
        CHECK(model.gamma_star() == 0.2);
    }
    SUBCASE("empty candidate list is rejected") {
        CHECK_THROWS_AS(fit_optinet_lite(train, holdout, {}, kEuclid), std::invalid_argument);
    }
}

TEST_CASE("partition regressor means and truncation") {
    // Cell means: 0/0 = 0 on empty cells.
    const auto data = make_regression(line_points({1, 2}), {1.0, 3.0});
    const auto model = fit_partition_regressor(data, line_points({0, 100}), kEuclid);
    CHECK(model.predict(Point::vec1(0.0), false) == doctest::Approx(2.0));
    CHECK(model.predict(Point::vec1(100.0), false) == 0.0);

    CHECK_THROWS_AS(
        fit_partition_regressor(make_classification(line_points({1}), {1}, 1), line_points({0}), kEuclid),
        std::invalid_argument);
}

TEST_CASE("truncated mode thresholds at ln(n)") {
    // n = 1000: ln(1000) ~ 6.908. A 2-point cell truncates to 0, a 7-point
    // cell keeps its mean, and the untruncated mode ignores the threshold.
    auto partition = std::make_shared<VoronoiPartition>(kEuclid, line_points({0, 10}));
    const PartitionRegressor model(partition, {2.5, 2.5}, {7, 2}, 1000);
    CHECK(model.predict(Point::vec1(0.0), true) == doctest::Approx(2.5));
    CHECK(model.predict(Point::vec1(10.0), true) == 0.0);
    CHECK(model.predict(Point::vec1(10.0), false) == doctest::Approx(2.5));
}

TEST_CASE("regressor predictions stay within the target range") {
    Rng rng(31);
    std::vector<Point> pts;
    std::vector<double> ys;
    for (int i = 0; i < 200; ++i) {
        pts.push_back(Point::vec1(rng.uniform01()));
        ys.push_back(2.0 * rng.uniform01() - 1.0);
    }
    const auto data = make_regression(pts, ys);
    std::vector<Point> nuclei;
    for (int c = 0; c < 10; ++c) nuclei.push_back(Point::vec1(rng.uniform01()));
    const auto model = fit_partition_regressor(data, nuclei, kEuclid);
    for (int probe = 0; probe < 100; ++probe) {
        const double y = model.predict(Point::vec1(rng.uniform01()), false);
        CHECK(y <= 1.0);
        CHECK(y >= -1.0);
    }
    // Constant targets give constant predictions on nonempty cells.
    const auto constant = fit_partition_regressor(
        make_regression(pts, std::vector<double>(pts.size(), 3.25)), nuclei, kEuclid);
    for (int probe = 0; probe < 50; ++probe) {
        const double y = constant.predict(Point::vec1(rng.uniform01()), false);
        if (y != 0.0) CHECK(y == doctest::Approx(3.25));
    }
}

TEST_CASE("posterior vectors are normalized") {
    Rng rng(32);
    std::vector<Point> pts;
    std::vector<int> labels;
    for (int i = 0; i < 300; ++i) {
        pts.push_back(Point::vec({rng.uniform01(), rng.uniform01()}));
        labels.push_back(1 + static_cast<int>(rng.uniform_below(4)));
    }
    const auto data = make_classification(pts, labels, 4);
    std::vector<Point> nuclei;
    for (int c = 0; c < 15; ++c) nuclei.push_back(Point::vec({rng.uniform01(), rng.uniform01()}));

    const auto proto = fit_proto_nn(data, nuclei, kEuclid);
    for (std::size_t cell = 0; cell < 15; ++cell) {
        double sum = 0.0;
        for (const double p : proto.posterior(cell)) sum += p;
        CHECK((sum == 0.0 || std::abs(sum - 1.0) <= 1e-12));
    }
    const auto hybrid = fit_proto_knn(data, nuclei, 17, kEuclid);
    for (std::size_t cell = 0; cell < 15; ++cell) {
        double sum = 0.0;
        for (const double p : hybrid.posterior_at_nucleus(cell)) {
            sum += p;
            // entries are multiples of 1/k
            CHECK(std::abs(p * 17.0 - std::round(p * 17.0)) <= 1e-9);
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("proto-nn compression equivalence oracle") {
    const auto result = check_protonn_compression(100, 808);
    INFO(result.detail);
    CHECK(result.pass);
}

TEST_CASE("proto-knn predictions are piecewise constant on cells") {
    Rng rng(33);
    std::vector<Point> pts;
    std::vector<int> labels;
    for (int i = 0; i < 100; ++i) {
        pts.push_back(Point::vec1(rng.uniform01()));
        labels.push_back(1 + static_cast<int>(rng.uniform_below(2)));
    }
    const auto data = make_classification(pts, labels, 2);
    std::vector<Point> nuclei;
    for (int c = 0; c < 6; ++c) nuclei.push_back(Point::vec1(rng.uniform01()));
    const auto model = fit_proto_knn(data, nuclei, 9, kEuclid);
    const VoronoiPartition& partition = model.partition();
    for (int probe = 0; probe < 200; ++probe) {
        const Point x = Point::vec1(rng.uniform01());
        const std::size_t cell = partition.assign_cell(x);
        CHECK(model.predict(x) == argmax_class(model.posterior_at_nucleus(cell)));
    }
}

TEST_CASE("gamma net invariants on random builds") {
    const auto result = check_gamma_net_invariants(50, 909);
    INFO(result.detail);
    CHECK(result.pass);
}

TEST_CASE("decisions are invariant to distance scaling") {
    Rng rng(34);
    std::vector<Point> pts;
    std::vector<int> labels;
    for (int i = 0; i < 120; ++i) {
        pts.push_back(Point::vec({rng.uniform01(), rng.uniform01()}));
        labels.push_back(1 + static_cast<int>(rng.uniform_below(3)));
    }
    const auto data = make_classification(pts, labels, 3);
    std::vector<Point> nuclei(pts.begin(), pts.begin() + 8);
    const MetricPtr scaled = std::make_shared<ScaledSpace>(kEuclid, 37.5);

    const auto proto_a = fit_proto_nn(data, nuclei, kEuclid);
    const auto proto_b = fit_proto_nn(data, nuclei, scaled);
    const auto knn_a = KNNModel(data, 7, kEuclid);
    const auto knn_b = KNNModel(data, 7, scaled);
    for (int probe = 0; probe < 100; ++probe) {
        const Point x = Point::vec({rng.uniform01(), rng.uniform01()});
        CHECK(proto_a.predict(x) == proto_b.predict(x));
        CHECK(knn_a.predict(x) == knn_b.predict(x));
    }
}

TEST_CASE("hold-out selection over nucleus counts") {
    // Two well-separated clusters: one nucleus per cluster suffices, and a
    // single nucleus misclassifies half the hold-out.
    std::vector<Point> pts;
    std::vector<int> labels;
    Rng rng(36);
    for (int i = 0; i < 40; ++i) {
        const bool right = i % 2 == 1;
        pts.push_back(Point::vec1((right ? 10.0 : 0.0) + 0.1 * rng.uniform01()));
        labels.push_back(right ? 2 : 1);
    }
    const auto train = make_classification({pts.begin(), pts.begin() + 30},
                                           {labels.begin(), labels.begin() + 30}, 2);
    const auto holdout = make_classification({pts.begin() + 30, pts.end()},
                                             {labels.begin() + 30, labels.end()}, 2);
    std::vector<Point> pool{Point::vec1(0.05), Point::vec1(10.05), Point::vec1(5.0)};
    const std::vector<int> grid{1, 2, 3};
    const auto sel = select_m_holdout(train, holdout, pool, grid, kEuclid);
    CHECK(sel.m == 2);  // smallest m reaching zero hold-out error
    CHECK(sel.holdout_error == 0.0);
    CHECK_THROWS_AS(select_m_holdout(train, holdout, pool, std::vector<int>{}, kEuclid),
                    std::invalid_argument);
    CHECK_THROWS_AS(select_m_holdout(train, holdout, pool, std::vector<int>{9}, kEuclid),
                    std::invalid_argument);
}

TEST_CASE("model persistence round-trips bit-identical predictions") {
    Rng rng(35);
    std::vector<Point> pts;
    std::vector<int> labels;
    std::vector<double> targets;
    for (int i = 0; i < 80; ++i) {
        pts.push_back(Point::vec({rng.uniform01(), rng.uniform01()}));
        labels.push_back(1 + static_cast<int>(rng.uniform_below(3)));
        targets.push_back(rng.uniform01() * 10 - 5);
    }
    const auto cls = make_classification(pts, labels, 3);
    const auto reg = make_regression(pts, targets);
    std::vector<Point> nuclei(pts.begin(), pts.begin() + 6);

    std::vector<Point> probes;
    for (int i = 0; i < 200; ++i) probes.push_back(Point::vec({rng.uniform01(), rng.uniform01()}));

    const auto holdout = make_classification({pts.begin() + 60, pts.end()},
                                             {labels.begin() + 60, labels.end()}, 3);

    std::vector<AnyModel> models;
    models.emplace_back(fit_proto_nn(cls, nuclei, kEuclid));
    models.emplace_back(fit_proto_knn(cls, nuclei, 5, kEuclid));
    models.emplace_back(KNNModel(cls, 7, kEuclid));
    models.emplace_back(fit_optinet_lite(cls, holdout, {0.1, 0.4, 1.6}, kEuclid));
    models.emplace_back(fit_partition_regressor(reg, nuclei, kEuclid));

    const char* path = "roundtrip_model.json";
    for (const auto& model : models) {
        save_model(path, model);
        const AnyModel loaded = load_model(path);
        for (const auto& x : probes) {
            CHECK(predict_any(model, x, false) == predict_any(loaded, x, false));
            CHECK(predict_any(model, x, true) == predict_any(loaded, x, true));
        }
    }
    std::remove(path);
    CHECK_THROWS(load_model("no_such_model.json"));
}
