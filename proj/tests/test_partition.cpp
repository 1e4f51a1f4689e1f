#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "metricproto/partition.hpp"
#include "metricproto/rng.hpp"

using namespace metricproto;

namespace {

std::vector<Point> line_points(std::initializer_list<double> xs) {
    std::vector<Point> pts;
    for (const double x : xs) pts.push_back(Point::vec1(x));
    return pts;
}

} // namespace

TEST_CASE("two-cell partition on a line") {
    const auto space = parse_metric("euclidean");
    const VoronoiPartition partition(space, line_points({0, 10}));
    CHECK(partition.cell_count() == 2);
    CHECK(partition.assign_cell(Point::vec1(1.0)) == 0);
    CHECK(partition.assign_cell(Point::vec1(9.0)) == 1);
}

TEST_CASE("single nucleus absorbs everything") {
    const auto space = parse_metric("euclidean");
    const VoronoiPartition partition(space, line_points({42.0}));
    for (const double x : {-100.0, 0.0, 42.0, 1e6}) CHECK(partition.assign_cell(Point::vec1(x)) == 0);
}

TEST_CASE("duplicate nuclei resolve to the lower index") {
    const auto space = parse_metric("euclidean");
    const VoronoiPartition partition(space, line_points({5, 5}));
    for (const double x : {0.0, 5.0, 9.0}) CHECK(partition.assign_cell(Point::vec1(x)) == 0);
}

TEST_CASE("equidistant point goes to the lower-index nucleus") {
    const auto space = parse_metric("euclidean");
    const VoronoiPartition partition(space, line_points({0, 1}));
    CHECK(partition.assign_cell(Point::vec1(0.5)) == 0);
    CHECK(partition.assign_cell(Point::vec1(0.9)) == 1);
}

TEST_CASE("assignment is the brute-force argmin") {
    const auto space = parse_metric("euclidean");
    const VoronoiPartition partition(space, line_points({0, 1, 2}));
    // |1.6-1| = 0.6 > |1.6-2| = 0.4, so the third nucleus wins.
    CHECK(partition.assign_cell(Point::vec1(1.6)) == 2);
}

TEST_CASE("empty nucleus list is rejected") {
    const auto space = parse_metric("euclidean");
    CHECK_THROWS_AS(VoronoiPartition(space, {}), std::invalid_argument);
}

TEST_CASE("tally counts cells and classes") {
    const auto space = parse_metric("euclidean");
    const VoronoiPartition partition(space, line_points({0, 10}));
    const auto data = make_classification(line_points({1, 2, 9}), {1, 1, 2}, 2);
    const CellStats stats = tally(partition, data);
    CHECK(stats.counts == std::vector<std::int64_t>{2, 1});
    CHECK(stats.class_counts[0] == std::vector<std::int64_t>{2, 0});
    CHECK(stats.class_counts[1] == std::vector<std::int64_t>{0, 1});
}

TEST_CASE("tally of an empty dataset is all zeros") {
    const auto space = parse_metric("euclidean");
    const VoronoiPartition partition(space, line_points({0, 10}));
    LabeledDataset empty;
    empty.num_classes = 2;
    const CellStats stats = tally(partition, empty);
    CHECK(stats.counts == std::vector<std::int64_t>{0, 0});
}

TEST_CASE("tally accumulates regression sums") {
    const auto space = parse_metric("euclidean");
    const VoronoiPartition partition(space, line_points({0.0}));
    const auto data = make_regression(line_points({0.1, 0.2}), {1.0, 3.0});
    const CellStats stats = tally(partition, data);
    CHECK(stats.counts[0] == 2);
    CHECK(stats.sums[0] == doctest::Approx(4.0));
}

TEST_CASE("tally rejects out-of-range labels") {
    const auto space = parse_metric("euclidean");
    const VoronoiPartition partition(space, line_points({0.0}));
    LabeledDataset bad;
    bad.points = line_points({0.0});
    bad.labels = {7};
    bad.num_classes = 2;
    CHECK_THROWS_AS(tally(partition, bad), std::invalid_argument);
}

TEST_CASE("cells partition any probe set") {
    const auto space = parse_metric("euclidean");
    Rng rng(42);
    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t m = 1 + rng.uniform_below(12);
        std::vector<Point> nuclei;
        for (std::size_t c = 0; c < m; ++c)
            nuclei.push_back(Point::vec({rng.uniform01(), rng.uniform01()}));
        const VoronoiPartition partition(space, nuclei);
        std::vector<std::size_t> per_cell(m, 0);
        const std::size_t probes = 200;
        for (std::size_t i = 0; i < probes; ++i) {
            const auto cell = partition.assign_cell(Point::vec({rng.uniform01(), rng.uniform01()}));
            REQUIRE(cell < m);
            ++per_cell[cell];
        }
        std::size_t total = 0;
        for (const auto c : per_cell) total += c;
        CHECK(total == probes);
    }
}

TEST_CASE("assign_cell agrees with k_nearest across modules") {
    Rng rng(43);
    for (const char* metric : {"euclidean", "discrete"}) {
        const auto space = parse_metric(metric);
        for (int inst = 0; inst < 100; ++inst) {
            const std::size_t m = 1 + rng.uniform_below(10);
            std::vector<Point> nuclei;
            for (std::size_t c = 0; c < m; ++c)
                nuclei.push_back(Point::vec1(std::floor(rng.uniform01() * 4.0) / 4.0));
            const VoronoiPartition partition(space, nuclei);
            for (int probe = 0; probe < 20; ++probe) {
                const Point x = Point::vec1(std::floor(rng.uniform01() * 4.0) / 4.0);
                CHECK(partition.assign_cell(x) ==
                      k_nearest(*space, nuclei, x, 1).entries[0].index);
            }
        }
    }
}

TEST_CASE("tally is invariant to dataset order") {
    const auto space = parse_metric("euclidean");
    Rng rng(44);
    std::vector<Point> nuclei;
    for (int c = 0; c < 5; ++c) nuclei.push_back(Point::vec1(rng.uniform01()));
    const VoronoiPartition partition(space, nuclei);

    std::vector<Point> pts;
    std::vector<int> labels;
    for (int i = 0; i < 100; ++i) {
        pts.push_back(Point::vec1(rng.uniform01()));
        labels.push_back(1 + static_cast<int>(rng.uniform_below(3)));
    }
    const auto forward = tally(partition, make_classification(pts, labels, 3));
    std::reverse(pts.begin(), pts.end());
    std::reverse(labels.begin(), labels.end());
    const auto backward = tally(partition, make_classification(pts, labels, 3));
    CHECK(forward.counts == backward.counts);
    CHECK(forward.class_counts == backward.class_counts);
}
