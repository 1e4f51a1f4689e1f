// Acceptance suite: one PASS/FAIL line per criterion, exit 0 iff all pass.
// Criteria 1-3 are the empirical rate checks (fixed seeds, deterministic);
// 4-8 are exact property/oracle checks.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "metricproto/decomposition.hpp"
#include "metricproto/harness.hpp"
#include "metricproto/models.hpp"
#include "metricproto/partition.hpp"
#include "metricproto/synthetic.hpp"
#include "metricproto/verify.hpp"

using namespace metricproto;

namespace {

int failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s  %d  %-28s %s\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

constexpr std::uint64_t kSeed = 2025;

ExperimentConfig rate_config(const std::string& classifier) {
    ExperimentConfig cfg;
    cfg.family = "margin:beta=1.0";
    cfg.classifier = classifier;
    cfg.n_grid = {256, 1024, 4096, 16384, 65536};
    cfg.k_schedule = "floor(pow(n,2/3))";
    cfg.m_schedule = classifier == "proto_knn" ? "ceil(n/k)" : "";
    cfg.trials = 200;
    cfg.test_points = 100000;
    cfg.seed = kSeed;
    return cfg;
}

} // namespace

int main() {
    // Criterion 1: k-NN rate reproduction on margin:beta=1.0
    // (beta = 1, alpha = 1, d = 1; theoretical exponent 2/3).
    const RiskReport knn_report = rate_sweep(rate_config("knn"));
    const SlopeFit knn_fit = fit_log_slope(knn_report.aggregates);
    {
        const bool pass = knn_fit.slope >= -0.92 && knn_fit.slope <= -0.42;
        report(1, "rate-reproduction-knn", pass,
               "slope=" + fmt(knn_fit.slope) + " (stderr " + fmt(knn_fit.stderr_) +
                   ") required in [-0.92,-0.42]");
    }

    // Criterion 2: the hybrid rule with m = ceil(n/k) matches k-NN.
    {
        const RiskReport proto_report = rate_sweep(rate_config("proto_knn"));
        const SlopeFit proto_fit = fit_log_slope(proto_report.aggregates);
        const double diff = std::abs(proto_fit.slope - knn_fit.slope);
        bool ratios_ok = true;
        std::ostringstream ratios;
        for (std::size_t i = 0; i < proto_report.aggregates.size(); ++i) {
            const double a = proto_report.aggregates[i].mean_excess;
            const double b = knn_report.aggregates[i].mean_excess;
            const double ratio = a / b;
            ratios_ok = ratios_ok && ratio <= 3.0 && ratio >= 1.0 / 3.0;
            ratios << (i ? "," : "") << fmt(ratio);
        }
        report(2, "hybrid-matches-knn", diff <= 0.15 && ratios_ok,
               "slope=" + fmt(proto_fit.slope) + " |diff|=" + fmt(diff) +
                   " (<=0.15), excess ratios {" + ratios.str() + "} within 3x");
    }

    // Criterion 3: Proto-NN consistency trend on noiseless:d=2 with m = ceil(sqrt(n)).
    {
        ExperimentConfig cfg;
        cfg.family = "noiseless:d=2";
        cfg.classifier = "proto_nn";
        cfg.n_grid = {256, 2048, 16384, 131072};
        cfg.m_schedule = "ceil(pow(n,0.5))";
        cfg.trials = 100;
        cfg.test_points = 100000;
        cfg.seed = kSeed;
        const RiskReport rep = rate_sweep(cfg);
        bool decreasing = true;
        for (std::size_t i = 1; i < rep.aggregates.size(); ++i) {
            const auto& prev = rep.aggregates[i - 1];
            const auto& cur = rep.aggregates[i];
            const double slack =
                2.0 * std::sqrt(prev.sem_excess * prev.sem_excess + cur.sem_excess * cur.sem_excess);
            decreasing = decreasing && cur.mean_excess < prev.mean_excess + slack &&
                         cur.mean_excess < prev.mean_excess;
        }
        const double first = rep.aggregates.front().mean_excess;
        const double last = rep.aggregates.back().mean_excess;
        std::ostringstream means;
        for (std::size_t i = 0; i < rep.aggregates.size(); ++i)
            means << (i ? "," : "") << fmt(rep.aggregates[i].mean_excess);
        report(3, "protonn-consistency-trend", decreasing && last < first / 3.0,
               "mean excess {" + means.str() + "} strictly decreasing, final < first/3");
    }

    // Criterion 4: excess-risk decomposition bound, exact rational enumeration.
    {
        const auto r = check_decomposition(100, kSeed);
        report(4, "decomposition-bound", r.pass, r.detail);
    }

    // Criterion 5: oracle equivalences.
    {
        const auto knn_oracle = check_knn_oracle(1000, kSeed);
        const auto compression = check_protonn_compression(100, kSeed);
        report(5, "oracle-equivalences", knn_oracle.pass && compression.pass,
               knn_oracle.detail + "; " + compression.detail);
    }

    // Criterion 6: analytic anchors.
    {
        const auto linear = parse_family("linear1d");
        const double closed = linear->bayes_risk();
        const double quad = bayes_risk_quadrature(*linear);
        const bool linear_ok = std::abs(closed - 0.25) <= 1e-6 && std::abs(quad - 0.25) <= 1e-6;

        const bool noise_ok = parse_family("purenoise:M=3")->bayes_risk() == 2.0 / 3.0;

        const auto margin = parse_family("margin:beta=1.0");
        const double margin_quad = bayes_risk_quadrature(*margin);
        const auto est = conditional_risk(
            *margin, [&](const Point& x) { return margin->bayes_label(x); }, 100000, kSeed);
        const bool bayes_ok = std::abs(est.risk - margin_quad) <= 3.0 * est.risk_stderr;

        report(6, "analytic-anchors", linear_ok && noise_ok && bayes_ok,
               "linear1d L*=" + fmt(closed) + " (quad " + fmt(quad) + "), purenoise:M=3 L*=2/3 exact, "
                   "bayes risk " + fmt(est.risk) + " vs quadrature " + fmt(margin_quad) + " within 3 stderr");
    }

    // Criterion 7: truncation semantics of the modified regressor.
    {
        auto partition = std::make_shared<VoronoiPartition>(
            parse_metric("euclidean"),
            std::vector<Point>{Point::vec1(0.0), Point::vec1(10.0)});
        // n = 1000: ln(1000) ~ 6.908; counts 7 and 2 straddle it.
        const PartitionRegressor model(partition, {2.5, 2.5}, {7, 2}, 1000);
        const bool pass = model.predict(Point::vec1(10.0), true) == 0.0 &&
                          model.predict(Point::vec1(0.0), true) == 2.5 &&
                          model.predict(Point::vec1(10.0), false) == 2.5;
        report(7, "truncation-semantics", pass,
               "count 2 < ln(1000) -> 0, count 7 >= ln(1000) -> mean, untruncated ignores threshold");
    }

    // Criterion 8: property suites.
    {
        const auto axioms = check_metric_axioms(10000, kSeed);
        const auto norm = check_posterior_normalization(10000, kSeed);
        const auto net = check_gamma_net_invariants(50, kSeed);
        const auto repro = check_reproducibility();
        const bool pass = axioms.pass && norm.pass && net.pass && repro.pass;
        report(8, "property-suites", pass,
               "axioms 1e-12, normalization 1e-12, net exact, CSV bit-identical");
    }

    if (failures == 0) std::printf("acceptance: all 8 criteria passed\n");
    else std::printf("acceptance: %d criteria FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
