#include "metricproto/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "metricproto/quadrature.hpp"

namespace metricproto {

double LipschitzParams::h(double s) const {
    return c_star * std::pow(s, gamma);
}

bool h_concavity_diagnostic(const LipschitzParams& params, std::size_t grid_points) {
    if (grid_points < 3) throw std::invalid_argument("h_concavity_diagnostic: grid too small");
    const double step = 1.0 / static_cast<double>(grid_points - 1);
    for (std::size_t i = 0; i + 2 < grid_points; ++i) {
        const double a = static_cast<double>(i) * step;
        const double b = a + 2.0 * step;
        if (params.h(a + step) + 1e-12 < 0.5 * (params.h(a) + params.h(b))) return false;
    }
    return true;
}

Point DistributionSpec::sample_x(Rng& rng) const {
    std::vector<double> x(static_cast<std::size_t>(dimension()));
    for (auto& c : x) c = rng.uniform01();
    return Point::vec(std::move(x));
}

double DistributionSpec::posterior(const Point& x, int j) const {
    return posterior(x)[static_cast<std::size_t>(j - 1)];
}

int DistributionSpec::bayes_label(const Point& x) const {
    const auto p = posterior(x);
    std::size_t best = 0;
    for (std::size_t j = 1; j < p.size(); ++j)
        if (p[j] > p[best]) best = j;
    return static_cast<int>(best) + 1;
}

LabeledDataset sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    Rng rng = derive_rng(seed, {0x6c61u});
    std::vector<Point> points;
    std::vector<int> labels;
    points.reserve(n);
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Point x = spec.sample_x(rng);
        const auto probs = spec.posterior(x);
        labels.push_back(rng.categorical(probs) + 1);
        points.push_back(std::move(x));
    }
    return make_classification(std::move(points), std::move(labels), spec.num_classes());
}

std::vector<Point> sample_points(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
    Rng rng = derive_rng(seed, {0x756eu});
    std::vector<Point> points;
    points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) points.push_back(spec.sample_x(rng));
    return points;
}

double bayes_risk_quadrature(const DistributionSpec& spec, double abs_tol) {
    const int d = spec.dimension();
    auto integrand = [&](const std::vector<double>& x) {
        const auto p = spec.posterior(Point::vec(x));
        return 1.0 - *std::max_element(p.begin(), p.end());
    };
    const std::vector<double> lo(static_cast<std::size_t>(d), 0.0);
    const std::vector<double> hi(static_cast<std::size_t>(d), 1.0);
    if (d <= 3) return integrate_box(integrand, lo, hi, abs_tol);
    return integrate_qmc(integrand, lo, hi, 1000000).value;
}

// ---------------------------------------------------------------------------
// Built-in families

namespace {

class PureNoise final : public DistributionSpec {
public:
    PureNoise(int d, int m) : d_(d), m_(m) {
        if (d < 1 || m < 2) throw std::invalid_argument("purenoise: need d >= 1, M >= 2");
    }
    std::string name() const override {
        std::ostringstream os;
        os << "purenoise:M=" << m_ << ",d=" << d_;
        return os.str();
    }
    int dimension() const override { return d_; }
    int num_classes() const override { return m_; }
    std::vector<double> posterior(const Point&) const override {
        return std::vector<double>(static_cast<std::size_t>(m_), 1.0 / static_cast<double>(m_));
    }
    double bayes_risk() const override {
        return static_cast<double>(m_ - 1) / static_cast<double>(m_);
    }
    // Posterior is constant, so any h witnesses the smoothness condition.
    std::optional<LipschitzParams> lipschitz() const override { return LipschitzParams{1.0, 1.0}; }

private:
    int d_, m_;
};

class NoiselessHalfspace final : public DistributionSpec {
public:
    explicit NoiselessHalfspace(int d) : d_(d) {
        if (d < 1) throw std::invalid_argument("noiseless: need d >= 1");
    }
    std::string name() const override {
        std::ostringstream os;
        os << "noiseless:d=" << d_;
        return os.str();
    }
    int dimension() const override { return d_; }
    int num_classes() const override { return 2; }
    std::vector<double> posterior(const Point& x) const override {
        const auto& v = *x.as_vec();
        const bool first = v.at(0) <= 0.5;
        return {first ? 1.0 : 0.0, first ? 0.0 : 1.0};
    }
    double bayes_risk() const override { return 0.0; }
    // The posterior gap is identically 1, so the margin condition holds with
    // any exponent.
    std::optional<MarginParams> margin() const override {
        return MarginParams{std::numeric_limits<double>::infinity(), 1.0};
    }

private:
    int d_;
};

// P_1(x) = 1/2 + (1/2) sgn(x - 1/2) |2x - 1|^beta on Uniform[0,1]. The
// posterior gap |2x - 1|^beta has CDF t^(1/beta), giving margin exponent
// alpha = 1/beta with c* = 1. Smoothness: gap differences are bounded by
// |x - z|^beta for beta <= 1 and by beta |x - z| for beta > 1, and the
// uniform ball mass dominates |x - z|, giving h(s) = max(1, beta) s^min(beta,1).
class MarginFamily : public DistributionSpec {
public:
    explicit MarginFamily(double beta) : beta_(beta) {
        if (!(beta > 0.0)) throw std::invalid_argument("margin family: beta must be positive");
    }
    std::string name() const override {
        std::ostringstream os;
        os << "margin:beta=" << beta_;
        return os.str();
    }
    int dimension() const override { return 1; }
    int num_classes() const override { return 2; }
    std::vector<double> posterior(const Point& x) const override {
        const double v = x.as_vec()->at(0);
        const double s = 2.0 * v - 1.0;
        const double p1 = 0.5 + 0.5 * (s >= 0.0 ? 1.0 : -1.0) * std::pow(std::abs(s), beta_);
        return {p1, 1.0 - p1};
    }
    double bayes_risk() const override { return 0.5 - 0.5 / (beta_ + 1.0); }
    std::optional<MarginParams> margin() const override { return MarginParams{1.0 / beta_, 1.0}; }
    std::optional<LipschitzParams> lipschitz() const override {
        return LipschitzParams{std::max(1.0, beta_), std::min(beta_, 1.0)};
    }

private:
    double beta_;
};

// P_1(x) = x; identical to the margin family at beta = 1 but kept as its own
// named family.
class Linear1D final : public MarginFamily {
public:
    Linear1D() : MarginFamily(1.0) {}
    std::string name() const override { return "linear1d"; }
    std::vector<double> posterior(const Point& x) const override {
        const double v = x.as_vec()->at(0);
        return {v, 1.0 - v};
    }
    double bayes_risk() const override { return 0.25; }
};

// Softmax of negative squared distances to M fixed anchor points in [0,1]^d.
// Anchors come from a Kronecker sequence so the family is reproducible
// without an RNG.
class SimplexMulticlass final : public DistributionSpec {
public:
    SimplexMulticlass(int d, int m) : d_(d), m_(m) {
        if (d < 1 || m < 2) throw std::invalid_argument("simplex: need d >= 1, M >= 2");
        static constexpr double kIrrational[] = {0.6180339887498949, 0.4142135623730951,
                                                 0.7320508075688772, 0.2360679774997896,
                                                 0.4494897427831781, 0.3166247903553998};
        anchors_.resize(static_cast<std::size_t>(m));
        for (int j = 0; j < m; ++j) {
            std::vector<double> a(static_cast<std::size_t>(d));
            for (int t = 0; t < d; ++t) {
                const double step = kIrrational[static_cast<std::size_t>(t) % 6];
                a[static_cast<std::size_t>(t)] = std::fmod(0.5 + (j + 1) * step, 1.0);
            }
            anchors_[static_cast<std::size_t>(j)] = std::move(a);
        }
    }
    std::string name() const override {
        std::ostringstream os;
        os << "simplex:d=" << d_ << ",M=" << m_;
        return os.str();
    }
    int dimension() const override { return d_; }
    int num_classes() const override { return m_; }
    std::vector<double> posterior(const Point& x) const override {
        const auto& v = *x.as_vec();
        std::vector<double> p(static_cast<std::size_t>(m_));
        double total = 0.0;
        for (int j = 0; j < m_; ++j) {
            double sq = 0.0;
            for (int t = 0; t < d_; ++t) {
                const double dlt = v[static_cast<std::size_t>(t)] - anchors_[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)];
                sq += dlt * dlt;
            }
            p[static_cast<std::size_t>(j)] = std::exp(-kSharpness * sq);
            total += p[static_cast<std::size_t>(j)];
        }
        for (auto& q : p) q /= total;
        return p;
    }
    double bayes_risk() const override {
        std::call_once(risk_once_, [this] { risk_ = bayes_risk_quadrature(*this, 1e-6); });
        return risk_;
    }
    std::string bayes_risk_provenance() const override { return "quadrature"; }

private:
    static constexpr double kSharpness = 5.0;
    int d_, m_;
    std::vector<std::vector<double>> anchors_;
    mutable std::once_flag risk_once_;
    mutable double risk_ = 0.0;
};

std::map<std::string, std::string> parse_kv(const std::string& s) {
    std::map<std::string, std::string> kv;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("family config: expected key=value, got '" + item + "'");
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return kv;
}

int kv_int(const std::map<std::string, std::string>& kv, const std::string& key, int fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : std::stoi(it->second);
}

} // namespace

SpecPtr parse_family(const std::string& config) {
    const auto colon = config.find(':');
    const std::string head = config.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : config.substr(colon + 1);
    if (head == "purenoise") {
        const auto kv = parse_kv(rest);
        return std::make_shared<PureNoise>(kv_int(kv, "d", 1), kv_int(kv, "M", 2));
    }
    if (head == "noiseless") {
        const auto kv = parse_kv(rest);
        return std::make_shared<NoiselessHalfspace>(kv_int(kv, "d", 1));
    }
    if (head == "margin") {
        const auto kv = parse_kv(rest);
        const auto it = kv.find("beta");
        if (it == kv.end()) throw std::invalid_argument("margin family requires beta=<value>");
        return std::make_shared<MarginFamily>(std::stod(it->second));
    }
    if (head == "linear1d") return std::make_shared<Linear1D>();
    if (head == "simplex") {
        const auto kv = parse_kv(rest);
        return std::make_shared<SimplexMulticlass>(kv_int(kv, "d", 2), kv_int(kv, "M", 3));
    }
    throw std::invalid_argument("unknown family '" + config + "'");
}

std::vector<FamilyInfo> list_families() {
    return {
        {"purenoise:M=3,d=1", "uniform X, posterior 1/M everywhere; L* = 1 - 1/M"},
        {"noiseless:d=2", "deterministic labels split on x1 = 1/2; L* = 0"},
        {"margin:beta=1.0", "1-D two-class family with margin exponent alpha = 1/beta"},
        {"linear1d", "P_1(x) = x on Uniform[0,1]; L* = 1/4"},
        {"simplex:d=2,M=3", "softmax of squared anchor distances; L* by quadrature"},
    };
}

// ---------------------------------------------------------------------------
// Condition checks

bool MarginCheckReport::any_flagged() const {
    return std::any_of(rows.begin(), rows.end(), [](const MarginCheckRow& r) { return r.flagged; });
}

MarginCheckReport check_margin(const DistributionSpec& spec, std::span<const double> t_grid,
                               std::size_t n_mc, std::uint64_t seed,
                               std::optional<MarginParams> override_params) {
    const auto params = override_params ? override_params : spec.margin();
    if (!params) throw std::invalid_argument("check_margin: margin parameters are not declared");
    for (const double t : t_grid)
        if (!(t > 0.0) || t > 1.0) throw std::invalid_argument("check_margin: t grid must lie in (0,1]");

    Rng rng = derive_rng(seed, {0x6d67u});
    std::vector<double> gaps(n_mc);
    std::vector<double> p;
    for (std::size_t i = 0; i < n_mc; ++i) {
        p = spec.posterior(spec.sample_x(rng));
        std::nth_element(p.begin(), p.begin() + 1, p.end(), std::greater<double>());
        gaps[i] = p[0] - p[1];
    }
    MarginCheckReport report;
    report.alpha = params->alpha;
    report.c_star = params->c_star;
    for (const double t : t_grid) {
        const auto count = static_cast<double>(
            std::count_if(gaps.begin(), gaps.end(), [&](double g) { return g <= t; }));
        const double cdf = count / static_cast<double>(n_mc);
        const double se = std::sqrt(std::max(cdf * (1.0 - cdf), 0.0) / static_cast<double>(n_mc));
        const double bound = params->c_star * std::pow(t, params->alpha);
        report.rows.push_back({t, cdf, se, bound, cdf > bound + 3.0 * se});
    }
    return report;
}

LipschitzCheckReport check_generalized_lipschitz(const DistributionSpec& spec, const MetricSpace& space,
                                                 std::size_t n_pairs, std::size_t n_ball_mc,
                                                 std::uint64_t seed,
                                                 std::optional<LipschitzParams> override_params) {
    const auto params = override_params ? override_params : spec.lipschitz();
    if (!params) throw std::invalid_argument("check_generalized_lipschitz: h is not declared");

    Rng pair_rng = derive_rng(seed, {0x6c70u, 1});
    Rng ball_rng = derive_rng(seed, {0x6c70u, 2});
    LipschitzCheckReport report;
    report.pairs_checked = n_pairs;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        const Point x = spec.sample_x(pair_rng);
        const Point z = spec.sample_x(pair_rng);
        const double dist = space.distance(x, z);

        std::size_t inside = 0;
        for (std::size_t w = 0; w < n_ball_mc; ++w)
            if (space.distance(x, spec.sample_x(ball_rng)) <= dist) ++inside;
        const double mass = static_cast<double>(inside) / static_cast<double>(n_ball_mc);
        const double se = std::max(std::sqrt(std::max(mass * (1.0 - mass), 0.0) /
                                             static_cast<double>(n_ball_mc)),
                                   1.0 / static_cast<double>(n_ball_mc));
        const double upper = std::min(1.0, mass + 3.0 * se);

        const auto px = spec.posterior(x);
        const auto pz = spec.posterior(z);
        double gap = 0.0;
        for (std::size_t j = 0; j < px.size(); ++j) gap = std::max(gap, std::abs(px[j] - pz[j]));

        const double threshold = params->h(upper);
        if (gap > threshold + 1e-12)
            report.violations.push_back({x, z, dist, mass, gap, threshold});
    }
    return report;
}

} // namespace metricproto
