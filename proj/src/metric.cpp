#include "metricproto/metric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "metricproto/rng.hpp"

namespace metricproto {

namespace {

const std::vector<double>& require_vec(const Point& p) {
    const auto* v = p.as_vec();
    if (!v) throw std::invalid_argument("vector metric applied to a non-vector point");
    return *v;
}

[[noreturn]] void io_fail(const std::string& what) {
    throw std::ios_base::failure(what);
}

} // namespace

LpMetric::LpMetric(double p) : p_(p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp metric requires exponent p >= 1");
}

double LpMetric::distance(const Point& a, const Point& b) const {
    const auto& x = require_vec(a);
    const auto& y = require_vec(b);
    if (x.size() != y.size()) throw std::invalid_argument("lp metric: dimension mismatch");
    if (x.size() == 1) return std::abs(x[0] - y[0]);
    if (p_ == 2.0) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - y[i];
            acc += d * d;
        }
        return std::sqrt(acc);
    }
    if (p_ == 1.0) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(x[i] - y[i]);
        return acc;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x[i] - y[i]), p_);
    return std::pow(acc, 1.0 / p_);
}

std::string LpMetric::descriptor() const {
    if (p_ == 2.0) return "euclidean";
    std::ostringstream os;
    os << "lp:" << p_;
    return os.str();
}

double DiscreteMetric::distance(const Point& a, const Point& b) const {
    return same_payload(a, b) ? 0.0 : 1.0;
}

double EditMetric::distance(const Point& a, const Point& b) const {
    const auto* s = a.as_sym();
    const auto* t = b.as_sym();
    if (!s || !t) throw std::invalid_argument("edit metric applied to a non-sequence point");
    const std::size_t n = s->size(), m = t->size();
    std::vector<std::size_t> row(m + 1);
    for (std::size_t j = 0; j <= m; ++j) row[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t subst = diag + ((*s)[i - 1] == (*t)[j - 1] ? 0 : 1);
            diag = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, subst});
        }
    }
    return static_cast<double>(row[m]);
}

TableMetric::TableMetric(std::vector<std::string> symbols, std::vector<std::vector<double>> table)
    : symbols_(std::move(symbols)), table_(std::move(table)) {
    const std::size_t s = symbols_.size();
    if (s == 0) throw std::invalid_argument("table metric: empty catalog");
    if (table_.size() != s) throw std::invalid_argument("table metric: table is not square");
    for (const auto& row : table_)
        if (row.size() != s) throw std::invalid_argument("table metric: table is not square");
    for (std::size_t i = 0; i < s; ++i) {
        if (table_[i][i] != 0.0) throw std::invalid_argument("table metric: nonzero diagonal entry");
        for (std::size_t j = 0; j < s; ++j) {
            if (!(table_[i][j] >= 0.0))
                throw std::invalid_argument("table metric: negative or non-finite entry");
            if (i != j && table_[i][j] == 0.0)
                throw std::invalid_argument("table metric: zero distance between distinct symbols");
            if (table_[i][j] != table_[j][i])
                throw std::invalid_argument("table metric: asymmetric entry");
        }
    }
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j)
            for (std::size_t l = 0; l < s; ++l)
                if (table_[i][j] > table_[i][l] + table_[l][j])
                    throw std::invalid_argument("table metric: triangle inequality violated");
}

double TableMetric::distance(const Point& a, const Point& b) const {
    const auto* i = a.as_cat();
    const auto* j = b.as_cat();
    if (!i || !j) throw std::invalid_argument("table metric applied to a non-catalog point");
    if (*i < 0 || *j < 0 || static_cast<std::size_t>(*i) >= symbols_.size() ||
        static_cast<std::size_t>(*j) >= symbols_.size())
        throw std::invalid_argument("table metric: unknown catalog element");
    return table_[static_cast<std::size_t>(*i)][static_cast<std::size_t>(*j)];
}

std::string TableMetric::descriptor() const {
    return source_path_.empty() ? "table:<inline>" : "table:" + source_path_;
}

Point TableMetric::point_for(const std::string& symbol) const {
    const auto it = std::find(symbols_.begin(), symbols_.end(), symbol);
    if (it == symbols_.end())
        throw std::invalid_argument("table metric: unknown symbol '" + symbol + "'");
    return Point::cat(static_cast<std::int32_t>(it - symbols_.begin()));
}

std::shared_ptr<const TableMetric> TableMetric::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) io_fail("cannot open metric table '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) io_fail("metric table '" + path + "' is empty");

    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string field;
        std::istringstream is(s);
        while (std::getline(is, field, ',')) out.push_back(field);
        return out;
    };

    auto header = split(line);
    if (header.size() < 2) io_fail("metric table '" + path + "': header too short");
    std::vector<std::string> symbols(header.begin() + 1, header.end());

    std::vector<std::vector<double>> table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split(line);
        if (fields.size() != symbols.size() + 1)
            io_fail("metric table '" + path + "': ragged row");
        if (fields[0] != symbols[table.size()])
            io_fail("metric table '" + path + "': row label mismatch");
        std::vector<double> row;
        row.reserve(symbols.size());
        for (std::size_t j = 1; j < fields.size(); ++j) row.push_back(std::stod(fields[j]));
        table.push_back(std::move(row));
    }
    auto metric = std::make_shared<TableMetric>(std::move(symbols), std::move(table));
    metric->set_source_path(path);
    return metric;
}

AugmentedSpace::AugmentedSpace(MetricPtr base, double delta, std::uint64_t rng_seed)
    : base_(std::move(base)), delta_(delta), seed_(rng_seed) {
    if (!base_) throw std::invalid_argument("augment: null base space");
    if (!(delta > 0.0)) throw std::invalid_argument("augment: delta must be positive");
}

double AugmentedSpace::distance(const Point& a, const Point& b) const {
    if (!a.tie_coord || !b.tie_coord)
        throw std::invalid_argument("augmented space: point lacks a tie coordinate");
    return base_->distance(a, b) + delta_ * std::abs(*a.tie_coord - *b.tie_coord);
}

std::string AugmentedSpace::descriptor() const {
    std::ostringstream os;
    os << "augmented(" << base_->descriptor() << ";delta=" << delta_ << ")";
    return os.str();
}

Point AugmentedSpace::attach(Point p, std::uint64_t draw_index) const {
    p.tie_coord = counter_uniform01(seed_, draw_index);
    return p;
}

std::shared_ptr<const AugmentedSpace> augment(MetricPtr base, double delta, std::uint64_t rng_seed) {
    return std::make_shared<AugmentedSpace>(std::move(base), delta, rng_seed);
}

double default_delta(const MetricSpace& base, std::span<const Point> pilot) {
    const std::size_t n = std::min<std::size_t>(pilot.size(), 100);
    std::vector<double> dists;
    dists.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) dists.push_back(base.distance(pilot[i], pilot[j]));
    if (dists.empty()) return 1e-6;
    const std::size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
    const double median = dists[mid];
    return median > 0.0 ? 1e-6 * median : 1e-6;
}

MetricPtr parse_metric(const std::string& config) {
    if (config == "euclidean") return std::make_shared<LpMetric>(2.0);
    if (config == "discrete") return std::make_shared<DiscreteMetric>();
    if (config == "edit") return std::make_shared<EditMetric>();
    if (config.rfind("lp:", 0) == 0) {
        const double p = std::stod(config.substr(3));
        return std::make_shared<LpMetric>(p);
    }
    if (config.rfind("table:", 0) == 0) return TableMetric::load_csv(config.substr(6));
    throw std::invalid_argument("unknown metric '" + config + "'");
}

} // namespace metricproto
