#include "metricproto/decomposition.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "metricproto/neighbors.hpp"

namespace metricproto {

int FiniteSpec::bayes_label(std::size_t s) const {
    const auto& row = posterior[s];
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
        if (row[j] > row[best]) best = j;
    return static_cast<int>(best) + 1;
}

Rational FiniteSpec::delta_star(std::size_t s, int label) const {
    return posterior[s][static_cast<std::size_t>(bayes_label(s) - 1)] -
           posterior[s][static_cast<std::size_t>(label - 1)];
}

Rational FiniteSpec::bayes_risk() const {
    Rational risk = 0;
    for (std::size_t s = 0; s < support_size(); ++s)
        risk += marginal[s] * (Rational(1) - posterior[s][static_cast<std::size_t>(bayes_label(s) - 1)]);
    return risk;
}

void FiniteSpec::validate() const {
    if (!space) throw std::invalid_argument("finite spec: missing table metric");
    if (support_size() == 0 || support_size() > 8)
        throw std::invalid_argument("finite spec: support size must be in [1, 8]");
    if (space->catalog_size() < support_size())
        throw std::invalid_argument("finite spec: catalog smaller than support");
    if (num_classes < 2 || num_classes > 4)
        throw std::invalid_argument("finite spec: class count must be in [2, 4]");
    Rational total = 0;
    for (const auto& mu : marginal) {
        if (mu < 0) throw std::invalid_argument("finite spec: negative marginal mass");
        total += mu;
    }
    if (total != 1) throw std::invalid_argument("finite spec: marginal does not sum to 1");
    if (posterior.size() != support_size())
        throw std::invalid_argument("finite spec: posterior table size mismatch");
    for (const auto& row : posterior) {
        if (row.size() != static_cast<std::size_t>(num_classes))
            throw std::invalid_argument("finite spec: posterior row size mismatch");
        Rational sum = 0;
        for (const auto& p : row) {
            if (p < 0) throw std::invalid_argument("finite spec: negative posterior");
            sum += p;
        }
        if (sum != 1) throw std::invalid_argument("finite spec: posterior row does not sum to 1");
    }
}

// ---------------------------------------------------------------------------
// Enumerable plug-in rules

namespace {

int argmax_rational(std::span<const Rational> row) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
        if (row[j] > row[best]) best = j;
    return static_cast<int>(best) + 1;
}

// Cell of a catalog point among nuclei given by catalog ids: nearest nucleus,
// lowest nucleus index on ties.
std::size_t cell_of(const TableMetric& space, std::span<const int> nucleus_ids, int point_id) {
    std::size_t best = 0;
    double best_d = space.table()[static_cast<std::size_t>(point_id)][static_cast<std::size_t>(nucleus_ids[0])];
    for (std::size_t c = 1; c < nucleus_ids.size(); ++c) {
        const double d =
            space.table()[static_cast<std::size_t>(point_id)][static_cast<std::size_t>(nucleus_ids[c])];
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

class ProtoNNEnumerable final : public EnumerablePlugin {
public:
    ProtoNNEnumerable(const FiniteSpec& spec, std::span<const int> train_ids,
                      std::span<const int> nucleus_ids)
        : num_classes_(spec.num_classes), cells_(nucleus_ids.size()) {
        for (const int id : train_ids)
            train_cell_.push_back(cell_of(*spec.space, nucleus_ids, id));
        for (std::size_t s = 0; s < spec.support_size(); ++s)
            support_cell_.push_back(cell_of(*spec.space, nucleus_ids, static_cast<int>(s)));
    }
    std::string name() const override { return "proto_nn"; }
    void estimates(std::span<const int> labels,
                   std::vector<std::vector<Rational>>& out) const override {
        std::vector<std::vector<int>> counts(cells_, std::vector<int>(static_cast<std::size_t>(num_classes_), 0));
        std::vector<int> totals(cells_, 0);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            ++counts[train_cell_[i]][static_cast<std::size_t>(labels[i] - 1)];
            ++totals[train_cell_[i]];
        }
        out.assign(support_cell_.size(), std::vector<Rational>(static_cast<std::size_t>(num_classes_), 0));
        for (std::size_t s = 0; s < support_cell_.size(); ++s) {
            const std::size_t cell = support_cell_[s];
            if (totals[cell] == 0) continue;  // 0/0 = 0
            for (int j = 0; j < num_classes_; ++j)
                out[s][static_cast<std::size_t>(j)] =
                    Rational(counts[cell][static_cast<std::size_t>(j)], totals[cell]);
        }
    }

private:
    int num_classes_;
    std::size_t cells_;
    std::vector<std::size_t> train_cell_;
    std::vector<std::size_t> support_cell_;
};

class KnnEnumerable final : public EnumerablePlugin {
public:
    KnnEnumerable(const FiniteSpec& spec, std::span<const int> train_ids, int k)
        : num_classes_(spec.num_classes), k_(k) {
        if (k < 1 || static_cast<std::size_t>(k) > train_ids.size())
            throw std::invalid_argument("enumerable knn: k out of range");
        std::vector<Point> train_points;
        for (const int id : train_ids) train_points.push_back(Point::cat(id));
        for (std::size_t s = 0; s < spec.support_size(); ++s) {
            const NeighborList nl = k_nearest(*spec.space, train_points,
                                              Point::cat(static_cast<int>(s)), static_cast<std::size_t>(k));
            std::vector<std::size_t> ids;
            for (const auto& nb : nl.entries) ids.push_back(nb.index);
            neighbor_sets_.push_back(std::move(ids));
        }
    }
    std::string name() const override { return "knn"; }
    void estimates(std::span<const int> labels,
                   std::vector<std::vector<Rational>>& out) const override {
        out.assign(neighbor_sets_.size(), std::vector<Rational>(static_cast<std::size_t>(num_classes_), 0));
        for (std::size_t s = 0; s < neighbor_sets_.size(); ++s) {
            std::vector<int> counts(static_cast<std::size_t>(num_classes_), 0);
            for (const std::size_t i : neighbor_sets_[s]) ++counts[static_cast<std::size_t>(labels[i] - 1)];
            for (int j = 0; j < num_classes_; ++j)
                out[s][static_cast<std::size_t>(j)] = Rational(counts[static_cast<std::size_t>(j)], k_);
        }
    }

private:
    int num_classes_;
    int k_;
    std::vector<std::vector<std::size_t>> neighbor_sets_;
};

class ExactEnumerable final : public EnumerablePlugin {
public:
    explicit ExactEnumerable(const FiniteSpec& spec) : posterior_(spec.posterior) {}
    std::string name() const override { return "exact_posteriors"; }
    void estimates(std::span<const int>, std::vector<std::vector<Rational>>& out) const override {
        out = posterior_;
    }

private:
    std::vector<std::vector<Rational>> posterior_;
};

} // namespace

std::unique_ptr<EnumerablePlugin> make_enumerable_proto_nn(const FiniteSpec& spec,
                                                           std::span<const int> train_ids,
                                                           std::span<const int> nucleus_ids) {
    if (nucleus_ids.empty()) throw std::invalid_argument("enumerable proto_nn: empty nucleus list");
    return std::make_unique<ProtoNNEnumerable>(spec, train_ids, nucleus_ids);
}

std::unique_ptr<EnumerablePlugin> make_enumerable_knn(const FiniteSpec& spec,
                                                      std::span<const int> train_ids, int k) {
    return std::make_unique<KnnEnumerable>(spec, train_ids, k);
}

std::unique_ptr<EnumerablePlugin> make_enumerable_exact(const FiniteSpec& spec) {
    return std::make_unique<ExactEnumerable>(spec);
}

// ---------------------------------------------------------------------------
// Exhaustive verification

Rational DecompositionReport::bound() const {
    Rational total = 0;
    for (const auto& row : j_terms)
        for (const auto& v : row) total += v;
    return total;
}

DecompositionReport verify_decomposition(const FiniteSpec& spec, const EnumerablePlugin& model,
                                         std::span<const int> train_ids) {
    spec.validate();
    const std::size_t n = train_ids.size();
    const std::size_t big_s = spec.support_size();
    const int big_m = spec.num_classes;
    if (n == 0 || n > 12)
        throw std::invalid_argument("verify_decomposition: training size must be in [1, 12]");
    for (const int id : train_ids)
        if (id < 0 || static_cast<std::size_t>(id) >= big_s)
            throw std::invalid_argument("verify_decomposition: training id outside the support");

    DecompositionReport report;
    report.delta_star.assign(big_s, std::vector<Rational>(static_cast<std::size_t>(big_m)));
    for (std::size_t s = 0; s < big_s; ++s)
        for (int l = 1; l <= big_m; ++l)
            report.delta_star[s][static_cast<std::size_t>(l - 1)] = spec.delta_star(s, l);

    // Thresholds delta*_l(z_s) / M and the per-(s,j,l) deviation-probability
    // accumulators of Eq. J_{n,j,l}.
    std::vector<std::vector<Rational>> threshold(big_s, std::vector<Rational>(static_cast<std::size_t>(big_m)));
    for (std::size_t s = 0; s < big_s; ++s)
        for (int l = 0; l < big_m; ++l)
            threshold[s][static_cast<std::size_t>(l)] = report.delta_star[s][static_cast<std::size_t>(l)] / big_m;

    std::vector<std::vector<std::vector<Rational>>> dev_prob(
        big_s, std::vector<std::vector<Rational>>(static_cast<std::size_t>(big_m),
                                                  std::vector<Rational>(static_cast<std::size_t>(big_m), 0)));
    Rational excess = 0;

    std::vector<int> labels(n, 1);
    std::vector<Rational> weight_stack(n + 1);
    weight_stack[0] = 1;
    std::vector<std::vector<Rational>> est;

    // Depth-first enumeration of all M^n label assignments with incremental
    // probability products.
    std::size_t depth = 0;
    while (true) {
        if (depth == n) {
            const Rational& w = weight_stack[n];
            if (w != 0) {
                model.estimates(labels, est);
                for (std::size_t s = 0; s < big_s; ++s) {
                    const int g_hat = argmax_rational(est[s]);
                    const int g_star = spec.bayes_label(s);
                    excess += w * spec.marginal[s] *
                              (spec.posterior[s][static_cast<std::size_t>(g_star - 1)] -
                               spec.posterior[s][static_cast<std::size_t>(g_hat - 1)]);
                    for (int j = 0; j < big_m; ++j) {
                        Rational dev = est[s][static_cast<std::size_t>(j)] - spec.posterior[s][static_cast<std::size_t>(j)];
                        if (dev < 0) dev = -dev;
                        for (int l = 0; l < big_m; ++l)
                            if (dev >= threshold[s][static_cast<std::size_t>(l)])
                                dev_prob[s][static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] += w;
                    }
                }
            }
            // Backtrack to the next assignment.
            while (depth > 0 && labels[depth - 1] == big_m) {
                labels[depth - 1] = 1;
                --depth;
            }
            if (depth == 0) break;
            ++labels[depth - 1];
            weight_stack[depth] =
                weight_stack[depth - 1] *
                spec.posterior[static_cast<std::size_t>(train_ids[depth - 1])]
                              [static_cast<std::size_t>(labels[depth - 1] - 1)];
            continue;
        }
        weight_stack[depth + 1] =
            weight_stack[depth] * spec.posterior[static_cast<std::size_t>(train_ids[depth])]
                                                [static_cast<std::size_t>(labels[depth] - 1)];
        ++depth;
    }

    report.excess = excess;
    report.j_terms.assign(static_cast<std::size_t>(big_m), std::vector<Rational>(static_cast<std::size_t>(big_m), 0));
    for (int j = 0; j < big_m; ++j)
        for (int l = 0; l < big_m; ++l) {
            Rational term = 0;
            for (std::size_t s = 0; s < big_s; ++s) {
                if (l + 1 == spec.bayes_label(s)) continue;  // indicator l != g*(z_s)
                term += spec.marginal[s] * report.delta_star[s][static_cast<std::size_t>(l)] *
                        dev_prob[s][static_cast<std::size_t>(j)][static_cast<std::size_t>(l)];
            }
            report.j_terms[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] = term;
        }
    return report;
}

// ---------------------------------------------------------------------------
// Random instances

FiniteInstance random_finite_instance(Rng& rng) {
    const std::size_t support = 2 + rng.uniform_below(7);  // 2..8
    const int M = 2 + static_cast<int>(rng.uniform_below(3));  // 2..4
    // Keep M^n enumerable at property-test scale while staying within the
    // documented limits (n <= 12).
    const std::size_t n_cap = M == 2 ? 12 : (M == 3 ? 8 : 6);
    const std::size_t n = 2 + rng.uniform_below(n_cap - 1);  // 2..n_cap

    // Distinct positions on a line give a valid metric table.
    std::vector<int> positions;
    {
        std::vector<int> pool(64);
        std::iota(pool.begin(), pool.end(), 0);
        for (std::size_t s = 0; s < support; ++s) {
            const std::size_t pick = rng.uniform_below(pool.size());
            positions.push_back(pool[pick]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
        }
    }
    std::vector<std::string> symbols;
    std::vector<std::vector<double>> table(support, std::vector<double>(support));
    for (std::size_t i = 0; i < support; ++i) {
        symbols.push_back("z" + std::to_string(i));
        for (std::size_t l = 0; l < support; ++l)
            table[i][l] = std::abs(positions[i] - positions[l]);
    }

    FiniteInstance inst;
    inst.spec.space = std::make_shared<TableMetric>(std::move(symbols), std::move(table));
    inst.spec.num_classes = M;

    std::vector<std::uint64_t> weights(support);
    std::uint64_t total = 0;
    for (auto& w : weights) {
        w = 1 + rng.uniform_below(9);
        total += w;
    }
    for (std::size_t s = 0; s < support; ++s)
        inst.spec.marginal.push_back(Rational(weights[s], total));

    for (std::size_t s = 0; s < support; ++s) {
        std::vector<std::uint64_t> pw(static_cast<std::size_t>(M));
        std::uint64_t psum = 0;
        for (auto& w : pw) {
            w = rng.uniform_below(10);
            psum += w;
        }
        if (psum == 0) {
            pw[0] = 1;
            psum = 1;
        }
        std::vector<Rational> row;
        for (int j = 0; j < M; ++j) row.push_back(Rational(pw[static_cast<std::size_t>(j)], psum));
        inst.spec.posterior.push_back(std::move(row));
    }

    // Training positions drawn from the exact marginal by integer weights.
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t pick = rng.uniform_below(total);
        std::size_t s = 0;
        while (pick >= weights[s]) {
            pick -= weights[s];
            ++s;
        }
        inst.train_ids.push_back(static_cast<int>(s));
    }

    const std::size_t nuclei = 1 + rng.uniform_below(std::min<std::size_t>(3, support));
    for (std::size_t c = 0; c < nuclei; ++c)
        inst.nucleus_ids.push_back(static_cast<int>(rng.uniform_below(support)));
    inst.k = 1 + static_cast<int>(rng.uniform_below(n));
    return inst;
}

} // namespace metricproto
