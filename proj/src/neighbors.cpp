#include "metricproto/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace metricproto {

namespace {

inline bool lex_less(const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
}

void check_k(std::size_t k, std::size_t n) {
    if (n == 0) throw std::invalid_argument("k-NN query on an empty dataset");
    if (k < 1 || k > n) throw std::invalid_argument("k out of range [1, n]");
}

} // namespace

NeighborList k_nearest(const MetricSpace& space, std::span<const Point> dataset, const Point& query,
                       std::size_t k) {
    check_k(k, dataset.size());
    std::vector<Neighbor> all;
    all.reserve(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i)
        all.push_back({i, space.distance(query, dataset[i])});
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), lex_less);
    all.resize(k);
    return NeighborList{std::move(all)};
}

// ---------------------------------------------------------------------------
// PivotIndex

PivotIndex::PivotIndex(MetricPtr space, std::vector<Point> dataset)
    : space_(std::move(space)), dataset_(std::move(dataset)) {
    if (!space_) throw std::invalid_argument("PivotIndex: null space");
    if (dataset_.empty()) throw std::invalid_argument("PivotIndex: empty dataset");
    const std::size_t n = dataset_.size();
    const std::size_t target = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));

    pivot_of_.assign(n, -1);
    std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
    std::size_t next = 0;  // greedy far-point sweep seeded at index 0
    while (pivots_.size() < target) {
        const std::size_t p = next;
        pivot_of_[p] = static_cast<std::ptrdiff_t>(pivots_.size());
        pivots_.push_back(p);
        std::vector<double> row(n);
        for (std::size_t i = 0; i < n; ++i) {
            row[i] = space_->distance(dataset_[p], dataset_[i]);
            if (row[i] < min_dist[i]) min_dist[i] = row[i];
        }
        pivot_dist_.push_back(std::move(row));
        if (pivots_.size() == target) break;
        next = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pivot_of_[i] >= 0) continue;
            if (min_dist[i] > best) {
                best = min_dist[i];
                next = i;
            }
        }
    }
}

NeighborList PivotIndex::k_nearest_pruned(const Point& query, std::size_t k) const {
    const std::size_t n = dataset_.size();
    check_k(k, n);

    std::vector<double> dq(pivots_.size());
    for (std::size_t t = 0; t < pivots_.size(); ++t)
        dq[t] = space_->distance(query, dataset_[pivots_[t]]);

    // Max-heap of the k best so far under the (distance, index) order.
    std::vector<Neighbor> heap;
    heap.reserve(k);
    auto heap_cmp = lex_less;  // max-heap: worst candidate on top

    for (std::size_t i = 0; i < n; ++i) {
        if (heap.size() == k) {
            const double tau = heap.front().distance;
            double lb = 0.0;
            bool pruned = false;
            for (std::size_t t = 0; t < pivot_dist_.size(); ++t) {
                const double b = std::abs(dq[t] - pivot_dist_[t][i]);
                if (b > lb) lb = b;
                if (lb > tau) {  // strictly farther than the current k-th best
                    pruned = true;
                    break;
                }
            }
            if (pruned) continue;
        }
        const std::ptrdiff_t slot = pivot_of_[i];
        const double d = slot >= 0 ? dq[static_cast<std::size_t>(slot)]
                                   : space_->distance(query, dataset_[i]);
        const Neighbor cand{i, d};
        if (heap.size() < k) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end(), heap_cmp);
        } else if (lex_less(cand, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), heap_cmp);
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end(), heap_cmp);
        }
    }
    std::sort(heap.begin(), heap.end(), lex_less);
    return NeighborList{std::move(heap)};
}

// ---------------------------------------------------------------------------
// KnnEngine

Neighbor KnnEngine::nearest(const Point& q) const {
    return query(q, 1).entries.front();
}

void KnnEngine::class_counts(const Point& q, std::size_t k, std::span<const int> labels,
                             int num_classes, std::vector<std::int64_t>& out) const {
    out.assign(static_cast<std::size_t>(num_classes), 0);
    const NeighborList nl = query(q, k);
    for (const auto& nb : nl.entries) {
        const int label = labels[nb.index];
        if (label < 1 || label > num_classes)
            throw std::invalid_argument("class_counts: label out of range");
        ++out[static_cast<std::size_t>(label - 1)];
    }
}

namespace {

class BruteKnnEngine final : public KnnEngine {
public:
    BruteKnnEngine(MetricPtr space, std::vector<Point> dataset)
        : space_(std::move(space)), dataset_(std::move(dataset)) {
        if (dataset_.empty()) throw std::invalid_argument("KnnEngine: empty dataset");
    }
    NeighborList query(const Point& q, std::size_t k) const override {
        return k_nearest(*space_, dataset_, q, k);
    }
    std::span<const Point> points() const override { return dataset_; }

private:
    MetricPtr space_;
    std::vector<Point> dataset_;
};

class PivotKnnEngine final : public KnnEngine {
public:
    PivotKnnEngine(MetricPtr space, std::vector<Point> dataset)
        : index_(std::move(space), std::move(dataset)) {}
    NeighborList query(const Point& q, std::size_t k) const override {
        return index_.k_nearest_pruned(q, k);
    }
    std::span<const Point> points() const override { return index_.points(); }

private:
    PivotIndex index_;
};

} // namespace

std::unique_ptr<KnnEngine> KnnEngine::make(MetricPtr space, std::vector<Point> dataset,
                                           std::span<const int> labels, int num_classes) {
    if (!space) throw std::invalid_argument("KnnEngine: null space");
    if (dataset.empty()) throw std::invalid_argument("KnnEngine: empty dataset");
    if (LineKnnEngine::applicable(*space, dataset))
        return std::make_unique<LineKnnEngine>(std::move(space), std::move(dataset), labels, num_classes);
    if (dataset.size() >= 256) return std::make_unique<PivotKnnEngine>(std::move(space), std::move(dataset));
    return std::make_unique<BruteKnnEngine>(std::move(space), std::move(dataset));
}

// ---------------------------------------------------------------------------
// LineKnnEngine

bool LineKnnEngine::applicable(const MetricSpace& space, std::span<const Point> dataset) {
    if (space.kind() != MetricKind::vector_lp) return false;
    for (const auto& p : dataset) {
        const auto* v = p.as_vec();
        if (!v || v->size() != 1 || p.tie_coord) return false;
    }
    return true;
}

LineKnnEngine::LineKnnEngine(MetricPtr space, std::vector<Point> dataset, std::span<const int> labels,
                             int num_classes)
    : space_(std::move(space)), dataset_(std::move(dataset)) {
    if (dataset_.empty()) throw std::invalid_argument("LineKnnEngine: empty dataset");
    if (!applicable(*space_, dataset_))
        throw std::invalid_argument("LineKnnEngine: dataset is not a plain 1-D L_p line");
    const std::size_t n = dataset_.size();
    orig_.resize(n);
    for (std::size_t i = 0; i < n; ++i) orig_[i] = i;
    std::sort(orig_.begin(), orig_.end(), [&](std::size_t a, std::size_t b) {
        const double ca = (*dataset_[a].as_vec())[0], cb = (*dataset_[b].as_vec())[0];
        return ca < cb || (ca == cb && a < b);
    });
    coord_.resize(n);
    for (std::size_t pos = 0; pos < n; ++pos) coord_[pos] = (*dataset_[orig_[pos]].as_vec())[0];

    if (!labels.empty()) {
        if (labels.size() != n) throw std::invalid_argument("LineKnnEngine: labels size mismatch");
        if (num_classes < 1) throw std::invalid_argument("LineKnnEngine: bad class count");
        sorted_labels_.resize(n);
        prefix_.assign(static_cast<std::size_t>(num_classes), std::vector<std::int64_t>(n + 1, 0));
        for (std::size_t pos = 0; pos < n; ++pos) {
            const int label = labels[orig_[pos]];
            if (label < 1 || label > num_classes)
                throw std::invalid_argument("LineKnnEngine: label out of range");
            sorted_labels_[pos] = label;
            for (int j = 0; j < num_classes; ++j)
                prefix_[static_cast<std::size_t>(j)][pos + 1] =
                    prefix_[static_cast<std::size_t>(j)][pos] + (label == j + 1 ? 1 : 0);
        }
    }
}

double LineKnnEngine::query_coord(const Point& q) const {
    const auto* v = q.as_vec();
    if (!v || v->size() != 1) throw std::invalid_argument("LineKnnEngine: query is not a 1-D vector");
    return (*v)[0];
}

LineKnnEngine::Selection LineKnnEngine::select(double x, std::size_t k) const {
    const std::size_t n = coord_.size();
    check_k(k, n);
    const std::size_t j = static_cast<std::size_t>(
        std::lower_bound(coord_.begin(), coord_.end(), x) - coord_.begin());
    const std::size_t left_len = j, right_len = n - j;

    // Distances form two monotone sequences around x:
    //   left:  x - coord[j-1-t], ascending in t
    //   right: coord[j+t] - x,   ascending in t
    auto lval = [&](std::size_t t) { return x - coord_[j - 1 - t]; };
    auto rval = [&](std::size_t t) { return coord_[j + t] - x; };

    // k-th smallest of the merged sequences: binary search on how many come
    // from the left side.
    std::size_t lo = k > right_len ? k - right_len : 0;
    std::size_t hi = std::min(k, left_len);
    while (lo < hi) {
        const std::size_t il = (lo + hi) / 2;
        const std::size_t ir = k - il;
        if (il < left_len && ir > 0 && lval(il) < rval(ir - 1))
            lo = il + 1;
        else
            hi = il;
    }
    const std::size_t il = lo, ir = k - lo;
    double dk = -std::numeric_limits<double>::infinity();
    if (il > 0) dk = std::max(dk, lval(il - 1));
    if (ir > 0) dk = std::max(dk, rval(ir - 1));

    Selection sel;
    sel.kth_distance = dk;
    // Sorted positions with distance strictly below dk.
    const auto pos_range = [&](auto pred_left, auto pred_right) {
        // first left position (ascending pos in [0, j)) where predicate flips
        std::size_t a = 0, b = j;
        while (a < b) {
            const std::size_t mid = (a + b) / 2;
            if (pred_left(x - coord_[mid])) a = mid + 1;
            else b = mid;
        }
        std::size_t c = j, d = n;
        while (c < d) {
            const std::size_t mid = (c + d) / 2;
            if (pred_right(coord_[mid] - x)) c = mid + 1;
            else d = mid;
        }
        return std::pair<std::size_t, std::size_t>{a, c};
    };
    // strict_lo: first pos with x - coord < dk; strict_hi: first pos with coord - x >= dk
    auto [strict_lo, strict_hi] =
        pos_range([&](double d) { return d >= dk; }, [&](double d) { return d < dk; });
    sel.strict_lo = strict_lo;
    sel.strict_hi = strict_hi;

    const std::size_t strict_count = strict_hi - strict_lo;
    if (strict_count < k) {
        // Equal-distance runs adjacent to the strict region; fill by lowest
        // original index, matching brute-force tie breaking.
        auto [eq_lo, eq_hi] =
            pos_range([&](double d) { return d > dk; }, [&](double d) { return d <= dk; });
        std::vector<std::size_t> cand;
        for (std::size_t pos = eq_lo; pos < strict_lo; ++pos) cand.push_back(pos);
        for (std::size_t pos = strict_hi; pos < eq_hi; ++pos) cand.push_back(pos);
        std::sort(cand.begin(), cand.end(),
                  [&](std::size_t a, std::size_t b) { return orig_[a] < orig_[b]; });
        cand.resize(k - strict_count);
        sel.tie_positions = std::move(cand);
    }
    return sel;
}

NeighborList LineKnnEngine::query(const Point& q, std::size_t k) const {
    const double x = query_coord(q);
    const Selection sel = select(x, k);
    std::vector<Neighbor> entries;
    entries.reserve(k);
    for (std::size_t pos = sel.strict_lo; pos < sel.strict_hi; ++pos)
        entries.push_back({orig_[pos], std::abs(x - coord_[pos])});
    for (const std::size_t pos : sel.tie_positions)
        entries.push_back({orig_[pos], sel.kth_distance});
    std::sort(entries.begin(), entries.end(), lex_less);
    return NeighborList{std::move(entries)};
}

Neighbor LineKnnEngine::nearest(const Point& q) const {
    const double x = query_coord(q);
    const Selection sel = select(x, 1);
    if (!sel.tie_positions.empty()) {
        const std::size_t pos = sel.tie_positions.front();
        return {orig_[pos], sel.kth_distance};
    }
    const std::size_t pos = sel.strict_lo;
    return {orig_[pos], std::abs(x - coord_[pos])};
}

void LineKnnEngine::class_counts(const Point& q, std::size_t k, std::span<const int> labels,
                                 int num_classes, std::vector<std::int64_t>& out) const {
    if (prefix_.empty() || static_cast<std::size_t>(num_classes) != prefix_.size()) {
        KnnEngine::class_counts(q, k, labels, num_classes, out);
        return;
    }
    const double x = query_coord(q);
    const Selection sel = select(x, k);
    out.assign(static_cast<std::size_t>(num_classes), 0);
    for (int j = 0; j < num_classes; ++j)
        out[static_cast<std::size_t>(j)] =
            prefix_[static_cast<std::size_t>(j)][sel.strict_hi] -
            prefix_[static_cast<std::size_t>(j)][sel.strict_lo];
    for (const std::size_t pos : sel.tie_positions)
        ++out[static_cast<std::size_t>(sorted_labels_[pos] - 1)];
}

} // namespace metricproto
