#include "metricproto/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace metricproto {

namespace {

// 15-point Kronrod nodes/weights on [-1,1] with the embedded 7-point Gauss rule.
constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct GkEval {
    double kronrod;
    double gauss;
};

GkEval gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double k = 0.0, g = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double x = h * kKronrodNodes[i];
        double v;
        if (i == 7) {
            v = f(c);
            k += kKronrodWeights[i] * v;
            g += kGaussWeights[3] * v;
        } else {
            v = f(c - x) + f(c + x);
            k += kKronrodWeights[i] * v;
            if (i % 2 == 1) g += kGaussWeights[i / 2] * v;
        }
    }
    return {k * h, g * h};
}

double integrate_rec(const std::function<double(double)>& f, double a, double b, double tol,
                     int depth) {
    const GkEval e = gk15(f, a, b);
    const double err = std::abs(e.kronrod - e.gauss);
    if (err <= tol || depth >= 48) {
        if (depth >= 48 && err > tol * 16)
            throw std::runtime_error("integrate_adaptive: failed to converge");
        return e.kronrod;
    }
    const double c = 0.5 * (a + b);
    return integrate_rec(f, a, c, 0.5 * tol, depth + 1) + integrate_rec(f, c, b, 0.5 * tol, depth + 1);
}

double halton(std::size_t index, std::size_t base) {
    double f = 1.0, r = 0.0;
    std::size_t i = index;
    while (i > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

constexpr std::size_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

} // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol) {
    if (!(b > a)) return 0.0;
    return integrate_rec(f, a, b, abs_tol, 0);
}

double integrate_box(const std::function<double(const std::vector<double>&)>& f,
                     const std::vector<double>& lo, const std::vector<double>& hi, double abs_tol) {
    const std::size_t d = lo.size();
    if (d == 0 || d > 3) throw std::invalid_argument("integrate_box: dimension must be in [1,3]");
    std::vector<double> x(d);
    std::function<double(std::size_t, double)> level = [&](std::size_t axis, double tol) -> double {
        return integrate_adaptive(
            [&, axis, tol](double v) {
                x[axis] = v;
                if (axis + 1 == d) return f(x);
                return level(axis + 1, tol * 0.1);
            },
            lo[axis], hi[axis], tol);
    };
    return level(0, abs_tol);
}

QmcResult integrate_qmc(const std::function<double(const std::vector<double>&)>& f,
                        const std::vector<double>& lo, const std::vector<double>& hi,
                        std::size_t n_points) {
    const std::size_t d = lo.size();
    if (d > sizeof(kPrimes) / sizeof(kPrimes[0]))
        throw std::invalid_argument("integrate_qmc: dimension too large");
    double volume = 1.0;
    for (std::size_t a = 0; a < d; ++a) volume *= hi[a] - lo[a];
    std::vector<double> x(d);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 1; i <= n_points; ++i) {
        for (std::size_t a = 0; a < d; ++a)
            x[a] = lo[a] + (hi[a] - lo[a]) * halton(i, kPrimes[a]);
        const double v = f(x);
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / static_cast<double>(n_points);
    const double var = std::max(0.0, sum_sq / static_cast<double>(n_points) - mean * mean);
    return {volume * mean, volume * std::sqrt(var / static_cast<double>(n_points))};
}

} // namespace metricproto
