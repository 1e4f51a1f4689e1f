#pragma once

#include <functional>
#include <vector>

namespace metricproto {

/// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b] to the given
/// absolute tolerance. Throws if the recursion cannot converge.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol);

/// Iterated adaptive integration over the axis-aligned box [lo, hi]^d for
/// d <= 3.
double integrate_box(const std::function<double(const std::vector<double>&)>& f,
                     const std::vector<double>& lo, const std::vector<double>& hi, double abs_tol);

/// Quasi-random (Halton) integration over the box with a reported standard
/// error estimate; used for d > 3 where iterated quadrature is impractical.
struct QmcResult {
    double value;
    double error_estimate;
};
QmcResult integrate_qmc(const std::function<double(const std::vector<double>&)>& f,
                        const std::vector<double>& lo, const std::vector<double>& hi,
                        std::size_t n_points);

} // namespace metricproto
