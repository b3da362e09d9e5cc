#pragma once

#include <functional>

namespace mixls::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;     // estimated absolute error
    bool converged = false;
    int intervals = 0;      // subintervals used
};

// Adaptive Gauss-Kronrod (G7,K15) on [a, b] with absolute tolerance.
// Worst-error-first subdivision; never evaluates the endpoints.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, int max_intervals = 4000);

// Integral over the whole real line via the map x = t / (1 - t^2).
// Integrable endpoint singularities (log-type) are handled by subdivision.
Result integrate_real_line(const std::function<double(double)>& f,
                           double abs_tol, int max_intervals = 8000);

// Integral over [a, +inf) via x = a + t / (1 - t), t in [0, 1).
Result integrate_right_tail(const std::function<double(double)>& f, double a,
                            double abs_tol, int max_intervals = 8000);

}  // namespace mixls::quad
