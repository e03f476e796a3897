#pragma once

#include <functional>
#include <stdexcept>

namespace fbms {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int subdivisions = 0;
    bool converged = false;
};

// Adaptive Gauss-Kronrod (G7,K15) on [a,b].
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    double rel_tol, double abs_tol = 0.0,
                                    int max_subdivisions = 2000);

// Throws std::runtime_error when the requested tolerance is not reached.
double integrate_or_throw(const std::function<double(double)>& f,
                          double a, double b, double rel_tol);

struct RootResult {
    double x = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

// Newton iteration safeguarded by bisection on a bracketing interval [lo, hi].
// f(lo) and f(hi) must have opposite signs.
RootResult newton_bisect(const std::function<double(double)>& f,
                         const std::function<double(double)>& df,
                         double lo, double hi, double abs_tol = 1e-14,
                         int max_iter = 200);

// C^inf monotone step: 0 for x <= 0, 1 for x >= 1.
double smooth_step(double x);

// Polynomial smoothstep 3x^2-2x^3 clamped to [0,1].
double smoothstep3(double x);

// Identity for x <= 0.7*cap, then a C^1 monotone saturation below cap.
double soft_cap(double x, double cap);

// Central finite difference with step h.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

} // namespace fbms
