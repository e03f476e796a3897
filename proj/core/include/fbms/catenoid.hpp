#pragma once

#include "fbms/mesh.hpp"
#include "fbms/tolerances.hpp"

namespace fbms {

// Revolution family K_{a,h}: graph of r_a(z) = cosh(az)/cosh(ah) * sqrt(1-h^2)
// on [-h, h], rotated about the x3-axis.

// Profile radius; throws for |z| > h.
double profile(double a, double h, double z);
// dr/dz, numerically stable for large a.
double profile_slope(double a, double h, double z);

// F(a,h) = a^-2 cosh^2(ah) + h^2. K_{a,h} is minimal iff F = 1.
double balance_F(double a, double h);

// Mean curvature with respect to the outward normal; sign matches 1 - F(a,h).
double mean_curvature(double a, double h, double z);

// 2*pi Int r sqrt(r'^2+1) dz by adaptive quadrature.
double area_quadrature(double a, double h, const Tolerances& tol = default_tolerances());

// f(s) = 2*pi (s + sinh s cosh s) / (cosh^2 s + s^2): the area of the minimal
// branch member with s = a h. Evaluated so that f(s) < 2*pi holds exactly in
// floating point for s >= 1.
double closed_form_area(double s);
double closed_form_area_derivative(double s);

struct CriticalCatenoid {
    double s = 0.0; // a* h*
    double a = 0.0;
    double h = 0.0;
    double residual_balance = 0.0;  // |s tanh s - 1|
    double residual_minimal = 0.0;  // |F(a,h) - 1|
    int iterations = 0;
};

// Solve s tanh s = 1 on [1, 1.5], then a* = sqrt(cosh^2 s + s^2), h* = s/a*.
CriticalCatenoid solve_critical_catenoid();

struct OptimalSweepoutSpec {
    double h0 = 0.15;
    double smoothing_width = 0.02;
};

// alpha(h): a*h*/h for h >= h0+width, constant a*h*/h0 below h0, C^inf
// monotone blend between. alpha(h*) = a* exactly. Throws if h0 >= h*.
double optimal_alpha(double h, const OptimalSweepoutSpec& spec = {});

// Annulus mesh of K_{a,h} about a coordinate axis (0,1,2), prismatic orbit
// labels attached, boundary circles flagged on the sphere.
TriMesh revolve_to_mesh(double a, double h, int radial_segments, int axial_segments,
                        int axis = 2);

} // namespace fbms
