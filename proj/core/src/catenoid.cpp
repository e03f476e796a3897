#include "fbms/catenoid.hpp"

#include <cmath>
#include <stdexcept>

#include "fbms/equivariant_builder.hpp"
#include "fbms/numerics.hpp"

namespace fbms {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_params(double a, double h) {
    if (!(a > 0.0)) throw std::invalid_argument("profile: a must be positive");
    if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("profile: h must lie in (0,1)");
}

// cosh(az)/cosh(ah) without overflow: exp(a(|z|-h)) (1+e^{-2a|z|})/(1+e^{-2ah}).
double cosh_ratio(double a, double z, double h) {
    const double az = std::abs(a * z), ah = a * h;
    return std::exp(az - ah) * (1.0 + std::exp(-2.0 * az)) / (1.0 + std::exp(-2.0 * ah));
}

// sinh(az)/cosh(ah), signed.
double sinh_ratio(double a, double z, double h) {
    const double az = std::abs(a * z), ah = a * h;
    const double mag = std::exp(az - ah) * (1.0 - std::exp(-2.0 * az)) / (1.0 + std::exp(-2.0 * ah));
    return z < 0.0 ? -mag : mag;
}

double sech(double x) {
    const double ax = std::abs(x);
    return 2.0 * std::exp(-ax) / (1.0 + std::exp(-2.0 * ax));
}

} // namespace

double profile(double a, double h, double z) {
    check_params(a, h);
    if (std::abs(z) > h * (1.0 + 1e-12))
        throw std::invalid_argument("profile: z outside [-h, h]");
    return std::sqrt(1.0 - h * h) * cosh_ratio(a, z, h);
}

double profile_slope(double a, double h, double z) {
    check_params(a, h);
    if (std::abs(z) > h * (1.0 + 1e-12))
        throw std::invalid_argument("profile_slope: z outside [-h, h]");
    return std::sqrt(1.0 - h * h) * a * sinh_ratio(a, z, h);
}

double balance_F(double a, double h) {
    if (!(a > 0.0)) throw std::invalid_argument("balance_F: a must be positive");
    const double c = std::cosh(a * h);
    return (c / a) * (c / a) + h * h;
}

double mean_curvature(double a, double h, double z) {
    const double r = profile(a, h, z);
    const double rp = profile_slope(a, h, z);
    const double s = sech(a * h);
    const double numerator = a * a * (1.0 - h * h) * s * s - 1.0;
    return numerator / (std::pow(rp * rp + 1.0, 1.5) * r);
}

double area_quadrature(double a, double h, const Tolerances& tol) {
    check_params(a, h);
    auto integrand = [&](double z) {
        const double r = profile(a, h, z);
        const double rp = profile_slope(a, h, z);
        return r * std::sqrt(rp * rp + 1.0);
    };
    // Even in z; integrate the half interval.
    return 4.0 * kPi * integrate_or_throw(integrand, 0.0, h, tol.quadrature_rel);
}

double closed_form_area(double s) {
    if (s < 0.0) throw std::invalid_argument("closed_form_area: s must be >= 0");
    if (s == 0.0) return 0.0;
    const double c = std::cosh(s);
    const double d = c * c + s * s;
    // cosh^2 + s^2 - s - sinh*cosh = cosh * e^{-s} + s(s-1), which stays
    // positive for s >= 1, so f < 2*pi survives rounding.
    const double n = c * std::exp(-s) + s * (s - 1.0);
    return 2.0 * kPi * (1.0 - n / d);
}

double closed_form_area_derivative(double s) {
    const double c = std::cosh(s), sh = std::sinh(s);
    const double q = (c - s * sh) / (c * c + s * s);
    return 4.0 * kPi * q * q;
}

CriticalCatenoid solve_critical_catenoid() {
    auto f = [](double s) { return s * std::tanh(s) - 1.0; };
    auto df = [](double s) {
        const double t = std::tanh(s);
        const double se = sech(s);
        return t + s * se * se;
    };
    const RootResult root = newton_bisect(f, df, 1.0, 1.5, 1e-15);
    CriticalCatenoid cc;
    cc.s = root.x;
    cc.iterations = root.iterations;
    cc.a = std::sqrt(std::cosh(cc.s) * std::cosh(cc.s) + cc.s * cc.s);
    cc.h = cc.s / cc.a;
    cc.residual_balance = std::abs(cc.s * std::tanh(cc.s) - 1.0);
    cc.residual_minimal = std::abs(balance_F(cc.a, cc.h) - 1.0);
    return cc;
}

double optimal_alpha(double h, const OptimalSweepoutSpec& spec) {
    static const CriticalCatenoid cc = solve_critical_catenoid();
    if (!(spec.h0 > 0.0) || spec.h0 >= cc.h)
        throw std::invalid_argument("optimal_alpha: h0 must lie in (0, h*)");
    if (!(spec.smoothing_width > 0.0) || spec.h0 + spec.smoothing_width >= cc.h)
        throw std::invalid_argument("optimal_alpha: smoothing window must end below h*");
    if (h < 0.0 || h > 1.0) throw std::invalid_argument("optimal_alpha: h outside [0,1]");
    double denom;
    if (h <= spec.h0) {
        denom = spec.h0;
    } else if (h >= spec.h0 + spec.smoothing_width) {
        denom = h;
    } else {
        const double x = (h - spec.h0) / spec.smoothing_width;
        denom = spec.h0 + (h - spec.h0) * smooth_step(x);
    }
    return cc.s / denom;
}

TriMesh revolve_to_mesh(double a, double h, int radial_segments, int axial_segments, int axis) {
    check_params(a, h);
    if (radial_segments < 8 || radial_segments % 4 != 0)
        throw std::invalid_argument("radial_segments must be >= 8 and divisible by 4");
    if (axial_segments < 2 || axial_segments % 2 != 0)
        throw std::invalid_argument("axial_segments must be >= 2 and even");
    if (axis < 0 || axis > 2) throw std::invalid_argument("axis must be 0, 1 or 2");

    const int cols = radial_segments / 4;
    const int rows = axial_segments / 2;
    FundamentalPatch patch;
    auto vid = [&](int i, int j) { return j * (cols + 1) + i; };
    for (int j = 0; j <= rows; ++j) {
        const double z = h * j / rows;
        const double r = profile(a, h, z);
        for (int i = 0; i <= cols; ++i) {
            const double theta = (0.5 * kPi) * i / cols;
            double x = r * std::cos(theta);
            double y = r * std::sin(theta);
            if (i == 0) y = 0.0;
            if (i == cols) x = 0.0;
            patch.vertices.push_back(Vec3(x, y, z));
            patch.on_sphere.push_back(j == rows ? 1 : 0);
        }
    }
    for (int j = 0; j < rows; ++j) {
        for (int i = 0; i < cols; ++i) {
            const int p = vid(i, j), q = vid(i + 1, j), rr = vid(i + 1, j + 1), s = vid(i, j + 1);
            patch.triangles.push_back({p, q, rr});
            patch.triangles.push_back({p, rr, s});
        }
    }
    TriMesh mesh = reflect_signs(patch, 0b111);
    if (axis == 2) return mesh;
    Eigen::Matrix3d perm = Eigen::Matrix3d::Zero();
    if (axis == 0) {
        // e3 -> e1, e1 -> e2, e2 -> e3
        perm(0, 2) = 1.0;
        perm(1, 0) = 1.0;
        perm(2, 1) = 1.0;
    } else {
        // e3 -> e2, e2 -> e1, e1 -> e3
        perm(1, 2) = 1.0;
        perm(0, 1) = 1.0;
        perm(2, 0) = 1.0;
    }
    return transform(mesh, perm);
}

} // namespace fbms
