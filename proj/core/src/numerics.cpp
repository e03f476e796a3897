#include "fbms/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace fbms {

namespace {

// Gauss 7 / Kronrod 15 nodes and weights on [-1,1].
constexpr double kKronrodNodes[8] = {
    0.000000000000000000000000000000000e+00,
    2.077849550078984676006894037732449e-01,
    4.058451513773971669066064120769615e-01,
    5.860872354676911302941448382587296e-01,
    7.415311855993944398638647732807884e-01,
    8.648644233597690727897127886409262e-01,
    9.491079123427585245261896840478513e-01,
    9.914553711208126392068546975263285e-01};

constexpr double kKronrodWeights[8] = {
    2.094821410847278280129991748917143e-01,
    2.044329400752988924141619992346491e-01,
    1.903505780647854099132564024210137e-01,
    1.690047266392679028265834265985503e-01,
    1.406532597155259187451895905102379e-01,
    1.047900103222501838398763225415180e-01,
    6.309209262997855329070066318920429e-02,
    2.293532201052922496373200805896959e-02};

constexpr double kGaussWeights[4] = {
    4.179591836734693877551020408163265e-01,
    3.818300505051189449503697754889751e-01,
    2.797053914892766679014677714237796e-01,
    1.294849661688696932706114326790820e-01};

struct Panel {
    double a, b, value, err;
    bool operator<(const Panel& o) const { return err < o.err; }
};

Panel evaluate_panel(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(c);
    double kron = kKronrodWeights[0] * fc;
    double gauss = kGaussWeights[0] * fc;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kKronrodNodes[i];
        const double fsum = f(c - dx) + f(c + dx);
        kron += kKronrodWeights[i] * fsum;
        if (i % 2 == 0) gauss += kGaussWeights[i / 2] * fsum;
    }
    kron *= half;
    gauss *= half;
    return {a, b, kron, std::abs(kron - gauss)};
}

} // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    double rel_tol, double abs_tol,
                                    int max_subdivisions) {
    QuadratureResult res;
    if (a == b) {
        res.converged = true;
        return res;
    }
    std::priority_queue<Panel> queue;
    Panel first = evaluate_panel(f, a, b);
    double total = first.value;
    double total_err = first.err;
    queue.push(first);
    int splits = 0;
    auto tol = [&](double t) { return std::max(abs_tol, rel_tol * std::abs(t)); };
    while (total_err > tol(total) && splits < max_subdivisions) {
        Panel worst = queue.top();
        queue.pop();
        const double m = 0.5 * (worst.a + worst.b);
        Panel left = evaluate_panel(f, worst.a, m);
        Panel right = evaluate_panel(f, m, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        queue.push(left);
        queue.push(right);
        ++splits;
    }
    res.value = total;
    res.error_estimate = total_err;
    res.subdivisions = splits;
    res.converged = total_err <= tol(total);
    return res;
}

double integrate_or_throw(const std::function<double(double)>& f,
                          double a, double b, double rel_tol) {
    QuadratureResult r = integrate_adaptive(f, a, b, rel_tol);
    if (!r.converged) {
        throw std::runtime_error("quadrature did not converge; achieved error " +
                                 std::to_string(r.error_estimate));
    }
    return r.value;
}

RootResult newton_bisect(const std::function<double(double)>& f,
                         const std::function<double(double)>& df,
                         double lo, double hi, double abs_tol, int max_iter) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return {lo, 0.0, 0};
    if (fhi == 0.0) return {hi, 0.0, 0};
    if (flo * fhi > 0.0) throw std::invalid_argument("newton_bisect: root not bracketed");
    double x = 0.5 * (lo + hi);
    double fx = f(x);
    int it = 0;
    for (; it < max_iter; ++it) {
        if (std::abs(fx) == 0.0 || hi - lo < abs_tol) break;
        // Maintain the bracket.
        if (flo * fx < 0.0) {
            hi = x;
            fhi = fx;
        } else {
            lo = x;
            flo = fx;
        }
        const double d = df(x);
        double xn = (d != 0.0) ? x - fx / d : lo;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) < 0.25 * abs_tol && hi - lo < 4.0 * abs_tol) {
            x = xn;
            fx = f(x);
            break;
        }
        x = xn;
        fx = f(x);
    }
    return {x, std::abs(fx), it};
}

double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x);
    const double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

double smoothstep3(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
}

double soft_cap(double x, double cap) {
    const double knee = 0.7 * cap;
    if (x <= knee) return x;
    const double span = cap - knee;
    return knee + span * std::tanh((x - knee) / span);
}

} // namespace fbms
