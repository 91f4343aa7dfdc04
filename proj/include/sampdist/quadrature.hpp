#pragma once

// Adaptive Gauss-Kronrod (G7,K15) quadrature used by the general-p
// estimator paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace sampdist {

namespace detail {

// G7,K15 nodes (abscissa, Gauss weight, Kronrod weight).
inline constexpr double kGK15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.000000000000000, 0.204432940075298},
    {0.586087235467691, 0.000000000000000, 0.169004726639267},
    {0.864864423359769, 0.000000000000000, 0.104790010322250},
    {0.991455371120813, 0.000000000000000, 0.022935322010529},
};

template <class F>
double gk15(const F& f, double a, double b, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double y0 = f(mid);
    double g7 = kGK15[0][1] * y0;
    double k15 = kGK15[0][2] * y0;
    for (int i = 1; i < 8; ++i) {
        double dx = half * kGK15[i][0];
        double y = f(mid + dx) + f(mid - dx);
        g7 += kGK15[i][1] * y;
        k15 += kGK15[i][2] * y;
    }
    g7 *= half;
    k15 *= half;
    err = std::abs(g7 - k15);
    return k15;
}

} // namespace detail

// Adaptive bisection on an explicit interval stack.
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-12, double rel_tol = 1e-11) {
    if (!(b > a)) return 0.0;
    struct Iv { double a, b; };
    std::vector<Iv> stack{{a, b}};
    stack.reserve(64);
    double sum = 0.0;
    int evals = 0;
    while (!stack.empty()) {
        Iv iv = stack.back();
        stack.pop_back();
        double err = 0.0;
        double s = detail::gk15(f, iv.a, iv.b, err);
        ++evals;
        if (err <= abs_tol || err <= rel_tol * std::abs(s) || (iv.b - iv.a) < 1e-15 * (b - a) ||
            evals > 20000) {
            sum += s;
            continue;
        }
        double mid = 0.5 * (iv.a + iv.b);
        stack.push_back({iv.a, mid});
        stack.push_back({mid, iv.b});
    }
    return sum;
}

// Integrates f over [lo, hi] split at the interior points of `breaks`
// (sorted, clamped); the integrand may kink at those points.
template <class F>
double integrate_pieces(const F& f, double lo, double hi, std::vector<double> breaks,
                        double abs_tol = 1e-12, double rel_tol = 1e-11) {
    if (!(hi > lo)) return 0.0;
    breaks.push_back(lo);
    breaks.push_back(hi);
    std::sort(breaks.begin(), breaks.end());
    double sum = 0.0;
    double prev = lo;
    for (double t : breaks) {
        if (t <= prev || t > hi) continue;
        if (t > lo) {
            sum += integrate(f, prev, std::min(t, hi), abs_tol, rel_tol);
            prev = std::min(t, hi);
        }
    }
    return sum;
}

} // namespace sampdist
