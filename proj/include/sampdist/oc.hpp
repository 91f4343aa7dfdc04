#pragma once

// Optimally-competitive estimator for coordinated samples with equal
// thresholds and max(v) <= tau.
//
// Normalization: outcomes are reduced to x = (upper bound on min)/max for
// partially revealed keys and rho = min/max for fully revealed keys.  The
// table stores a step function g on a geometric grid over x; the estimate is
//   partial outcome:  max^(p-1) * tau * g(x)
//   full outcome:     max^(p-1) * tau * h(rho)/rho,
//                     h(rho) = (1-rho)^p - int_rho^1 g
// which is exactly unbiased for every data vector by construction.
//
// The build sweeps x downward keeping the competitive-ratio constraint
//   h(x)^2/x + int_x^1 g^2  <=  c * OPT(x)
// tight at every grid point (OPT is the v-optimal expectation of the
// square, scale-free for max <= tau), and binary-searches the smallest
// feasible c.

#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "est_coordinated.hpp"

namespace sampdist {

struct OCTable {
    double p = 1.0;
    int resolution = 0;     // number of grid points
    double x_min = 1e-4;
    double c = 0.0;         // achieved worst-case ratio
    std::vector<double> x;  // descending grid, x[0] = 1
    std::vector<double> g;  // cell values, g[j] on (x[j+1], x[j]]
    double g_tail = 0.0;    // constant value on (0, x_min]

    // int_t^1 g, exact for the stored step function.
    double integral_g(double t) const {
        double s = 0.0;
        for (std::size_t j = 0; j + 1 < x.size(); ++j) {
            if (t >= x[j]) return s;
            s += g[j] * (x[j] - std::max(t, x[j + 1]));
            if (t >= x[j + 1]) return s;
        }
        s += g_tail * (x_min - std::max(t, 0.0));
        return s;
    }

    double integral_g_sq(double t) const {
        double s = 0.0;
        for (std::size_t j = 0; j + 1 < x.size(); ++j) {
            if (t >= x[j]) return s;
            s += g[j] * g[j] * (x[j] - std::max(t, x[j + 1]));
            if (t >= x[j + 1]) return s;
        }
        s += g_tail * g_tail * (x_min - std::max(t, 0.0));
        return s;
    }

    double deficit(double rho) const { return std::pow(1.0 - rho, p) - integral_g(rho); }

    double g_at(double xq) const {
        if (xq <= x_min) return g_tail;
        for (std::size_t j = 0; j + 1 < x.size(); ++j)
            if (xq > x[j + 1]) return g[j];
        return g_tail;
    }

    // E[est^2] for normalized data min/max = rho (max = tau = 1).
    double expected_square_normalized(double rho) const {
        double h = deficit(rho);
        double full = rho > 0.0 ? h * h / rho : 0.0;
        return full + integral_g_sq(rho);
    }
};

namespace detail {

struct OCSweep {
    bool ok = false;
    std::vector<double> g;
    double g_tail = 0.0;
};

inline OCSweep oc_sweep(double c, double p, const std::vector<double>& xs,
                        const std::vector<double>& opt) {
    const std::size_t n = xs.size();
    const double step = std::log(xs.front() / xs.back()) / static_cast<double>(n - 1);
    const double onset_tol = std::max(1e-9, 10.0 * step * step);
    OCSweep out;
    out.g.assign(n - 1, 0.0);
    double G1 = 0.0, G2 = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double x1 = xs[j + 1];
        const double dx = xs[j] - xs[j + 1];
        double A = std::pow(1.0 - x1, p) - G1;
        if (A < -1e-10) return out;
        A = std::max(A, 0.0);
        const double cD = c * opt[j + 1];
        double g;
        // ride the constraint with equality at x1; take the larger root so
        // the unbiasedness budget is spent early enough to stay feasible
        const double aq = dx * dx / x1 + dx;
        const double bq = -2.0 * A * dx / x1;
        const double cq = A * A / x1 + G2 - cD;
        const double disc = bq * bq - 4.0 * aq * cq;
        if (disc >= 0.0) {
            g = (-bq + std::sqrt(disc)) / (2.0 * aq);
        } else {
            // equality unreachable; accept the closest point if the miss is
            // within the discretization tolerance (tangential onset)
            g = -bq / (2.0 * aq);
            double lhs = (A - g * dx) * (A - g * dx) / x1 + G2 + g * g * dx;
            if (lhs > cD * (1.0 + onset_tol)) return out;
        }
        if (g < 0.0) g = 0.0;
        if (g * dx > A) g = A / dx;  // never overshoot the unbiasedness budget
        out.g[j] = g;
        G1 += g * dx;
        G2 += g * g * dx;
    }
    // remaining deficit is spread uniformly over (0, x_min]
    double A = 1.0 - G1;
    if (A < -1e-9) return out;
    A = std::max(A, 0.0);
    const double x_min = xs.back();
    out.g_tail = A / x_min;
    if (G2 + A * A / x_min > c * opt.front() * (1.0 + 1e-6)) return out;  // opt.front() holds OPT(0)
    out.ok = true;
    return out;
}

} // namespace detail

// Builds the table for the given p.  grid_resolution is the number of grid
// points on [x_min, 1]; fewer than 100 cannot certify a ratio.
inline OCTable oc_build(double p, int grid_resolution, double x_min = 1e-4) {
    if (grid_resolution < 100)
        throw std::invalid_argument("oc_build: grid_resolution must be at least 100");
    if (!(p > 0.0)) throw std::invalid_argument("oc_build: p must be positive");
    if (!(x_min > 0.0) || x_min >= 1.0) throw std::invalid_argument("oc_build: x_min must be in (0,1)");
    OCTable t;
    t.p = p;
    t.resolution = grid_resolution;
    t.x_min = x_min;
    const std::size_t n = static_cast<std::size_t>(grid_resolution);
    t.x.resize(n);
    const double ratio = std::log(1.0 / x_min) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) t.x[i] = std::exp(-ratio * static_cast<double>(i));
    t.x.front() = 1.0;
    t.x.back() = x_min;

    // v-optimal E[est^2] normalized to max = tau = 1 (scale-free for max <= tau);
    // opt[0] holds the rho -> 0 limit used by the tail check.
    std::vector<double> opt(n);
    opt[0] = p <= 1.0 ? 1.0 : p * p / (2.0 * p - 1.0);
    for (std::size_t i = 1; i < n; ++i) opt[i] = min_expected_square(1.0, t.x[i], 1.0, p);

    double lo = 1.0, hi = 4.0;
    detail::OCSweep best = detail::oc_sweep(hi, p, t.x, opt);
    if (!best.ok) throw std::runtime_error("oc_build: ratio 4 infeasible; grid too coarse");
    while (hi - lo > 1e-3) {
        double mid = 0.5 * (lo + hi);
        detail::OCSweep s = detail::oc_sweep(mid, p, t.x, opt);
        if (s.ok) {
            hi = mid;
            best = std::move(s);
        } else {
            lo = mid;
        }
    }
    t.c = hi;
    t.g = std::move(best.g);
    t.g_tail = best.g_tail;
    return t;
}

// Estimate from a coordinated outcome with equal thresholds and revealed
// max m <= tau.  Zero when nothing is sampled.
inline double oc_estimate(const OCTable& t, const CoordView& v, double tau) {
    if (v.sampled == 0) return 0.0;
    if (v.m > tau)
        throw std::domain_error("oc_estimate: table covers max(v) <= tau only");
    const double scale = std::pow(v.m, t.p - 1.0) * tau;
    if (v.sampled < v.r) {
        double xq = v.zeta * tau / v.m;  // (0,1] since the max is sampled
        return scale * t.g_at(xq);
    }
    const double rho = v.n / v.m;
    if (rho >= 1.0) return 0.0;
    return scale * t.deficit(rho) / rho;
}

inline constexpr const char* kOCTableFormat = "sampdist-octable v1";

inline void oc_save(const OCTable& t, std::ostream& out) {
    out << "#" << kOCTableFormat << "\n";
    out << "#p " << detail::fmt_double(t.p) << "\n";
    out << "#resolution " << t.resolution << "\n";
    out << "#x-min " << detail::fmt_double(t.x_min) << "\n";
    out << "#c " << detail::fmt_double(t.c) << "\n";
    out << "#g-tail " << detail::fmt_double(t.g_tail) << "\n";
    for (double v : t.g) out << detail::fmt_double(v) << "\n";
}

inline OCTable oc_load(std::istream& in) {
    OCTable t;
    std::string line;
    bool saw_format = false;
    while (in.peek() == '#' && std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view v(line);
        v.remove_prefix(1);
        auto field = [&](std::string_view name) -> std::string_view {
            return v.substr(0, name.size()) == name && v.size() > name.size() ? v.substr(name.size() + 1)
                                                                              : std::string_view{};
        };
        if (v == kOCTableFormat) saw_format = true;
        else if (auto f = field("p"); !f.empty()) t.p = detail::parse_double(f);
        else if (auto f2 = field("resolution"); !f2.empty()) t.resolution = static_cast<int>(detail::parse_double(f2));
        else if (auto f3 = field("x-min"); !f3.empty()) t.x_min = detail::parse_double(f3);
        else if (auto f4 = field("c"); !f4.empty()) t.c = detail::parse_double(f4);
        else if (auto f5 = field("g-tail"); !f5.empty()) t.g_tail = detail::parse_double(f5);
    }
    if (!saw_format) throw std::invalid_argument("not a sampdist OC table file");
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        t.g.push_back(detail::parse_double(line));
    }
    if (t.resolution < 2 || t.g.size() + 1 != static_cast<std::size_t>(t.resolution))
        throw std::invalid_argument("OC table: resolution and value count disagree");
    const std::size_t n = static_cast<std::size_t>(t.resolution);
    t.x.resize(n);
    const double ratio = std::log(1.0 / t.x_min) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) t.x[i] = std::exp(-ratio * static_cast<double>(i));
    t.x.front() = 1.0;
    t.x.back() = t.x_min;
    return t;
}

} // namespace sampdist
