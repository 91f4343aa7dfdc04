#pragma once

// Shared-seed (coordinated) range estimators.
//
// The L estimator is a function of the lower bound function:
//   est(S) = LB_p(zeta,v)/zeta - int_zeta^1 LB_p(u,v)/u^2 du
// with closed forms for p in {1,2} and equal thresholds, a direct
// integration of the equal-threshold specialization for other p, and a
// piecewise integration over the sorted breakpoints v_i/tau_i for general
// threshold vectors.
//
// The U estimator is the case analysis below (equal thresholds only).
//
// v-optimal estimates are the negated derivative of the lower convex hull
// of the lower bound function anchored at (1,0); they minimize variance at
// one data vector and exist only per-vector.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "outcome.hpp"
#include "quadrature.hpp"

namespace sampdist {

// What a coordinated estimator reads off an outcome: the largest sampled
// value m, the smallest value n when everything is sampled (else 0), the
// usable minimum bound v_min (min(v) when fully sampled, zeta*tau
// otherwise), and the shared seed zeta.
struct CoordView {
    double m = 0.0;
    double n = 0.0;
    double v_min = 0.0;
    double zeta = 0.0;
    std::size_t r = 0;
    std::size_t sampled = 0;
};

inline CoordView coord_view(const Outcome& o, double tau) {
    if (o.mode != Mode::coordinated)
        throw std::invalid_argument("coord_view: outcome is not coordinated");
    CoordView v;
    v.r = o.r();
    v.zeta = o.inst.front().seed;
    for (const auto& e : o.inst) {
        if (e.seed != v.zeta)
            throw std::invalid_argument("coord_view: coordinated outcome with unequal seeds");
        if (e.value) {
            ++v.sampled;
            v.m = std::max(v.m, *e.value);
            v.n = (v.n == 0.0 || *e.value < v.n) ? *e.value : v.n;
        }
    }
    if (v.sampled < v.r) v.n = 0.0;
    v.v_min = (v.sampled == v.r) ? v.n : v.zeta * tau;
    return v;
}

// ---------------------------------------------------------------------------
// L estimator, equal thresholds

namespace detail {

inline double rg_l_coord_equal_closed(double m, double w, double tau, int p) {
    // w = v_min; requires 0 < w <= m
    if (p == 1)
        return std::max(m - tau, 0.0) - std::max(w - tau, 0.0) +
               tau * std::log(std::min(m, tau) / std::min(w, tau));
    double a = std::max(m, tau), b = std::max(w, tau);
    return a * a - b * b - 2.0 * b * (m - w) + 2.0 * tau * m * std::log(std::min(m, tau) / std::min(w, tau));
}

// int_a^b (m - c x)^p / x^2 dx with 0 < a <= b <= m/c.  For p < 1 the
// integrand has a cusp where m - c x -> 0; substituting s = (m - c x)^p
// makes it smooth:  (c/p) int s^(1/p) / (m - s^(1/p))^2 ds.
inline double integral_band_over_x2(double m, double c, double a, double b, double p) {
    if (!(b > a)) return 0.0;
    if (p < 1.0 && (m - c * b) < 0.25 * m) {
        double s_lo = std::pow(std::max(m - c * b, 0.0), p);
        double s_hi = std::pow(m - c * a, p);
        return (c / p) * integrate(
                             [&](double s) {
                                 double y = std::pow(s, 1.0 / p);
                                 double d = m - y;
                                 return y / (d * d);
                             },
                             s_lo, s_hi, 1e-11, 1e-10);
    }
    return integrate([&](double x) { return std::pow(m - c * x, p) / (x * x); }, a, b, 1e-11,
                     1e-10);
}

inline double rg_l_coord_equal_numeric(double m, double w, double tau, double p) {
    double head = std::pow(m - w, p) * std::max(1.0, tau / w);
    double a = std::min(1.0, w / tau);
    double b = std::min(1.0, m / tau);
    return head - integral_band_over_x2(m, tau, a, b, p);
}

} // namespace detail

// Equal-threshold L estimate from (m, v_min).  Nonnegative and unbiased;
// 0 when nothing is sampled.
inline double rg_l_coordinated_equal_tau(const CoordView& v, double tau, double p,
                                         bool force_quadrature = false) {
    if (v.sampled == 0) return 0.0;
    if (v.m <= v.v_min) return 0.0;  // range-zero closure point
    if (!force_quadrature && p == 1.0) return detail::rg_l_coord_equal_closed(v.m, v.v_min, tau, 1);
    if (!force_quadrature && p == 2.0) return detail::rg_l_coord_equal_closed(v.m, v.v_min, tau, 2);
    return detail::rg_l_coord_equal_numeric(v.m, v.v_min, tau, p);
}

// ---------------------------------------------------------------------------
// L estimator, general threshold vector (Eq.-(10) form)

// Lower bound function at randomization u >= zeta, reconstructed from the
// outcome (monotone sampling: memberships at u are computable from the
// outcome at zeta).
inline double rg_l_coordinated(const Outcome& o, double p) {
    if (o.mode != Mode::coordinated)
        throw std::invalid_argument("rg_l_coordinated: outcome is not coordinated");
    if (!(p > 0.0)) throw std::invalid_argument("rg_l_coordinated: p must be positive");
    if (o.sampled_count() == 0) return 0.0;
    const double zeta = o.inst.front().seed;
    if (o.equal_tau()) {
        return rg_l_coordinated_equal_tau(coord_view(o, o.inst.front().tau), o.inst.front().tau, p);
    }
    // head term LB_p(zeta)/zeta
    double head = lower_bound_rg(o, p) / zeta;

    // collect sampled (value, tau) pairs and the smallest tau of never-sampled entries
    std::vector<std::pair<double, double>> sampled;  // (value, tau)
    double tau_unsampled = std::numeric_limits<double>::infinity();
    for (const auto& e : o.inst) {
        if (e.value) sampled.push_back({*e.value, e.tau});
        else tau_unsampled = std::min(tau_unsampled, e.tau);
    }
    std::vector<double> breaks;
    for (auto& [val, tau] : sampled) {
        double t = val / tau;
        if (t > zeta && t < 1.0) breaks.push_back(t);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.push_back(1.0);

    double tail = 0.0;
    double lo = zeta;
    for (double hi : breaks) {
        if (hi <= lo) continue;
        // membership is constant on (lo, hi): i in S(u) iff v_i/tau_i >= hi (use midpoint)
        double umid = 0.5 * (lo + hi);
        double msub = 0.0, c1 = std::numeric_limits<double>::infinity();
        double c2 = tau_unsampled;
        bool any = false;
        for (auto& [val, tau] : sampled) {
            if (val >= tau * umid) {
                any = true;
                msub = std::max(msub, val);
                c1 = std::min(c1, val);
            } else {
                c2 = std::min(c2, tau);
            }
        }
        if (!any) break;  // LB is 0 from here on
        // LB(u) = msub - min(c1, c2*u): linear ramp while the unsampled
        // bound c2*u is the binding minimum (u below c1/c2), constant above
        double cross = (c2 == std::numeric_limits<double>::infinity())
                           ? lo
                           : std::clamp(c1 / c2, lo, hi);
        if (cross > lo) tail += detail::integral_band_over_x2(msub, c2, lo, cross, p);
        if (hi > cross && msub > c1)
            tail += std::pow(msub - c1, p) * (1.0 / cross - 1.0 / hi);
        lo = hi;
    }
    double est = head - tail;
    return est < 0.0 ? 0.0 : est;
}

// ---------------------------------------------------------------------------
// U estimator (equal thresholds)

inline double rg_u_coordinated(const CoordView& v, double tau, double p) {
    if (!(p > 0.0)) throw std::invalid_argument("rg_u_coordinated: p must be positive");
    if (v.sampled == 0) return 0.0;
    const double m = v.m;
    const double n = v.n;  // 0 when not fully sampled
    const double zeta = v.zeta;
    if (n >= tau) return std::pow(m - n, p);
    if (p <= 1.0) {
        if (n == 0.0) return std::pow(m, p) * tau / std::min(m, tau);
        return (tau / n) *
               (std::pow(m - n, p) - (std::min(m, tau) - n) / std::min(m, tau) * std::pow(m, p));
    }
    if (m <= tau) {
        if (zeta * tau > n) return p * tau * std::pow(m - zeta * tau, p - 1.0);
        return 0.0;
    }
    // n < tau < m, p > 1
    const double eta0 = (p * tau - m) / ((p - 1.0) * tau);
    if (eta0 > 0.0 && eta0 < 1.0) {
        if (zeta >= std::max(eta0, n / tau)) return std::pow(m - eta0 * tau, p) / (1.0 - eta0);
        if (zeta > n / tau && zeta < eta0) return p * tau * std::pow(m - zeta * tau, p - 1.0);
        if (n / tau <= eta0) return 0.0;  // zeta <= n/tau <= eta0
        return tau * std::pow(m - n, p) / n -
               (tau - n) * std::pow(m - eta0 * tau, p) / (n * (1.0 - eta0));
    }
    if (zeta * tau > n) return std::pow(m, p);
    return (tau / n) * std::pow(m - n, p) - std::pow(m, p) * (tau / n - 1.0);
}

// ---------------------------------------------------------------------------
// Closed-form variances, equal thresholds, p in {1,2}

inline double var_rg_l_coordinated(double vmax, double vmin, double tau, int p) {
    if (vmin > vmax || vmin < 0.0)
        throw std::invalid_argument("var_rg_l_coordinated: need vmax >= vmin >= 0");
    if (!(tau > 0.0)) throw std::invalid_argument("var_rg_l_coordinated: tau must be positive");
    if (p != 1 && p != 2)
        throw std::invalid_argument("var_rg_l_coordinated: closed forms exist for p in {1,2} only");
    if (vmax == 0.0) return 0.0;
    if (vmin >= tau) return 0.0;
    const double rg = vmax - vmin;
    if (p == 1) {
        if (vmax <= tau) {
            double lg = vmin > 0.0 ? std::log(vmax / vmin) : 0.0;
            return 2.0 * rg * tau - rg * rg - 2.0 * tau * vmin * lg;
        }
        if (vmin > 0.0) return tau * tau - vmin * vmin - 2.0 * tau * vmin * std::log(tau / vmin);
        return tau * tau;
    }
    const double M = vmax, n = vmin, t2 = tau * tau;
    if (vmax <= tau) {
        double lg = n > 0.0 ? std::log(M / n) : 0.0;
        return -4.0 * tau * M * n * lg * (2.0 * M - n) - rg * rg * rg * rg +
               2.0 * tau / 3.0 * (5.0 * M * M * M + 4.0 * n * n * n - 9.0 * M * n * n);
    }
    // the -2 n^2 tau^2 term keeps the row continuous at n = tau
    double lg = n > 0.0 ? std::log(tau / n) : 0.0;
    return 4.0 * M * n * tau * (n - 2.0 * M) * lg + 4.0 * M * n * t2 + t2 * t2 / 3.0 +
           8.0 * n * n * n * tau / 3.0 - 6.0 * M * n * n * tau - 4.0 * M * M * n * n -
           n * n * n * n + 4.0 * M * n * n * n + 4.0 * M * M * t2 - 2.0 * M * t2 * tau -
           2.0 * n * n * t2;
}

// ---------------------------------------------------------------------------
// v-optimal estimates (equal thresholds)

struct HullSegment {
    enum class Kind { chord, band, zero };
    Kind kind;
    double u0, u1;
    double estimate;  // constant -dH/du on chord/zero segments; band uses p*tau*(M-u*tau)^(p-1)
};

struct LowerHull {
    double vmax = 0.0, vmin = 0.0, tau = 0.0, p = 1.0;
    double rg = 0.0;
    double alpha = 0.0;  // left tangency point (p>1), else support boundary
    std::vector<HullSegment> segments;

    double estimate(double u) const {
        for (const auto& s : segments) {
            if (u <= s.u1 || &s == &segments.back()) {
                if (s.kind == HullSegment::Kind::band)
                    return p * tau * std::pow(vmax - u * tau, p - 1.0);
                return s.estimate;
            }
        }
        return 0.0;
    }

    // Hull height H(u) = int_u^1 estimate; anchored so H(1) = 0.
    double height(double u) const {
        double h = 0.0;
        for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
            const auto& s = *it;
            double lo = std::max(s.u0, u);
            if (lo >= s.u1) continue;
            if (s.kind == HullSegment::Kind::band)
                h += std::pow(vmax - lo * tau, p) - std::pow(vmax - s.u1 * tau, p);
            else
                h += (s.u1 - lo) * s.estimate;
        }
        return h;
    }
};

namespace detail {

// Chord-tangency condition for the left hull segment (p > 1): the chord
// from (0, rg) touches the band (M - x*tau)^p where
//   rg = (M - x*tau)^(p-1) * ((M - x*tau) + p*tau*x).
inline double hull_tangency(double x, double M, double tau, double p, double rg) {
    double band = M - x * tau;
    return std::pow(band, p - 1.0) * (band + p * tau * x) - rg;
}

inline double solve_alpha(double lo, double hi, double M, double tau, double p, double rg) {
    // hull_tangency(lo) >= 0 > hull_tangency(hi); bisection to 1e-12 absolute
    for (int i = 0; i < 200 && (hi - lo) > 1e-12; ++i) {
        double mid = 0.5 * (lo + hi);
        if (hull_tangency(mid, M, tau, p, rg) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

inline LowerHull v_optimal_hull(double vmax, double vmin, double tau, double p) {
    if (!(tau > 0.0)) throw std::invalid_argument("v_optimal_hull: tau must be positive");
    if (!(p > 0.0)) throw std::invalid_argument("v_optimal_hull: p must be positive");
    if (vmin > vmax || vmin < 0.0) throw std::invalid_argument("v_optimal_hull: need vmax >= vmin >= 0");
    LowerHull h;
    h.vmax = vmax;
    h.vmin = vmin;
    h.tau = tau;
    h.p = p;
    h.rg = std::pow(vmax - vmin, p);
    using K = HullSegment::Kind;
    if (vmax <= vmin || vmax == 0.0) {
        h.segments.push_back({K::zero, 0.0, 1.0, 0.0});
        return h;
    }
    const double a = std::min(1.0, vmax / tau);
    if (vmin >= tau) {
        // every outcome reveals the whole vector; hull is the straight chord to (1,0)
        h.alpha = 1.0;
        h.segments.push_back({K::chord, 0.0, 1.0, h.rg});
        return h;
    }
    if (p <= 1.0) {
        // concave band: hull is linear from (0, rg) to (a, LB(a)), then zero
        h.alpha = a;
        h.segments.push_back({K::chord, 0.0, a, h.rg / a});
        if (a < 1.0) h.segments.push_back({K::zero, a, 1.0, 0.0});
        return h;
    }
    const double b = vmin / tau;
    if (vmax <= tau) {
        double alpha = detail::hull_tangency(b, vmax, tau, p, h.rg) <= 0.0
                           ? b
                           : detail::solve_alpha(b, a, vmax, tau, p, h.rg);
        h.alpha = alpha;
        if (alpha > 0.0) {
            double slope = (h.rg - std::pow(vmax - alpha * tau, p)) / alpha;
            h.segments.push_back({K::chord, 0.0, alpha, slope});
        }
        h.segments.push_back({K::band, alpha, a, 0.0});
        if (a < 1.0) h.segments.push_back({K::zero, a, 1.0, 0.0});
        return h;
    }
    // vmax > tau: the band does not reach zero; the hull leaves it at eta0
    // on the straight segment to the anchor (1, 0).
    const double eta0 = (p * tau - vmax) / ((p - 1.0) * tau);
    if (eta0 <= b || detail::hull_tangency(std::min(eta0, 1.0), vmax, tau, p, h.rg) > 0.0) {
        // tangency order degenerates: single chord from (0, rg) to (1, 0)
        h.alpha = 1.0;
        h.segments.push_back({K::chord, 0.0, 1.0, h.rg});
        return h;
    }
    double alpha = detail::hull_tangency(b, vmax, tau, p, h.rg) <= 0.0
                       ? b
                       : detail::solve_alpha(b, eta0, vmax, tau, p, h.rg);
    h.alpha = alpha;
    if (alpha > 0.0) {
        double slope = (h.rg - std::pow(vmax - alpha * tau, p)) / alpha;
        h.segments.push_back({K::chord, 0.0, alpha, slope});
    }
    h.segments.push_back({K::band, alpha, eta0, 0.0});
    h.segments.push_back({K::chord, eta0, 1.0, std::pow(vmax - eta0 * tau, p) / (1.0 - eta0)});
    return h;
}

inline double v_optimal_estimate(double vmax, double vmin, double tau, double p, double u) {
    return v_optimal_hull(vmax, vmin, tau, p).estimate(u);
}

// int_0^1 (v-optimal estimate)^2 du, exact per segment.
inline double min_expected_square(double vmax, double vmin, double tau, double p) {
    LowerHull h = v_optimal_hull(vmax, vmin, tau, p);
    double tot = 0.0;
    for (const auto& s : h.segments) {
        if (s.kind == HullSegment::Kind::band) {
            // int (p tau)^2 (M - u tau)^(2p-2) du
            tot += p * p * tau *
                   (std::pow(vmax - s.u0 * tau, 2.0 * p - 1.0) -
                    std::pow(vmax - s.u1 * tau, 2.0 * p - 1.0)) /
                   (2.0 * p - 1.0);
        } else {
            tot += (s.u1 - s.u0) * s.estimate * s.estimate;
        }
    }
    return tot;
}

// Numeric E[est^2] of the U estimator over the seed (equal thresholds); the
// closed-form tables do not cover it.
inline double expected_square_u_coordinated(double vmax, double vmin, double tau, double p) {
    if (vmax == vmin) return 0.0;
    CoordView v;
    v.r = 2;
    auto of_u = [&](double u) {
        if (u * tau > vmax) return 0.0;
        CoordView w;
        w.r = 2;
        w.m = vmax;
        w.zeta = u;
        bool full = vmin > 0.0 && u * tau <= vmin;
        w.sampled = full ? 2 : 1;
        w.n = full ? vmin : 0.0;
        w.v_min = full ? vmin : u * tau;
        double e = rg_u_coordinated(w, tau, p);
        return e * e;
    };
    std::vector<double> breaks{vmin / tau, vmax / tau};
    if (p > 1.0 && vmax > tau) breaks.push_back((p * tau - vmax) / ((p - 1.0) * tau));
    return integrate_pieces(of_u, 0.0, 1.0, breaks);
}

} // namespace sampdist
