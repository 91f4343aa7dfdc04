#pragma once

// Range estimator for two independently sampled instances, stated as a
// function of the determining vector phi (phi1 >= phi2 after symmetry):
//
//   phi = (0,0)              -> 0
//   phi1 >= phi2 >  tau2     -> tau1/min{tau1,phi1} * (phi1-phi2)^p
//   phi1 >= phi2 <= tau2     -> p*tau1*tau2/min{phi1,tau1} *
//                                 int_{max{0,phi1-tau2}}^{phi1-phi2} y^{p-1}/(phi1-y) dy
//                               + tau1*max{0,phi1-tau2}^p / min{phi1,tau1}
//
// p = 1 and p = 2 dispatch to closed forms; other p use adaptive quadrature
// with substitutions that tame the endpoint behaviour.

#include <cmath>
#include <stdexcept>

#include "outcome.hpp"
#include "quadrature.hpp"

namespace sampdist {

struct IndLParams {
    double p = 1.0;
    double tau1 = 0.0;
    double tau2 = 0.0;
};

namespace detail {

// int_{max{0,phi1-tau2}}^{phi1-phi2} y^(p-1)/(phi1-y) dy, written in terms
// of (phi1, phi2, tau2) so no quantity is reconstructed by a cancelling
// subtraction: with w = phi1 - y the integral is
//   int_{phi2}^{W} (phi1-w)^(p-1) / w dw,  W = min(phi1, tau2).
// Small w uses z = log w (tames the 1/w peak when phi2 is tiny); the
// large-w tail maps back to small y, where the y^(p-1) singularity for
// p < 1 is handled by the power substitution t = y^p.
inline double ind_integral_numeric(double phi1, double phi2, double tau2, double p) {
    const double W = std::min(phi1, tau2);
    if (!(W > phi2)) return 0.0;
    const double cut = std::min(W, 0.5 * phi1);
    double total = 0.0;
    if (phi2 < cut) {
        total += integrate([&](double z) { return std::pow(phi1 - std::exp(z), p - 1.0); },
                           std::log(phi2), std::log(cut), 1e-14, 1e-12);
    }
    if (W > std::max(cut, phi2)) {
        // y in [phi1-W, phi1-max(cut,phi2)]; here phi1 - y >= phi1/2, so
        // y-space is safe
        const double ylo = std::max(0.0, phi1 - W);
        const double yhi = phi1 - std::max(cut, phi2);
        if (p < 1.0 && ylo == 0.0) {
            double tB = std::pow(yhi, p);
            total += (1.0 / p) * integrate(
                                     [&](double t) { return 1.0 / (phi1 - std::pow(t, 1.0 / p)); },
                                     0.0, tB, 1e-14, 1e-12);
        } else {
            total += integrate([&](double y) { return std::pow(y, p - 1.0) / (phi1 - y); }, ylo,
                               yhi, 1e-14, 1e-12);
        }
    }
    return total;
}

inline double ind_integral_closed(double phi1, double phi2, double tau2, double p) {
    const double W = std::min(phi1, tau2);
    if (!(W > phi2)) return 0.0;
    if (p == 1.0) return std::log(W / phi2);
    // p == 2: int y/(phi1-y) dy = -y - phi1*log(phi1-y) = w - phi1*log(w) + const
    return phi2 - W + phi1 * std::log(W / phi2);
}

inline double rg_l_independent_sorted(double phi1, double phi2, double tau1, double tau2, double p,
                                      bool force_quadrature) {
    if (phi1 == 0.0 && phi2 == 0.0) return 0.0;
    if (phi2 <= 0.0)
        throw std::invalid_argument("rg_l_independent: determining vector with a zero and a positive "
                                    "coordinate cannot arise (seeds are positive)");
    if (phi1 == phi2) {
        // range-zero closure point; both case rows give 0
        return 0.0;
    }
    if (phi2 > tau2) {
        return tau1 / std::min(tau1, phi1) * std::pow(phi1 - phi2, p);
    }
    const double A = std::max(0.0, phi1 - tau2);
    const double head = tau1 * std::pow(A, p) / std::min(phi1, tau1);
    double integral;
    if (!force_quadrature && p == 1.0) {
        integral = ind_integral_closed(phi1, phi2, tau2, 1.0);
        return tau1 * tau2 / std::min(tau1, phi1) * integral + head;
    }
    if (!force_quadrature && p == 2.0) {
        integral = ind_integral_closed(phi1, phi2, tau2, 2.0);
        return 2.0 * tau1 * tau2 / std::min(tau1, phi1) * integral + head;
    }
    integral = ind_integral_numeric(phi1, phi2, tau2, p);
    return p * tau1 * tau2 / std::min(phi1, tau1) * integral + head;
}

} // namespace detail

// Estimate of (max(v)-min(v))^p from the determining vector of an
// independent two-instance outcome.  Symmetric: roles (and taus) swap when
// phi2 > phi1.  phi2 is clamped below at 1e-300 to keep the logarithms
// finite for astronomically small bounds.
inline double rg_l_independent(const DeterminingVector& phi, const IndLParams& params,
                               bool force_quadrature = false) {
    if (!(params.p > 0.0)) throw std::invalid_argument("rg_l_independent: p must be positive");
    if (!(params.tau1 > 0.0) || !(params.tau2 > 0.0))
        throw std::invalid_argument("rg_l_independent: thresholds must be positive");
    double phi1 = phi.phi1, phi2 = phi.phi2, tau1 = params.tau1, tau2 = params.tau2;
    if (phi2 > phi1) {
        std::swap(phi1, phi2);
        std::swap(tau1, tau2);
    }
    if (phi1 == 0.0 && phi2 == 0.0) return 0.0;
    if (phi2 == 0.0)
        throw std::invalid_argument("rg_l_independent: determining vector with a zero and a positive "
                                    "coordinate cannot arise (seeds are positive)");
    phi2 = std::max(phi2, 1e-300);
    return detail::rg_l_independent_sorted(phi1, phi2, tau1, tau2, params.p, force_quadrature);
}

// Closed-form variance of the independent-sample estimator for equal
// thresholds, data pre-sorted v1 >= v2 >= 0, p in {1,2}.
inline double var_rg_l_independent_equal_tau(double v1, double v2, double tau, int p) {
    if (v2 > v1 || v2 < 0.0) throw std::invalid_argument("var_rg_l_independent_equal_tau: need v1 >= v2 >= 0");
    if (!(tau > 0.0)) throw std::invalid_argument("var_rg_l_independent_equal_tau: tau must be positive");
    if (p != 1 && p != 2)
        throw std::invalid_argument("var_rg_l_independent_equal_tau: closed forms exist for p in {1,2} only");
    if (v1 == 0.0) return 0.0;
    if (v2 >= tau) return 0.0;
    if (p == 1) {
        if (v1 >= tau) {  // v1 >= tau >= v2; the v2->0 limit of the log term is 0
            double lg = v2 > 0.0 ? std::log(tau / v2) : 0.0;
            return -2.0 * tau * v2 * lg - v2 * v2 + tau * tau;
        }
        // v2 <= v1 <= tau
        double mid = v2 > 0.0 ? (v2 / v1) * std::log(v1 / v2) : 0.0;
        return 2.0 * tau * tau * (1.0 - mid - v2 / v1) - (v1 - v2) * (v1 - v2);
    }
    const double t2 = tau * tau;
    if (v1 >= tau) {
        // the -2 v2^2 tau^2 term keeps the row continuous at v2 = tau
        double lg = v2 > 0.0 ? std::log(tau / v2) : 0.0;
        return -4.0 * v1 * v2 * tau * (2.0 * v1 - v2) * lg + 4.0 * v1 * v2 * t2 +
               t2 * t2 / 3.0 + 8.0 * v2 * v2 * v2 * tau / 3.0 - 6.0 * v1 * v2 * v2 * tau -
               4.0 * v1 * v1 * v2 * v2 - v2 * v2 * v2 * v2 + 4.0 * v1 * v2 * v2 * v2 +
               4.0 * v1 * v1 * t2 - 2.0 * v1 * t2 * tau - 2.0 * v2 * v2 * t2;
    }
    double lg = v2 > 0.0 ? std::log(v1 / v2) : 0.0;
    double rg = v1 - v2;
    return 2.0 * t2 / (3.0 * v1) * (4.0 * v2 * v2 * v2 + 5.0 * v1 * v1 * v1 - 9.0 * v1 * v2 * v2) -
           rg * rg * rg * rg - 4.0 * t2 * (2.0 * v1 - v2) * v2 * lg;
}

} // namespace sampdist
