#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "sampdist/est_coordinated.hpp"

using namespace sampdist;
using Catch::Approx;

namespace {

CoordView view_of(double m, double n_or_zero, double v_min, double zeta, std::size_t sampled,
                  std::size_t r = 2) {
    CoordView v;
    v.m = m;
    v.n = n_or_zero;
    v.v_min = v_min;
    v.zeta = zeta;
    v.sampled = sampled;
    v.r = r;
    return v;
}

double coordL_of(const std::vector<double>& v, const std::vector<double>& tau, double u, double p) {
    return rg_l_coordinated(oracle::coord_outcome(v, tau, u), p);
}

double coordU_of(const std::vector<double>& v, double tau, double u, double p) {
    std::vector<double> taus(v.size(), tau);
    auto o = oracle::coord_outcome(v, taus, u);
    return rg_u_coordinated(coord_view(o, tau), tau, p);
}

} // namespace

TEST_CASE("coordinated L spot values", "[est_coordinated]") {
    // tau=10, v=(8,3): both sampled at zeta=0.2 -> tau ln(m/n)
    CHECK(coordL_of({8, 3}, {10, 10}, 0.2, 1) == Approx(10.0 * std::log(8.0 / 3.0)).epsilon(1e-12));
    CHECK(coordL_of({8, 3}, {10, 10}, 0.2, 1) == Approx(9.8083).epsilon(1e-4));
    // only the max sampled at zeta=0.5 -> tau ln(m/(zeta tau))
    CHECK(coordL_of({8, 3}, {10, 10}, 0.5, 1) == Approx(10.0 * std::log(8.0 / 5.0)).epsilon(1e-12));
    CHECK(coordL_of({8, 3}, {10, 10}, 0.5, 1) == Approx(4.7000).epsilon(1e-4));
    // nothing sampled
    CHECK(coordL_of({8, 3}, {10, 10}, 0.9, 1) == 0.0);
    CHECK(coordL_of({8, 3}, {10, 10}, 0.9, 2) == 0.0);
}

TEST_CASE("coordinated L unbiasedness for the spot vector", "[est_coordinated]") {
    // int_0^1 est du = 5 exactly for v=(8,3), tau=10
    double mean = oracle::coord_expectation({8, 3}, {10, 10},
                                            [&](const Outcome& o) { return rg_l_coordinated(o, 1.0); });
    CHECK(mean == Approx(5.0).epsilon(1e-9));
}

TEST_CASE("coordinated L general-p equal-tau path matches closed forms", "[est_coordinated]") {
    for (double m : {1.0, 8.0, 15.0, 40.0}) {
        for (double w : {0.3, 3.0, 8.0, 15.0}) {
            if (w > m) continue;
            for (double p : {1.0, 2.0}) {
                CoordView v = view_of(m, w, w, w / 10.0, 2);
                double closed = rg_l_coordinated_equal_tau(v, 10.0, p, false);
                double numeric = rg_l_coordinated_equal_tau(v, 10.0, p, true);
                CHECK(numeric == Approx(closed).epsilon(1e-8).margin(1e-9));
            }
        }
    }
}

TEST_CASE("coordinated L general-tau path agrees with the equal-tau path", "[est_coordinated]") {
    for (double u : {0.05, 0.2, 0.45, 0.7, 0.95}) {
        for (double p : {0.5, 1.0, 2.0, 3.0}) {
            double general = coordL_of({8, 3}, {10, 10 + 1e-13}, u, p);  // forces the eq-(10) path
            double equal = coordL_of({8, 3}, {10, 10}, u, p);
            CHECK(general == Approx(equal).epsilon(1e-6).margin(1e-8));
        }
    }
}

TEST_CASE("coordinated L with unequal thresholds stays unbiased", "[est_coordinated]") {
    std::vector<double> tau{10, 25};
    for (double p : {0.5, 1.0, 2.0}) {
        for (auto v : std::vector<std::vector<double>>{{8, 3}, {3, 8}, {15, 3}, {8, 0}, {0.3, 40}}) {
            double truth = std::pow(std::abs(v[0] - v[1]), p);
            double mean = oracle::coord_expectation(
                v, tau, [&](const Outcome& o) { return rg_l_coordinated(o, p); }, {},
                1e-8 * std::max(1.0, truth));
            CHECK(mean == Approx(truth).epsilon(1e-6));
        }
    }
}

TEST_CASE("coordinated L r=3 unbiasedness", "[est_coordinated]") {
    std::vector<double> tau{10, 10, 10};
    for (double p : {1.0, 2.0}) {
        for (auto v : std::vector<std::vector<double>>{{8, 3, 5}, {9.99, 0.3, 3}, {15, 3, 40}}) {
            double mx = *std::max_element(v.begin(), v.end());
            double mn = *std::min_element(v.begin(), v.end());
            double truth = std::pow(mx - mn, p);
            double mean = oracle::coord_expectation(
                v, tau, [&](const Outcome& o) { return rg_l_coordinated(o, p); });
            CHECK(mean == Approx(truth).epsilon(1e-6));
        }
    }
}

TEST_CASE("coordinated L estimate grows as the seed shrinks", "[est_coordinated]") {
    for (double p : {0.5, 1.0, 2.0}) {
        double prev = -1.0;
        for (double u = 0.95; u >= 0.05; u -= 0.05) {
            double e = coordL_of({8, 3}, {10, 10}, u, p);
            CHECK(e >= prev - 1e-12);
            prev = e;
        }
    }
}

TEST_CASE("coordinated L variance closed forms", "[est_coordinated]") {
    // p=1, tau=10, v=(8,3): 2*5*10 - 25 - 2*10*3*ln(8/3)
    double expected = 100.0 - 25.0 - 60.0 * std::log(8.0 / 3.0);
    CHECK(var_rg_l_coordinated(8, 3, 10, 1) == Approx(expected).epsilon(1e-14));
    CHECK(var_rg_l_coordinated(8, 3, 10, 1) == Approx(16.150).epsilon(1e-4));
    CHECK(var_rg_l_coordinated(12, 11, 10, 1) == 0.0);
    CHECK(var_rg_l_coordinated(12, 11, 10, 2) == 0.0);
    CHECK_THROWS_AS(var_rg_l_coordinated(8, 3, 10, 3), std::invalid_argument);
}

TEST_CASE("coordinated variance closed forms match the quadrature oracle", "[est_coordinated]") {
    for (double tau : {10.0, 25.0}) {
        for (double m : {0.3, 3.0, 8.0, 9.99, 15.0, 40.0}) {
            for (double n : {0.0, 0.3, 3.0, 8.0, 15.0}) {
                if (n > m) continue;
                for (int p : {1, 2}) {
                    double closed = var_rg_l_coordinated(m, n, tau, p);
                    double mean = std::pow(m - n, p);
                    double tol = 1e-8 * std::max(1e-3, std::abs(closed) + mean * mean);
                    double e2 = oracle::coord_expectation(
                        {m, n}, {tau, tau},
                        [&](const Outcome& o) {
                            double e = rg_l_coordinated(o, p);
                            return e * e;
                        },
                        {}, tol);
                    CHECK(closed == Approx(e2 - mean * mean).epsilon(1e-6).margin(1e-6));
                }
            }
        }
    }
}

TEST_CASE("U estimator hand traces", "[est_coordinated]") {
    // p=1, tau=10, v=(8,3), zeta=0.2: fully sampled -> 0
    CHECK(coordU_of({8, 3}, 10, 0.2, 1) == Approx(0.0).margin(1e-12));
    // zeta=0.5: only max sampled -> m tau / min(m,tau) = 10
    CHECK(coordU_of({8, 3}, 10, 0.5, 1) == Approx(10.0));
    // min above the threshold: exact range
    CHECK(coordU_of({15, 12}, 10, 0.5, 1) == Approx(3.0));
    CHECK(coordU_of({15, 12}, 10, 0.5, 2.5) == Approx(std::pow(3.0, 2.5)));
    // unbiasedness by hand: 0.3 * 0 + 0.5 * 10 = 5
    double mean = oracle::coord_expectation({8, 3}, {10, 10},
                                            [&](const Outcome& o) {
                                                return rg_u_coordinated(coord_view(o, 10), 10, 1.0);
                                            });
    CHECK(mean == Approx(5.0).epsilon(1e-9));
}

TEST_CASE("U estimator unbiasedness across branch structure", "[est_coordinated]") {
    // covers p<=1 / p>1, m <= tau / m > tau, eta0 inside and outside (0,1)
    for (double tau : {10.0, 25.0}) {
        for (double p : {0.5, 1.0, 2.0, 3.0}) {
            for (auto v : std::vector<std::vector<double>>{
                     {8, 3}, {9.99, 0.3}, {15, 3}, {40, 15}, {40, 0}, {8, 0}, {26, 24}}) {
                double truth = std::pow(v[0] - v[1], p);
                double mean = oracle::coord_expectation(
                    v, {tau, tau},
                    [&](const Outcome& o) { return rg_u_coordinated(coord_view(o, tau), tau, p); });
                CHECK(mean == Approx(truth).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("v-optimal spot values", "[est_coordinated]") {
    // p=1, tau=10, v=(8,3): 6.25 on u <= 0.8, then 0
    CHECK(v_optimal_estimate(8, 3, 10, 1, 0.3) == Approx(6.25));
    CHECK(v_optimal_estimate(8, 3, 10, 1, 0.79) == Approx(6.25));
    CHECK(v_optimal_estimate(8, 3, 10, 1, 0.81) == 0.0);
    CHECK(min_expected_square(8, 3, 10, 1) == Approx(31.25));
    // zero-range vector: estimate identically zero
    CHECK(v_optimal_estimate(5, 5, 10, 1, 0.2) == 0.0);
    CHECK(v_optimal_estimate(5, 5, 10, 2, 0.2) == 0.0);
}

TEST_CASE("v-optimal estimates integrate to the range (unbiasedness)", "[est_coordinated]") {
    for (double tau : {10.0, 25.0}) {
        for (double p : {0.5, 1.0, 2.0, 3.0}) {
            for (auto v : std::vector<std::vector<double>>{
                     {8, 3}, {9.99, 0.3}, {15, 3}, {40, 15}, {40, 0}, {8, 0}, {11, 9}, {26, 24}}) {
                double truth = std::pow(v[0] - v[1], p);
                auto hull = v_optimal_hull(v[0], v[1], tau, p);
                double mean = oracle::integrate01(
                    [&](double u) { return hull.estimate(u); },
                    {v[1] / tau, v[0] / tau, hull.alpha});
                CHECK(mean == Approx(truth).epsilon(1e-7));
            }
        }
    }
}

TEST_CASE("v-optimal estimates are non-increasing in u", "[est_coordinated]") {
    for (double p : {0.5, 1.0, 2.0, 3.0}) {
        auto hull = v_optimal_hull(8, 3, 10, p);
        double prev = 1e300;
        for (double u = 0.01; u <= 1.0; u += 0.01) {
            double e = hull.estimate(u);
            CHECK(e <= prev + 1e-9);
            CHECK(e >= 0.0);
            prev = e;
        }
    }
}

TEST_CASE("hull validity: convex, below the lower bound, anchored at (1,0)", "[est_coordinated]") {
    for (double tau : {10.0}) {
        for (double p : {0.5, 1.0, 2.0, 3.0}) {
            for (auto v : std::vector<std::vector<double>>{{8, 3}, {15, 3}, {40, 15}, {8, 0}, {11, 9}}) {
                auto hull = v_optimal_hull(v[0], v[1], tau, p);
                CHECK(hull.height(1.0) == Approx(0.0).margin(1e-12));
                CHECK(hull.height(0.0) == Approx(std::pow(v[0] - v[1], p)).epsilon(1e-9));
                std::vector<double> vv{v[0], v[1]};
                std::vector<double> tt{tau, tau};
                double prev_est = 1e300;
                for (double u = 0.005; u < 1.0; u += 0.005) {
                    // H <= lower bound function pointwise
                    CHECK(hull.height(u) <= lower_bound_rg_at(vv, tt, u, p) + 1e-9);
                    // convexity: -H' = estimate is non-increasing
                    double e = hull.estimate(u);
                    CHECK(e <= prev_est + 1e-9);
                    prev_est = e;
                }
            }
        }
    }
}

TEST_CASE("minimum expected square via direct integration", "[est_coordinated]") {
    for (double p : {0.5, 1.0, 2.0, 3.0}) {
        for (auto v : std::vector<std::vector<double>>{{8, 3}, {15, 3}, {8, 0}, {40, 15}}) {
            auto hull = v_optimal_hull(v[0], v[1], 10.0, p);
            double direct = oracle::integrate01(
                [&](double u) {
                    double e = hull.estimate(u);
                    return e * e;
                },
                {v[1] / 10.0, v[0] / 10.0, hull.alpha});
            CHECK(min_expected_square(v[0], v[1], 10.0, p) == Approx(direct).epsilon(1e-8));
        }
    }
}

TEST_CASE("L estimator variance competitiveness (max <= tau)", "[est_coordinated]") {
    // ratios reach 2 (p=1) and 2.5 (p=2) but never exceed them
    double worst1 = 0.0, worst2 = 0.0;
    for (double tau : {10.0, 25.0}) {
        for (double m : {0.3, 1.0, 3.0, 8.0, 9.99}) {
            for (double n : {0.0, 0.3, 1.0, 3.0, 8.0}) {
                if (n >= m || m > tau) continue;
                for (int p : {1, 2}) {
                    double e2 = var_rg_l_coordinated(m, n, tau, p) + std::pow(m - n, 2.0 * p);
                    double ratio = e2 / min_expected_square(m, n, tau, p);
                    (p == 1 ? worst1 : worst2) = std::max(p == 1 ? worst1 : worst2, ratio);
                }
            }
        }
    }
    CHECK(worst1 <= 2.0 + 1e-3);
    CHECK(worst2 <= 2.5 + 1e-3);
    CHECK(worst1 > 1.9);  // the bound is tight
    CHECK(worst2 > 2.4);
}

TEST_CASE("U beats L exactly below the crossover ratio", "[est_coordinated]") {
    // smoke check at max/tau = 0.25, p = 1: crossing near 0.285
    const double tau = 100.0, m = 25.0;
    auto diff = [&](double rho) {
        double n = rho * m;
        double varU = expected_square_u_coordinated(m, n, tau, 1.0) - std::pow(m - n, 2.0);
        double varL = var_rg_l_coordinated(m, n, tau, 1);
        return varU - varL;
    };
    CHECK(diff(0.20) < 0.0);
    CHECK(diff(0.35) > 0.0);
}
