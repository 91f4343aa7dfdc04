#pragma once

// Evaluation pipeline: analytic per-key variances (closed forms where the
// tables cover them, quadrature otherwise), Monte Carlo CV^2 sweeps, and the
// plot-ready CSV emitter.  Everything is deterministic given the seed list.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "oc.hpp"
#include "query.hpp"
#include "synthetic.hpp"

namespace sampdist {

// ---------------------------------------------------------------------------
// Numeric per-key second moments (true data available)

// Coordinated outcome of a two-value key at randomization u, from true data.
inline Outcome outcome_at(double v1, double v2, double tau1, double tau2, double u) {
    Outcome o;
    o.mode = Mode::coordinated;
    o.inst.resize(2);
    o.inst[0] = {v1 > 0.0 && v1 >= tau1 * u ? std::optional<double>(v1) : std::nullopt, u, tau1};
    o.inst[1] = {v2 > 0.0 && v2 >= tau2 * u ? std::optional<double>(v2) : std::nullopt, u, tau2};
    return o;
}

inline double expected_square_coord_l(double v1, double v2, double tau1, double tau2, double p) {
    if (v1 == 0.0 && v2 == 0.0) return 0.0;
    auto f = [&](double u) {
        double e = rg_l_coordinated(outcome_at(v1, v2, tau1, tau2, u), p);
        return e * e;
    };
    return integrate_pieces(f, 0.0, 1.0, {v1 / tau1, v2 / tau2}, 1e-12, 1e-10);
}

// E[est^2] of the independent-sample estimator: the seed of a revealed
// coordinate only matters through membership, so the double integral reduces
// to membership probabilities times one-dimensional integrals.
inline double expected_square_ind_l(double v1, double v2, double tau1, double tau2, double p) {
    if (v1 == 0.0 && v2 == 0.0) return 0.0;
    const double a1 = std::min(1.0, v1 / tau1);
    const double a2 = std::min(1.0, v2 / tau2);
    IndLParams params{p, tau1, tau2};
    double e2 = 0.0;
    if (a1 > 0.0 && a2 > 0.0) {
        double both = rg_l_independent({v1, v2}, params);
        e2 += a1 * a2 * both * both;
    }
    if (a1 > 0.0 && a2 < 1.0) {
        auto f = [&](double u) {
            double e = rg_l_independent({v1, std::min(u * tau2, v1)}, params);
            return e * e;
        };
        e2 += a1 * integrate_pieces(f, a2, 1.0, {v1 / tau2}, 1e-12, 1e-10);
    }
    if (a2 > 0.0 && a1 < 1.0) {
        auto f = [&](double u) {
            double e = rg_l_independent({std::min(u * tau1, v2), v2}, params);
            return e * e;
        };
        e2 += a2 * integrate_pieces(f, a1, 1.0, {v2 / tau1}, 1e-12, 1e-10);
    }
    return e2;
}

// Per-key variance of the chosen estimator under Poisson thresholds
// (tau1, tau2).  Closed forms where the tables cover the case, quadrature
// otherwise.  Throws when the estimator is undefined for the configuration.
inline double per_key_variance(double v1, double v2, double tau1, double tau2, double p,
                               EstimatorKind kind, const OCTable* oc = nullptr) {
    const double rg = std::abs(v1 - v2);
    const double mean = std::pow(rg, p);
    const double hi = std::max(v1, v2), lo = std::min(v1, v2);
    switch (kind) {
        case EstimatorKind::ind_l:
            if (tau1 == tau2 && (p == 1.0 || p == 2.0))
                return var_rg_l_independent_equal_tau(hi, lo, tau1, static_cast<int>(p));
            return expected_square_ind_l(v1, v2, tau1, tau2, p) - mean * mean;
        case EstimatorKind::coord_l:
            if (tau1 == tau2 && (p == 1.0 || p == 2.0))
                return var_rg_l_coordinated(hi, lo, tau1, static_cast<int>(p));
            return expected_square_coord_l(v1, v2, tau1, tau2, p) - mean * mean;
        case EstimatorKind::coord_u:
            if (tau1 != tau2)
                throw std::invalid_argument("per_key_variance: coord_u needs equal thresholds");
            return expected_square_u_coordinated(hi, lo, tau1, p) - mean * mean;
        case EstimatorKind::coord_oc: {
            if (tau1 != tau2)
                throw std::invalid_argument("per_key_variance: coord_oc needs equal thresholds");
            if (!oc) throw std::invalid_argument("per_key_variance: no OC table");
            if (hi == 0.0) return 0.0;
            if (hi > tau1) throw std::domain_error("per_key_variance: OC covers max(v) <= tau only");
            double e2 = std::pow(hi, 2.0 * p - 1.0) * tau1 * oc->expected_square_normalized(lo / hi);
            return e2 - mean * mean;
        }
    }
    return 0.0;
}

// Squared coefficient of variation of the L_p^p sum estimate over selected
// keys, from true data: sum of per-key variances over the squared sum of
// per-key ranges.  Undefined (throws) when the true distance is zero.
inline double cv2_analytic(const Instance& a, const Instance& b, const KeyPredicate& pred,
                           double tau1, double tau2, double p, EstimatorKind kind,
                           const OCTable* oc = nullptr) {
    double total = true_lpp(a, b, pred, p);
    if (total == 0.0)
        throw std::invalid_argument("cv2_analytic: zero distance, CV^2 undefined");
    double var_sum = 0.0;
    auto ia = a.entries().begin(), ea = a.entries().end();
    auto ib = b.entries().begin(), eb = b.entries().end();
    auto add = [&](const std::string& key, double v1, double v2) {
        if (pred.matches(key)) var_sum += per_key_variance(v1, v2, tau1, tau2, p, kind, oc);
    };
    while (ia != ea || ib != eb) {
        if (ib == eb || (ia != ea && ia->key < ib->key)) {
            add(ia->key, ia->value, 0.0);
            ++ia;
        } else if (ia == ea || ib->key < ia->key) {
            add(ib->key, 0.0, ib->value);
            ++ib;
        } else {
            add(ia->key, ia->value, ib->value);
            ++ia;
            ++ib;
        }
    }
    return var_sum / (total * total);
}

// ---------------------------------------------------------------------------
// Experiment configuration and the Monte Carlo sweep

struct SchemeSweep {
    Scheme kind = Scheme::poisson_pps;
    std::vector<double> fractions;  // target expected sampled fraction (shared T)
    std::vector<double> thresholds; // explicit shared T values
    std::vector<std::size_t> ks;    // priority sample sizes
};

struct ExperimentConfig {
    std::vector<std::string> instance_paths;
    std::optional<SyntheticSpec> synthetic;
    SchemeSweep scheme;
    std::vector<double> ps{1.0};
    std::vector<EstimatorKind> estimators{EstimatorKind::coord_l};
    KeyPredicate predicate;
    std::size_t trials = 100;
    std::uint64_t hash_seed = 1;
    std::vector<std::uint64_t> hash_seeds;  // explicit list; overrides hash_seed+t
    int oc_resolution = 2000;
    std::string output;

    std::uint64_t seed_for_trial(std::size_t t) const {
        if (!hash_seeds.empty()) return hash_seeds[t % hash_seeds.size()];
        return hash_seed + t;
    }
};

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    ExperimentConfig c;
    if (j.contains("instances")) c.instance_paths = j.at("instances").get<std::vector<std::string>>();
    if (j.contains("synthetic")) {
        const auto& s = j.at("synthetic");
        SyntheticSpec spec;
        spec.keys = s.value("keys", spec.keys);
        spec.zipf_exponent = s.value("zipf", spec.zipf_exponent);
        spec.scale = s.value("scale", spec.scale);
        spec.noise = s.value("noise", spec.noise);
        spec.delete_rate = s.value("delete", spec.delete_rate);
        spec.insert_rate = s.value("insert", spec.insert_rate);
        spec.seed = s.value("seed", spec.seed);
        c.synthetic = spec;
    }
    const auto& sch = j.at("scheme");
    std::string kind = sch.value("kind", "poisson_pps");
    if (kind == "poisson_pps") c.scheme.kind = Scheme::poisson_pps;
    else if (kind == "priority") c.scheme.kind = Scheme::priority;
    else throw std::invalid_argument("config: unknown scheme kind '" + kind + "'");
    if (sch.contains("fractions")) c.scheme.fractions = sch.at("fractions").get<std::vector<double>>();
    if (sch.contains("T")) c.scheme.thresholds = sch.at("T").get<std::vector<double>>();
    if (sch.contains("k")) c.scheme.ks = sch.at("k").get<std::vector<std::size_t>>();
    if (j.contains("p")) c.ps = j.at("p").get<std::vector<double>>();
    if (j.contains("estimators")) {
        c.estimators.clear();
        for (const auto& e : j.at("estimators")) c.estimators.push_back(parse_estimator(e.get<std::string>()));
    }
    c.predicate = KeyPredicate::parse(j.value("predicate", "all"));
    c.trials = j.value("trials", c.trials);
    c.hash_seed = j.value("hash_seed", c.hash_seed);
    if (j.contains("hash_seeds")) c.hash_seeds = j.at("hash_seeds").get<std::vector<std::uint64_t>>();
    c.oc_resolution = j.value("oc_resolution", c.oc_resolution);
    c.output = j.value("output", c.output);
    if (c.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    nlohmann::json j;
    in >> j;
    return parse_config(j);
}

// Shared Poisson threshold hitting a target expected sampled fraction of the
// positive keys of both instances together.
inline double shared_threshold_for_fraction(const Instance& a, const Instance& b, double fraction) {
    double target = fraction * static_cast<double>(a.positive_count() + b.positive_count());
    if (!(target > 0.0))
        throw std::invalid_argument("shared_threshold_for_fraction: fraction too small");
    double lo = std::min(a.min_positive(), b.min_positive());
    double hi = std::max(a.total_value() + b.total_value(), lo);
    auto size_at = [&](double T) { return expected_poisson_size(a, T) + expected_poisson_size(b, T); };
    if (size_at(lo) <= target) return lo;
    for (int i = 0; i < 200 && (hi - lo) > 1e-12 * hi; ++i) {
        double mid = 0.5 * (lo + hi);
        if (size_at(mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct EvalRow {
    std::string scheme;
    double param = 0.0;             // fraction, T, or k
    double sampled_fraction = 0.0;  // measured
    double p = 1.0;
    EstimatorKind estimator = EstimatorKind::coord_l;
    double mean_estimate = 0.0;
    double true_value = 0.0;
    std::optional<double> cv2_analytic;
    double cv2_empirical = 0.0;
};

// Monte Carlo sweep over the configured scheme parameters, p values and
// estimators.  Empirical CV^2 is the mean squared error over trials divided
// by the squared true value (the estimators are unbiased, so this converges
// to the variance-based CV^2).
inline std::vector<EvalRow> evaluate(const ExperimentConfig& cfg) {
    Instance a, b;
    if (cfg.synthetic) {
        auto pair = synthetic_pair(*cfg.synthetic);
        a = std::move(pair.first);
        b = std::move(pair.second);
    } else {
        if (cfg.instance_paths.size() != 2)
            throw std::invalid_argument("evaluate: exactly two instance paths required");
        std::ifstream fa(cfg.instance_paths[0]), fb(cfg.instance_paths[1]);
        if (!fa || !fb) throw std::runtime_error("evaluate: cannot open instance file");
        a = ingest(fa, 1);
        b = ingest(fb, 2);
    }

    bool need_ind = false, need_coord = false;
    for (auto e : cfg.estimators)
        (e == EstimatorKind::ind_l ? need_ind : need_coord) = true;

    std::map<double, OCTable> oc_tables;
    for (auto e : cfg.estimators)
        if (e == EstimatorKind::coord_oc)
            for (double p : cfg.ps)
                if (!oc_tables.count(p)) oc_tables.emplace(p, oc_build(p, cfg.oc_resolution));

    // support size for the sampled-fraction report
    std::size_t support = 0;
    {
        KeyPredicate pred = cfg.predicate;
        auto ia = a.entries().begin(), ea = a.entries().end();
        auto ib = b.entries().begin(), eb = b.entries().end();
        while (ia != ea || ib != eb) {
            if (ib == eb || (ia != ea && ia->key < ib->key)) support += pred.matches(ia->key), ++ia;
            else if (ia == ea || ib->key < ia->key) support += pred.matches(ib->key), ++ib;
            else support += pred.matches(ia->key), ++ia, ++ib;
        }
    }

    struct ParamCase {
        double param;
        double T = 0.0;
        std::size_t k = 0;
    };
    std::vector<ParamCase> cases;
    for (double f : cfg.scheme.fractions)
        cases.push_back({f, shared_threshold_for_fraction(a, b, f), 0});
    for (double T : cfg.scheme.thresholds) cases.push_back({T, T, 0});
    for (std::size_t k : cfg.scheme.ks) cases.push_back({static_cast<double>(k), 0.0, k});

    std::vector<EvalRow> rows;
    for (const auto& pc : cases) {
        struct Acc {
            double sum_est = 0.0;
            double sum_sq_err = 0.0;
        };
        std::map<std::pair<double, EstimatorKind>, Acc> accs;
        double sampled_keys = 0.0;
        std::size_t sampled_samples = 0;
        std::map<double, double> truths;
        for (double p : cfg.ps) truths[p] = true_lpp(a, b, cfg.predicate, p);

        for (std::size_t t = 0; t < cfg.trials; ++t) {
            std::uint64_t seed = cfg.seed_for_trial(t);
            auto make = [&](const Instance& inst, Mode mode) {
                HashConfig hc{seed, mode};
                if (cfg.scheme.kind == Scheme::poisson_pps) return poisson_pps_sample(inst, pc.T, hc);
                return priority_sample(inst, pc.k, hc);
            };
            std::vector<InstanceSample> coord, ind;
            if (need_coord) coord = {make(a, Mode::coordinated), make(b, Mode::coordinated)};
            if (need_ind) ind = {make(a, Mode::independent), make(b, Mode::independent)};
            const auto& any = need_coord ? coord : ind;
            for (const auto& s : any) {
                std::size_t m = 0;
                for (const auto& e : s.sampled) m += cfg.predicate.matches(e.key);
                sampled_keys += static_cast<double>(m);
                ++sampled_samples;
            }
            for (double p : cfg.ps) {
                double truth = truths.at(p);
                for (auto kind : cfg.estimators) {
                    const auto& samples = kind == EstimatorKind::ind_l ? ind : coord;
                    const OCTable* oc =
                        kind == EstimatorKind::coord_oc ? &oc_tables.at(p) : nullptr;
                    double est = estimate_lpp(samples, cfg.predicate, p, kind, oc).estimate;
                    auto& acc = accs[{p, kind}];
                    acc.sum_est += est;
                    acc.sum_sq_err += (est - truth) * (est - truth);
                }
            }
        }

        double fraction = sampled_keys / (static_cast<double>(sampled_samples) *
                                          static_cast<double>(support ? support : 1));
        for (double p : cfg.ps) {
            double truth = truths.at(p);
            for (auto kind : cfg.estimators) {
                const auto& acc = accs.at({p, kind});
                EvalRow row;
                row.scheme = scheme_name(cfg.scheme.kind);
                row.param = pc.param;
                row.sampled_fraction = fraction;
                row.p = p;
                row.estimator = kind;
                row.mean_estimate = acc.sum_est / static_cast<double>(cfg.trials);
                row.true_value = truth;
                row.cv2_empirical = acc.sum_sq_err / static_cast<double>(cfg.trials) / (truth * truth);
                if (cfg.scheme.kind == Scheme::poisson_pps) {
                    const OCTable* oc =
                        kind == EstimatorKind::coord_oc ? &oc_tables.at(p) : nullptr;
                    try {
                        row.cv2_analytic = cv2_analytic(a, b, cfg.predicate, pc.T, pc.T, p, kind, oc);
                    } catch (const std::exception&) {
                        // analytic variance undefined here (e.g. OC with max > tau)
                    }
                }
                rows.push_back(row);
            }
        }
    }
    return rows;
}

inline void write_csv(const std::vector<EvalRow>& rows, std::ostream& out) {
    out << "scheme,param,sampled_fraction,p,estimator,estimate,true_value,cv2_analytic,cv2_empirical\n";
    for (const auto& r : rows) {
        out << r.scheme << ',' << detail::fmt_double(r.param) << ','
            << detail::fmt_double(r.sampled_fraction) << ',' << detail::fmt_double(r.p) << ','
            << estimator_name(r.estimator) << ',' << detail::fmt_double(r.mean_estimate) << ','
            << detail::fmt_double(r.true_value) << ',';
        if (r.cv2_analytic) out << detail::fmt_double(*r.cv2_analytic);
        out << ',' << detail::fmt_double(r.cv2_empirical) << '\n';
    }
}

inline void run(const ExperimentConfig& cfg, std::ostream& out) { write_csv(evaluate(cfg), out); }

} // namespace sampdist
