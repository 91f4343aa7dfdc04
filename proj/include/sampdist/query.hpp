#pragma once

// Sum estimation of L_p^p over predicate-selected keys.  Keys sampled in no
// instance contribute zero and are never enumerated, so the cost scales with
// the samples, not the key universe.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "est_coordinated.hpp"
#include "est_independent.hpp"
#include "oc.hpp"
#include "outcome.hpp"
#include "predicate.hpp"

namespace sampdist {

enum class EstimatorKind { ind_l, coord_l, coord_u, coord_oc };

inline const char* estimator_name(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::ind_l: return "ind_l";
        case EstimatorKind::coord_l: return "coord_l";
        case EstimatorKind::coord_u: return "coord_u";
        case EstimatorKind::coord_oc: return "coord_oc";
    }
    return "?";
}

inline EstimatorKind parse_estimator(std::string_view s) {
    if (s == "ind_l" || s == "ind-l") return EstimatorKind::ind_l;
    if (s == "coord_l" || s == "coord-l") return EstimatorKind::coord_l;
    if (s == "coord_u" || s == "coord-u") return EstimatorKind::coord_u;
    if (s == "coord_oc" || s == "coord-oc") return EstimatorKind::coord_oc;
    throw std::invalid_argument("unknown estimator '" + std::string(s) + "'");
}

struct EstimateReport {
    double estimate = 0.0;
    EstimatorKind estimator = EstimatorKind::coord_l;
    double p = 1.0;
    std::vector<std::uint32_t> instance_ids;
    std::size_t contributing_keys = 0;
    std::optional<double> analytic_variance;
    bool biased_root = false;  // set on L_p reports: the p-th root of an unbiased estimate is biased
    std::string predicate = "all";
    std::string direction;  // "plus"/"minus" for one-sided reports

    std::string to_line() const {
        std::ostringstream os;
        os << "{\"estimate\":" << detail::fmt_double(estimate)
           << ",\"estimator\":\"" << estimator_name(estimator) << '"'
           << ",\"p\":" << detail::fmt_double(p) << ",\"instances\":[";
        for (std::size_t i = 0; i < instance_ids.size(); ++i)
            os << (i ? "," : "") << instance_ids[i];
        os << "],\"keys\":" << contributing_keys << ",\"predicate\":\"" << predicate << '"';
        if (!direction.empty()) os << ",\"direction\":\"" << direction << '"';
        if (analytic_variance) os << ",\"analytic_variance\":" << detail::fmt_double(*analytic_variance);
        if (biased_root) os << ",\"biased_root\":true";
        os << "}";
        return os.str();
    }
};

// Per-key estimate dispatch.
inline double rg_estimate(const Outcome& o, double p, EstimatorKind kind, const OCTable* oc = nullptr) {
    switch (kind) {
        case EstimatorKind::ind_l: {
            DeterminingVector phi = determining_vector(o);
            return rg_l_independent(phi, IndLParams{p, o.inst[0].tau, o.inst[1].tau});
        }
        case EstimatorKind::coord_l:
            return rg_l_coordinated(o, p);
        case EstimatorKind::coord_u: {
            if (!o.equal_tau())
                throw std::invalid_argument("coord_u: estimator requires equal thresholds per key");
            double tau = o.inst.front().tau;
            return rg_u_coordinated(coord_view(o, tau), tau, p);
        }
        case EstimatorKind::coord_oc: {
            if (!oc) throw std::invalid_argument("coord_oc: no OC table supplied");
            if (oc->p != p) throw std::invalid_argument("coord_oc: table built for a different p");
            if (!o.equal_tau())
                throw std::invalid_argument("coord_oc: estimator requires equal thresholds per key");
            double tau = o.inst.front().tau;
            return oc_estimate(*oc, coord_view(o, tau), tau);
        }
    }
    return 0.0;
}

namespace detail {

// Deterministic pairwise reduction; the result depends only on the element
// order, never on chunking.
inline double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline std::vector<std::string> keys_sampled_anywhere(std::span<const InstanceSample> samples,
                                                      const KeyPredicate& pred) {
    std::vector<std::string> keys;
    for (const auto& s : samples)
        for (const auto& e : s.sampled)
            if (pred.matches(e.key)) keys.push_back(e.key);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
}

inline void check_mode(std::span<const InstanceSample> samples, EstimatorKind kind) {
    if (samples.size() < 2) throw std::invalid_argument("estimate: need at least two instance samples");
    Mode mode = samples.front().hash.mode;
    for (const auto& s : samples)
        if (s.hash.mode != mode) throw std::invalid_argument("estimate: samples mix modes");
    if (kind == EstimatorKind::ind_l) {
        if (mode != Mode::independent)
            throw std::invalid_argument("estimate: ind_l requires independently sampled instances");
        if (samples.size() != 2)
            throw std::invalid_argument("estimate: ind_l is defined for exactly two instances");
    } else if (mode != Mode::coordinated) {
        throw std::invalid_argument("estimate: coord_* estimators require coordinated samples");
    }
}

} // namespace detail

inline EstimateReport estimate_lpp(std::span<const InstanceSample> samples, const KeyPredicate& pred,
                                   double p, EstimatorKind kind, const OCTable* oc = nullptr,
                                   const SeedFn* seed_override = nullptr) {
    detail::check_mode(samples, kind);
    SeedFn seed = seed_override ? *seed_override : seed_fn(samples.front().hash);
    EstimateReport rep;
    rep.estimator = kind;
    rep.p = p;
    rep.predicate = pred.describe();
    for (const auto& s : samples) rep.instance_ids.push_back(s.instance_id);
    std::vector<double> terms;
    for (const auto& key : detail::keys_sampled_anywhere(samples, pred)) {
        Outcome o = build_outcome(samples, key, seed);
        terms.push_back(rg_estimate(o, p, kind, oc));
    }
    rep.contributing_keys = terms.size();
    rep.estimate = detail::pairwise_sum(terms);
    return rep;
}

inline EstimateReport estimate_lp(std::span<const InstanceSample> samples, const KeyPredicate& pred,
                                  double p, EstimatorKind kind, const OCTable* oc = nullptr,
                                  const SeedFn* seed_override = nullptr) {
    EstimateReport rep = estimate_lpp(samples, pred, p, kind, oc, seed_override);
    rep.estimate = std::pow(rep.estimate, 1.0 / p);
    rep.biased_root = true;
    return rep;
}

inline EstimateReport estimate_one_sided(std::span<const InstanceSample> samples,
                                         const KeyPredicate& pred, double p, Direction dir,
                                         EstimatorKind kind, const OCTable* oc = nullptr,
                                         const SeedFn* seed_override = nullptr) {
    detail::check_mode(samples, kind);
    if (samples.size() != 2)
        throw std::invalid_argument("estimate_one_sided: defined for exactly two instances");
    SeedFn seed = seed_override ? *seed_override : seed_fn(samples.front().hash);
    EstimateReport rep;
    rep.estimator = kind;
    rep.p = p;
    rep.predicate = pred.describe();
    rep.direction = dir == Direction::plus ? "plus" : "minus";
    for (const auto& s : samples) rep.instance_ids.push_back(s.instance_id);
    std::vector<double> terms;
    for (const auto& key : detail::keys_sampled_anywhere(samples, pred)) {
        Outcome o = build_outcome(samples, key, seed);
        // zero unless every consistent vector lies strictly on the requested side
        terms.push_back(one_sided_determined(o, dir) ? rg_estimate(o, p, kind, oc) : 0.0);
    }
    rep.contributing_keys = terms.size();
    rep.estimate = detail::pairwise_sum(terms);
    return rep;
}

// Exact L_p^p over true data, for tests and evaluation.
inline double true_lpp(const Instance& a, const Instance& b, const KeyPredicate& pred, double p) {
    double sum = 0.0;
    auto ia = a.entries().begin(), ea = a.entries().end();
    auto ib = b.entries().begin(), eb = b.entries().end();
    auto add = [&](double va, double vb) {
        double lo = std::min(va, vb), hi = std::max(va, vb);
        if (hi > lo) sum += std::pow(hi - lo, p);
    };
    while (ia != ea || ib != eb) {
        if (ib == eb || (ia != ea && ia->key < ib->key)) {
            if (pred.matches(ia->key)) add(ia->value, 0.0);
            ++ia;
        } else if (ia == ea || ib->key < ia->key) {
            if (pred.matches(ib->key)) add(0.0, ib->value);
            ++ib;
        } else {
            if (pred.matches(ia->key)) add(ia->value, ib->value);
            ++ia;
            ++ib;
        }
    }
    return sum;
}

} // namespace sampdist
