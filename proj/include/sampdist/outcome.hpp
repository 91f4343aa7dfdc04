#pragma once

// Per-key, cross-instance view assembled from instance samples: the known
// values, seeds and effective thresholds that estimators consume, plus the
// consistent-vector machinery (lower bound function, determining vector).
//
// Closure convention: consistency checks use the closed form of the
// consistent set (non-strict inequality for unsampled bounds).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "sampler.hpp"

namespace sampdist {

struct OutcomeEntry {
    std::optional<double> value;  // present iff sampled
    double seed = 0.0;            // u in (0,1]
    double tau = 0.0;             // effective threshold
};

struct Outcome {
    Mode mode = Mode::coordinated;
    std::vector<OutcomeEntry> inst;

    std::size_t r() const { return inst.size(); }
    std::size_t sampled_count() const {
        std::size_t n = 0;
        for (const auto& e : inst) n += e.value.has_value();
        return n;
    }
    bool equal_tau() const {
        for (const auto& e : inst)
            if (e.tau != inst.front().tau) return false;
        return true;
    }
    // Strict upper bound u*tau on an unsampled value.
    double bound(std::size_t i) const { return inst[i].seed * inst[i].tau; }
};

inline Outcome build_outcome(std::span<const InstanceSample> samples, std::string_view key,
                             const SeedFn& seed) {
    if (samples.empty()) throw std::invalid_argument("build_outcome: no samples");
    Outcome o;
    o.mode = samples.front().hash.mode;
    o.inst.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.hash.mode != o.mode)
            throw std::invalid_argument("build_outcome: samples mix independent and coordinated modes");
        OutcomeEntry e;
        e.value = s.value_of(key);
        e.seed = seed(key, s.instance_id);
        e.tau = s.effective_threshold(key);
        o.inst.push_back(e);
    }
    return o;
}

inline Outcome build_outcome(std::span<const InstanceSample> samples, std::string_view key) {
    if (samples.empty()) throw std::invalid_argument("build_outcome: no samples");
    for (const auto& s : samples)
        if (!(s.hash == samples.front().hash))
            throw std::invalid_argument("build_outcome: samples disagree on hash configuration");
    return build_outcome(samples, key, seed_fn(samples.front().hash));
}

// Lower bound on the range over all vectors consistent with (v, tau, u):
// sampled set S = {i : v_i >= tau_i u}; the bound is
// max_{i in S} v_i - min{ min_{i in S} v_i, min_{i not in S} tau_i u }.
inline double lower_bound_rg_at(std::span<const double> v, std::span<const double> tau, double u,
                                double p) {
    double vmax = -1.0, vmin = std::numeric_limits<double>::infinity();
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] >= tau[i] * u) {
            vmax = std::max(vmax, v[i]);
            vmin = std::min(vmin, v[i]);
        } else {
            bound = std::min(bound, tau[i] * u);
        }
    }
    if (vmax < 0.0) return 0.0;  // nothing sampled
    double low = vmax - std::min(vmin, bound);
    return low <= 0.0 ? 0.0 : std::pow(low, p);
}

// Same bound evaluated on an assembled coordinated outcome.
inline double lower_bound_rg(const Outcome& o, double p) {
    if (o.mode != Mode::coordinated)
        throw std::invalid_argument("lower_bound_rg: outcome form requires coordinated samples");
    double vmax = -1.0, vmin = std::numeric_limits<double>::infinity();
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < o.inst.size(); ++i) {
        const auto& e = o.inst[i];
        if (e.value) {
            vmax = std::max(vmax, *e.value);
            vmin = std::min(vmin, *e.value);
        } else {
            bound = std::min(bound, o.bound(i));
        }
    }
    if (vmax < 0.0) return 0.0;
    double low = vmax - std::min(vmin, bound);
    return low <= 0.0 ? 0.0 : std::pow(low, p);
}

// True iff the closure of the consistent set contains a vector with all
// coordinates equal (range zero).  Works for any mode and r.
inline bool consistent_with_zero(const Outcome& o) {
    double vmax = -1.0, vmin = std::numeric_limits<double>::infinity();
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < o.inst.size(); ++i) {
        const auto& e = o.inst[i];
        if (e.value) {
            vmax = std::max(vmax, *e.value);
            vmin = std::min(vmin, *e.value);
        } else {
            bound = std::min(bound, o.bound(i));
        }
    }
    if (vmax < 0.0) return true;  // all coordinates unknown; the zero vector is consistent
    return vmax <= std::min(vmin, bound);
}

struct DeterminingVector {
    double phi1 = 0.0;
    double phi2 = 0.0;
};

// Range-minimal vector in the closure of the consistent set (r = 2).
inline DeterminingVector determining_vector(const Outcome& o) {
    if (o.r() != 2) throw std::invalid_argument("determining_vector: requires exactly two instances");
    const auto& a = o.inst[0];
    const auto& b = o.inst[1];
    if (a.value && b.value) return {*a.value, *b.value};
    if (a.value) return {*a.value, std::min(o.bound(1), *a.value)};
    if (b.value) return {std::min(o.bound(0), *b.value), *b.value};
    return {0.0, 0.0};
}

enum class Direction { plus, minus };

// True iff every vector in the (closure of the) consistent set satisfies
// v1 > v2 (plus) or v1 < v2 (minus) -- i.e. the one-sided contribution is
// certain to be the full range.
inline bool one_sided_determined(const Outcome& o, Direction dir) {
    if (o.r() != 2) throw std::invalid_argument("one_sided_determined: requires exactly two instances");
    const auto& a = o.inst[0];
    const auto& b = o.inst[1];
    double hi0 = a.value ? *a.value : o.bound(0);   // closure ceiling on v1
    double hi1 = b.value ? *b.value : o.bound(1);
    if (dir == Direction::plus)
        return a.value && *a.value > hi1;   // unknown v1 could be 0
    return b.value && *b.value > hi0;
}

} // namespace sampdist
