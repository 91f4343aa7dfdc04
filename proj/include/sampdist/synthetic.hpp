#pragma once

// Synthetic key-value instances: Zipf-distributed values plus a
// cross-instance perturbation model (multiplicative noise and key
// churn) so both small- and large-relative-difference regimes can be
// exercised.  Fully deterministic given the generator seed.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "instance.hpp"

namespace sampdist {

struct SyntheticSpec {
    std::size_t keys = 1000;
    double zipf_exponent = 1.0;
    double scale = 1000.0;       // value of the heaviest key
    double noise = 0.0;          // multiplicative noise: v2 = v1 * (1 + U(-noise, noise))
    double delete_rate = 0.0;    // fraction of keys dropped from instance 2
    double insert_rate = 0.0;    // fraction of extra keys present only in instance 2
    std::uint64_t seed = 1;
};

inline std::string synth_key(std::size_t rank) {
    char buf[24];
    int len = std::snprintf(buf, sizeof buf, "k%08zu", rank);
    return std::string(buf, static_cast<std::size_t>(len));
}

inline Instance zipf_instance(std::uint32_t id, std::size_t keys, double exponent, double scale) {
    Instance inst(id);
    for (std::size_t r = 1; r <= keys; ++r)
        inst.add(synth_key(r), scale / std::pow(static_cast<double>(r), exponent));
    inst.finish();
    return inst;
}

// Builds the instance pair (ids 1 and 2): instance 1 is the plain Zipf
// instance, instance 2 applies the perturbation model.
inline std::pair<Instance, Instance> synthetic_pair(const SyntheticSpec& spec) {
    Instance a = zipf_instance(1, spec.keys, spec.zipf_exponent, spec.scale);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Instance b(2);
    for (std::size_t r = 1; r <= spec.keys; ++r) {
        double v = spec.scale / std::pow(static_cast<double>(r), spec.zipf_exponent);
        double roll = unif(rng);
        double eps = unif(rng);
        if (roll < spec.delete_rate) continue;
        double noisy = v * (1.0 + spec.noise * (2.0 * eps - 1.0));
        if (noisy > 0.0) b.add(synth_key(r), noisy);
    }
    if (spec.insert_rate > 0.0) {
        std::size_t extra = static_cast<std::size_t>(spec.insert_rate * static_cast<double>(spec.keys));
        for (std::size_t i = 1; i <= extra; ++i) {
            double rank = 1.0 + unif(rng) * static_cast<double>(spec.keys - 1);
            double v = spec.scale / std::pow(rank, spec.zipf_exponent);
            b.add("x" + synth_key(i), v);
        }
    }
    b.finish();
    return {std::move(a), std::move(b)};
}

} // namespace sampdist
