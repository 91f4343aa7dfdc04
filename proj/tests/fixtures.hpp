#pragma once

// Shared test fixtures: the two 6-key instances with their printed seed
// assignment, and the 7-key variant with the all-zero key that the example
// queries quote results for.

#include <map>
#include <string>
#include <vector>

#include "sampdist/instance.hpp"
#include "sampdist/sampler.hpp"

namespace fixtures {

// keys "1".."6", instance 1: (5,0,4,5,8,7), instance 2: (7,10,3,0,6,7)
inline sampdist::Instance inst1_numeric() {
    return sampdist::Instance(1, {{"1", 5}, {"2", 0}, {"3", 4}, {"4", 5}, {"5", 8}, {"6", 7}});
}
inline sampdist::Instance inst2_numeric() {
    return sampdist::Instance(2, {{"1", 7}, {"2", 10}, {"3", 3}, {"4", 0}, {"5", 6}, {"6", 7}});
}

inline const std::vector<double>& seeds_u1() {
    static const std::vector<double> u{0.23, 0.29, 0.84, 0.15, 0.58, 0.19};
    return u;
}
inline const std::vector<double>& seeds_u2() {
    static const std::vector<double> u{0.81, 0.17, 0.48, 0.36, 0.15, 0.49};
    return u;
}

// Printed seeds: independent uses u1 for instance 1 and u2 for instance 2;
// coordinated reuses u1 everywhere.
inline sampdist::SeedFn printed_seeds(bool coordinated) {
    return [coordinated](std::string_view key, std::uint32_t instance) {
        std::size_t idx = static_cast<std::size_t>(key[0] - '1');
        if (coordinated || instance == 1) return seeds_u1()[idx];
        return seeds_u2()[idx];
    };
}

// Lettered 7-key instances behind the example queries: keys a..g with an
// all-zero key e; L1(all)=20, L2^2(all)=134, L1({d,e,f})=7, L2^2({a,e})=4.
inline sampdist::Instance inst1_letters() {
    return sampdist::Instance(
        1, {{"a", 5}, {"b", 0}, {"c", 4}, {"d", 5}, {"e", 0}, {"f", 8}, {"g", 7}});
}
inline sampdist::Instance inst2_letters() {
    return sampdist::Instance(
        2, {{"a", 7}, {"b", 10}, {"c", 3}, {"d", 0}, {"e", 0}, {"f", 6}, {"g", 7}});
}

inline std::vector<std::string> sampled_keys(const sampdist::InstanceSample& s) {
    std::vector<std::string> keys;
    for (const auto& e : s.sampled) keys.push_back(e.key);
    return keys;
}

} // namespace fixtures
