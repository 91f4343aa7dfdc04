#pragma once

// Poisson PPS and priority (bottom-k) sampling of an instance, plus the
// threshold bookkeeping the estimators need and a text serialization.
//
// Membership rules: Poisson keeps h iff v >= u*T (closed inequality);
// priority keeps the k keys with largest v/u, with T the (k+1)-th and
// T' the k-th largest priority.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hash.hpp"
#include "instance.hpp"

namespace sampdist {

enum class Scheme { poisson_pps, priority };

inline const char* scheme_name(Scheme s) {
    return s == Scheme::poisson_pps ? "poisson_pps" : "priority";
}

struct SampleSpec {
    Scheme scheme = Scheme::poisson_pps;
    double T = 0.0;       // poisson_pps
    std::size_t k = 0;    // priority
    HashConfig hash;
};

using SeedFn = std::function<double(std::string_view key, std::uint32_t instance)>;

inline SeedFn seed_fn(const HashConfig& cfg) {
    return [cfg](std::string_view key, std::uint32_t instance) { return seed_for(cfg, key, instance); };
}

struct InstanceSample {
    std::uint32_t instance_id = 0;
    Scheme scheme = Scheme::poisson_pps;
    double T = 0.0;        // poisson threshold, or the (k+1)-th largest priority
    double Tprime = 0.0;   // priority only: k-th largest priority
    std::size_t k = 0;     // priority only
    HashConfig hash;
    std::vector<Entry> sampled;   // sorted by key

    std::optional<double> value_of(std::string_view key) const {
        auto it = std::lower_bound(sampled.begin(), sampled.end(), key,
                                   [](const Entry& e, std::string_view k2) { return e.key < k2; });
        if (it != sampled.end() && it->key == key) return it->value;
        return std::nullopt;
    }

    bool contains(std::string_view key) const { return value_of(key).has_value(); }

    // Effective per-key threshold: for priority samples tau is T for sampled
    // keys and T' for the rest; for Poisson it is T for every key.
    double effective_threshold(std::string_view key) const {
        if (scheme == Scheme::poisson_pps) return T;
        return contains(key) ? T : Tprime;
    }
};

inline InstanceSample poisson_pps_sample(const Instance& inst, double T, const SeedFn& seed,
                                         const HashConfig& hash) {
    if (!(T > 0.0)) throw std::invalid_argument("poisson_pps_sample: T must be positive");
    InstanceSample s;
    s.instance_id = inst.id();
    s.scheme = Scheme::poisson_pps;
    s.T = T;
    s.hash = hash;
    for (const auto& e : inst.entries()) {
        double u = seed(e.key, inst.id());
        if (e.value >= u * T) s.sampled.push_back(e);
    }
    return s;
}

inline InstanceSample poisson_pps_sample(const Instance& inst, double T, const HashConfig& hash) {
    return poisson_pps_sample(inst, T, seed_fn(hash), hash);
}

inline InstanceSample priority_sample(const Instance& inst, std::size_t k, const SeedFn& seed,
                                      const HashConfig& hash) {
    if (k == 0) throw std::invalid_argument("priority_sample: k must be positive");
    if (inst.positive_count() < k + 1)
        throw std::invalid_argument("priority_sample: need at least k+1 positive entries (k=" +
                                    std::to_string(k) + ", have " +
                                    std::to_string(inst.positive_count()) + ")");
    struct Ranked {
        double priority;
        const Entry* entry;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(inst.positive_count());
    for (const auto& e : inst.entries()) {
        double u = seed(e.key, inst.id());
        ranked.push_back({e.value / u, &e});
    }
    // Ties broken by lexicographic key order so the sample is deterministic.
    auto better = [](const Ranked& a, const Ranked& b) {
        if (a.priority != b.priority) return a.priority > b.priority;
        return a.entry->key < b.entry->key;
    };
    std::nth_element(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end(), better);
    // With `better` as the ordering, max_element over the top-k block is the
    // worst of the retained keys, i.e. the k-th largest priority.
    auto kth = std::max_element(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), better);
    InstanceSample s;
    s.instance_id = inst.id();
    s.scheme = Scheme::priority;
    s.k = k;
    s.Tprime = kth->priority;   // k-th largest priority
    s.T = ranked[k].priority;   // (k+1)-th largest priority
    s.hash = hash;
    s.sampled.reserve(k);
    for (std::size_t i = 0; i < k; ++i) s.sampled.push_back(*ranked[i].entry);
    std::sort(s.sampled.begin(), s.sampled.end(), entry_key_less);
    return s;
}

inline InstanceSample priority_sample(const Instance& inst, std::size_t k, const HashConfig& hash) {
    return priority_sample(inst, k, seed_fn(hash), hash);
}

inline double expected_poisson_size(const Instance& inst, double T) {
    double s = 0.0;
    for (const auto& e : inst.entries()) s += std::min(1.0, e.value / T);
    return s;
}

// Solves sum_h min{1, v_h/T} = target for T by bisection; the sum is
// non-increasing in T, so the bracket [min positive, sum v] always works.
inline double pps_threshold_for_expected_size(const Instance& inst, double target) {
    const double n = static_cast<double>(inst.positive_count());
    if (!(target > 0.0) || target > n)
        throw std::invalid_argument("pps_threshold_for_expected_size: target must be in (0, #positive]");
    double lo = inst.min_positive();
    if (expected_poisson_size(inst, lo) <= target) return lo;  // target == n
    double hi = std::max(inst.total_value(), lo);
    while (expected_poisson_size(inst, hi) > target) hi *= 2.0;
    for (int i = 0; i < 200 && (hi - lo) > 1e-12 * hi; ++i) {
        double mid = 0.5 * (lo + hi);
        if (expected_poisson_size(inst, mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    // f(hi) <= target <= f(lo); final refinement by secant-free midpoint
    return 0.5 * (lo + hi);
}

namespace detail {

inline std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::invalid_argument("bad number '" + std::string(s) + "'");
    return v;
}

} // namespace detail

inline constexpr const char* kSampleFormat = "sampdist-sample v1";

inline void write_sample(const InstanceSample& s, std::ostream& out) {
    out << "#" << kSampleFormat << "\n";
    out << "#scheme " << scheme_name(s.scheme) << "\n";
    if (s.scheme == Scheme::poisson_pps) {
        out << "#T " << detail::fmt_double(s.T) << "\n";
    } else {
        out << "#k " << s.k << "\n";
        out << "#T " << detail::fmt_double(s.T) << "\n";
        out << "#Tprime " << detail::fmt_double(s.Tprime) << "\n";
    }
    out << "#instance " << s.instance_id << "\n";
    out << "#hash " << kHashName << " v" << kHashVersion << "\n";
    out << "#hash-seed " << s.hash.global_seed << "\n";
    out << "#mode " << mode_name(s.hash.mode) << "\n";
    for (const auto& e : s.sampled) out << e.key << '\t' << detail::fmt_double(e.value) << '\n';
}

inline InstanceSample read_sample(std::istream& in) {
    InstanceSample s;
    std::string line;
    bool saw_format = false;
    while (in.peek() == '#' && std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view v(line);
        v.remove_prefix(1);
        auto field = [&](std::string_view name) -> std::optional<std::string_view> {
            if (v.substr(0, name.size()) == name && v.size() > name.size() && v[name.size()] == ' ')
                return v.substr(name.size() + 1);
            return std::nullopt;
        };
        if (v == kSampleFormat) {
            saw_format = true;
        } else if (auto f = field("scheme")) {
            if (*f == "poisson_pps") s.scheme = Scheme::poisson_pps;
            else if (*f == "priority") s.scheme = Scheme::priority;
            else throw std::invalid_argument("unknown scheme '" + std::string(*f) + "'");
        } else if (auto f2 = field("T")) {
            s.T = detail::parse_double(*f2);
        } else if (auto f3 = field("Tprime")) {
            s.Tprime = detail::parse_double(*f3);
        } else if (auto f4 = field("k")) {
            s.k = static_cast<std::size_t>(detail::parse_double(*f4));
        } else if (auto f5 = field("instance")) {
            s.instance_id = static_cast<std::uint32_t>(detail::parse_double(*f5));
        } else if (auto f6 = field("hash")) {
            std::string expect = std::string(kHashName) + " v" + kHashVersion;
            if (*f6 != expect)
                throw std::invalid_argument("unsupported hash '" + std::string(*f6) + "'");
        } else if (auto f7 = field("hash-seed")) {
            s.hash.global_seed = static_cast<std::uint64_t>(std::stoull(std::string(*f7)));
        } else if (auto f8 = field("mode")) {
            if (*f8 == "independent") s.hash.mode = Mode::independent;
            else if (*f8 == "coordinated") s.hash.mode = Mode::coordinated;
            else throw std::invalid_argument("unknown mode '" + std::string(*f8) + "'");
        }
        // unknown header fields are ignored for forward compatibility
    }
    if (!saw_format) throw std::invalid_argument("not a sampdist sample file");
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::invalid_argument("sample record " + std::to_string(line_no) + ": missing TAB");
        s.sampled.push_back(Entry{line.substr(0, tab),
                                  detail::parse_double(std::string_view(line).substr(tab + 1))});
    }
    std::sort(s.sampled.begin(), s.sampled.end(), entry_key_less);
    return s;
}

} // namespace sampdist
