#pragma once

// An instance maps keys to strictly positive values; a value of zero means
// the key is absent and is never stored or sampled.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sampdist {

struct Entry {
    std::string key;
    double value = 0.0;
};

inline bool entry_key_less(const Entry& a, const Entry& b) { return a.key < b.key; }

class Instance {
public:
    Instance() = default;
    explicit Instance(std::uint32_t id) : id_(id) {}

    // Builds from arbitrary (key, value) pairs.  Zeros are dropped; negative,
    // NaN or duplicate keys are rejected.
    Instance(std::uint32_t id, std::vector<std::pair<std::string, double>> pairs) : id_(id) {
        entries_.reserve(pairs.size());
        for (auto& [k, v] : pairs) add(std::move(k), v);
        finish();
    }

    void add(std::string key, double value) {
        if (std::isnan(value) || value < 0.0)
            throw std::invalid_argument("instance value must be a nonnegative number (key '" + key + "')");
        if (value == 0.0) return;
        entries_.push_back(Entry{std::move(key), value});
        sorted_ = false;
    }

    // Sorts and checks for duplicates; call once after the last add().
    void finish() {
        std::sort(entries_.begin(), entries_.end(), entry_key_less);
        for (std::size_t i = 1; i < entries_.size(); ++i)
            if (entries_[i].key == entries_[i - 1].key)
                throw std::invalid_argument("duplicate key '" + entries_[i].key + "'");
        sorted_ = true;
    }

    std::uint32_t id() const { return id_; }
    void set_id(std::uint32_t id) { id_ = id; }

    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t positive_count() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    std::optional<double> value_of(std::string_view key) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                                   [](const Entry& e, std::string_view k) { return e.key < k; });
        if (it != entries_.end() && it->key == key) return it->value;
        return std::nullopt;
    }

    double total_value() const {
        double s = 0.0;
        for (const auto& e : entries_) s += e.value;
        return s;
    }

    double min_positive() const {
        double m = 0.0;
        for (const auto& e : entries_) m = (m == 0.0 || e.value < m) ? e.value : m;
        return m;
    }

private:
    std::uint32_t id_ = 0;
    std::vector<Entry> entries_;
    bool sorted_ = true;
};

inline double parse_value(std::string_view text, std::size_t line_no) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw std::invalid_argument("line " + std::to_string(line_no) + ": malformed value '" +
                                    std::string(text) + "'");
    return v;
}

// Reads `key<TAB>value` lines.  Zero values are dropped, duplicates and
// negative/NaN values are errors.
inline Instance ingest(std::istream& in, std::uint32_t instance_id) {
    Instance inst(instance_id);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": missing TAB separator");
        std::string key = line.substr(0, tab);
        double v = parse_value(std::string_view(line).substr(tab + 1), line_no);
        if (std::isnan(v) || v < 0.0)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": negative or NaN value");
        if (v == 0.0) continue;
        inst.add(std::move(key), v);
    }
    inst.finish();
    return inst;
}

} // namespace sampdist
