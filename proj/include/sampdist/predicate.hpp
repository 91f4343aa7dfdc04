#pragma once

// Meta-data key selection: predicates see key bytes only, never values.

#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sampdist {

struct KeyPredicate {
    enum class Kind { all, exact_set, prefix };
    Kind kind = Kind::all;
    std::set<std::string, std::less<>> keys;
    std::string prefix;

    bool matches(std::string_view key) const {
        switch (kind) {
            case Kind::all: return true;
            case Kind::exact_set: return keys.find(key) != keys.end();
            case Kind::prefix: return key.substr(0, prefix.size()) == prefix;
        }
        return false;
    }

    static KeyPredicate all() { return {}; }

    static KeyPredicate exact_set(std::set<std::string, std::less<>> ks) {
        KeyPredicate p;
        p.kind = Kind::exact_set;
        p.keys = std::move(ks);
        return p;
    }

    static KeyPredicate with_prefix(std::string pre) {
        KeyPredicate p;
        p.kind = Kind::prefix;
        p.prefix = std::move(pre);
        return p;
    }

    // "all", "set:a,b,c" or "prefix:xy"
    static KeyPredicate parse(std::string_view text) {
        if (text == "all") return all();
        if (text.substr(0, 4) == "set:") {
            KeyPredicate p;
            p.kind = Kind::exact_set;
            std::stringstream ss{std::string(text.substr(4))};
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) p.keys.insert(item);
            return p;
        }
        if (text.substr(0, 7) == "prefix:") return with_prefix(std::string(text.substr(7)));
        throw std::invalid_argument("bad predicate '" + std::string(text) +
                                    "' (expected all | set:k1,k2 | prefix:xy)");
    }

    std::string describe() const {
        switch (kind) {
            case Kind::all: return "all";
            case Kind::exact_set: {
                std::string s = "set:";
                bool first = true;
                for (const auto& k : keys) {
                    if (!first) s += ',';
                    s += k;
                    first = false;
                }
                return s;
            }
            case Kind::prefix: return "prefix:" + prefix;
        }
        return "all";
    }
};

} // namespace sampdist
