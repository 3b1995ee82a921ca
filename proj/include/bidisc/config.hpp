#pragma once

// Run configuration for the command-line front end: a flat key = value file whose entries
// command-line flags may override.

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bidisc/errors.hpp"
#include "bidisc/io.hpp"
#include "bidisc/operators.hpp"

namespace bidisc {

struct RunConfig {
    std::string f, g;                // two-variable symbol files (one-variable files are read as functions of z1)
    std::string f1, f2, g1, g2;      // one-variable factor files
    std::string out = "out";
    std::uint64_t seed = 0;
    TruncationBox box{8, 8};
    int bandwidth = kDefaultBandwidth;  ///< for structural symbols lacking their own
    std::vector<int> bandwidths{16, 32, 64};
    std::vector<double> radii{0.5, 0.9, 0.99};
    int angles = 16;
    double tol = kDefaultRankTol;

    void validate() const {
        if (!(tol > 0.0)) throw ParseError("tol: must be positive");
        for (double r : radii)
            if (!(r > 0.0 && r < 1.0)) throw ParseError("radii: every radius must lie in (0,1)");
        if (radii.empty()) throw ParseError("radii: at least one radius is needed");
        if (angles < 1) throw ParseError("angles: must be at least 1");
        if (bandwidth < 0) throw ParseError("bandwidth: must be nonnegative");
        for (int b : bandwidths)
            if (b < 1) throw ParseError("bandwidths: must be positive");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(s);
    while (std::getline(in, cell, ',')) out.push_back(trim(cell));
    return out;
}

inline long long parse_integer(const std::string& s, const std::string& key) {
    long long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
        throw ParseError(key + ": expected an integer, got '" + s + "'");
    return v;
}

inline int parse_int(const std::string& s, const std::string& key) {
    const long long v = parse_integer(s, key);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ParseError(key + ": integer out of range");
    return int(v);
}

} // namespace detail

inline TruncationBox parse_box(const std::string& s) {
    const auto parts = detail::split_list(s);
    if (parts.size() != 2) throw ParseError("box: expected N1,N2");
    const int a = detail::parse_int(parts[0], "box"), b = detail::parse_int(parts[1], "box");
    if (a < 0 || b < 0) throw ParseError("box: degrees must be nonnegative");
    return {a, b};
}

inline std::vector<double> parse_double_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    for (const auto& p : detail::split_list(s)) out.push_back(parse_double(p, key));
    return out;
}

inline std::vector<int> parse_int_list(const std::string& s, const std::string& key) {
    std::vector<int> out;
    for (const auto& p : detail::split_list(s)) out.push_back(detail::parse_int(p, key));
    return out;
}

/// Apply one key = value setting; the same keys serve the config file and the flags.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "f") c.f = value;
    else if (key == "g") c.g = value;
    else if (key == "f1") c.f1 = value;
    else if (key == "f2") c.f2 = value;
    else if (key == "g1") c.g1 = value;
    else if (key == "g2") c.g2 = value;
    else if (key == "out") c.out = value;
    else if (key == "seed") {
        const long long v = detail::parse_integer(value, key);
        if (v < 0) throw ParseError("seed: must be nonnegative");
        c.seed = std::uint64_t(v);
    }
    else if (key == "box") c.box = parse_box(value);
    else if (key == "bandwidth") c.bandwidth = detail::parse_int(value, key);
    else if (key == "bandwidths") c.bandwidths = parse_int_list(value, key);
    else if (key == "radii") c.radii = parse_double_list(value, key);
    else if (key == "angles") c.angles = detail::parse_int(value, key);
    else if (key == "tol") c.tol = parse_double(value, key);
    else throw ParseError("unknown key '" + key + "'");
}

inline void apply_config_text(RunConfig& c, const std::string& text, const std::string& source = "config") {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = source + ":" + std::to_string(lineno);
        const std::string t = detail::trim(line.substr(0, line.find('#')));
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError(where + ": expected key = value");
        try {
            apply_setting(c, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
}

} // namespace bidisc
