#pragma once

// JSON and CSV formats for symbols, matrices, verdicts and probe tables.
// Every number is written in its shortest decimal form that parses back to the same double.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bidisc/kernel.hpp"
#include "bidisc/operators.hpp"
#include "bidisc/symbol.hpp"
#include "bidisc/theorems.hpp"

namespace bidisc {

using Json = nlohmann::ordered_json;

// ----------------------------------------------------------------------------
// Numbers

inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& where) {
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double x = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError(where + ": expected a number, got '" + s + "'");
    return x;
}

namespace detail {

// JSON has no infinities; they travel as the strings "inf", "-inf", "nan".
inline Json num(double x) {
    if (std::isfinite(x)) return x;
    return format_double(x);
}

inline void dump_to(const Json& j, std::string& out, int indent, int depth) {
    const std::string pad(std::size_t(indent * (depth + 1)), ' '), close(std::size_t(indent * depth), ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case Json::value_t::number_float: out += format_double(j.get<double>()); return;
        case Json::value_t::object: {
            if (j.empty()) { out += "{}"; return; }
            out += "{";
            out += nl;
            bool first = true;
            for (const auto& [k, v] : j.items()) {
                if (!first) { out += ","; out += nl; }
                first = false;
                out += pad + Json(k).dump() + (indent > 0 ? ": " : ":");
                dump_to(v, out, indent, depth + 1);
            }
            out += nl + close + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) { out += "[]"; return; }
            // arrays of scalars stay on one line
            const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
            out += "[";
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += flat ? ", " : ",";
                if (!flat) out += nl + pad;
                first = false;
                dump_to(v, out, indent, depth + 1);
            }
            if (!flat) out += nl + close;
            out += "]";
            return;
        }
        default: out += j.dump(); return;
    }
}

inline std::string field_path(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

inline const Json& require(const Json& j, const char* key, const std::string& path) {
    if (!j.is_object()) throw ParseError(path + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(field_path(path, key) + ": missing field");
    return *it;
}

inline double get_num(const Json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return parse_double(j.get<std::string>(), path);
    throw ParseError(path + ": expected a number");
}

inline int get_int(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ParseError(path + ": expected an integer");
    const auto v = j.get<long long>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ParseError(path + ": integer out of range");
    return int(v);
}

inline double num_field(const Json& j, const char* key, const std::string& path) {
    return get_num(require(j, key, path), field_path(path, key));
}

inline int int_field(const Json& j, const char* key, const std::string& path) {
    return get_int(require(j, key, path), field_path(path, key));
}

inline Json tail_json(const Tail& t) {
    return Json{{"l2", num(t.l2)}, {"l1", num(t.l1)}, {"band1", t.band1}, {"band2", t.band2}};
}

inline Tail tail_from(const Json& j, const std::string& path) {
    Tail t;
    t.l2 = num_field(j, "l2", path);
    t.l1 = num_field(j, "l1", path);
    t.band1 = int_field(j, "band1", path);
    t.band2 = int_field(j, "band2", path);
    return t;
}

} // namespace detail

/// Pretty JSON text with shortest round-trip numbers.
inline std::string dump_json(const Json& j, int indent = 2) {
    std::string out;
    detail::dump_to(j, out, indent, 0);
    return out + "\n";
}

/// Parse JSON text, reporting the line and column of syntax errors.
inline Json parse_json(const std::string& text, const std::string& source = "input") {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') { ++line; col = 1; }
            else ++col;
        }
        throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
    }
}

// ----------------------------------------------------------------------------
// Files

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Write through a temporary sibling and rename it into place.
inline void write_atomic(const std::filesystem::path& p, const std::string& content) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    const std::filesystem::path tmp = p.string() + ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, p, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("cannot rename into " + p.string() + ": " + ec.message());
    }
}

// ----------------------------------------------------------------------------
// Symbols

namespace detail {

inline Json arcs_json(const std::vector<Arc>& arcs) {
    Json a = Json::array();
    for (const auto& arc : arcs) a.push_back(Json::array({num(arc.start), num(arc.length)}));
    return a;
}

inline std::vector<Arc> arcs_from(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError(path + ": expected an array of [start, length]");
    std::vector<Arc> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        if (!j[i].is_array() || j[i].size() != 2) throw ParseError(p + ": expected [start, length]");
        out.push_back(Arc{get_num(j[i][0], p), get_num(j[i][1], p)});
    }
    return out;
}

// Truncated or derived symbols carry their tail and bounds so that re-import reproduces them.
inline void add_explicit_extras(Json& j, const Tail& t, double sup, const std::vector<Arc>* arcs) {
    if (!t.exact() || t.band1 != -1 || t.band2 != -1) j["tail"] = tail_json(t);
    if (std::isfinite(sup)) j["sup_bound"] = num(sup);
    if (arcs && !arcs->empty()) j["support"] = arcs_json(*arcs);
}

inline int bandwidth_field(const Json& j, const std::string& path, int fallback) {
    if (!j.contains("bandwidth")) return fallback;
    const int b = get_int(j["bandwidth"], field_path(path, "bandwidth"));
    if (b < 0) throw ParseError(field_path(path, "bandwidth") + ": must be nonnegative");
    return b;
}

inline double explicit_sup(const Json& j, const std::string& path) {
    return j.contains("sup_bound") ? get_num(j["sup_bound"], field_path(path, "sup_bound")) : kInf;
}

inline Tail explicit_tail(const Json& j, const std::string& path) {
    return j.contains("tail") ? tail_from(j["tail"], field_path(path, "tail")) : Tail{};
}

inline const Json& terms_of(const Json& j, const std::string& path) {
    const Json& terms = require(j, "terms", path);
    if (!terms.is_array()) throw ParseError(field_path(path, "terms") + ": expected an array");
    return terms;
}

template <class E>
void wrap_domain(const std::string& path, E&& e) {
    try {
        e();
    } catch (const DomainError& err) {
        throw ParseError(path + ": " + err.what());
    }
}

} // namespace detail

inline Json to_json(const Symbol1& f) {
    if (const auto* t = std::get_if<TentShape>(&f.shape()))
        return Json{{"type", "tent"}, {"a", detail::num(t->center)}, {"w", detail::num(t->half_width)},
                    {"bandwidth", t->bandwidth}};
    if (const auto* a = std::get_if<ArcShape>(&f.shape()))
        return Json{{"type", "arc"}, {"a", detail::num(a->a)}, {"b", detail::num(a->b)}, {"bandwidth", a->bandwidth}};
    Json terms = Json::array();
    for (const auto& [n, c] : f.coeffs())
        terms.push_back(Json{{"m", n}, {"re", detail::num(c.real())}, {"im", detail::num(c.imag())}});
    Json j{{"type", "explicit"}, {"dim", 1}, {"terms", std::move(terms)}};
    detail::add_explicit_extras(j, f.tail(), f.explicit_sup_bound(), &f.support_arcs());
    return j;
}

inline Json to_json(const Symbol2& f) {
    if (const auto* t = f.tensor_factors()) return Json{{"type", "tensor"}, {"f1", to_json(*t->f1)}, {"f2", to_json(*t->f2)}};
    Json terms = Json::array();
    for (const auto& [m, c] : f.coeffs())
        terms.push_back(Json{{"m1", m.m1}, {"m2", m.m2}, {"re", detail::num(c.real())}, {"im", detail::num(c.imag())}});
    Json j{{"type", "explicit"}, {"dim", 2}, {"terms", std::move(terms)}};
    if (std::holds_alternative<ProductShape>(f.shape())) j["shape"] = "product";
    detail::add_explicit_extras(j, f.tail(), f.explicit_sup_bound(), nullptr);
    return j;
}

/// One-variable symbol; a "bandwidth" on a structural symbol overrides the default.
inline Symbol1 symbol1_from_json(const Json& j, const std::string& path = "symbol", int bandwidth = kDefaultBandwidth) {
    const Json& type = detail::require(j, "type", path);
    if (!type.is_string()) throw ParseError(detail::field_path(path, "type") + ": expected a string");
    const std::string t = type.get<std::string>();
    const int bw = detail::bandwidth_field(j, path, bandwidth);
    Symbol1 out;
    if (t == "tent") {
        const double a = detail::num_field(j, "a", path), w = detail::num_field(j, "w", path);
        detail::wrap_domain(path, [&] { out = make_tent(a, w, bw); });
    } else if (t == "arc") {
        const double a = detail::num_field(j, "a", path), b = detail::num_field(j, "b", path);
        detail::wrap_domain(path, [&] { out = make_arc(a, b, bw); });
    } else if (t == "explicit") {
        const Json& terms = detail::terms_of(j, path);
        Symbol1::Coeffs c;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const std::string p = detail::field_path(path, "terms[" + std::to_string(i) + "]");
            if (terms[i].contains("m1") || terms[i].contains("m2"))
                throw ParseError(p + ": two-variable term in a one-variable symbol");
            const int m = detail::int_field(terms[i], "m", p);
            const cplx v(detail::num_field(terms[i], "re", p), detail::num_field(terms[i], "im", p));
            if (!c.emplace(m, v).second) throw ParseError(p + ": duplicate frequency");
        }
        const auto arcs = j.contains("support") ? detail::arcs_from(j["support"], detail::field_path(path, "support"))
                                                : std::vector<Arc>{};
        detail::wrap_domain(path, [&] {
            out = Symbol1(std::move(c), detail::explicit_tail(j, path), ExplicitShape{}, arcs, detail::explicit_sup(j, path));
        });
        if (j.contains("bandwidth")) out = truncate(out, bw);
    } else {
        throw ParseError(detail::field_path(path, "type") + ": unknown one-variable type '" + t + "'");
    }
    return out;
}

inline bool json_is_one_variable(const Json& j) {
    if (!j.is_object()) return false;
    const auto type = j.value("type", std::string{});
    if (type == "tent" || type == "arc") return true;
    if (type != "explicit") return false;
    if (j.contains("dim")) return j["dim"] == 1;
    const auto terms = j.find("terms");
    return terms != j.end() && terms->is_array() && !terms->empty() && (*terms)[0].contains("m");
}

inline Symbol2 symbol2_from_json(const Json& j, const std::string& path = "symbol", int bandwidth = kDefaultBandwidth) {
    const Json& type = detail::require(j, "type", path);
    if (!type.is_string()) throw ParseError(detail::field_path(path, "type") + ": expected a string");
    const std::string t = type.get<std::string>();
    const int bw = detail::bandwidth_field(j, path, bandwidth);
    if (t == "tensor") {
        const Symbol1 f1 = symbol1_from_json(detail::require(j, "f1", path), detail::field_path(path, "f1"), bw);
        const Symbol1 f2 = symbol1_from_json(detail::require(j, "f2", path), detail::field_path(path, "f2"), bw);
        return tensor(f1, f2);
    }
    if (t != "explicit") throw ParseError(detail::field_path(path, "type") + ": unknown two-variable type '" + t + "'");
    if (json_is_one_variable(j)) throw ParseError(path + ": one-variable symbol where a two-variable one is needed");
    const Json& terms = detail::terms_of(j, path);
    Symbol2::Coeffs c;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string p = detail::field_path(path, "terms[" + std::to_string(i) + "]");
        const Freq2 m{detail::int_field(terms[i], "m1", p), detail::int_field(terms[i], "m2", p)};
        const cplx v(detail::num_field(terms[i], "re", p), detail::num_field(terms[i], "im", p));
        if (!c.emplace(m, v).second) throw ParseError(p + ": duplicate frequency");
    }
    Shape2 shape = ExplicitShape{};
    if (j.contains("shape")) {
        if (j["shape"] != "product") throw ParseError(detail::field_path(path, "shape") + ": unknown shape");
        shape = ProductShape{};
    }
    Symbol2 out;
    detail::wrap_domain(path, [&] {
        out = Symbol2(std::move(c), detail::explicit_tail(j, path), shape, detail::explicit_sup(j, path));
    });
    if (j.contains("bandwidth")) out = truncate(out, bw);
    return out;
}

using AnySymbol = std::variant<Symbol1, Symbol2>;

inline AnySymbol symbol_from_json(const Json& j, const std::string& path = "symbol", int bandwidth = kDefaultBandwidth) {
    if (json_is_one_variable(j)) return symbol1_from_json(j, path, bandwidth);
    return symbol2_from_json(j, path, bandwidth);
}

inline AnySymbol load_symbol(const std::filesystem::path& p, int bandwidth = kDefaultBandwidth) {
    return symbol_from_json(parse_json(read_text(p), p.string()), p.string(), bandwidth);
}

/// Two-variable view of a symbol file; a one-variable symbol is read as a function of z1.
inline Symbol2 load_symbol2(const std::filesystem::path& p, int bandwidth = kDefaultBandwidth) {
    AnySymbol s = load_symbol(p, bandwidth);
    if (auto* f = std::get_if<Symbol2>(&s)) return *f;
    return tensor(std::get<Symbol1>(s), constant1(1.0));
}

// ----------------------------------------------------------------------------
// Matrices

inline Json to_json(const OperatorMatrix& m) {
    auto basis = [](const std::vector<Freq2>& b) {
        Json a = Json::array();
        for (const auto& f : b) a.push_back(Json::array({f.m1, f.m2}));
        return a;
    };
    Json entries = Json::array();
    for (Eigen::Index i = 0; i < m.entries.rows(); ++i)
        for (Eigen::Index k = 0; k < m.entries.cols(); ++k)
            entries.push_back(Json::array({detail::num(m.entries(i, k).real()), detail::num(m.entries(i, k).imag())}));
    return Json{{"rows", basis(m.rows)},
                {"cols", basis(m.cols)},
                {"entries", std::move(entries)},
                {"exactness", Json{{"exact", m.exactness.exact},
                                   {"bound", detail::num(m.exactness.bound)},
                                   {"entry_bound", detail::num(m.exactness.entry_bound)}}}};
}

inline OperatorMatrix matrix_from_json(const Json& j, const std::string& path = "matrix") {
    auto basis = [&](const char* key) {
        const Json& a = detail::require(j, key, path);
        if (!a.is_array()) throw ParseError(detail::field_path(path, key) + ": expected an array");
        std::vector<Freq2> out;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const std::string p = detail::field_path(path, std::string(key) + "[" + std::to_string(i) + "]");
            if (!a[i].is_array() || a[i].size() != 2) throw ParseError(p + ": expected [m1, m2]");
            out.push_back({detail::get_int(a[i][0], p), detail::get_int(a[i][1], p)});
        }
        return out;
    };
    OperatorMatrix m;
    m.rows = basis("rows");
    m.cols = basis("cols");
    const Json& e = detail::require(j, "entries", path);
    if (!e.is_array() || e.size() != m.rows.size() * m.cols.size())
        throw ParseError(detail::field_path(path, "entries") + ": expected rows x cols pairs");
    m.entries.resize(Eigen::Index(m.rows.size()), Eigen::Index(m.cols.size()));
    for (std::size_t idx = 0; idx < e.size(); ++idx) {
        const std::string p = detail::field_path(path, "entries[" + std::to_string(idx) + "]");
        if (!e[idx].is_array() || e[idx].size() != 2) throw ParseError(p + ": expected [re, im]");
        m.entries(Eigen::Index(idx / m.cols.size()), Eigen::Index(idx % m.cols.size())) =
            cplx(detail::get_num(e[idx][0], p), detail::get_num(e[idx][1], p));
    }
    const Json& x = detail::require(j, "exactness", path);
    const std::string xp = detail::field_path(path, "exactness");
    const Json& ex = detail::require(x, "exact", xp);
    if (!ex.is_boolean()) throw ParseError(detail::field_path(xp, "exact") + ": expected a boolean");
    m.exactness = {ex.get<bool>(), detail::num_field(x, "bound", xp), detail::num_field(x, "entry_bound", xp)};
    return m;
}

// ----------------------------------------------------------------------------
// Verdicts

inline Json to_json(const Verdict& v) {
    Json ev = Json::array();
    for (const auto& e : v.evidence)
        ev.push_back(Json{{"name", e.name}, {"value", detail::num(e.value)}, {"err", detail::num(e.err)}, {"op", e.op}});
    return Json{{"conclusion", to_string(v.conclusion)}, {"certified", v.certified}, {"evidence", std::move(ev)}};
}

inline Verdict verdict_from_json(const Json& j, const std::string& path = "verdict") {
    Verdict v;
    const Json& c = detail::require(j, "conclusion", path);
    if (!c.is_string()) throw ParseError(detail::field_path(path, "conclusion") + ": expected a string");
    v.conclusion = conclusion_from_string(c.get<std::string>());
    const Json& cert = detail::require(j, "certified", path);
    if (!cert.is_boolean()) throw ParseError(detail::field_path(path, "certified") + ": expected a boolean");
    v.certified = cert.get<bool>();
    const Json& ev = detail::require(j, "evidence", path);
    if (!ev.is_array()) throw ParseError(detail::field_path(path, "evidence") + ": expected an array");
    for (std::size_t i = 0; i < ev.size(); ++i) {
        const std::string p = detail::field_path(path, "evidence[" + std::to_string(i) + "]");
        const Json& name = detail::require(ev[i], "name", p);
        const Json& op = detail::require(ev[i], "op", p);
        if (!name.is_string() || !op.is_string()) throw ParseError(p + ": name and op must be strings");
        v.add(name.get<std::string>(), detail::num_field(ev[i], "value", p), detail::num_field(ev[i], "err", p),
              op.get<std::string>());
    }
    return v;
}

// ----------------------------------------------------------------------------
// CSV

/// Comma-separated table whose first line records the seed of the run that produced it.
struct CsvTable {
    std::uint64_t seed = 0;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    bool operator==(const CsvTable&) const = default;
};

inline std::string to_csv(const CsvTable& t) {
    std::string out = "# seed=" + std::to_string(t.seed) + "\n";
    for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
    out += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
        out += "\n";
    }
    return out;
}

inline CsvTable parse_csv(const std::string& text, const std::string& source = "csv") {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ss(s);
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        if (!s.empty() && s.back() == ',') out.push_back("");
        return out;
    };
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = source + ":" + std::to_string(lineno);
        if (line.rfind("# seed=", 0) == 0) {
            const std::string v = line.substr(7);
            auto res = std::from_chars(v.data(), v.data() + v.size(), t.seed);
            if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw ParseError(where + ": bad seed");
            continue;
        }
        if (line.empty() || line[0] == '#') continue;
        if (t.header.empty()) {
            t.header = split(line);
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != t.header.size())
            throw ParseError(where + ": expected " + std::to_string(t.header.size()) + " columns");
        std::vector<double> row;
        for (std::size_t i = 0; i < cells.size(); ++i) row.push_back(parse_double(cells[i], where + ": " + t.header[i]));
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw ParseError(source + ": missing header row");
    return t;
}

inline CsvTable singular_value_csv(const std::vector<double>& sigma, std::uint64_t seed) {
    CsvTable t{seed, {"index", "sigma"}, {}};
    for (std::size_t i = 0; i < sigma.size(); ++i) t.rows.push_back({double(i + 1), sigma[i]});
    return t;
}

inline const std::vector<std::string>& probe_csv_header() {
    static const std::vector<std::string> h{"r1", "theta1", "r2", "theta2", "hankel_product",
                                            "berezin_re", "berezin_im", "err"};
    return h;
}

inline CsvTable probe_csv(const ProbeTable& p, std::uint64_t seed) {
    CsvTable t{seed, probe_csv_header(), {}};
    for (const auto& r : p.rows)
        t.rows.push_back({r.r1, r.theta1, r.r2, r.theta2, r.hankel_product, r.berezin.real(), r.berezin.imag(), r.err()});
    return t;
}

inline CsvTable indicator_csv(const std::vector<IndicatorRow>& rows, std::uint64_t seed) {
    CsvTable t{seed, {"bandwidth", "sigma1", "sigma5", "sigma25", "tail_compression"}, {}};
    for (const auto& r : rows) t.rows.push_back({double(r.bandwidth), r.sigma1, r.sigma5, r.sigma25, r.tail_compression});
    return t;
}

} // namespace bidisc
