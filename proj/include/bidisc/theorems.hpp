#pragma once

// Executable checks of the vanishing and compactness criteria for semi-commutators and commutators.
// Each returns a Verdict: a conclusion, named measurements with error bounds, and whether the conclusion
// rests on exact symbol structure alone.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "bidisc/kernel.hpp"
#include "bidisc/operators.hpp"
#include "bidisc/spectral.hpp"
#include "bidisc/symbol.hpp"

namespace bidisc {

enum class Conclusion {
    Zero,
    Nonzero,  ///< nonzero; compactness not assessed
    NonzeroNonCompactEvidence,
    CompactNonzeroEvidence,
    Inconclusive,
};

inline const char* to_string(Conclusion c) {
    switch (c) {
        case Conclusion::Zero: return "Zero";
        case Conclusion::Nonzero: return "Nonzero";
        case Conclusion::NonzeroNonCompactEvidence: return "NonzeroNonCompactEvidence";
        case Conclusion::CompactNonzeroEvidence: return "CompactNonzeroEvidence";
        case Conclusion::Inconclusive: return "Inconclusive";
    }
    return "?";
}

inline Conclusion conclusion_from_string(const std::string& s) {
    for (Conclusion c : {Conclusion::Zero, Conclusion::Nonzero, Conclusion::NonzeroNonCompactEvidence,
                         Conclusion::CompactNonzeroEvidence, Conclusion::Inconclusive})
        if (s == to_string(c)) return c;
    throw ParseError("unknown conclusion '" + s + "'");
}

struct Evidence {
    std::string name;
    double value = 0.0;
    double err = 0.0;
    std::string op;  ///< operation that produced the value

    bool operator==(const Evidence&) const = default;
};

struct Verdict {
    Conclusion conclusion = Conclusion::Inconclusive;
    bool certified = false;
    std::vector<Evidence> evidence;

    void add(std::string name, double value, double err, std::string op) {
        evidence.push_back({std::move(name), value, err, std::move(op)});
    }
    const Evidence* find(const std::string& name) const {
        for (const auto& e : evidence)
            if (e.name == name) return &e;
        return nullptr;
    }
    double value(const std::string& name) const {
        const Evidence* e = find(name);
        if (!e) throw DomainError("no evidence named '" + name + "'");
        return e->value;
    }
    void absorb(const Verdict& other, const std::string& prefix) {
        for (const auto& e : other.evidence) evidence.push_back({prefix + e.name, e.value, e.err, e.op});
    }

    bool operator==(const Verdict&) const = default;
};

/// Absolute threshold below which an entry computed from exact coefficients counts as zero.
inline constexpr double kMatrixZeroTol = 1e-12;

namespace detail {

inline std::string radius_tag(double r) {
    std::string s = std::to_string(r);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

inline bool strictly_decreasing(const std::vector<RealEstimate>& v) {
    for (std::size_t k = 0; k + 1 < v.size(); ++k)
        if (!(v[k + 1].value + v[k + 1].err < v[k].value - v[k].err)) return false;
    return true;
}

} // namespace detail

// ----------------------------------------------------------------------------
// Vanishing

/// T_f T_g - T_fg = 0 exactly when, in each variable, conj(f) or g is analytic. Otherwise a witness box and
/// the rank growth of the truncations.
inline Verdict check_thm1(const Symbol2& f, const Symbol2& g) {
    Verdict v;
    const Symbol2 fb = conjugate(f);
    bool zero = true;
    for (int i : {1, 2}) {
        const bool a = is_analytic_in(fb, i), b = is_analytic_in(g, i);
        v.add("axis" + std::to_string(i) + ".fbar_analytic", a, 0.0, "is_analytic_in");
        v.add("axis" + std::to_string(i) + ".g_analytic", b, 0.0, "is_analytic_in");
        zero = zero && (a || b);
    }
    if (zero) {
        v.conclusion = Conclusion::Zero;
        v.certified = f.exact() && g.exact();
        if (!v.certified) {
            // stored coefficients only: report how far the truncated operator is from zero
            const auto m = semicommutator_matrix(f, g, TruncationBox{8, 8});
            v.add("semicommutator.max_entry.box8", m.max_abs(), m.exactness.entry_bound, "semicommutator_matrix");
        }
        return v;
    }
    v.conclusion = Conclusion::Inconclusive;
    for (int n = 0; n <= 16; ++n) {
        const auto m = semicommutator_matrix(f, g, TruncationBox{n, n});
        if (m.max_abs() > std::max(kMatrixZeroTol, 10.0 * m.exactness.entry_bound)) {
            v.add("witness.box", n, 0.0, "semicommutator_matrix");
            v.add("witness.max_entry", m.max_abs(), m.exactness.entry_bound, "semicommutator_matrix");
            v.conclusion = Conclusion::Nonzero;
            break;
        }
    }
    for (int n : {4, 8, 16}) {
        const auto m = semicommutator_matrix(f, g, TruncationBox{n, n});
        v.add("rank.box" + std::to_string(n), rank_estimate(m), 0.0, "rank_estimate");
    }
    return v;
}

// ----------------------------------------------------------------------------
// Necessary condition for compactness

namespace detail {

struct DerivativeCondition {
    bool resolved = false;  ///< false when the condition could not be evaluated
    bool holds = false;
    bool exact = false;
    double max_value = 0.0;  ///< max collected coefficient (exact) or sampled modulus
    double err = 0.0;
    double value_at_origin = 0.0;
};

// d f / d z_d times d g / d zbar_d with z_d in D and the other variable on T, as a finite series in
// z_d^a conj(z_d)^b z_o^c. Monomials of this form are linearly independent there, so the product vanishes
// identically iff every collected coefficient is zero.
inline DerivativeCondition derivative_condition_exact(const Symbol2& f, const Symbol2& g, int d) {
    auto kd = [d](Freq2 m) { return d == 1 ? m.m1 : m.m2; };
    auto ko = [d](Freq2 m) { return d == 1 ? m.m2 : m.m1; };
    std::map<std::tuple<int, int, int>, cplx> series;
    for (const auto& [mf, cf] : f.coeffs()) {
        if (kd(mf) < 1) continue;
        for (const auto& [mg, cg] : g.coeffs()) {
            if (kd(mg) > -1) continue;
            series[{kd(mf) - 1, -kd(mg) - 1, ko(mf) + ko(mg)}] += cf * double(kd(mf)) * cg * double(-kd(mg));
        }
    }
    DerivativeCondition out;
    out.resolved = out.exact = true;
    out.holds = true;
    cplx origin{};
    for (const auto& [key, c] : series) {
        out.max_value = std::max(out.max_value, std::abs(c));
        if (c != cplx{}) out.holds = false;
        if (std::get<0>(key) == 0 && std::get<1>(key) == 0) origin += c;  // z_d = 0, z_o = 1
    }
    out.value_at_origin = std::abs(origin);
    return out;
}

// Sampled version: |z_d| in {0.3, 0.6, 0.9} with 16 angles, z_o at 16 points of T.
inline DerivativeCondition derivative_condition_sampled(const Symbol2& f, const Symbol2& g, int d) {
    DerivativeCondition out;
    const Wirtinger df = d == 1 ? Wirtinger::DZ1 : Wirtinger::DZ2;
    const Wirtinger dg = d == 1 ? Wirtinger::DZ1Bar : Wirtinger::DZ2Bar;
    bool fails = false;
    try {
        for (double r : {0.3, 0.6, 0.9})
            for (int i = 0; i < 16; ++i)
                for (int j = 0; j < 16; ++j) {
                    const cplx zd = std::polar(r, kTwoPi * i / 16), zo = std::polar(1.0, kTwoPi * j / 16);
                    const BidiscPoint z = d == 1 ? BidiscPoint{zd, zo} : BidiscPoint{zo, zd};
                    const Estimate p = detail::product(wirtinger(f, z, df), wirtinger(g, z, dg));
                    const double m = std::abs(p.value);
                    if (m > out.max_value) {
                        out.max_value = m;
                        out.err = p.err;
                    }
                    fails = fails || m > p.err + kMatrixZeroTol;
                }
        const BidiscPoint o = d == 1 ? BidiscPoint{0.0, 1.0} : BidiscPoint{1.0, 0.0};
        out.value_at_origin = std::abs(detail::product(wirtinger(f, o, df), wirtinger(g, o, dg)).value);
    } catch (const DivergenceError&) {
        return out;
    }
    out.resolved = true;
    out.holds = !fails;
    return out;
}

} // namespace detail

/// The two derivative-product conditions that compactness of T_f T_g - T_fg forces: d f/d z1 * d g/d zbar1 = 0
/// on D x T and d f/d z2 * d g/d zbar2 = 0 on T x D. A failed condition is evidence of non-compactness.
inline Verdict check_thm2_necessary(const Symbol2& f, const Symbol2& g) {
    Verdict v;
    const bool exact = f.exact() && g.exact();
    bool failed = false, all_hold = true;
    for (int d : {1, 2}) {
        const auto c = exact ? detail::derivative_condition_exact(f, g, d) : detail::derivative_condition_sampled(f, g, d);
        const std::string tag = "cond" + std::to_string(d);
        const char* op = exact ? "derivative_series" : "wirtinger";
        if (!c.resolved) {
            all_hold = false;
            v.add(tag + ".resolved", 0.0, 0.0, op);
            continue;
        }
        v.add(tag + ".holds", c.holds, 0.0, op);
        v.add(tag + ".max_value", c.max_value, c.err, op);
        v.add(tag + ".value_at_origin", c.value_at_origin, 0.0, op);
        failed = failed || !c.holds;
        all_hold = all_hold && c.holds;
    }
    if (failed) {
        v.conclusion = Conclusion::NonzeroNonCompactEvidence;
        v.certified = exact;
    } else if (exact && all_hold) {
        // for finite series, a vanishing product means one factor vanishes: conj(f) or g analytic per axis
        v.conclusion = Conclusion::Zero;
        v.certified = true;
        v.add("reduces_to_vanishing_law", 1.0, 0.0, "check_thm1");
    } else {
        v.conclusion = Conclusion::Inconclusive;
    }
    return v;
}

// ----------------------------------------------------------------------------
// Tensor symbols

struct Thm3Options {
    std::vector<double> radii{0.5, 0.9, 0.99};
    int angles = 16;
    int probe_bandwidth = 4096;   ///< structural factors are refined to this bandwidth for the probes
    int witness_bandwidth = 512;  ///< and to this one for the nonzero witness
    int witness_box = 4;
    double product_tol = 1e-12;   ///< coefficient threshold for f_i g_i = 0 without support information
};

namespace detail {

struct TensorWitness {
    double max_entry = 0.0;
    double err = 0.0;
};

// Largest entry of T_f T_g - T_fg on the box for f = f1 f2, g = g1 g2, with the entry bound computed from the
// factors (the tensor coefficient tables are never formed).
inline TensorWitness tensor_semicommutator_witness(const Symbol1& f1, const Symbol1& f2, const Symbol1& g1,
                                                   const Symbol1& g2, int n, double sign = 1.0, Matrix* out = nullptr) {
    const auto t = semicommutator_terms(f1, f2, g1, g2, TruncationBox{n, n}, sign);
    Matrix m = Matrix::Zero((n + 1) * (n + 1), (n + 1) * (n + 1));
    for (const auto& term : t) m += term.coef * kron(term.a, term.b);
    // tails of the tensors, as tensor() would record them
    auto tensor_l2 = [](const Symbol1& a, const Symbol1& b) {
        const double s1 = a.stored_l2(), s2 = b.stored_l2(), e1 = a.tail().l2, e2 = b.tail().l2;
        return std::array<double, 3>{s1 * s2, std::sqrt(s1 * s1 * e2 * e2 + e1 * e1 * s2 * s2 + e1 * e1 * e2 * e2),
                                     std::sqrt((s1 * s1 + e1 * e1) * (s2 * s2 + e2 * e2))};
    };
    const auto f = tensor_l2(f1, f2), g = tensor_l2(g1, g2);
    TensorWitness w;
    w.max_entry = m.cwiseAbs().maxCoeff();
    w.err = g[1] * f[2] + g[0] * f[1];
    if (out) *out = std::move(m);
    return w;
}

inline bool is_nonzero(const Symbol1& f) {
    for (const auto& [n, c] : f.coeffs())
        if (c != cplx{}) return true;
    return false;
}

} // namespace detail

/// T_f T_g - T_fg for f = f1(z1) f2(z2), g = g1(z1) g2(z2) is nonzero and compact exactly when f_i g_i = 0
/// on T for both i and ||H_conj(f) k_z|| ||H_g k_z|| -> 0 at the boundary; the latter is checked through the
/// one-variable factors.
inline Verdict check_thm3(const Symbol1& f1, const Symbol1& f2, const Symbol1& g1, const Symbol1& g2,
                          const Thm3Options& opt = {}) {
    if (!detail::is_nonzero(f1) || !detail::is_nonzero(f2) || !detail::is_nonzero(g1) || !detail::is_nonzero(g2))
        throw DomainError("tensor criterion needs four nonzero factors");
    const Symbol2 f = tensor(f1, f2), g = tensor(g1, g2);
    Verdict zero = check_thm1(f, g);
    if (zero.conclusion == Conclusion::Zero) return zero;

    Verdict v;
    const std::array<const Symbol1*, 2> fs{&f1, &f2}, gs{&g1, &g2};
    bool cond1 = true;
    for (int i = 0; i < 2; ++i) {
        const std::string tag = "cond1.axis" + std::to_string(i + 1);
        const Symbol1& a = *fs[i];
        const Symbol1& b = *gs[i];
        if (!a.support_arcs().empty() && !b.support_arcs().empty()) {
            const bool disjoint = arcs_disjoint(a.support_arcs(), b.support_arcs());
            v.add(tag + ".disjoint_supports", disjoint, 0.0, "arcs_disjoint");
            cond1 = cond1 && disjoint;
        } else {
            const int bw = std::max({std::abs(a.min_freq()), a.max_freq()}) + std::max({std::abs(b.min_freq()), b.max_freq()});
            const Symbol1 p = multiply(a, b, bw);
            double mx = 0.0;
            for (const auto& [n, c] : p.coeffs()) mx = std::max(mx, std::abs(c));
            const double err = std::min(p.tail().l1, p.tail().l2);
            v.add(tag + ".product_max_coeff", mx, err, "multiply");
            const bool holds = mx <= opt.product_tol + err;
            cond1 = cond1 && holds;
        }
    }
    v.add("cond1.holds", cond1, 0.0, "check_thm3");

    bool cond2 = true;
    for (int i = 0; i < 2; ++i) {
        const Symbol1 a = truncate(*fs[i], opt.probe_bandwidth), b = truncate(*gs[i], opt.probe_bandwidth);
        const auto vals = probe1(a, b, opt.radii, opt.angles);
        for (std::size_t k = 0; k < vals.size(); ++k)
            v.add("cond2.axis" + std::to_string(i + 1) + ".r" + detail::radius_tag(opt.radii[k]), vals[k].value,
                  vals[k].err, "probe1");
        cond2 = cond2 && detail::strictly_decreasing(vals);
    }
    v.add("cond2.decaying", cond2, 0.0, "probe1");

    const auto w = detail::tensor_semicommutator_witness(
        truncate(f1, opt.witness_bandwidth), truncate(f2, opt.witness_bandwidth), truncate(g1, opt.witness_bandwidth),
        truncate(g2, opt.witness_bandwidth), opt.witness_box);
    const bool nonzero = w.max_entry > std::max(kMatrixZeroTol, 10.0 * w.err);
    v.add("semicommutator.max_entry", w.max_entry, w.err, "semicommutator_matrix");

    if (!nonzero) v.conclusion = Conclusion::Inconclusive;
    else if (!cond1) v.conclusion = Conclusion::NonzeroNonCompactEvidence;
    else if (cond2) v.conclusion = Conclusion::CompactNonzeroEvidence;
    else v.conclusion = Conclusion::Inconclusive;
    return v;
}

// ----------------------------------------------------------------------------
// Corollaries

struct ProbeShells {
    std::vector<double> radii{0.5, 0.9, 0.99};
    int angles = 16;
    double anchor = 0.5;
};

/// H_f is compact only when it is zero: zero for analytic f, otherwise the derivative conditions of the
/// self-pairing -H_f^* H_f = T_conj(f) T_f - T_(conj(f) f) fail and ||H_f k_z|| stays away from zero on mixed
/// shells.
inline Verdict check_corollary1(const Symbol2& f, const ProbeShells& shells = {}) {
    Verdict v;
    if (is_analytic(f)) {
        v.conclusion = Conclusion::Zero;
        v.certified = f.exact();
        v.add("analytic", 1.0, 0.0, "is_analytic");
        return v;
    }
    const Verdict c = check_thm2_necessary(conjugate(f), f);
    v.absorb(c, "selfpair.");
    // ||H_f k_z|| maxima per shell
    std::vector<RealEstimate> mixed;
    for (double r : shells.radii) {
        RealEstimate best;
        for (int kind = 0; kind < 2; ++kind)
            for (int i = 0; i < shells.angles; ++i)
                for (int j = 0; j < shells.angles; ++j) {
                    const double r1 = kind == 0 ? shells.anchor : r, r2 = kind == 0 ? r : shells.anchor;
                    const BidiscPoint z{std::polar(r1, kTwoPi * i / shells.angles), std::polar(r2, kTwoPi * j / shells.angles)};
                    const RealEstimate h = hankel_kernel_norm(f, z);
                    if (h.value >= best.value) best = h;
                }
        mixed.push_back(best);
        v.add("hankel_kernel_norm.mixed.r" + detail::radius_tag(r), best.value, best.err, "hankel_kernel_norm");
    }
    const bool no_decay = !mixed.empty() && mixed.back().value - mixed.back().err >= 0.5 * (mixed.front().value + mixed.front().err);
    v.add("probe.no_decay", no_decay, 0.0, "hankel_kernel_norm");
    if (c.conclusion == Conclusion::NonzeroNonCompactEvidence) {
        v.conclusion = Conclusion::NonzeroNonCompactEvidence;
        v.certified = c.certified;
    } else if (no_decay) {
        v.conclusion = Conclusion::NonzeroNonCompactEvidence;
    } else {
        v.conclusion = Conclusion::Inconclusive;
    }
    return v;
}

/// When one of f, conj(f), g, conj(g) is analytic, the commutator is one semi-commutator up to sign, which
/// is compact only when zero.
inline Verdict check_corollary2(const Symbol2& f, const Symbol2& g) {
    Verdict v;
    const bool fa = is_analytic(f), fc = is_analytic(conjugate(f)), ga = is_analytic(g), gc = is_analytic(conjugate(g));
    v.add("hypothesis.f_analytic", fa, 0.0, "is_analytic");
    v.add("hypothesis.fbar_analytic", fc, 0.0, "is_analytic");
    v.add("hypothesis.g_analytic", ga, 0.0, "is_analytic");
    v.add("hypothesis.gbar_analytic", gc, 0.0, "is_analytic");
    if (!(fa || fc || ga || gc)) {
        v.conclusion = Conclusion::Inconclusive;
        return v;
    }
    // f analytic or conj(g) analytic: T_g T_f = T_gf, so the commutator is T_f T_g - T_fg;
    // otherwise T_f T_g = T_fg and the commutator is -(T_g T_f - T_gf)
    const Verdict t = (fa || gc) ? check_thm1(f, g) : check_thm1(g, f);
    v.absorb(t, (fa || gc) ? "semicommutator_fg." : "semicommutator_gf.");
    v.certified = t.certified;
    switch (t.conclusion) {
        case Conclusion::Zero: v.conclusion = Conclusion::Zero; break;
        case Conclusion::Nonzero: v.conclusion = Conclusion::NonzeroNonCompactEvidence; break;
        default: v.conclusion = Conclusion::Inconclusive; break;
    }
    return v;
}

// ----------------------------------------------------------------------------
// Finite-dimensional indicators

enum class IndicatorOperator { Semicommutator, Commutator };

struct IndicatorRow {
    int bandwidth = 0;
    double sigma1 = 0.0;
    double sigma5 = 0.0;
    double sigma25 = 0.0;
    double tail_compression = 0.0;  ///< norm of the part with row or column degree above bandwidth / 2
};

/// For each N, truncate both symbols to bandwidth N, compress the operator to the box (N, N) and record
/// leading singular values and the tail compression. Decay of the tail compression is heuristic evidence of
/// compactness; its persistence is evidence against.
inline std::vector<IndicatorRow> compactness_indicator(const Symbol2& f, const Symbol2& g,
                                                       const std::vector<int>& bandwidths,
                                                       IndicatorOperator which = IndicatorOperator::Semicommutator) {
    std::vector<IndicatorRow> out;
    for (int n : bandwidths) {
        if (n < 1) throw DomainError("indicator bandwidths must be positive");
        const Symbol2 fn = truncate(f, n), gn = truncate(g, n);
        const TruncationBox box{n, n};
        const auto op = which == IndicatorOperator::Semicommutator ? semicommutator_operator(fn, gn, box)
                                                                    : commutator_operator(fn, gn, box);
        const auto s = top_singular_values(*op, 25);
        IndicatorRow row;
        row.bandwidth = n;
        auto at = [&](std::size_t k) { return k < s.sigma.size() ? s.sigma[k] : 0.0; };
        row.sigma1 = at(0);
        row.sigma5 = at(4);
        row.sigma25 = at(24);
        row.tail_compression = tail_compression(op, box, n / 2);
        out.push_back(row);
    }
    return out;
}

// ----------------------------------------------------------------------------
// Compact nonzero commutator from tent functions

struct Section4Params {
    double f1_center = kPi / 4, f1_half_width = kPi / 4;
    double g1_center = 5 * kPi / 4, g1_half_width = kPi / 4;
    double f2_center = kPi / 4, f2_half_width = kPi / 4;
    double g2_center = 5 * kPi / 4, g2_half_width = kPi / 4;
    std::vector<int> bandwidths{16, 32, 64};
    std::vector<double> radii{0.5, 0.9, 0.99};
    int angles = 16;
    int witness_bandwidth = 512;
    int witness_box = 4;
    int rank2_degree = 16;
    int probe_bandwidth = 4096;
    double min_common_gap = 0.1;  ///< length of an arc where f1 and g1 both vanish
};

struct Section4Report {
    Verdict verdict;
    bool witness_ok = false;
    bool rank2_ok = false;
    bool sigma1_stable = false;
    bool tail_decay = false;
    bool ratio_decay = false;
    bool probe_decay = false;
    std::vector<IndicatorRow> indicators;
    std::vector<ShellMaximum> probe_fg;
    std::vector<ShellMaximum> probe_gf;
};

/// Nonzero commutator witness, the rank-two shift identity on the first factors, singular-value and tail
/// indicators across bandwidths, and boundary-probe decay of both semi-commutators T_f T_g - T_fg and
/// T_g T_f - T_gf, whose difference is the commutator.
inline Section4Report example_section4(const Section4Params& p = {}) {
    const Symbol1 f1 = make_tent(p.f1_center, p.f1_half_width), g1 = make_tent(p.g1_center, p.g1_half_width);
    const Symbol1 f2 = make_tent(p.f2_center, p.f2_half_width), g2 = make_tent(p.g2_center, p.g2_half_width);
    if (!arcs_disjoint(f1.support_arcs(), g1.support_arcs()))
        throw DomainError("f1 and g1 must have disjoint supports");
    if (!arcs_disjoint(f2.support_arcs(), g2.support_arcs()))
        throw DomainError("f2 and g2 must have disjoint supports");
    std::vector<Arc> both = f1.support_arcs();
    both.insert(both.end(), g1.support_arcs().begin(), g1.support_arcs().end());
    const double gap = longest_uncovered_arc(both);
    if (gap < p.min_common_gap) throw DomainError("f1 and g1 must vanish together on an arc of positive length");

    Section4Report rep;
    Verdict& v = rep.verdict;
    v.add("hypothesis.common_zero_arc", gap, 0.0, "longest_uncovered_arc");

    // (a) nonzero commutator
    {
        const int wb = p.witness_bandwidth;
        const Symbol1 a1 = truncate(f1, wb), a2 = truncate(f2, wb), b1 = truncate(g1, wb), b2 = truncate(g2, wb);
        Matrix s, t;
        const auto w1 = detail::tensor_semicommutator_witness(a1, a2, b1, b2, p.witness_box, 1.0, &s);
        const auto w2 = detail::tensor_semicommutator_witness(b1, b2, a1, a2, p.witness_box, 1.0, &t);
        const double entry = (s - t).cwiseAbs().maxCoeff(), err = w1.err + w2.err;
        v.add("witness.commutator_max_entry", entry, err, "commutator_matrix");
        rep.witness_ok = entry > 10.0 * err;
    }
    // (b) rank-two identity on the first factors
    {
        const auto id = rank2_commutator_identity(f1, g1, p.rank2_degree);
        const double res = (id.lhs.entries - id.rhs.entries).cwiseAbs().maxCoeff();
        const double lhs = id.lhs.entries.cwiseAbs().maxCoeff();
        const int rank = rank_estimate(id.rhs);
        v.add("rank2.residual", res, id.lhs.exactness.entry_bound, "rank2_commutator_identity");
        v.add("rank2.lhs_max_entry", lhs, id.lhs.exactness.entry_bound, "rank2_commutator_identity");
        v.add("rank2.rank", rank, 0.0, "rank_estimate");
        rep.rank2_ok = rank <= 2 && lhs > 10.0 * res;
    }
    // (c) indicators at joint truncation
    {
        const Symbol2 f = tensor(f1, f2), g = tensor(g1, g2);
        rep.indicators = compactness_indicator(f, g, p.bandwidths, IndicatorOperator::Commutator);
        for (const auto& row : rep.indicators) {
            const std::string n = std::to_string(row.bandwidth);
            v.add("indicator.sigma1.N" + n, row.sigma1, 0.0, "top_singular_values");
            v.add("indicator.sigma5.N" + n, row.sigma5, 0.0, "top_singular_values");
            v.add("indicator.sigma25.N" + n, row.sigma25, 0.0, "top_singular_values");
            v.add("indicator.tail.N" + n, row.tail_compression, 0.0, "tail_compression");
        }
        if (rep.indicators.size() >= 2) {
            const auto& lo = rep.indicators.front();
            const auto& hi = rep.indicators.back();
            const auto& prev = rep.indicators[rep.indicators.size() - 2];
            rep.sigma1_stable = std::abs(hi.sigma1 - prev.sigma1) < 0.1 * hi.sigma1;
            rep.tail_decay = hi.tail_compression < 0.5 * lo.tail_compression;
            rep.ratio_decay = hi.sigma25 / hi.sigma1 < lo.sigma25 / lo.sigma1;
        }
    }
    // (c) probe decay of both semi-commutators
    {
        ProbeOptions po;
        po.radii = p.radii;
        po.angles = p.angles;
        po.bandwidth = p.probe_bandwidth;
        // the probe refines the tent factors itself
        const Symbol2 f = tensor(f1, f2), g = tensor(g1, g2);
        rep.probe_fg = shell_maxima(boundary_probe(f, g, po), p.radii);
        rep.probe_gf = shell_maxima(boundary_probe(g, f, po), p.radii);
        auto decays = [](const std::vector<ShellMaximum>& m) {
            std::vector<RealEstimate> v;
            for (const auto& s : m) v.push_back({s.hankel_product, s.hankel_err});
            return detail::strictly_decreasing(v);
        };
        for (const auto* probe : {&rep.probe_fg, &rep.probe_gf}) {
            const std::string tag = probe == &rep.probe_fg ? "probe.fg.r" : "probe.gf.r";
            for (const auto& s : *probe) v.add(tag + detail::radius_tag(s.r), s.hankel_product, s.hankel_err, "boundary_probe");
        }
        rep.probe_decay = decays(rep.probe_fg) && decays(rep.probe_gf);
    }
    const bool compact = rep.tail_decay && rep.ratio_decay && rep.probe_decay;
    v.conclusion = rep.witness_ok && compact ? Conclusion::CompactNonzeroEvidence : Conclusion::Inconclusive;
    return rep;
}

} // namespace bidisc
