#pragma once

// Symbols on the circle and on the bitorus, stored through their Fourier coefficients.
//
// Conventions used throughout the library:
//   * f(w) = sum_m f_m w^m on the torus, f_m = (2 pi)^-2 \int\int f(e^{i t}) e^{-i (m, t)} dt.
//   * A negative power of a disc variable means a power of its conjugate:
//     z^m = u(m1, z1) u(m2, z2) with u(k, z) = z^k for k >= 0 and conj(z)^|k| for k < 0.
//   * Quadrant tags read (sign of m1, sign of m2); zero frequencies are on the "+" side.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bidisc/errors.hpp"

namespace bidisc {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Default number of stored coefficients on each side of zero for structural symbols.
inline constexpr int kDefaultBandwidth = 256;

/// Distance from the unit circle below which a coordinate is treated as lying on it.
inline constexpr double kBoundaryTol = 1e-12;

struct Freq2 {
    int m1 = 0;
    int m2 = 0;

    friend auto operator<=>(const Freq2&, const Freq2&) = default;
    friend Freq2 operator+(Freq2 a, Freq2 b) { return {a.m1 + b.m1, a.m2 + b.m2}; }
    friend Freq2 operator-(Freq2 a, Freq2 b) { return {a.m1 - b.m1, a.m2 - b.m2}; }
    friend Freq2 operator-(Freq2 a) { return {-a.m1, -a.m2}; }
};

enum class Quadrant { PP, PM, MP, MM };

constexpr Quadrant quadrant_of(Freq2 m) noexcept {
    const bool p1 = m.m1 >= 0;
    const bool p2 = m.m2 >= 0;
    if (p1) return p2 ? Quadrant::PP : Quadrant::PM;
    return p2 ? Quadrant::MP : Quadrant::MM;
}

constexpr bool in_hardy_quadrant(Freq2 m) noexcept { return m.m1 >= 0 && m.m2 >= 0; }

inline const char* to_string(Quadrant q) {
    switch (q) {
    case Quadrant::PP: return "PP";
    case Quadrant::PM: return "PM";
    case Quadrant::MP: return "MP";
    case Quadrant::MM: return "MM";
    }
    return "?";
}

/// Closed arc of the unit circle: angles start .. start + length, counterclockwise.
struct Arc {
    double start = 0.0;
    double length = 0.0;

    double end() const { return start + length; }
};

/// Wrap an angle into [0, 2 pi).
inline double wrap_angle(double t) {
    double r = std::fmod(t, kTwoPi);
    if (r < 0) r += kTwoPi;
    return r;
}

/// Length of the intersection of the interiors of two arcs (0 when they meet at most in endpoints).
inline double arc_overlap(const Arc& a, const Arc& b) {
    if (a.length >= kTwoPi) return b.length;
    if (b.length >= kTwoPi) return a.length;
    const double s1 = wrap_angle(a.start);
    const double s2 = wrap_angle(b.start);
    double total = 0.0;
    for (int shift = -1; shift <= 1; ++shift) {
        const double lo = std::max(s1, s2 + shift * kTwoPi);
        const double hi = std::min(s1 + a.length, s2 + shift * kTwoPi + b.length);
        if (hi > lo) total += hi - lo;
    }
    return total;
}

inline bool arcs_disjoint(const std::vector<Arc>& a, const std::vector<Arc>& b) {
    for (const auto& x : a)
        for (const auto& y : b)
            if (arc_overlap(x, y) > 0.0) return false;
    return true;
}

/// Longest arc of the circle not covered by any of the given arcs.
inline double longest_uncovered_arc(const std::vector<Arc>& arcs) {
    if (arcs.empty()) return kTwoPi;
    std::vector<std::pair<double, double>> iv;
    for (const auto& a : arcs) {
        if (a.length >= kTwoPi) return 0.0;
        const double s = wrap_angle(a.start);
        const double e = s + a.length;
        if (e <= kTwoPi) {
            iv.emplace_back(s, e);
        } else {
            iv.emplace_back(s, kTwoPi);
            iv.emplace_back(0.0, e - kTwoPi);
        }
    }
    std::sort(iv.begin(), iv.end());
    double best = 0.0;
    double cursor = iv.front().second;
    for (std::size_t i = 1; i < iv.size(); ++i) {
        if (iv[i].first > cursor) best = std::max(best, iv[i].first - cursor);
        cursor = std::max(cursor, iv[i].second);
    }
    // gap wrapping through angle 0
    best = std::max(best, iv.front().first + kTwoPi - cursor);
    return best;
}

/// Band value meaning "no coefficient is omitted in this variable".
inline constexpr int kUnboundedBand = 1 << 28;

/// Bounds on the Fourier coefficients that a truncated symbol does not store.
struct Tail {
    double l2 = 0.0;  ///< l2 norm of the omitted coefficients
    double l1 = 0.0;  ///< l1 norm of the omitted coefficients; infinite when not summable
    int band1 = -1;   ///< omitted coefficients satisfy |m1| > band1 or |m2| > band2 (-1: no such guarantee)
    int band2 = -1;

    bool exact() const { return l2 == 0.0 && l1 == 0.0; }
};

struct ExplicitShape {};
struct TentShape {
    double center = 0.0;
    double half_width = 0.0;
    int bandwidth = kDefaultBandwidth;
};
struct ArcShape {
    double a = 0.0;
    double b = 0.0;
    int bandwidth = kDefaultBandwidth;
};

using Shape1 = std::variant<ExplicitShape, TentShape, ArcShape>;

/// Symbol on the unit circle.
class Symbol1 {
public:
    using Coeffs = std::map<int, cplx>;

    Symbol1() = default;

    explicit Symbol1(Coeffs coeffs, Tail tail = {}, Shape1 shape = ExplicitShape{},
                     std::vector<Arc> support = {}, double sup_bound = kInf)
        : coeffs_(std::move(coeffs)), tail_(tail), shape_(std::move(shape)),
          support_(std::move(support)), sup_bound_(sup_bound) {
        std::erase_if(coeffs_, [](const auto& kv) { return kv.second == cplx(0.0, 0.0); });
        if (tail_.l2 < 0.0 || tail_.l1 < 0.0) throw DomainError("negative tail bound");
    }

    const Coeffs& coeffs() const noexcept { return coeffs_; }
    cplx operator[](int n) const {
        auto it = coeffs_.find(n);
        return it == coeffs_.end() ? cplx{} : it->second;
    }
    const Tail& tail() const noexcept { return tail_; }
    const Shape1& shape() const noexcept { return shape_; }
    const std::vector<Arc>& support_arcs() const noexcept { return support_; }

    bool exact() const noexcept { return tail_.exact(); }
    bool is_zero() const noexcept { return coeffs_.empty() && exact(); }
    int min_freq() const { return coeffs_.empty() ? 0 : coeffs_.begin()->first; }
    int max_freq() const { return coeffs_.empty() ? 0 : coeffs_.rbegin()->first; }

    double stored_l1() const {
        double s = 0.0;
        for (const auto& [n, c] : coeffs_) s += std::abs(c);
        return s;
    }
    double stored_l2() const {
        double s = 0.0;
        for (const auto& [n, c] : coeffs_) s += std::norm(c);
        return std::sqrt(s);
    }
    /// Upper bound on the L2 norm of the full symbol.
    double l2_bound() const { return std::hypot(stored_l2(), tail_.l2); }
    /// Upper bound on the sup norm of the full symbol.
    double sup_bound() const { return std::min(sup_bound_, stored_l1() + tail_.l1); }
    double explicit_sup_bound() const { return sup_bound_; }

private:
    Coeffs coeffs_;
    Tail tail_;
    Shape1 shape_;
    std::vector<Arc> support_;
    double sup_bound_ = kInf;
};

struct TensorShape {
    std::shared_ptr<const Symbol1> f1;
    std::shared_ptr<const Symbol1> f2;
};
struct ProductShape {};

using Shape2 = std::variant<ExplicitShape, TensorShape, ProductShape>;

/// Symbol on the bitorus.
class Symbol2 {
public:
    using Coeffs = std::map<Freq2, cplx>;

    Symbol2() = default;

    explicit Symbol2(Coeffs coeffs, Tail tail = {}, Shape2 shape = ExplicitShape{},
                     double sup_bound = kInf)
        : coeffs_(std::move(coeffs)), tail_(tail), shape_(std::move(shape)), sup_bound_(sup_bound) {
        std::erase_if(coeffs_, [](const auto& kv) { return kv.second == cplx(0.0, 0.0); });
        if (tail_.l2 < 0.0 || tail_.l1 < 0.0) throw DomainError("negative tail bound");
    }

    const Coeffs& coeffs() const noexcept { return coeffs_; }
    cplx operator[](Freq2 m) const {
        auto it = coeffs_.find(m);
        return it == coeffs_.end() ? cplx{} : it->second;
    }
    cplx coeff(int m1, int m2) const { return (*this)[Freq2{m1, m2}]; }
    const Tail& tail() const noexcept { return tail_; }
    const Shape2& shape() const noexcept { return shape_; }

    bool exact() const noexcept { return tail_.exact(); }
    bool is_zero() const noexcept { return coeffs_.empty() && exact(); }

    /// Tensor factors when the symbol was built as f1(z1) f2(z2).
    const TensorShape* tensor_factors() const { return std::get_if<TensorShape>(&shape_); }

    int min_freq(int axis) const { return extent(axis).first; }
    int max_freq(int axis) const { return extent(axis).second; }

    double stored_l1() const {
        double s = 0.0;
        for (const auto& [m, c] : coeffs_) s += std::abs(c);
        return s;
    }
    double stored_l2() const {
        double s = 0.0;
        for (const auto& [m, c] : coeffs_) s += std::norm(c);
        return std::sqrt(s);
    }
    double l2_bound() const { return std::hypot(stored_l2(), tail_.l2); }
    double sup_bound() const { return std::min(sup_bound_, stored_l1() + tail_.l1); }
    double explicit_sup_bound() const { return sup_bound_; }

private:
    std::pair<int, int> extent(int axis) const {
        if (coeffs_.empty()) return {0, 0};
        int lo = std::numeric_limits<int>::max();
        int hi = std::numeric_limits<int>::min();
        for (const auto& [m, c] : coeffs_) {
            const int v = axis == 1 ? m.m1 : m.m2;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return {lo, hi};
    }

    Coeffs coeffs_;
    Tail tail_;
    Shape2 shape_;
    double sup_bound_ = kInf;
};

struct BidiscPoint {
    cplx z1;
    cplx z2;
};

/// A computed value together with a bound on its distance to the exact value.
struct Estimate {
    cplx value;
    double err = 0.0;
};

struct RealEstimate {
    double value = 0.0;
    double err = 0.0;
};

enum class Wirtinger { DZ1, DZ1Bar, DZ2, DZ2Bar };

namespace detail {

/// u(k, z) over a contiguous range of k.
class PowerTable {
public:
    PowerTable(cplx z, int lo, int hi) : lo_(std::min(lo, 0)), vals_(std::max(hi, 0) - std::min(lo, 0) + 1) {
        vals_[-lo_] = 1.0;
        for (int k = 1; k <= std::max(hi, 0); ++k) vals_[k - lo_] = vals_[k - 1 - lo_] * z;
        const cplx zc = std::conj(z);
        for (int k = -1; k >= lo_; --k) vals_[k - lo_] = vals_[k + 1 - lo_] * zc;
    }
    cplx operator()(int k) const { return vals_[k - lo_]; }

private:
    int lo_;
    std::vector<cplx> vals_;
};

/// sum over all k in Z of r^(2|k|).
inline double sq_sum_all(double r) {
    const double r2 = r * r;
    return r2 >= 1.0 ? kInf : (1.0 + r2) / (1.0 - r2);
}

/// sum over |k| > band of r^(2|k|); band < 0 means every k.
inline double sq_sum_outside(double r, int band) {
    if (band < 0) return sq_sum_all(r);
    const double r2 = r * r;
    if (r2 >= 1.0) return kInf;
    return 2.0 * std::pow(r2, band + 1) / (1.0 - r2);
}

inline double sq_sum_inside(double r, int band) {
    if (band < 0) return 0.0;
    const double r2 = r * r;
    if (r2 >= 1.0) return kInf;
    return (1.0 + r2 - 2.0 * std::pow(r2, band + 1)) / (1.0 - r2);
}

/// sum over the frequencies outside the box [-b1, b1] x [-b2, b2] of |u(m1, z1) u(m2, z2)|^2.
inline double sq_sum_outside_box(double r1, double r2, int b1, int b2) {
    if (b1 < 0 || b2 < 0) return sq_sum_all(r1) * sq_sum_all(r2);
    return sq_sum_outside(r1, b1) * sq_sum_all(r2) + sq_sum_inside(r1, b1) * sq_sum_outside(r2, b2);
}

inline bool on_circle(cplx z) { return std::abs(std::abs(z) - 1.0) <= kBoundaryTol; }

/// Validates a point for series evaluation; returns which coordinates lie on the circle.
inline std::pair<bool, bool> classify_point(const BidiscPoint& z) {
    const double a1 = std::abs(z.z1);
    const double a2 = std::abs(z.z2);
    if (a1 > 1.0 + kBoundaryTol || a2 > 1.0 + kBoundaryTol)
        throw DomainError("point lies outside the closed bidisc");
    const bool b1 = on_circle(z.z1);
    const bool b2 = on_circle(z.z2);
    if (b1 && b2) throw DomainError("at most one coordinate may lie on the unit circle");
    return {b1, b2};
}

} // namespace detail

// ----------------------------------------------------------------------------
// Coefficient access

inline cplx fourier_coeff(const Symbol2& f, Freq2 m) { return f[m]; }
inline cplx fourier_coeff(const Symbol1& f, int n) { return f[n]; }

// ----------------------------------------------------------------------------
// Builders

inline Symbol1 make_trigpoly(const std::vector<std::pair<int, cplx>>& terms) {
    Symbol1::Coeffs c;
    for (const auto& [n, v] : terms) c[n] += v;
    return Symbol1(std::move(c));
}

inline Symbol2 make_trigpoly2(const std::vector<std::pair<Freq2, cplx>>& terms) {
    Symbol2::Coeffs c;
    for (const auto& [m, v] : terms) c[m] += v;
    return Symbol2(std::move(c));
}

inline Symbol1 constant1(cplx c) { return make_trigpoly({{0, c}}); }
inline Symbol2 constant2(cplx c) { return make_trigpoly2({{{0, 0}, c}}); }

/// Continuous piecewise-linear bump: 1 at angle `center`, vanishing outside [center - w, center + w].
inline Symbol1 make_tent(double center, double half_width, int bandwidth = kDefaultBandwidth) {
    if (!(half_width > 0.0 && half_width < kPi)) throw DomainError("tent half-width must lie in (0, pi)");
    if (bandwidth < 1) throw DomainError("tent bandwidth must be at least 1");
    const double w = half_width;
    Symbol1::Coeffs c;
    c[0] = w / kTwoPi;
    for (int n = 1; n <= bandwidth; ++n) {
        const double s = std::sin(0.5 * n * w);
        const double mag = 2.0 * s * s / (kPi * n * static_cast<double>(n) * w);
        c[n] = mag * std::polar(1.0, -n * center);
        c[-n] = mag * std::polar(1.0, n * center);
    }
    // |c_n| <= 2 / (pi n^2 w); sum_{n > B} n^-4 <= 1/(3 B^3), sum_{n > B} n^-2 <= 1/B
    const double B = bandwidth;
    Tail t;
    t.l2 = std::sqrt(8.0 / (3.0 * kPi * kPi * w * w * B * B * B));
    t.l1 = 4.0 / (kPi * w * B);
    t.band1 = bandwidth;
    return Symbol1(std::move(c), t, TentShape{center, half_width, bandwidth},
                   {Arc{center - w, 2.0 * w}}, 1.0);
}

/// Indicator of the closed arc from angle a to angle b (counterclockwise, 0 < b - a <= 2 pi).
inline Symbol1 make_arc(double a, double b, int bandwidth = kDefaultBandwidth) {
    const double len = b - a;
    if (!(len > 0.0) || len > kTwoPi + 1e-15) throw DomainError("degenerate arc");
    if (bandwidth < 1) throw DomainError("arc bandwidth must be at least 1");
    if (len >= kTwoPi - 1e-15) {
        return Symbol1(Symbol1::Coeffs{{0, cplx(1.0)}}, {}, ArcShape{a, b, bandwidth}, {Arc{a, kTwoPi}}, 1.0);
    }
    Symbol1::Coeffs c;
    c[0] = len / kTwoPi;
    const double mid = 0.5 * (a + b);
    for (int n = 1; n <= bandwidth; ++n) {
        const double mag = std::sin(0.5 * n * len) / (kPi * n);
        c[n] = mag * std::polar(1.0, -n * mid);
        c[-n] = mag * std::polar(1.0, n * mid);
    }
    // |c_n| <= 1/(pi n): square summable only
    Tail t;
    t.l2 = std::sqrt(2.0 / (kPi * kPi * bandwidth));
    t.l1 = kInf;
    t.band1 = bandwidth;
    return Symbol1(std::move(c), t, ArcShape{a, b, bandwidth}, {Arc{a, len}}, 1.0);
}

/// Pointwise value on the circle. Structural symbols use their closed form; others sum the series.
inline cplx evaluate_on_circle(const Symbol1& f, double theta) {
    if (const auto* tent = std::get_if<TentShape>(&f.shape())) {
        double d = std::abs(wrap_angle(theta - tent->center));
        d = std::min(d, kTwoPi - d);
        return std::max(0.0, 1.0 - d / tent->half_width);
    }
    if (const auto* arc = std::get_if<ArcShape>(&f.shape())) {
        const double len = arc->b - arc->a;
        if (len >= kTwoPi - 1e-15) return 1.0;
        return wrap_angle(theta - arc->a) <= len ? 1.0 : 0.0;
    }
    cplx s{};
    for (const auto& [n, c] : f.coeffs()) s += c * std::polar(1.0, n * theta);
    return s;
}

inline Symbol2 tensor(const Symbol1& f1, const Symbol1& f2) {
    Symbol2::Coeffs c;
    auto hint = c.end();
    for (const auto& [n1, a] : f1.coeffs())
        for (const auto& [n2, b] : f2.coeffs()) hint = c.emplace_hint(hint, Freq2{n1, n2}, a * b);
    const double s1 = f1.stored_l2(), s2 = f2.stored_l2();
    const double e1 = f1.tail().l2, e2 = f2.tail().l2;
    const double a1 = f1.stored_l1(), a2 = f2.stored_l1();
    const double d1 = f1.tail().l1, d2 = f2.tail().l1;
    Tail t;
    // ||f1 (x) f2||^2 - ||t1 (x) t2||^2 with ||fi||^2 = si^2 + ei^2
    t.l2 = std::sqrt(s1 * s1 * e2 * e2 + e1 * e1 * s2 * s2 + e1 * e1 * e2 * e2);
    t.l1 = (d1 == 0.0 && d2 == 0.0) ? 0.0 : a1 * d2 + d1 * a2 + d1 * d2;
    if (std::isnan(t.l1)) t.l1 = kInf;
    // an exact factor omits nothing in its own variable
    t.band1 = f1.exact() ? kUnboundedBand : f1.tail().band1;
    t.band2 = f2.exact() ? kUnboundedBand : f2.tail().band1;
    if (t.band1 < 0 || t.band2 < 0) t.band1 = t.band2 = -1;
    return Symbol2(std::move(c), t,
                   TensorShape{std::make_shared<const Symbol1>(f1), std::make_shared<const Symbol1>(f2)},
                   f1.sup_bound() * f2.sup_bound());
}

/// The one-variable symbol z2 -> sum_n f_(m1, n) z2^n (fixed z1-frequency).
inline Symbol1 slice(const Symbol2& f, int m1) {
    Symbol1::Coeffs c;
    for (const auto& [m, v] : f.coeffs())
        if (m.m1 == m1) c[m.m2] = v;
    Tail t;
    if (!f.exact()) {
        t.l2 = f.tail().l2;
        t.l1 = f.tail().l1;
    }
    return Symbol1(std::move(c), t);
}

/// Coefficient truncation to |n| <= bandwidth. Tents and arcs are rebuilt from their closed form,
/// so the tail bound stays relative to the exact function.
inline Symbol1 truncate(const Symbol1& f, int bandwidth) {
    if (bandwidth < 0) throw DomainError("negative truncation bandwidth");
    if (const auto* t = std::get_if<TentShape>(&f.shape()); t && bandwidth >= 1)
        return make_tent(t->center, t->half_width, bandwidth);
    if (const auto* a = std::get_if<ArcShape>(&f.shape()); a && bandwidth >= 1)
        return make_arc(a->a, a->b, bandwidth);
    Symbol1::Coeffs c;
    double d2 = 0.0, d1 = 0.0;
    for (const auto& [n, v] : f.coeffs()) {
        if (std::abs(n) <= bandwidth) {
            c.emplace_hint(c.end(), n, v);
        } else {
            d2 += std::norm(v);
            d1 += std::abs(v);
        }
    }
    Tail t = f.tail();
    const bool had_tail = !t.exact();
    t.l2 = std::sqrt(t.l2 * t.l2 + d2);
    t.l1 += d1;
    if (!had_tail) t.band1 = bandwidth;
    else if (t.band1 >= 0) t.band1 = std::min(t.band1, bandwidth);
    return Symbol1(std::move(c), t, ExplicitShape{}, f.support_arcs(), f.sup_bound());
}

inline Symbol2 truncate(const Symbol2& f, int bandwidth) {
    if (bandwidth < 0) throw DomainError("negative truncation bandwidth");
    if (const auto* tf = f.tensor_factors()) return tensor(truncate(*tf->f1, bandwidth), truncate(*tf->f2, bandwidth));
    Symbol2::Coeffs c;
    double d2 = 0.0, d1 = 0.0;
    for (const auto& [m, v] : f.coeffs()) {
        if (std::abs(m.m1) <= bandwidth && std::abs(m.m2) <= bandwidth) {
            c.emplace_hint(c.end(), m, v);
        } else {
            d2 += std::norm(v);
            d1 += std::abs(v);
        }
    }
    Tail t = f.tail();
    const bool had_tail = !t.exact();
    t.l2 = std::sqrt(t.l2 * t.l2 + d2);
    t.l1 += d1;
    if (!had_tail) {
        t.band1 = t.band2 = bandwidth;
    } else if (t.band1 >= 0 && t.band2 >= 0) {
        t.band1 = std::min(t.band1, bandwidth);
        t.band2 = std::min(t.band2, bandwidth);
    }
    return Symbol2(std::move(c), t, ExplicitShape{}, f.explicit_sup_bound());
}

// ----------------------------------------------------------------------------
// Algebra

inline Symbol1 conjugate(const Symbol1& f) {
    Symbol1::Coeffs c;
    for (const auto& [n, v] : f.coeffs()) c[-n] = std::conj(v);
    Shape1 shape = ExplicitShape{};
    // tents and arcs are real valued
    if (!std::holds_alternative<ExplicitShape>(f.shape())) shape = f.shape();
    return Symbol1(std::move(c), f.tail(), shape, f.support_arcs(), f.sup_bound());
}

inline Symbol2 conjugate(const Symbol2& f) {
    if (const auto* t = f.tensor_factors()) return tensor(conjugate(*t->f1), conjugate(*t->f2));
    Symbol2::Coeffs c;
    for (const auto& [m, v] : f.coeffs()) c[-m] = std::conj(v);
    return Symbol2(std::move(c), f.tail(), ExplicitShape{}, f.explicit_sup_bound());
}

inline Symbol2 quadrant_part(const Symbol2& f, Quadrant q) {
    Symbol2::Coeffs c;
    for (const auto& [m, v] : f.coeffs())
        if (quadrant_of(m) == q) c.emplace_hint(c.end(), m, v);
    // the omitted coefficients of f may land in any quadrant
    Tail t = f.tail();
    return Symbol2(std::move(c), t);
}

inline Symbol2 operator+(const Symbol2& f, const Symbol2& g) {
    Symbol2::Coeffs c = f.coeffs();
    for (const auto& [m, v] : g.coeffs()) c[m] += v;
    Tail t;
    t.l2 = f.tail().l2 + g.tail().l2;
    t.l1 = f.tail().l1 + g.tail().l1;
    return Symbol2(std::move(c), t, ExplicitShape{}, f.sup_bound() + g.sup_bound());
}

inline Symbol2 operator*(cplx s, const Symbol2& f) {
    Symbol2::Coeffs c;
    for (const auto& [m, v] : f.coeffs()) c[m] = s * v;
    Tail t = f.tail();
    t.l2 *= std::abs(s);
    t.l1 *= std::abs(s);
    return Symbol2(std::move(c), t, ExplicitShape{}, std::abs(s) * f.sup_bound());
}

inline Symbol2 operator-(const Symbol2& f, const Symbol2& g) { return f + cplx(-1.0) * g; }

inline Symbol1 operator+(const Symbol1& f, const Symbol1& g) {
    Symbol1::Coeffs c = f.coeffs();
    for (const auto& [n, v] : g.coeffs()) c[n] += v;
    Tail t;
    t.l2 = f.tail().l2 + g.tail().l2;
    t.l1 = f.tail().l1 + g.tail().l1;
    return Symbol1(std::move(c), t, ExplicitShape{}, {}, f.sup_bound() + g.sup_bound());
}

inline Symbol1 operator*(cplx s, const Symbol1& f) {
    Symbol1::Coeffs c;
    for (const auto& [n, v] : f.coeffs()) c[n] = s * v;
    Tail t = f.tail();
    t.l2 *= std::abs(s);
    t.l1 *= std::abs(s);
    return Symbol1(std::move(c), t, ExplicitShape{}, f.support_arcs(), std::abs(s) * f.sup_bound());
}

namespace detail {

// Error of the retained product against the true product fg:
//   fg - tf*tg = f*eg + ef*tg, so ||.||_2 <= sup(f) e2(g) + e2(f) l1(tg) and the same with l1.
inline Tail product_tail(double dropped_l2, double dropped_l1, double sup_f, double l1_tf, double l1_f,
                         const Tail& tf, const Tail& tg, double l1_tg) {
    Tail t;
    auto mul = [](double a, double b) { return (a == 0.0 || b == 0.0) ? 0.0 : a * b; };
    t.l2 = dropped_l2 + mul(sup_f, tg.l2) + mul(tf.l2, l1_tg);
    t.l1 = dropped_l1 + mul(l1_f, tg.l1) + mul(tf.l1, l1_tg);
    (void)l1_tf;
    return t;
}

} // namespace detail

/// Coefficient convolution restricted to frequencies |n| <= bandwidth.
inline Symbol1 multiply(const Symbol1& f, const Symbol1& g, int bandwidth) {
    if (bandwidth < 0) throw DomainError("bandwidth must be nonnegative");
    std::map<int, cplx> full;
    for (const auto& [a, x] : f.coeffs())
        for (const auto& [b, y] : g.coeffs()) full[a + b] += x * y;
    Symbol1::Coeffs kept;
    double dl2 = 0.0, dl1 = 0.0;
    for (const auto& [n, v] : full) {
        if (std::abs(n) <= bandwidth) kept.emplace_hint(kept.end(), n, v);
        else {
            dl2 += std::norm(v);
            dl1 += std::abs(v);
        }
    }
    const double l1_f = f.stored_l1() + f.tail().l1;
    Tail t = detail::product_tail(std::sqrt(dl2), dl1, f.sup_bound(), f.stored_l1(), l1_f, f.tail(), g.tail(),
                                  g.stored_l1());
    t.band1 = -1;
    if (t.exact()) t = Tail{};
    else if (f.exact() && g.exact()) t.band1 = bandwidth;
    return Symbol1(std::move(kept), t, ExplicitShape{}, {}, f.sup_bound() * g.sup_bound());
}

/// Coefficient convolution restricted to the box [-bandwidth, bandwidth]^2.
inline Symbol2 multiply(const Symbol2& f, const Symbol2& g, int bandwidth) {
    if (bandwidth < 0) throw DomainError("bandwidth must be nonnegative");
    const auto* tf = f.tensor_factors();
    const auto* tg = g.tensor_factors();
    if (tf && tg) {
        // (f1 f2)(g1 g2) = (f1 g1)(f2 g2) coefficient-wise
        return tensor(multiply(*tf->f1, *tg->f1, bandwidth), multiply(*tf->f2, *tg->f2, bandwidth));
    }
    std::map<Freq2, cplx> full;
    for (const auto& [a, x] : f.coeffs())
        for (const auto& [b, y] : g.coeffs()) full[a + b] += x * y;
    Symbol2::Coeffs kept;
    double dl2 = 0.0, dl1 = 0.0;
    for (const auto& [m, v] : full) {
        if (std::abs(m.m1) <= bandwidth && std::abs(m.m2) <= bandwidth) kept.emplace_hint(kept.end(), m, v);
        else {
            dl2 += std::norm(v);
            dl1 += std::abs(v);
        }
    }
    const double l1_f = f.stored_l1() + f.tail().l1;
    Tail t = detail::product_tail(std::sqrt(dl2), dl1, f.sup_bound(), f.stored_l1(), l1_f, f.tail(), g.tail(),
                                  g.stored_l1());
    if (t.exact()) t = Tail{};
    else if (f.exact() && g.exact()) t.band1 = t.band2 = bandwidth;
    return Symbol2(std::move(kept), t, ProductShape{}, f.sup_bound() * g.sup_bound());
}

// ----------------------------------------------------------------------------
// Predicates

/// True iff no stored coefficient has a negative frequency on the given axis (1 or 2).
inline bool is_analytic_in(const Symbol2& f, int axis) {
    if (axis != 1 && axis != 2) throw DomainError("axis must be 1 or 2");
    for (const auto& [m, v] : f.coeffs())
        if ((axis == 1 ? m.m1 : m.m2) < 0) return false;
    return true;
}

inline bool is_analytic(const Symbol2& f) { return is_analytic_in(f, 1) && is_analytic_in(f, 2); }

inline bool is_analytic(const Symbol1& f) { return f.coeffs().empty() || f.min_freq() >= 0; }

// ----------------------------------------------------------------------------
// Evaluation in the bidisc

namespace detail {

// sum_{k >= 1} k^2 r^(2(k-1))
inline double deriv_sq_sum(double r) {
    const double r2 = r * r;
    return (1.0 + r2) / std::pow(1.0 - r2, 3);
}

// max_{k >= 1} k r^(k-1)
inline double deriv_sup(double r) {
    if (r <= 0.0) return 1.0;
    const double kstar = std::max(1.0, std::floor(-1.0 / std::log(r)));
    double best = 1.0;
    for (double k = kstar; k <= kstar + 1.0; k += 1.0) best = std::max(best, k * std::pow(r, k - 1.0));
    return best;
}

// Error of a product of two estimates.
inline Estimate product(const Estimate& a, const Estimate& b) {
    Estimate out{a.value * b.value, 0.0};
    if (a.err > 0.0 || b.err > 0.0) out.err = std::abs(a.value) * b.err + a.err * std::abs(b.value) + a.err * b.err;
    return out;
}

} // namespace detail

/// Harmonic extension of a circle symbol into the closed disc.
inline Estimate harmonic_extension(const Symbol1& f, cplx z) {
    if (std::abs(z) > 1.0 + kBoundaryTol) throw DomainError("point lies outside the closed disc");
    const bool b = detail::on_circle(z);
    if (b && !std::isfinite(f.tail().l1))
        throw DivergenceError("boundary evaluation requires an absolutely summable coefficient tail");
    Estimate out;
    if (!f.coeffs().empty()) {
        detail::PowerTable u(z, f.min_freq(), f.max_freq());
        for (const auto& [n, c] : f.coeffs()) out.value += c * u(n);
    }
    if (!f.exact()) {
        double err = f.tail().l1;
        if (!b) err = std::min(err, f.tail().l2 * std::sqrt(detail::sq_sum_outside(std::abs(z), f.tail().band1)));
        out.err = err;
    }
    return out;
}

/// d/dz (bar = false) or d/dzbar (bar = true) of the harmonic extension of a circle symbol, |z| < 1.
inline Estimate derivative(const Symbol1& f, cplx z, bool bar) {
    if (std::abs(z) >= 1.0 - kBoundaryTol) throw DomainError("the differentiated variable must lie inside the disc");
    Estimate out;
    if (!f.coeffs().empty()) {
        detail::PowerTable u(z, f.min_freq() - 1, f.max_freq() + 1);
        for (const auto& [n, c] : f.coeffs()) {
            if (!bar && n >= 1) out.value += c * static_cast<double>(n) * u(n - 1);
            if (bar && n <= -1) out.value += c * static_cast<double>(-n) * u(n + 1);
        }
    }
    if (!f.exact()) {
        const double r = std::abs(z);
        out.err = std::min(f.tail().l1 * detail::deriv_sup(r), f.tail().l2 * std::sqrt(detail::deriv_sq_sum(r)));
    }
    return out;
}

/// Harmonic (Poisson) extension of a bitorus symbol into the closed bidisc.
/// One coordinate may lie on the circle when the omitted coefficients are absolutely summable in that
/// variable. Tensor symbols are evaluated factor by factor.
inline Estimate harmonic_extension(const Symbol2& f, const BidiscPoint& z) {
    const auto [b1, b2] = detail::classify_point(z);
    if (const auto* t = f.tensor_factors())
        return detail::product(harmonic_extension(*t->f1, z.z1), harmonic_extension(*t->f2, z.z2));
    if ((b1 || b2) && !std::isfinite(f.tail().l1))
        throw DivergenceError("boundary evaluation requires an absolutely summable coefficient tail");
    Estimate out;
    if (!f.coeffs().empty()) {
        detail::PowerTable u1(z.z1, f.min_freq(1), f.max_freq(1));
        detail::PowerTable u2(z.z2, f.min_freq(2), f.max_freq(2));
        for (const auto& [m, c] : f.coeffs()) out.value += c * u1(m.m1) * u2(m.m2);
    }
    if (!f.exact()) {
        double err = f.tail().l1;
        if (!b1 && !b2) {
            const double s = detail::sq_sum_outside_box(std::abs(z.z1), std::abs(z.z2), f.tail().band1,
                                                        f.tail().band2);
            err = std::min(err, f.tail().l2 * std::sqrt(s));
        }
        out.err = err;
    }
    return out;
}

/// Term-wise Wirtinger derivative of the harmonic-extension series.
inline Estimate wirtinger(const Symbol2& f, const BidiscPoint& z, Wirtinger which) {
    const auto [b1, b2] = detail::classify_point(z);
    const bool first = which == Wirtinger::DZ1 || which == Wirtinger::DZ1Bar;
    const bool bar = which == Wirtinger::DZ1Bar || which == Wirtinger::DZ2Bar;
    if (first ? b1 : b2) throw DomainError("the differentiated variable must lie inside the disc");
    if (const auto* t = f.tensor_factors()) {
        if (first) return detail::product(derivative(*t->f1, z.z1, bar), harmonic_extension(*t->f2, z.z2));
        return detail::product(harmonic_extension(*t->f1, z.z1), derivative(*t->f2, z.z2, bar));
    }
    const bool other_boundary = first ? b2 : b1;
    if (other_boundary && !std::isfinite(f.tail().l1))
        throw DivergenceError("boundary evaluation requires an absolutely summable coefficient tail");

    const cplx zd = first ? z.z1 : z.z2;  // differentiated coordinate
    const cplx zo = first ? z.z2 : z.z1;  // other coordinate
    Estimate out;
    if (!f.coeffs().empty()) {
        const int axis_d = first ? 1 : 2;
        const int axis_o = first ? 2 : 1;
        detail::PowerTable ud(zd, f.min_freq(axis_d) - 1, f.max_freq(axis_d) + 1);
        detail::PowerTable uo(zo, f.min_freq(axis_o), f.max_freq(axis_o));
        for (const auto& [m, c] : f.coeffs()) {
            const int kd = first ? m.m1 : m.m2;
            const int ko = first ? m.m2 : m.m1;
            if (!bar && kd >= 1) out.value += c * static_cast<double>(kd) * ud(kd - 1) * uo(ko);
            if (bar && kd <= -1) out.value += c * static_cast<double>(-kd) * ud(kd + 1) * uo(ko);
        }
    }
    if (!f.exact()) {
        const double rd = std::abs(zd);
        double err = f.tail().l1 * detail::deriv_sup(rd);
        if (!other_boundary)
            err = std::min(err, f.tail().l2 * std::sqrt(detail::deriv_sq_sum(rd) * detail::sq_sum_all(std::abs(zo))));
        out.err = err;
    }
    return out;
}

} // namespace bidisc
