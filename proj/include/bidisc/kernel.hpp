#pragma once

// Reproducing kernels of H^2(D^2) and the quantities probed on them: Berezin forms, Hankel kernel
// norms, and boundary probe tables.
//
// Two routes are offered. Box routes truncate k_z to a TruncationBox and run it through the matrices
// of operators.hpp. Exact routes never truncate the kernel: the coefficients of h k_z obey the causal
// recursion y_j = conj(z) y_(j-1) + s h_j, and beyond the top frequency of h they continue
// geometrically, so every L2 pairing of h k_z against g k_z is a finite sum plus a closed-form tail.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "bidisc/operators.hpp"
#include "bidisc/spectral.hpp"
#include "bidisc/symbol.hpp"

namespace bidisc {

inline void require_interior(const BidiscPoint& z) {
    if (!(std::abs(z.z1) < 1.0 && std::abs(z.z2) < 1.0)) throw DomainError("point must lie in the open bidisc");
}

/// K_z(w) = prod_i 1 / (1 - conj(z_i) w_i).
inline cplx kernel_eval(const BidiscPoint& z, const BidiscPoint& w) {
    auto one = [](cplx zi, cplx wi) {
        const cplx d = 1.0 - std::conj(zi) * wi;
        if (d == cplx(0.0)) throw DivergenceError("reproducing kernel pole: conj(z_i) w_i = 1");
        if (std::abs(zi) * std::abs(wi) >= 1.0) throw DomainError("kernel series diverges: |z_i||w_i| >= 1");
        return 1.0 / d;
    };
    return one(z.z1, w.z1) * one(z.z2, w.z2);
}

/// Truncated normalized kernel k_z on a box.
struct KernelVector {
    Vector coeffs;
    TruncationBox box;
    BidiscPoint z;
    double tail = 0.0;  ///< l2 norm of the coefficients outside the box

    double stored_norm() const { return coeffs.norm(); }
};

namespace detail {

// r^(2(n+1)): the squared mass of a one-variable normalized kernel beyond degree n.
inline double kernel_mass_beyond(double r, int n) {
    return r == 0.0 ? 0.0 : std::exp(2.0 * (n + 1) * std::log(r));
}

// sqrt((1 + r) / (1 - r)) = sup of the one-variable Poisson kernel, squared-rooted.
inline double poisson_sup_root(double r) { return std::sqrt((1.0 + r) / (1.0 - r)); }

} // namespace detail

inline KernelVector normalized_kernel(const BidiscPoint& z, const TruncationBox& box) {
    require_interior(z);
    KernelVector k;
    k.box = box;
    k.z = z;
    const double r1 = std::abs(z.z1), r2 = std::abs(z.z2);
    const double s = std::sqrt((1.0 - r1 * r1) * (1.0 - r2 * r2));
    std::vector<cplx> p1(box.n1 + 1), p2(box.n2 + 1);
    p1[0] = p2[0] = 1.0;
    for (int a = 1; a <= box.n1; ++a) p1[a] = p1[a - 1] * std::conj(z.z1);
    for (int b = 1; b <= box.n2; ++b) p2[b] = p2[b - 1] * std::conj(z.z2);
    k.coeffs.resize(box.size());
    for (int a = 0; a <= box.n1; ++a)
        for (int b = 0; b <= box.n2; ++b) k.coeffs(box.index({a, b})) = s * p1[a] * p2[b];
    const double a1 = detail::kernel_mass_beyond(r1, box.n1), a2 = detail::kernel_mass_beyond(r2, box.n2);
    k.tail = std::sqrt(std::max(0.0, a1 + a2 - a1 * a2));
    return k;
}

/// l1 norm of the coefficients of k_z outside the box (bounds the sup of the omitted part on T^2).
inline double kernel_l1_tail(const KernelVector& k) {
    const double r1 = std::abs(k.z.z1), r2 = std::abs(k.z.z2);
    const double b1 = r1 == 0.0 ? 0.0 : std::pow(r1, k.box.n1 + 1);
    const double b2 = r2 == 0.0 ? 0.0 : std::pow(r2, k.box.n2 + 1);
    return detail::poisson_sup_root(r1) * detail::poisson_sup_root(r2) * (b1 + b2 - b1 * b2);
}

/// Smallest box whose kernel tail at z is below tol.
inline TruncationBox auto_box(const BidiscPoint& z, double tol) {
    require_interior(z);
    if (!(tol > 0.0)) throw DomainError("kernel tail tolerance must be positive");
    auto degree = [tol](double r) {
        if (r == 0.0) return 0;
        // each axis gets half of tol^2
        return std::max(0, int(std::ceil(std::log(0.5 * tol * tol) / (2.0 * std::log(r)))) - 1);
    };
    return {degree(std::abs(z.z1)), degree(std::abs(z.z2))};
}

// ----------------------------------------------------------------------------
// Box routes

/// <T_g k_z, k_z> on the truncated kernel, summed coefficient by coefficient without forming T_g.
inline Estimate berezin_toeplitz(const Symbol2& g, const BidiscPoint& z, const TruncationBox& box) {
    require_interior(z);
    const double r1 = std::abs(z.z1), r2 = std::abs(z.z2);
    // sum over b with b, b + m in [0, n] of conj(k_(b+m)) k_b
    auto pair_sum = [](cplx zi, double ri, int m, int n) -> cplx {
        const int q = std::abs(m);
        if (q > n) return 0.0;
        const cplx base = m >= 0 ? std::pow(zi, q) : std::pow(std::conj(zi), q);
        const double kept = ri == 0.0 ? 1.0 : -std::expm1(2.0 * (n - q + 1) * std::log(ri));
        return base * kept;
    };
    cplx v{};
    for (const auto& [m, c] : g.coeffs()) v += c * pair_sum(z.z1, r1, m.m1, box.n1) * pair_sum(z.z2, r2, m.m2, box.n2);
    const double a1 = detail::kernel_mass_beyond(r1, box.n1), a2 = detail::kernel_mass_beyond(r2, box.n2);
    const double t = std::sqrt(std::max(0.0, a1 + a2 - a1 * a2));
    double err = t > 0.0 ? 2.0 * t * g.sup_bound() : 0.0;
    if (!g.exact()) err += g.tail().l1;
    return {v, err};
}

/// <(T_f T_g - T_fg) k_z, k_z> on the truncated kernel.
inline Estimate berezin_semicommutator(const Symbol2& f, const Symbol2& g, const BidiscPoint& z,
                                       const TruncationBox& box) {
    const KernelVector k = normalized_kernel(z, box);
    const auto op = semicommutator_operator(f, g, box);
    const Matrix sk = op->apply(k.coeffs);
    const cplx v = k.coeffs.dot(sk.col(0));  // conj(k)^T S k
    double err = 0.0;
    if (k.tail > 0.0 && !(f.is_zero() || g.is_zero())) err += 2.0 * k.tail * f.sup_bound() * g.sup_bound();
    err += detail::semicommutator_error(f, g, double(box.size())).bound;
    return {v, err};
}

namespace detail {

// Bound on ||(h - h_stored) k_z|| for the normalized (untruncated) kernel.
inline double tail_on_kernel(const Tail& t, double r1, double r2) {
    if (t.exact()) return 0.0;
    return std::min(t.l1, t.l2 * poisson_sup_root(r1) * poisson_sup_root(r2));
}

inline double tail_on_kernel(const Tail& t, double r) {
    if (t.exact()) return 0.0;
    return std::min(t.l1, t.l2 * poisson_sup_root(r));
}

} // namespace detail

/// ||H_f k_z|| with k_z truncated to the box, through the Hankel matrix on its automatic window.
inline RealEstimate hankel_kernel_norm(const Symbol2& f, const BidiscPoint& z, const TruncationBox& box) {
    const KernelVector k = normalized_kernel(z, box);
    if (f.coeffs().empty()) return {0.0, detail::tail_on_kernel(f.tail(), std::abs(z.z1), std::abs(z.z2))};
    const OperatorMatrix h = hankel_matrix(f, box);
    const double v = (h.entries * k.coeffs).norm();
    const double sup_stored = std::min(f.stored_l1(), f.sup_bound() + f.tail().l1);
    const double err = detail::tail_on_kernel(f.tail(), std::abs(z.z1), std::abs(z.z2)) + sup_stored * k.tail;
    return {v, err};
}

// ----------------------------------------------------------------------------
// Exact routes

namespace detail {

// Coefficients of a one-variable symbol as a dense array over [lo, hi].
struct DenseFactor {
    int lo = 0;
    int hi = 0;
    std::vector<cplx> c;
    Tail tail;

    cplx at(int j) const { return j < lo || j > hi ? cplx{} : c[j - lo]; }
};

inline DenseFactor dense_factor(const Symbol1& h) {
    DenseFactor d;
    d.lo = h.min_freq();
    d.hi = h.max_freq();
    d.c.assign(d.hi - d.lo + 1, cplx{});
    for (const auto& [n, v] : h.coeffs()) d.c[n - d.lo] = v;
    d.tail = h.tail();
    return d;
}

// Coefficients of h k_z (one variable) on [lo, hi]; beyond hi they continue as y_hi conj(z)^(j - hi).
struct CausalImage1 {
    int lo = 0;
    int hi = 0;
    std::vector<cplx> y;
    double rho = 0.0;  ///< sum_{d >= 1} |z|^(2d)

    cplx at(int j) const { return y[j - lo]; }
};

inline CausalImage1 causal_image(const DenseFactor& h, cplx z, int lo, int hi) {
    CausalImage1 out;
    out.lo = lo;
    out.hi = hi;
    const double r2 = std::norm(z);
    out.rho = r2 / (1.0 - r2);
    const double s = std::sqrt(1.0 - r2);
    const cplx zb = std::conj(z);
    out.y.resize(hi - lo + 1);
    cplx prev{};
    for (int j = lo; j <= hi; ++j) {
        prev = zb * prev + s * h.at(j);
        out.y[j - lo] = prev;
    }
    return out;
}

// sum_{j < 0} x_j conj(y_j) and sum_{j >= 0} x_j conj(y_j) (geometric tail included).
struct SplitPairing {
    cplx neg;
    cplx pos;
    cplx total() const { return neg + pos; }
};

inline SplitPairing split_pairing(const CausalImage1& x, const CausalImage1& y) {
    SplitPairing p{};
    for (int j = x.lo; j <= x.hi; ++j) {
        const cplx t = x.at(j) * std::conj(y.at(j));
        if (j < 0) p.neg += t;
        else p.pos += t;
    }
    p.pos += x.rho * x.at(x.hi) * std::conj(y.at(x.hi));
    return p;
}

inline SplitPairing split_pairing(const Symbol1& a, const Symbol1& b, cplx z) {
    const int lo = std::min({0, a.min_freq(), b.min_freq()}), hi = std::max({0, a.max_freq(), b.max_freq()});
    return split_pairing(causal_image(dense_factor(a), z, lo, hi), causal_image(dense_factor(b), z, lo, hi));
}

// Pairing over frequencies outside Z+^2 of two tensor images x1 x2 and y1 y2.
inline cplx off_quadrant(const SplitPairing& p1, const SplitPairing& p2) { return p1.neg * p2.total() + p1.pos * p2.neg; }

// <H_a k_z, H_b k_z> for explicit two-variable symbols: the causal recursion on a 2D grid.
inline cplx hankel_pairing_grid(const Symbol2& a, const Symbol2& b, const BidiscPoint& z) {
    const int lo1 = std::min({0, a.min_freq(1), b.min_freq(1)}), hi1 = std::max({0, a.max_freq(1), b.max_freq(1)});
    const int lo2 = std::min({0, a.min_freq(2), b.min_freq(2)}), hi2 = std::max({0, a.max_freq(2), b.max_freq(2)});
    const int n1 = hi1 - lo1 + 1, n2 = hi2 - lo2 + 1;
    const cplx zb1 = std::conj(z.z1), zb2 = std::conj(z.z2);
    const double q1 = std::norm(z.z1), q2 = std::norm(z.z2);
    const double s = std::sqrt((1.0 - q1) * (1.0 - q2));
    auto image = [&](const Symbol2& h) {
        Matrix y = Matrix::Zero(n1, n2);
        for (const auto& [m, c] : h.coeffs()) y(m.m1 - lo1, m.m2 - lo2) = s * c;
        // causal prefix sums along each axis: y_j <- y_j + conj(z) y_(j-1)
        for (int i = 1; i < n1; ++i) y.row(i) += zb1 * y.row(i - 1);
        for (int j = 1; j < n2; ++j) y.col(j) += zb2 * y.col(j - 1);
        return y;
    };
    const Matrix ya = image(a), yb = image(b);
    cplx sum{};
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
            if (i + lo1 < 0 || j + lo2 < 0) sum += ya(i, j) * std::conj(yb(i, j));
    const double rho1 = q1 / (1.0 - q1), rho2 = q2 / (1.0 - q2);
    for (int j = 0; j < n2 && j + lo2 < 0; ++j) sum += rho1 * ya(n1 - 1, j) * std::conj(yb(n1 - 1, j));
    for (int i = 0; i < n1 && i + lo1 < 0; ++i) sum += rho2 * ya(i, n2 - 1) * std::conj(yb(i, n2 - 1));
    return sum;
}

// Bound on ||(h - h_stored) k_z|| in one variable given the computed ||h_stored k_z||.
struct FactorNorms {
    double full = 0.0;
    double err = 0.0;
};

// A two-variable symbol as seen by the exact routes: tensors stay factored (as dense arrays), so their
// factors can be refined to large bandwidths without forming the product coefficient table.
struct KernelSymbol {
    const Symbol2* full = nullptr;  ///< set when not a tensor
    DenseFactor f1, f2;

    bool tensor() const { return full == nullptr; }
};

inline KernelSymbol kernel_symbol(const Symbol2& h) {
    KernelSymbol k;
    if (const auto* t = h.tensor_factors()) {
        k.f1 = dense_factor(*t->f1);
        k.f2 = dense_factor(*t->f2);
    } else {
        k.full = &h;
    }
    return k;
}

inline KernelSymbol kernel_symbol(const Symbol1& f1, const Symbol1& f2) {
    KernelSymbol k;
    k.f1 = dense_factor(f1);
    k.f2 = dense_factor(f2);
    return k;
}

inline Symbol2 as_symbol(const KernelSymbol& h) {
    if (!h.tensor()) return *h.full;
    auto back = [](const DenseFactor& d) {
        Symbol1::Coeffs c;
        for (int j = d.lo; j <= d.hi; ++j) c[j] = d.at(j);
        return Symbol1(std::move(c), d.tail);
    };
    return bidisc::tensor(back(h.f1), back(h.f2));
}

// Exact-route quantities at one point for a pair (a, b): ||H_a k||, ||H_b k|| and <H_a k, H_b k>.
struct PairAtPoint {
    RealEstimate a;
    RealEstimate b;
    cplx pairing;  ///< <H_a k_z, H_b k_z>
};

inline double tensor_error(const SplitPairing& s1, const SplitPairing& s2, const DenseFactor& d1,
                           const DenseFactor& d2, const BidiscPoint& z) {
    if (d1.tail.exact() && d2.tail.exact()) return 0.0;
    const FactorNorms n1{std::sqrt(std::max(0.0, s1.total().real())), tail_on_kernel(d1.tail, std::abs(z.z1))};
    const FactorNorms n2{std::sqrt(std::max(0.0, s2.total().real())), tail_on_kernel(d2.tail, std::abs(z.z2))};
    return n1.err * (n2.full + n2.err) + n1.full * n2.err;
}

inline PairAtPoint pair_at_point(const KernelSymbol& a, const KernelSymbol& b, const BidiscPoint& z) {
    PairAtPoint out;
    if (a.tensor() && b.tensor()) {
        const int lo1 = std::min({0, a.f1.lo, b.f1.lo}), hi1 = std::max({0, a.f1.hi, b.f1.hi});
        const int lo2 = std::min({0, a.f2.lo, b.f2.lo}), hi2 = std::max({0, a.f2.hi, b.f2.hi});
        const auto xa1 = causal_image(a.f1, z.z1, lo1, hi1), xb1 = causal_image(b.f1, z.z1, lo1, hi1);
        const auto xa2 = causal_image(a.f2, z.z2, lo2, hi2), xb2 = causal_image(b.f2, z.z2, lo2, hi2);
        const auto aa1 = split_pairing(xa1, xa1), aa2 = split_pairing(xa2, xa2);
        const auto bb1 = split_pairing(xb1, xb1), bb2 = split_pairing(xb2, xb2);
        out.a = {std::sqrt(std::max(0.0, off_quadrant(aa1, aa2).real())), tensor_error(aa1, aa2, a.f1, a.f2, z)};
        out.b = {std::sqrt(std::max(0.0, off_quadrant(bb1, bb2).real())), tensor_error(bb1, bb2, b.f1, b.f2, z)};
        out.pairing = off_quadrant(split_pairing(xa1, xb1), split_pairing(xa2, xb2));
        return out;
    }
    const Symbol2 sa = as_symbol(a), sb = as_symbol(b);
    const double ra = std::abs(z.z1), rb = std::abs(z.z2);
    out.a = {std::sqrt(std::max(0.0, hankel_pairing_grid(sa, sa, z).real())), tail_on_kernel(sa.tail(), ra, rb)};
    out.b = {std::sqrt(std::max(0.0, hankel_pairing_grid(sb, sb, z).real())), tail_on_kernel(sb.tail(), ra, rb)};
    out.pairing = hankel_pairing_grid(sa, sb, z);
    return out;
}

} // namespace detail

/// <H_a k_z, H_b k_z> for the untruncated kernel, on the stored coefficients of a and b.
inline cplx hankel_kernel_pairing(const Symbol2& a, const Symbol2& b, const BidiscPoint& z) {
    require_interior(z);
    return detail::pair_at_point(detail::kernel_symbol(a), detail::kernel_symbol(b), z).pairing;
}

/// ||H_f k_z|| for the untruncated normalized kernel; the error bound covers the symbol tail.
inline RealEstimate hankel_kernel_norm(const Symbol2& f, const BidiscPoint& z) {
    require_interior(z);
    const auto k = detail::kernel_symbol(f);
    return detail::pair_at_point(k, k, z).a;
}

/// ||H_f k_z|| in one variable.
inline RealEstimate hankel_kernel_norm(const Symbol1& f, cplx z) {
    if (!(std::abs(z) < 1.0)) throw DomainError("point must lie in the open disc");
    const auto p = detail::split_pairing(f, f, z);
    return {std::sqrt(std::max(0.0, p.neg.real())), detail::tail_on_kernel(f.tail(), std::abs(z))};
}

/// <(T_f T_g - T_fg) k_z, k_z> = -<H_g k_z, H_conj(f) k_z> for the untruncated kernel.
inline Estimate berezin_semicommutator(const Symbol2& f, const Symbol2& g, const BidiscPoint& z) {
    require_interior(z);
    const Symbol2 fb = conjugate(f);
    const auto p = detail::pair_at_point(detail::kernel_symbol(g), detail::kernel_symbol(fb), z);
    return {-p.pairing, p.a.err * p.b.value + (p.a.value + p.a.err) * p.b.err};
}

/// T_g k_z evaluated at torus points through the truncated kernel: matrix-vector product onto a box
/// large enough to hold the whole image, then polynomial evaluation.
inline std::vector<Estimate> toeplitz_on_kernel(const Symbol2& g, const BidiscPoint& z,
                                                const std::vector<std::pair<double, double>>& w_grid,
                                                const TruncationBox& box) {
    const KernelVector k = normalized_kernel(z, box);
    const TruncationBox out{box.n1 + std::max(0, g.max_freq(1)), box.n2 + std::max(0, g.max_freq(2))};
    const Vector v = toeplitz_block(g, out.basis(), box.basis()) * k.coeffs;
    const double r1 = std::abs(z.z1), r2 = std::abs(z.z2);
    const double k_l1 = detail::poisson_sup_root(r1) * detail::poisson_sup_root(r2);
    double err = g.stored_l1() * kernel_l1_tail(k);
    if (!g.exact()) err += g.tail().l1 * k_l1;
    std::vector<Estimate> res;
    res.reserve(w_grid.size());
    for (const auto& [t1, t2] : w_grid) {
        const cplx e1 = std::polar(1.0, t1), e2 = std::polar(1.0, t2);
        cplx s{}, p1 = 1.0;
        for (int a = 0; a <= out.n1; ++a, p1 *= e1) {
            cplx row{}, p2 = 1.0;
            for (int b = 0; b <= out.n2; ++b, p2 *= e2) row += v(out.index({a, b})) * p2;
            s += p1 * row;
        }
        res.push_back({s, err});
    }
    return res;
}

// ----------------------------------------------------------------------------
// Boundary probes

enum class Shell { Diagonal, MixedFirstFixed, MixedSecondFixed };

inline const char* to_string(Shell s) {
    switch (s) {
    case Shell::Diagonal: return "diagonal";
    case Shell::MixedFirstFixed: return "mixed_z1_fixed";
    case Shell::MixedSecondFixed: return "mixed_z2_fixed";
    }
    return "?";
}

struct ProbeRow {
    Shell shell = Shell::Diagonal;
    double r1 = 0.0, theta1 = 0.0, r2 = 0.0, theta2 = 0.0;
    double hankel_product = 0.0;  ///< ||H_conj(f) k_z|| ||H_g k_z||
    cplx berezin;                 ///< <(T_f T_g - T_fg) k_z, k_z>
    double product_err = 0.0;
    double berezin_err = 0.0;

    BidiscPoint z() const { return {std::polar(r1, theta1), std::polar(r2, theta2)}; }
    double err() const { return std::max(product_err, berezin_err); }
};

struct ProbeTable {
    std::vector<ProbeRow> rows;
};

struct ProbeOptions {
    std::vector<double> radii{0.5, 0.9, 0.99};
    int angles = 16;       ///< per variable per shell
    double anchor = 0.5;   ///< radius of the fixed coordinate on mixed shells
    int bandwidth = 4096;  ///< tents and arcs are rebuilt at this bandwidth for the probe
};

/// Kernel probes along shells approaching the boundary. Each radius r contributes a diagonal shell
/// (r, r) and two mixed shells with one coordinate held at the anchor radius.
inline ProbeTable boundary_probe(const Symbol2& f, const Symbol2& g, const ProbeOptions& opt = {}) {
    if (opt.angles < 1) throw DomainError("probe needs at least one angle per variable");
    if (!(opt.anchor > 0.0 && opt.anchor < 1.0)) throw DomainError("probe anchor radius must lie in (0,1)");
    for (double r : opt.radii)
        if (!(r > 0.0 && r < 1.0)) throw DomainError("probe radii must lie in (0,1)");
    // tensor pairs stay factored and their structural factors are refined to the probe bandwidth
    const Symbol2 f_conj = conjugate(f);
    detail::KernelSymbol fb, gg;
    const auto* tf = f_conj.tensor_factors();
    const auto* tg = g.tensor_factors();
    if (tf && tg) {
        fb = detail::kernel_symbol(truncate(*tf->f1, opt.bandwidth), truncate(*tf->f2, opt.bandwidth));
        gg = detail::kernel_symbol(truncate(*tg->f1, opt.bandwidth), truncate(*tg->f2, opt.bandwidth));
    } else {
        fb = detail::kernel_symbol(f_conj);
        gg = detail::kernel_symbol(g);
    }
    ProbeTable table;
    for (double r : opt.radii) {
        for (Shell shell : {Shell::Diagonal, Shell::MixedFirstFixed, Shell::MixedSecondFixed}) {
            const double r1 = shell == Shell::MixedFirstFixed ? opt.anchor : r;
            const double r2 = shell == Shell::MixedSecondFixed ? opt.anchor : r;
            for (int i = 0; i < opt.angles; ++i)
                for (int j = 0; j < opt.angles; ++j) {
                    ProbeRow row;
                    row.shell = shell;
                    row.r1 = r1;
                    row.r2 = r2;
                    row.theta1 = kTwoPi * i / opt.angles;
                    row.theta2 = kTwoPi * j / opt.angles;
                    const BidiscPoint z = row.z();
                    const auto p = detail::pair_at_point(gg, fb, z);
                    const RealEstimate& a = p.b;  // conj(f)
                    const RealEstimate& b = p.a;  // g
                    row.hankel_product = a.value * b.value;
                    row.product_err = a.value * b.err + b.value * a.err + a.err * b.err;
                    row.berezin = -p.pairing;
                    row.berezin_err = b.err * a.value + (b.value + b.err) * a.err;
                    table.rows.push_back(row);
                }
        }
    }
    return table;
}

struct ShellMaximum {
    double r = 0.0;
    double hankel_product = 0.0;
    double hankel_err = 0.0;  ///< error bound of the row attaining the maximum
    double berezin_abs = 0.0;
    double berezin_err = 0.0;
};

/// Maxima over all rows sampled at probe radius r (any shell kind whose moving coordinate has radius r),
/// restricted to the listed shell kinds.
inline std::vector<ShellMaximum> shell_maxima(const ProbeTable& t, const std::vector<double>& radii,
                                              const std::vector<Shell>& kinds = {Shell::Diagonal,
                                                                                 Shell::MixedFirstFixed,
                                                                                 Shell::MixedSecondFixed}) {
    std::vector<ShellMaximum> out;
    for (double r : radii) {
        ShellMaximum m;
        m.r = r;
        for (const auto& row : t.rows) {
            if (std::find(kinds.begin(), kinds.end(), row.shell) == kinds.end()) continue;
            const double moving = row.shell == Shell::MixedFirstFixed ? row.r2 : row.r1;
            if (moving != r) continue;
            if (row.hankel_product >= m.hankel_product) {
                m.hankel_product = row.hankel_product;
                m.hankel_err = row.product_err;
            }
            if (std::abs(row.berezin) >= m.berezin_abs) {
                m.berezin_abs = std::abs(row.berezin);
                m.berezin_err = row.berezin_err;
            }
        }
        out.push_back(m);
    }
    return out;
}

/// One-variable probe max_theta ||H_conj(f) k_z|| ||H_g k_z|| on circles of the given radii.
inline std::vector<RealEstimate> probe1(const Symbol1& f, const Symbol1& g, const std::vector<double>& radii,
                                        int angles = 16) {
    const Symbol1 fb = conjugate(f);
    std::vector<RealEstimate> out;
    for (double r : radii) {
        RealEstimate best;
        for (int i = 0; i < angles; ++i) {
            const cplx z = std::polar(r, kTwoPi * i / angles);
            const RealEstimate a = hankel_kernel_norm(fb, z), b = hankel_kernel_norm(g, z);
            const double v = a.value * b.value;
            if (v >= best.value) best = {v, a.value * b.err + b.value * a.err + a.err * b.err};
        }
        out.push_back(best);
    }
    return out;
}

} // namespace bidisc
