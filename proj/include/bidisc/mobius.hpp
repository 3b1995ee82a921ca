#pragma once

// Disc automorphisms phi_z(w) = (z - w) / (1 - conj(z) w), applied componentwise, the pullback f o phi_z and
// the unitary U_z h = (h o phi_z) k_z through its compressions.

#include <array>
#include <cmath>
#include <vector>

#include "bidisc/kernel.hpp"
#include "bidisc/operators.hpp"
#include "bidisc/symbol.hpp"

namespace bidisc {

inline cplx mobius_map(cplx z, cplx w) {
    if (!(std::abs(z) < 1.0)) throw DomainError("Mobius centre must lie in the open disc");
    const cplx den = 1.0 - std::conj(z) * w;
    if (den == cplx(0.0, 0.0)) throw DivergenceError("Mobius map evaluated at its pole");
    return (z - w) / den;
}

inline BidiscPoint mobius_map(const BidiscPoint& z, const BidiscPoint& w) {
    return {mobius_map(z.z1, w.z1), mobius_map(z.z2, w.z2)};
}

namespace detail {

// max of |phi_z| and 1/|phi_z| over the circles |w| = rho and |w| = 1/rho, for |z| = r < rho < 1.
inline double mobius_growth(double r, double rho) { return (1.0 - r * rho) / (rho - r); }

inline constexpr std::array<double, 12> kRhoFractions{1e-9, 1e-6, 1e-4, 1e-3, 1e-2, 0.03,
                                                      0.1,  0.2,  0.35, 0.5,  0.7,  0.9};

inline double rho_candidate(double r, double t) { return r + (1.0 - r) * t; }

// Coefficient bounds for one factor phi^m, m != 0. The factor is analytic on r < |w| < 1/r minus one side
// (|w| < 1/r for m > 0, |w| > r for m < 0), so |(phi^m)_n| <= Q(rho)^|m| rho^|n| on its side for every
// rho in (r, 1); each quantity below minimizes over its own rho.
struct FactorBound {
    double out_l1 = 0.0;  ///< l1 mass beyond |n| > b
    double out_l2 = 0.0;  ///< l2 mass beyond |n| > b
    double alias = 0.0;   ///< l1 mass beyond |n| > g/2 - 1
    double full_l1 = 1.0;
};

inline FactorBound factor_bound(int m, double r, int b, int g) {
    FactorBound fb;
    if (m == 0) return fb;
    const double a = std::abs(m);
    fb.out_l1 = fb.out_l2 = fb.alias = fb.full_l1 = kInf;
    for (double t : kRhoFractions) {
        const double rho = rho_candidate(r, t);
        const double lq = a * std::log(mobius_growth(r, rho)), lr = std::log(rho);
        fb.out_l1 = std::min(fb.out_l1, std::exp(lq + (b + 1) * lr) / (1.0 - rho));
        fb.out_l2 = std::min(fb.out_l2, std::exp(lq + (b + 1) * lr) / std::sqrt(1.0 - rho * rho));
        fb.alias = std::min(fb.alias, std::exp(lq + (g / 2) * lr) / (1.0 - rho));
        fb.full_l1 = std::min(fb.full_l1, std::exp(lq) / (1.0 - rho));
    }
    return fb;
}

// Error of the sampled pullback of one term c phi1^m1 phi2^m2 (||phi^m||_2 = 1 on the circle).
inline void add_term_error(Tail& t, cplx c, const FactorBound& f1, const FactorBound& f2) {
    const double a = std::abs(c);
    const double alias = a * (f1.alias * f2.full_l1 + f1.full_l1 * f2.alias);
    t.l2 += a * std::hypot(f1.out_l2, f2.out_l2) + alias;
    t.l1 += a * (f1.out_l1 * f2.full_l1 + f1.full_l1 * f2.out_l1) + alias;
}

inline Tail pullback_error(const Symbol2& f, double r1, double r2, int b, int g) {
    Tail t;
    for (const auto& [m, c] : f.coeffs()) add_term_error(t, c, factor_bound(m.m1, r1, b, g), factor_bound(m.m2, r2, b, g));
    return t;
}

inline Tail pullback_error(const Symbol1& f, double r, int b, int g) {
    Tail t;
    for (const auto& [n, c] : f.coeffs()) add_term_error(t, c, factor_bound(n, r, b, g), FactorBound{});
    return t;
}

// e^{i arg phi_z(w_t)} at the g uniform torus points w_t.
inline std::vector<cplx> mobius_circle(cplx z, int g) {
    std::vector<cplx> out(g);
    for (int t = 0; t < g; ++t) {
        const cplx p = mobius_map(z, std::polar(1.0, kTwoPi * t / g));
        out[t] = p / std::abs(p);
    }
    return out;
}

// g x (hi - lo + 1) matrix of u^k, k in [lo, hi], for unimodular samples u.
inline Matrix unimodular_powers(const std::vector<cplx>& u, int lo, int hi) {
    Matrix p(Eigen::Index(u.size()), hi - lo + 1);
    for (std::size_t t = 0; t < u.size(); ++t) {
        const PowerTable pw(u[t], lo, hi);
        for (int k = lo; k <= hi; ++k) p(Eigen::Index(t), k - lo) = pw(k);
    }
    return p;
}

// Analysis matrix: row n + b, column t holds e^{-i n theta_t} / g.
inline Matrix dft_rows(int g, int b) {
    Matrix e(2 * b + 1, g);
    for (int n = -b; n <= b; ++n)
        for (int t = 0; t < g; ++t) e(n + b, t) = std::polar(1.0 / g, -kTwoPi * double(n) * t / g);
    return e;
}

inline int pullback_grid(int bandwidth) { return 8 * bandwidth; }

} // namespace detail

/// Coefficients of f o phi_z up to the given bandwidth, by uniform torus sampling (8 points per unit of
/// bandwidth) and discrete Fourier inversion. The tail bounds the whole error of the result in l2 (and l1
/// when f is exact): coefficient decay of the composed stored part, aliasing, and the image of f's own tail
/// under the change of variables.
inline Symbol1 mobius_pullback(const Symbol1& f, cplx z, int bandwidth) {
    if (bandwidth < 1) throw DomainError("pullback bandwidth must be positive");
    if (!(std::abs(z) < 1.0)) throw DomainError("Mobius centre must lie in the open disc");
    const int g = detail::pullback_grid(bandwidth);
    const Matrix samples = detail::unimodular_powers(detail::mobius_circle(z, g), f.min_freq(), f.max_freq());
    Vector c = Vector::Zero(f.max_freq() - f.min_freq() + 1);
    for (const auto& [n, v] : f.coeffs()) c(n - f.min_freq()) = v;
    const Vector h = detail::dft_rows(g, bandwidth) * (samples * c);
    Symbol1::Coeffs out;
    for (int n = -bandwidth; n <= bandwidth; ++n) out[n] = h(n + bandwidth);
    const double r = std::abs(z);
    Tail t = detail::pullback_error(f, r, bandwidth, g);
    if (!f.exact()) {
        // ||(f - f_stored) o phi||_2 <= sup |phi'|^(1/2) ||f - f_stored||_2
        t.l2 += detail::poisson_sup_root(r) * f.tail().l2;
        t.l1 = kInf;
    }
    t.band1 = t.exact() ? kUnboundedBand : -1;
    t.band2 = t.band1;
    return Symbol1(std::move(out), t, ExplicitShape{}, {}, f.sup_bound());
}

inline Symbol2 mobius_pullback(const Symbol2& f, const BidiscPoint& z, int bandwidth) {
    if (bandwidth < 1) throw DomainError("pullback bandwidth must be positive");
    require_interior(z);
    const double r1 = std::abs(z.z1), r2 = std::abs(z.z2);
    if (const auto* tf = f.tensor_factors()) {
        const Symbol1 p1 = mobius_pullback(*tf->f1, z.z1, bandwidth), p2 = mobius_pullback(*tf->f2, z.z2, bandwidth);
        const Symbol2 t = tensor(p1, p2);
        // factor errors are not orthogonal to the stored parts, so combine them by the triangle inequality
        const double s1 = p1.stored_l2(), s2 = p2.stored_l2(), e1 = p1.tail().l2, e2 = p2.tail().l2;
        const double a1 = p1.stored_l1(), a2 = p2.stored_l1(), d1 = p1.tail().l1, d2 = p2.tail().l1;
        Tail tail;
        tail.l2 = e1 * s2 + s1 * e2 + e1 * e2;
        tail.l1 = (d1 == 0.0 && d2 == 0.0) ? 0.0 : a1 * d2 + d1 * a2 + d1 * d2;
        if (std::isnan(tail.l1)) tail.l1 = kInf;
        tail.band1 = tail.band2 = tail.exact() ? kUnboundedBand : -1;
        return Symbol2(t.coeffs(), tail, t.shape(), t.explicit_sup_bound());
    }
    const int g = detail::pullback_grid(bandwidth);
    const int lo1 = f.min_freq(1), hi1 = f.max_freq(1), lo2 = f.min_freq(2), hi2 = f.max_freq(2);
    Matrix c = Matrix::Zero(hi1 - lo1 + 1, hi2 - lo2 + 1);
    for (const auto& [m, v] : f.coeffs()) c(m.m1 - lo1, m.m2 - lo2) = v;
    const Matrix p1 = detail::unimodular_powers(detail::mobius_circle(z.z1, g), lo1, hi1);
    const Matrix p2 = detail::unimodular_powers(detail::mobius_circle(z.z2, g), lo2, hi2);
    const Matrix e = detail::dft_rows(g, bandwidth);
    const Matrix h = e * (p1 * c * p2.transpose()) * e.transpose();
    Symbol2::Coeffs out;
    for (int n1 = -bandwidth; n1 <= bandwidth; ++n1)
        for (int n2 = -bandwidth; n2 <= bandwidth; ++n2) out[Freq2{n1, n2}] = h(n1 + bandwidth, n2 + bandwidth);
    Tail t = detail::pullback_error(f, r1, r2, bandwidth, g);
    if (!f.exact()) {
        t.l2 += detail::poisson_sup_root(r1) * detail::poisson_sup_root(r2) * f.tail().l2;
        t.l1 = kInf;
    }
    t.band1 = t.band2 = t.exact() ? kUnboundedBand : -1;
    return Symbol2(std::move(out), t, ExplicitShape{}, f.sup_bound());
}

namespace detail {

// g x (n + 1) samples of U_z e_b = phi_z^b k_z on the uniform grid of the circle.
inline Matrix unitary_columns(cplx z, int n, int g) {
    const double s = std::sqrt(1.0 - std::norm(z));
    Matrix u(g, n + 1);
    for (int t = 0; t < g; ++t) {
        const cplx w = std::polar(1.0, kTwoPi * t / g);
        const cplx phi = mobius_map(z, w);
        cplx v = s / (1.0 - std::conj(z) * w);
        for (int b = 0; b <= n; ++b) {
            u(t, b) = v;
            v *= phi;
        }
    }
    return u;
}

// Grid size for the compression quadrature. The integrand conj(U e_a) U e_b has poles of order up to n + 1 at
// 1/conj(z), so its frequency-g content is about binom(g + n, n) r^g; grow the grid until that is negligible.
inline int compression_grid(double r, int n, int base) {
    int g = std::max(base, 8);
    auto log_alias = [&](int gg) { return std::lgamma(gg + n + 1.0) - std::lgamma(gg + 1.0) - std::lgamma(n + 1.0) + gg * std::log(r); };
    while (r > 0.0 && log_alias(g) > std::log(1e-18)) g += 8;
    return g;
}

// Samples of the stored part of a one-variable symbol on the uniform grid.
inline Vector circle_samples(const Symbol1& f, int g) {
    std::vector<cplx> w(g);
    for (int t = 0; t < g; ++t) w[t] = std::polar(1.0, kTwoPi * t / g);
    Vector c = Vector::Zero(f.max_freq() - f.min_freq() + 1);
    for (const auto& [n, v] : f.coeffs()) c(n - f.min_freq()) = v;
    return unimodular_powers(w, f.min_freq(), f.max_freq()) * c;
}

} // namespace detail

/// <T_f U_z e_b, U_z e_a> over the box, by quadrature on a uniform product grid with g points per axis.
inline Matrix mobius_compression(const Symbol2& f, const BidiscPoint& z, const TruncationBox& box, int g) {
    require_interior(z);
    const Matrix u1 = detail::unitary_columns(z.z1, box.n1, g), u2 = detail::unitary_columns(z.z2, box.n2, g);
    auto one_axis = [g](const Matrix& u, const Vector& f) -> Matrix {
        return u.adjoint() * f.asDiagonal() * u / double(g);
    };
    if (const auto* tf = f.tensor_factors())
        return detail::kron(one_axis(u1, detail::circle_samples(*tf->f1, g)),
                            one_axis(u2, detail::circle_samples(*tf->f2, g)));
    std::vector<cplx> w(g);
    for (int t = 0; t < g; ++t) w[t] = std::polar(1.0, kTwoPi * t / g);
    const int lo1 = f.min_freq(1), hi1 = f.max_freq(1), lo2 = f.min_freq(2), hi2 = f.max_freq(2);
    Matrix c = Matrix::Zero(hi1 - lo1 + 1, hi2 - lo2 + 1);
    for (const auto& [m, v] : f.coeffs()) c(m.m1 - lo1, m.m2 - lo2) = v;
    const Matrix pw1 = detail::unimodular_powers(w, lo1, hi1), pw2 = detail::unimodular_powers(w, lo2, hi2);
    const Matrix samples = pw1 * c * pw2.transpose();  // g x g
    const int k1 = box.n1 + 1, k2 = box.n2 + 1;
    // integrate over w1 first: b[t2] = U1^* diag(f(., w2_t2)) U1 / g
    Matrix out = Matrix::Zero(box.size(), box.size());
    Matrix pair2(k2 * k2, g);  // (a2, b2) -> conj(u2_a2) u2_b2
    for (int a2 = 0; a2 < k2; ++a2)
        for (int b2 = 0; b2 < k2; ++b2)
            pair2.row(a2 * k2 + b2) = (u2.col(a2).conjugate().cwiseProduct(u2.col(b2))).transpose() / double(g);
    Matrix inner(k1 * k1, g);
    for (int t2 = 0; t2 < g; ++t2) {
        const Matrix b = one_axis(u1, samples.col(t2));
        for (int a1 = 0; a1 < k1; ++a1)
            for (int b1 = 0; b1 < k1; ++b1) inner(a1 * k1 + b1, t2) = b(a1, b1);
    }
    const Matrix full = inner * pair2.transpose();  // (a1 b1) x (a2 b2)
    for (int a1 = 0; a1 < k1; ++a1)
        for (int b1 = 0; b1 < k1; ++b1)
            for (int a2 = 0; a2 < k2; ++a2)
                for (int b2 = 0; b2 < k2; ++b2)
                    out(box.index({a1, a2}), box.index({b1, b2})) = full(a1 * k1 + b1, a2 * k2 + b2);
    return out;
}

/// Largest |m_i| over the stored coefficients of f.
inline int symbol_bandwidth(const Symbol2& f) {
    int b = 0;
    for (int axis : {1, 2}) b = std::max({b, -f.min_freq(axis), f.max_freq(axis)});
    return b;
}

/// Frobenius norm, over the inner block of the box (degrees at most n_i - margin, margin = bandwidth of f),
/// of the difference between the compression of U_z^* T_f U_z and the Toeplitz matrix of the pullback.
inline double mobius_intertwining_residual(const Symbol2& f, const BidiscPoint& z, const TruncationBox& box,
                                           int bandwidth) {
    require_interior(z);
    const int margin = symbol_bandwidth(f);
    if (margin > box.n1 || margin > box.n2) throw DomainError("box too small for the symbol's margin");
    const int g = detail::compression_grid(std::max(std::abs(z.z1), std::abs(z.z2)), std::max(box.n1, box.n2),
                                           8 * std::max({bandwidth, box.n1, box.n2, 1}));
    const Matrix lhs = mobius_compression(f, z, box, g);
    const Matrix rhs = toeplitz_matrix(mobius_pullback(f, z, bandwidth), box).entries;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < box.size(); ++i) {
        const Freq2 a = box.at(i);
        if (a.m1 <= box.n1 - margin && a.m2 <= box.n2 - margin) keep.push_back(i);
    }
    double s = 0.0;
    for (Eigen::Index j : keep)
        for (Eigen::Index i : keep) s += std::norm(lhs(i, j) - rhs(i, j));
    return std::sqrt(s);
}

} // namespace bidisc
