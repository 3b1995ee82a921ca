#pragma once

// Finite compressions of Toeplitz, Hankel, semi-commutator and commutator operators on the Hardy
// space of the bidisc (basis z1^a z2^b) and of the disc (basis z^a).
//
// Semi-commutator entries are computed from the Hankel pairing
//   <(T_f T_g - T_fg) z^c, z^a> = - sum_{m outside Z+^2} g_(m-c) f_(a-m),
// which is exact entry by entry for finitely supported symbols, independent of the box.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bidisc/errors.hpp"
#include "bidisc/symbol.hpp"

namespace bidisc {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Monomials z1^a z2^b with 0 <= a <= n1, 0 <= b <= n2, ordered lexicographically.
struct TruncationBox {
    int n1 = 0;
    int n2 = 0;

    TruncationBox() = default;
    TruncationBox(int a, int b) : n1(a), n2(b) {
        if (n1 < 0 || n2 < 0) throw DomainError("truncation degrees must be nonnegative");
    }

    Eigen::Index size() const { return Eigen::Index(n1 + 1) * (n2 + 1); }
    bool contains(Freq2 m) const { return m.m1 >= 0 && m.m1 <= n1 && m.m2 >= 0 && m.m2 <= n2; }
    Eigen::Index index(Freq2 m) const { return Eigen::Index(m.m1) * (n2 + 1) + m.m2; }
    Freq2 at(Eigen::Index i) const { return {int(i / (n2 + 1)), int(i % (n2 + 1))}; }

    std::vector<Freq2> basis() const {
        std::vector<Freq2> out;
        out.reserve(size());
        for (int a = 0; a <= n1; ++a)
            for (int b = 0; b <= n2; ++b) out.push_back({a, b});
        return out;
    }
};

/// Frequencies -w1 <= m1 <= d1, -w2 <= m2 <= d2 lying outside Z+ x Z+: the truncated range of a Hankel operator.
struct NegWindow {
    int w1 = 0;
    int w2 = 0;
    int d1 = 0;
    int d2 = 0;

    bool contains(Freq2 m) const {
        return m.m1 >= -w1 && m.m1 <= d1 && m.m2 >= -w2 && m.m2 <= d2 && !in_hardy_quadrant(m);
    }

    std::vector<Freq2> basis() const {
        std::vector<Freq2> out;
        for (int a = -w1; a <= d1; ++a)
            for (int b = -w2; b <= d2; ++b)
                if (!in_hardy_quadrant({a, b})) out.push_back({a, b});
        return out;
    }
};

/// How far the stored matrix may be from the compression of the exact operator.
struct Exactness {
    bool exact = true;
    double bound = 0.0;        ///< operator-norm bound on the difference
    double entry_bound = 0.0;  ///< bound on each entry of the difference
};

struct OperatorMatrix {
    Matrix entries;
    std::vector<Freq2> rows;
    std::vector<Freq2> cols;
    Exactness exactness;

    double max_abs() const { return entries.size() == 0 ? 0.0 : entries.cwiseAbs().maxCoeff(); }
};

inline std::vector<Freq2> degree_basis(int n) {
    std::vector<Freq2> out;
    for (int a = 0; a <= n; ++a) out.push_back({a, 0});
    return out;
}

namespace detail {

inline Exactness bounded(double entry, double op) {
    if (entry == 0.0 && op == 0.0) return {};
    return {false, op, entry};
}

// Entry error of a Toeplitz or Hankel compression whose coefficient differences stay inside
// [-r1, r1] x [-r2, r2]: zero when every such coefficient is stored.
inline double coefficient_entry_error(const Tail& t, int r1, int r2) {
    if (t.exact()) return 0.0;
    if (t.band1 >= 0 && t.band2 >= 0 && r1 <= t.band1 && r2 <= t.band2) return 0.0;
    return std::min(t.l2, t.l1);
}

// Norm of the matrix built from omitted coefficients: Frobenius via entry bounds, or sup of the tail.
inline double coefficient_op_error(double entry, const Tail& t, double rows, double cols) {
    if (entry == 0.0) return 0.0;
    return std::min(t.l1, std::sqrt(std::min(rows, cols)) * t.l2);
}

inline Tail tail1_as2(const Tail& t) {
    Tail out = t;
    out.band2 = t.band1 < 0 ? -1 : kUnboundedBand;
    return out;
}

} // namespace detail

// ----------------------------------------------------------------------------
// Two variables

/// Compression of T_f to the rows/cols given: entry f_(a - c).
inline Matrix toeplitz_block(const Symbol2& f, const std::vector<Freq2>& rows, const std::vector<Freq2>& cols) {
    Matrix m(rows.size(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < rows.size(); ++i) m(i, j) = f[rows[i] - cols[j]];
    return m;
}

inline OperatorMatrix toeplitz_matrix(const Symbol2& f, const TruncationBox& box) {
    OperatorMatrix out;
    out.rows = out.cols = box.basis();
    out.entries = Matrix::Zero(box.size(), box.size());
    // scatter stored coefficients: cheaper than probing the map per entry for sparse symbols
    for (Eigen::Index j = 0; j < box.size(); ++j) {
        const Freq2 c = box.at(j);
        for (const auto& [d, v] : f.coeffs()) {
            const Freq2 a = c + d;
            if (box.contains(a)) out.entries(box.index(a), j) = v;
        }
    }
    const double e = detail::coefficient_entry_error(f.tail(), box.n1, box.n2);
    out.exactness = detail::bounded(e, detail::coefficient_op_error(e, f.tail(), box.size(), box.size()));
    return out;
}

/// Smallest window containing every frequency outside Z+^2 reachable as c + s, c in box, s stored in f.
inline NegWindow auto_window(const Symbol2& f, const TruncationBox& box) {
    NegWindow w;
    if (f.coeffs().empty()) return w;
    w.w1 = std::max(0, -f.min_freq(1));
    w.w2 = std::max(0, -f.min_freq(2));
    w.d1 = std::max(0, box.n1 + f.max_freq(1));
    w.d2 = std::max(0, box.n2 + f.max_freq(2));
    return w;
}

inline NegWindow window_union(const NegWindow& a, const NegWindow& b) {
    return {std::max(a.w1, b.w1), std::max(a.w2, b.w2), std::max(a.d1, b.d1), std::max(a.d2, b.d2)};
}

/// Compression of H_f: rows are the window frequencies, entry f_(m - c).
inline OperatorMatrix hankel_matrix(const Symbol2& f, const TruncationBox& box, const NegWindow& window) {
    if (f.exact()) {
        // column c sends z^c to frequencies c + s; over the box these fill [s, s + n]
        for (const auto& [sh, v] : f.coeffs()) {
            bool ok = true;
            if (sh.m1 < 0) ok = ok && sh.m1 >= -window.w1 && sh.m2 >= -window.w2 && sh.m2 + box.n2 <= window.d2;
            if (sh.m2 < 0) ok = ok && sh.m2 >= -window.w2 && sh.m1 >= -window.w1 && sh.m1 + box.n1 <= window.d1;
            if (!ok)
                throw CoverageError("Hankel window does not contain every frequency reached by symbol term (" +
                                    std::to_string(sh.m1) + "," + std::to_string(sh.m2) + ")");
        }
    }
    OperatorMatrix out;
    out.rows = window.basis();
    out.cols = box.basis();
    out.entries = Matrix::Zero(out.rows.size(), out.cols.size());
    std::map<Freq2, Eigen::Index> row_of;
    for (std::size_t i = 0; i < out.rows.size(); ++i) row_of.emplace(out.rows[i], Eigen::Index(i));
    for (Eigen::Index j = 0; j < box.size(); ++j) {
        const Freq2 c = box.at(j);
        for (const auto& [s, v] : f.coeffs()) {
            const Freq2 m = c + s;
            if (in_hardy_quadrant(m)) continue;
            if (auto it = row_of.find(m); it != row_of.end()) out.entries(it->second, j) = v;
        }
    }
    const double e = detail::coefficient_entry_error(f.tail(), std::max(window.w1 + box.n1, window.d1),
                                                     std::max(window.w2 + box.n2, window.d2));
    out.exactness = detail::bounded(e, detail::coefficient_op_error(e, f.tail(), out.rows.size(), box.size()));
    return out;
}

inline OperatorMatrix hankel_matrix(const Symbol2& f, const TruncationBox& box) {
    return hankel_matrix(f, box, auto_window(f, box));
}

namespace detail {

// Entry and operator-norm bounds for -H_{fbar}^* H_g computed from the stored coefficients.
inline Exactness semicommutator_error(const Symbol2& f, const Symbol2& g, double dim) {
    if (f.exact() && g.exact()) return {};
    const double entry = g.tail().l2 * f.l2_bound() + g.stored_l2() * f.tail().l2;
    double op = dim * entry;
    const double lf = f.tail().l1, lg = g.tail().l1;
    if (std::isfinite(lf) && std::isfinite(lg)) op = std::min(op, lf * g.sup_bound() + f.stored_l1() * lg);
    return bounded(entry, op);
}

} // namespace detail

/// Compression of T_f T_g - T_fg to the box via the Hankel pairing.
inline OperatorMatrix semicommutator_matrix(const Symbol2& f, const Symbol2& g, const TruncationBox& box);

/// Compression of T_f1 to degree <= n; rows and cols are labelled (a, 0).
inline OperatorMatrix toeplitz1(const Symbol1& f, int n) {
    if (n < 0) throw DomainError("degree must be nonnegative");
    OperatorMatrix out;
    out.rows = out.cols = degree_basis(n);
    out.entries = Matrix::Zero(n + 1, n + 1);
    for (int c = 0; c <= n; ++c)
        for (const auto& [d, v] : f.coeffs())
            if (c + d >= 0 && c + d <= n) out.entries(c + d, c) = v;
    const Tail t = detail::tail1_as2(f.tail());
    const double e = detail::coefficient_entry_error(t, n, 0);
    out.exactness = detail::bounded(e, detail::coefficient_op_error(e, t, n + 1, n + 1));
    return out;
}

/// Compression of H_f1: rows are the frequencies -w .. -1, cols 0 .. n.
inline OperatorMatrix hankel1(const Symbol1& f, int n, int w) {
    if (n < 0 || w < 0) throw DomainError("degree and window must be nonnegative");
    if (f.exact() && !f.coeffs().empty() && f.min_freq() < -w)
        throw CoverageError("Hankel window does not contain reachable frequency " + std::to_string(f.min_freq()));
    OperatorMatrix out;
    for (int m = -w; m <= -1; ++m) out.rows.push_back({m, 0});
    out.cols = degree_basis(n);
    out.entries = Matrix::Zero(w, n + 1);
    for (int c = 0; c <= n; ++c)
        for (const auto& [d, v] : f.coeffs())
            if (c + d < 0 && c + d >= -w) out.entries(c + d + w, c) = v;
    const Tail t = detail::tail1_as2(f.tail());
    const double e = detail::coefficient_entry_error(t, n + w, 0);
    out.exactness = detail::bounded(e, detail::coefficient_op_error(e, t, w, n + 1));
    return out;
}

/// Compression of T_f1 T_g1 - T_(f1 g1) to degree <= n: entry -sum_{m<0} g_(m-c) f_(a-m).
inline OperatorMatrix semicommutator1(const Symbol1& f, const Symbol1& g, int n) {
    if (n < 0) throw DomainError("degree must be nonnegative");
    OperatorMatrix out;
    out.rows = out.cols = degree_basis(n);
    out.entries = Matrix::Zero(n + 1, n + 1);
    if (!f.coeffs().empty() && !g.coeffs().empty() && f.max_freq() >= 1 && g.min_freq() <= -1) {
        std::vector<cplx> v;
        for (int c = 0; c <= n; ++c) {
            // v_m = g_(m - c) for the negative frequencies m reachable from column c
            const int lo = c + g.min_freq();
            if (lo >= 0) continue;
            v.assign(-lo, cplx{});
            for (auto it = g.coeffs().begin(); it != g.coeffs().end() && c + it->first < 0; ++it)
                v[c + it->first - lo] = it->second;
            for (int m = lo; m < 0; ++m) {
                const cplx vm = v[m - lo];
                if (vm == cplx{}) continue;
                for (auto it = f.coeffs().lower_bound(-m); it != f.coeffs().end(); ++it) {
                    const int a = m + it->first;
                    if (a > n) break;
                    out.entries(a, c) -= it->second * vm;
                }
            }
        }
    }
    const Symbol2 f2 = tensor(f, constant1(1.0));
    const Symbol2 g2 = tensor(g, constant1(1.0));
    out.exactness = detail::semicommutator_error(f2, g2, n + 1);
    return out;
}

namespace detail {

// (A (x) B) with the first factor acting on z1 and lexicographic ordering.
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Generic scatter evaluation of the Hankel-pairing formula.
inline Matrix semicommutator_entries(const Symbol2& f, const Symbol2& g, const TruncationBox& box) {
    Matrix s = Matrix::Zero(box.size(), box.size());
    if (f.coeffs().empty() || g.coeffs().empty()) return s;
    std::map<Freq2, cplx> v;
    for (Eigen::Index j = 0; j < box.size(); ++j) {
        const Freq2 c = box.at(j);
        v.clear();
        for (const auto& [d, gv] : g.coeffs()) {
            const Freq2 m = c + d;
            if (!in_hardy_quadrant(m)) v[m] += gv;
        }
        for (const auto& [m, vm] : v)
            for (const auto& [d, fv] : f.coeffs()) {
                const Freq2 a = m + d;
                if (box.contains(a)) s(box.index(a), j) -= fv * vm;
            }
    }
    return s;
}

} // namespace detail

inline OperatorMatrix semicommutator_matrix(const Symbol2& f, const Symbol2& g, const TruncationBox& box) {
    OperatorMatrix out;
    out.rows = out.cols = box.basis();
    const auto* tf = f.tensor_factors();
    const auto* tg = g.tensor_factors();
    if (tf && tg) {
        // T_f T_g - T_fg = S1 (x) T(f2 g2) + T(f1 g1) (x) S2 + S1 (x) S2 for tensor symbols
        const Matrix s1 = semicommutator1(*tf->f1, *tg->f1, box.n1).entries;
        const Matrix s2 = semicommutator1(*tf->f2, *tg->f2, box.n2).entries;
        const Matrix p1 = toeplitz1(multiply(*tf->f1, *tg->f1, box.n1), box.n1).entries;
        const Matrix p2 = toeplitz1(multiply(*tf->f2, *tg->f2, box.n2), box.n2).entries;
        out.entries = detail::kron(s1, p2) + detail::kron(p1, s2) + detail::kron(s1, s2);
    } else {
        out.entries = detail::semicommutator_entries(f, g, box);
    }
    out.exactness = detail::semicommutator_error(f, g, double(box.size()));
    return out;
}

inline OperatorMatrix commutator_matrix(const Symbol2& f, const Symbol2& g, const TruncationBox& box) {
    OperatorMatrix a = semicommutator_matrix(f, g, box);
    const OperatorMatrix b = semicommutator_matrix(g, f, box);
    a.entries -= b.entries;
    a.exactness.exact = a.exactness.exact && b.exactness.exact;
    a.exactness.bound += b.exactness.bound;
    a.exactness.entry_bound += b.exactness.entry_bound;
    return a;
}

// ----------------------------------------------------------------------------
// Brute-force routes used as oracles

struct OracleRoutes {
    OperatorMatrix product_route;  ///< compression of T_f T_g - T_fg built from enlarged Toeplitz products
    OperatorMatrix hankel_route;   ///< -H_{fbar}^* H_g built from Hankel matrices
};

namespace detail {

inline int max_abs_freq(const Symbol2& f) {
    int r = 0;
    for (const auto& [m, v] : f.coeffs()) r = std::max({r, std::abs(m.m1), std::abs(m.m2)});
    return r;
}

// P_box T_f T_g P_box with the intermediate space enlarged by the positive reach of g.
inline Matrix product_compression(const Symbol2& f, const Symbol2& g, const TruncationBox& box) {
    const TruncationBox big(box.n1 + std::max(0, g.coeffs().empty() ? 0 : g.max_freq(1)),
                            box.n2 + std::max(0, g.coeffs().empty() ? 0 : g.max_freq(2)));
    const auto rows = box.basis();
    const auto mid = big.basis();
    return toeplitz_block(f, rows, mid) * toeplitz_block(g, mid, rows);
}

} // namespace detail

/// Two independent dense constructions of the semi-commutator compression for exact symbols.
inline OracleRoutes dense_oracle_semicommutator(const Symbol2& f, const Symbol2& g, const TruncationBox& box,
                                                const NegWindow& window) {
    if (!f.exact() || !g.exact()) throw DomainError("dense oracle requires exactly represented symbols");
    OracleRoutes out;
    const int bw = detail::max_abs_freq(f) + detail::max_abs_freq(g);
    const Symbol2 fg = multiply(f, g, bw);
    out.product_route.rows = out.product_route.cols = box.basis();
    out.product_route.entries = detail::product_compression(f, g, box) - toeplitz_matrix(fg, box).entries;

    const OperatorMatrix hf = hankel_matrix(conjugate(f), box, window);
    const OperatorMatrix hg = hankel_matrix(g, box, window);
    out.hankel_route.rows = out.hankel_route.cols = box.basis();
    out.hankel_route.entries = -(hf.entries.adjoint() * hg.entries);
    return out;
}

inline OracleRoutes dense_oracle_semicommutator(const Symbol2& f, const Symbol2& g, const TruncationBox& box) {
    return dense_oracle_semicommutator(f, g, box, window_union(auto_window(conjugate(f), box), auto_window(g, box)));
}

/// T_f T_g - T_g T_f compressed to the box through enlarged Toeplitz products (exact symbols).
inline OperatorMatrix dense_commutator(const Symbol2& f, const Symbol2& g, const TruncationBox& box) {
    if (!f.exact() || !g.exact()) throw DomainError("dense commutator requires exactly represented symbols");
    OperatorMatrix out;
    out.rows = out.cols = box.basis();
    out.entries = detail::product_compression(f, g, box) - detail::product_compression(g, f, box);
    return out;
}

// ----------------------------------------------------------------------------
// Identities from the structure of the semi-commutator

struct MatrixPair {
    OperatorMatrix lhs;
    OperatorMatrix rhs;
};

/// Shift identity: for X = H_phi^* H_g acting on functions of z2 alone,
///   S1*^l X S1^k - S1*^(l+1) X S1^(k+1) = T(conj(phi_(-(l+1)))) T(g_(-(k+1)))
/// where phi_i(z2) is the z2-symbol multiplying z1^i in phi. Both sides compressed to degree <= n2.
/// The semi-commutator T_f T_g - T_fg is -X with phi = conj(f).
inline MatrixPair shift_identity_residual(const Symbol2& phi, const Symbol2& g, int k, int l, int n2) {
    if (!phi.exact() || !g.exact()) throw DomainError("shift identity requires exactly represented symbols");
    if (k < 0 || l < 0 || n2 < 0) throw DomainError("shift powers and degree must be nonnegative");
    const TruncationBox box(std::max(k, l) + 1, n2);
    const Matrix x = -semicommutator_matrix(conjugate(phi), g, box).entries;
    MatrixPair out;
    out.lhs.rows = out.lhs.cols = out.rhs.rows = out.rhs.cols = degree_basis(n2);
    out.lhs.entries.resize(n2 + 1, n2 + 1);
    for (int beta = 0; beta <= n2; ++beta)
        for (int alpha = 0; alpha <= n2; ++alpha)
            out.lhs.entries(beta, alpha) = x(box.index({l, beta}), box.index({k, alpha})) -
                                           x(box.index({l + 1, beta}), box.index({k + 1, alpha}));

    const Symbol1 ps = conjugate(slice(phi, -(l + 1)));
    const Symbol1 gs = slice(g, -(k + 1));
    // the inner sum runs over all of Z+, cut where g's slice can no longer reach degree <= n2
    const int inner = n2 + std::max(0, gs.coeffs().empty() ? 0 : gs.max_freq());
    const Matrix tp = toeplitz1(ps, inner).entries.topRows(n2 + 1);
    const Matrix tg = toeplitz1(gs, inner).entries.leftCols(n2 + 1);
    out.rhs.entries = tp * tg;
    return out;
}

/// Rank-two identity for one-variable commutators C = T_f T_g - T_g T_f:
///   C - S* C S = -(S* T_f e0) (x) (S* T_gbar e0) + (S* T_g e0) (x) (S* T_fbar e0),
/// both sides compressed to degree <= n. The left side uses enlarged Toeplitz products.
inline MatrixPair rank2_commutator_identity(const Symbol1& f, const Symbol1& g, int n) {
    if (n < 0) throw DomainError("degree must be nonnegative");
    auto reach = [](const Symbol1& s) { return s.coeffs().empty() ? 0 : std::max(0, s.max_freq()); };
    const int inner = n + 1 + std::max(reach(f), reach(g));
    const Matrix tf = toeplitz1(f, inner).entries;
    const Matrix tg = toeplitz1(g, inner).entries;
    const Matrix c = (tf * tg - tg * tf).topLeftCorner(n + 2, n + 2);

    MatrixPair out;
    out.lhs.rows = out.lhs.cols = out.rhs.rows = out.rhs.cols = degree_basis(n);
    out.lhs.entries = c.topLeftCorner(n + 1, n + 1) - c.bottomRightCorner(n + 1, n + 1);

    // S* T_h e0 is the column of T_h at 0 shifted up by one
    auto shifted_column = [n](const Symbol1& h) {
        const Matrix t = toeplitz1(h, n + 1).entries;
        return Vector(t.col(0).tail(n + 1));
    };
    const Vector u1 = shifted_column(f), v1 = shifted_column(conjugate(g));
    const Vector u2 = shifted_column(g), v2 = shifted_column(conjugate(f));
    out.rhs.entries = -u1 * v1.adjoint() + u2 * v2.adjoint();
    const Exactness e = f.exact() && g.exact()
                            ? Exactness{}
                            : detail::bounded(f.tail().l2 * g.l2_bound() + g.tail().l2 * f.l2_bound(), kInf);
    out.lhs.exactness = out.rhs.exactness = e;
    return out;
}

// ----------------------------------------------------------------------------
// Spectral utilities

/// Singular values in descending order.
inline std::vector<double> singular_values(const Matrix& a) {
    if (a.size() == 0) return {};
    Eigen::BDCSVD<Matrix> svd(a);
    const auto& s = svd.singularValues();
    return std::vector<double>(s.data(), s.data() + s.size());
}

inline std::vector<double> singular_values(const OperatorMatrix& a) { return singular_values(a.entries); }

inline constexpr double kDefaultRankTol = 1e-8;

/// Number of singular values above tol times the largest one.
inline int rank_estimate(const std::vector<double>& sigma, double tol = kDefaultRankTol) {
    if (sigma.empty() || sigma.front() == 0.0) return 0;
    return int(std::count_if(sigma.begin(), sigma.end(), [&](double s) { return s > tol * sigma.front(); }));
}

inline int rank_estimate(const OperatorMatrix& a, double tol = kDefaultRankTol) {
    return rank_estimate(singular_values(a), tol);
}

} // namespace bidisc
