#pragma once

// Matrix-free operators on truncation boxes and leading singular values of large compressions.
//
// Semi-commutators of tensor symbols are sums of Kronecker products of one-variable matrices, so
// they are applied as A X B^T on the coefficient array instead of being materialized. Leading
// singular values come from block Golub-Kahan bidiagonalization with a projected SVD.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "bidisc/operators.hpp"

namespace bidisc {

class LinearOperator {
public:
    virtual ~LinearOperator() = default;
    virtual Eigen::Index rows() const = 0;
    virtual Eigen::Index cols() const = 0;
    /// y = A x, column by column.
    virtual Matrix apply(const Matrix& x) const = 0;
    /// y = A^* x.
    virtual Matrix apply_adjoint(const Matrix& x) const = 0;
};

class DenseOperator final : public LinearOperator {
public:
    explicit DenseOperator(Matrix a) : a_(std::move(a)) {}
    Eigen::Index rows() const override { return a_.rows(); }
    Eigen::Index cols() const override { return a_.cols(); }
    Matrix apply(const Matrix& x) const override { return a_ * x; }
    Matrix apply_adjoint(const Matrix& x) const override { return a_.adjoint() * x; }

private:
    Matrix a_;
};

class SparseOperator final : public LinearOperator {
public:
    using Sparse = Eigen::SparseMatrix<cplx>;
    explicit SparseOperator(Sparse a) : a_(std::move(a)) {}
    Eigen::Index rows() const override { return a_.rows(); }
    Eigen::Index cols() const override { return a_.cols(); }
    Matrix apply(const Matrix& x) const override { return a_ * x; }
    Matrix apply_adjoint(const Matrix& x) const override { return a_.adjoint() * x; }

private:
    Sparse a_;
};

/// sum_t coef_t (A_t (x) B_t) on the lexicographic box basis; A_t acts on z1 degrees, B_t on z2 degrees.
class KronSumOperator final : public LinearOperator {
public:
    struct Term {
        cplx coef;
        Matrix a;
        Matrix b;
    };

    explicit KronSumOperator(std::vector<Term> terms) : terms_(std::move(terms)) {
        if (terms_.empty()) throw DomainError("Kronecker sum needs at least one term");
        for (const auto& t : terms_)
            if (t.a.rows() != terms_[0].a.rows() || t.a.cols() != terms_[0].a.cols() ||
                t.b.rows() != terms_[0].b.rows() || t.b.cols() != terms_[0].b.cols())
                throw DomainError("Kronecker terms have mismatched shapes");
    }

    Eigen::Index rows() const override { return terms_[0].a.rows() * terms_[0].b.rows(); }
    Eigen::Index cols() const override { return terms_[0].a.cols() * terms_[0].b.cols(); }

    Matrix apply(const Matrix& x) const override { return run(x, false); }
    Matrix apply_adjoint(const Matrix& x) const override { return run(x, true); }

    const std::vector<Term>& terms() const { return terms_; }

    Matrix dense() const {
        Matrix out = Matrix::Zero(rows(), cols());
        for (const auto& t : terms_) out += t.coef * detail::kron(t.a, t.b);
        return out;
    }

private:
    // A column x indexed a1 * n2 + a2 is the column-major storage of X^T (n2 x n1);
    // (A (x) B) x is then B X^T A^T.
    Matrix run(const Matrix& x, bool adjoint) const {
        const Eigen::Index in1 = adjoint ? terms_[0].a.rows() : terms_[0].a.cols();
        const Eigen::Index in2 = adjoint ? terms_[0].b.rows() : terms_[0].b.cols();
        const Eigen::Index out1 = adjoint ? terms_[0].a.cols() : terms_[0].a.rows();
        const Eigen::Index out2 = adjoint ? terms_[0].b.cols() : terms_[0].b.rows();
        Matrix y = Matrix::Zero(out1 * out2, x.cols());
        Matrix buf(out2, out1);
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            Eigen::Map<const Matrix> xt(x.col(j).data(), in2, in1);
            Eigen::Map<Matrix> yt(y.col(j).data(), out2, out1);
            for (const auto& t : terms_) {
                if (adjoint) buf.noalias() = t.b.adjoint() * xt * t.a.conjugate();
                else buf.noalias() = t.b * xt * t.a.transpose();
                yt += (adjoint ? std::conj(t.coef) : t.coef) * buf;
            }
        }
        return y;
    }

    std::vector<Term> terms_;
};

/// D - Pi D Pi where Pi keeps the basis vectors flagged as inner.
class MaskedTailOperator final : public LinearOperator {
public:
    MaskedTailOperator(std::shared_ptr<const LinearOperator> d, std::vector<bool> inner)
        : d_(std::move(d)), inner_(std::move(inner)) {
        if (d_->rows() != d_->cols() || Eigen::Index(inner_.size()) != d_->rows())
            throw DomainError("mask must match a square operator");
    }
    Eigen::Index rows() const override { return d_->rows(); }
    Eigen::Index cols() const override { return d_->cols(); }
    Matrix apply(const Matrix& x) const override { return run(x, false); }
    Matrix apply_adjoint(const Matrix& x) const override { return run(x, true); }

private:
    Matrix project(const Matrix& x) const {
        Matrix p = x;
        for (Eigen::Index i = 0; i < p.rows(); ++i)
            if (!inner_[i]) p.row(i).setZero();
        return p;
    }
    Matrix run(const Matrix& x, bool adjoint) const {
        auto op = [&](const Matrix& v) { return adjoint ? d_->apply_adjoint(v) : d_->apply(v); };
        return op(x) - project(op(project(x)));
    }

    std::shared_ptr<const LinearOperator> d_;
    std::vector<bool> inner_;
};

inline Matrix materialize(const LinearOperator& op) {
    return op.apply(Matrix::Identity(op.cols(), op.cols()));
}

struct SvdOptions {
    Eigen::Index dense_limit = 600;  ///< materialize and use a full SVD up to this dimension
    int block = 0;                   ///< Krylov block size (0: k + 10)
    int max_blocks = 40;
    double tol = 1e-10;              ///< relative residual target for the wanted triplets
    std::uint64_t seed = 20240611;
};

struct TopSingular {
    std::vector<double> sigma;
    double residual = 0.0;  ///< largest relative residual among returned values (0 for dense)
    bool converged = true;
};

namespace detail {

// Orthonormal basis for the part of span(w) orthogonal to the orthonormal columns of q
// (two passes of block Gram-Schmidt, then rank-revealing QR).
inline Matrix orthonormalize_against(const Matrix& q, Matrix w) {
    if (w.cols() == 0) return Matrix(w.rows(), 0);
    const double scale = std::max(1e-300, w.norm());
    for (int pass = 0; pass < 2; ++pass)
        if (q.cols() > 0) w -= q * (q.adjoint() * w);
    Eigen::ColPivHouseholderQR<Matrix> qr(w);
    Eigen::Index r = 0;
    const Eigen::Index diag = std::min(w.rows(), w.cols());
    while (r < diag && std::abs(qr.matrixR()(r, r)) > 1e-12 * scale) ++r;
    Matrix out = qr.householderQ() * Matrix::Identity(w.rows(), r);
    if (q.cols() > 0) out -= q * (q.adjoint() * out);
    for (Eigen::Index i = 0; i < out.cols(); ++i) out.col(i).normalize();
    return out;
}

} // namespace detail

/// The k largest singular values (descending). Small operators are materialized; larger ones use
/// block Golub-Kahan bidiagonalization: alternating orthonormal bases V (inputs) and U (outputs) with
/// A V_j in span(U_j), so the projected matrix U^* A V is block upper bidiagonal and its singular
/// values approximate the leading ones. Growth stops when the Ritz residuals of the k wanted values
/// fall below tol times the largest.
inline TopSingular top_singular_values(const LinearOperator& op, int k, const SvdOptions& opt = {}) {
    TopSingular out;
    const Eigen::Index n = op.cols();
    const Eigen::Index kk = std::min<Eigen::Index>(k, std::min(op.rows(), n));
    if (kk <= 0) return out;
    if (n <= opt.dense_limit || op.rows() <= opt.dense_limit) {
        auto s = singular_values(materialize(op));
        s.resize(kk);
        out.sigma = std::move(s);
        return out;
    }
    const int b = opt.block > 0 ? opt.block : int(kk) + 10;
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix start(n, b);
    for (Eigen::Index j = 0; j < start.cols(); ++j)
        for (Eigen::Index i = 0; i < n; ++i) start(i, j) = cplx(normal(rng), normal(rng));

    Matrix v(n, 0), u(op.rows(), 0);
    Matrix proj(0, 0);  // U^* A V
    Matrix vblock = detail::orthonormalize_against(v, start);
    out.converged = false;
    for (int it = 0; it < opt.max_blocks && vblock.cols() > 0; ++it) {
        const Matrix av = op.apply(vblock);
        const Matrix ublock = detail::orthonormalize_against(u, av);
        if (u.cols() + ublock.cols() == 0) {  // A vanishes on everything seen: the zero operator
            out.sigma.assign(kk, 0.0);
            out.converged = true;
            break;
        }
        const Eigen::Index c0 = v.cols(), r0 = u.cols();
        v.conservativeResize(n, c0 + vblock.cols());
        v.rightCols(vblock.cols()) = vblock;
        u.conservativeResize(op.rows(), r0 + ublock.cols());
        u.rightCols(ublock.cols()) = ublock;
        // earlier images lie in the span of earlier U blocks, so only the new column block is filled
        Matrix grown = Matrix::Zero(u.cols(), v.cols());
        grown.topLeftCorner(proj.rows(), proj.cols()) = proj;
        grown.rightCols(vblock.cols()) = u.adjoint() * av;
        proj = std::move(grown);

        Eigen::BDCSVD<Matrix> svd(proj, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& s = svd.singularValues();
        const Eigen::Index got = std::min<Eigen::Index>(kk, s.size());
        const double top = s.size() > 0 ? s(0) : 0.0;
        out.sigma.assign(s.data(), s.data() + got);
        if (top == 0.0) {
            out.converged = true;
            out.residual = 0.0;
            break;
        }
        const Matrix left = u * svd.matrixU().leftCols(got);
        const Matrix resid = op.apply_adjoint(left) - v * (svd.matrixV().leftCols(got) * s.head(got).asDiagonal());
        double worst = 0.0;
        for (Eigen::Index i = 0; i < got; ++i) worst = std::max(worst, resid.col(i).norm());
        out.residual = worst / top;
        if (got == kk && out.residual <= opt.tol) {
            out.converged = true;
            break;
        }
        vblock = detail::orthonormalize_against(v, op.apply_adjoint(ublock));
    }
    if (Eigen::Index(out.sigma.size()) < kk) out.sigma.resize(kk, 0.0);
    return out;
}

inline double operator_norm(const LinearOperator& op, const SvdOptions& opt = {}) {
    return top_singular_values(op, 1, opt).sigma.front();
}

// ----------------------------------------------------------------------------
// Semi-commutators and commutators as operators

/// Sparse assembly of the Hankel-pairing entry formula.
inline SparseOperator::Sparse semicommutator_sparse(const Symbol2& f, const Symbol2& g, const TruncationBox& box) {
    std::vector<Eigen::Triplet<cplx>> trip;
    std::map<Freq2, cplx> v;
    std::map<Eigen::Index, cplx> col;
    for (Eigen::Index j = 0; j < box.size(); ++j) {
        const Freq2 c = box.at(j);
        v.clear();
        col.clear();
        for (const auto& [d, gv] : g.coeffs()) {
            const Freq2 m = c + d;
            if (!in_hardy_quadrant(m)) v[m] += gv;
        }
        for (const auto& [m, vm] : v)
            for (const auto& [d, fv] : f.coeffs()) {
                const Freq2 a = m + d;
                if (box.contains(a)) col[box.index(a)] -= fv * vm;
            }
        for (const auto& [i, x] : col)
            if (x != cplx{}) trip.emplace_back(i, j, x);
    }
    SparseOperator::Sparse s(box.size(), box.size());
    s.setFromTriplets(trip.begin(), trip.end());
    return s;
}

namespace detail {

inline std::vector<KronSumOperator::Term> semicommutator_terms(const Symbol1& f1, const Symbol1& f2,
                                                               const Symbol1& g1, const Symbol1& g2,
                                                               const TruncationBox& box, cplx sign) {
    const Matrix s1 = semicommutator1(f1, g1, box.n1).entries;
    const Matrix s2 = semicommutator1(f2, g2, box.n2).entries;
    const Matrix p1 = toeplitz1(multiply(f1, g1, box.n1), box.n1).entries;
    const Matrix p2 = toeplitz1(multiply(f2, g2, box.n2), box.n2).entries;
    return {{sign, s1, p2}, {sign, p1, s2}, {sign, s1, s2}};
}

} // namespace detail

/// T_f T_g - T_fg on the box as an operator: Kronecker sum for tensor symbols, sparse otherwise.
inline std::shared_ptr<const LinearOperator> semicommutator_operator(const Symbol2& f, const Symbol2& g,
                                                                     const TruncationBox& box) {
    const auto* tf = f.tensor_factors();
    const auto* tg = g.tensor_factors();
    if (tf && tg)
        return std::make_shared<KronSumOperator>(
            detail::semicommutator_terms(*tf->f1, *tf->f2, *tg->f1, *tg->f2, box, 1.0));
    return std::make_shared<SparseOperator>(semicommutator_sparse(f, g, box));
}

/// T_f T_g - T_g T_f on the box as an operator.
inline std::shared_ptr<const LinearOperator> commutator_operator(const Symbol2& f, const Symbol2& g,
                                                                 const TruncationBox& box) {
    const auto* tf = f.tensor_factors();
    const auto* tg = g.tensor_factors();
    if (tf && tg) {
        auto terms = detail::semicommutator_terms(*tf->f1, *tf->f2, *tg->f1, *tg->f2, box, 1.0);
        auto rev = detail::semicommutator_terms(*tg->f1, *tg->f2, *tf->f1, *tf->f2, box, -1.0);
        terms.insert(terms.end(), rev.begin(), rev.end());
        return std::make_shared<KronSumOperator>(std::move(terms));
    }
    return std::make_shared<SparseOperator>(semicommutator_sparse(f, g, box) - semicommutator_sparse(g, f, box));
}

/// Basis vectors of the box whose degree in each variable is at most `cut`.
inline std::vector<bool> inner_mask(const TruncationBox& box, int cut) {
    std::vector<bool> inner(box.size());
    for (Eigen::Index i = 0; i < box.size(); ++i) {
        const Freq2 m = box.at(i);
        inner[i] = m.m1 <= cut && m.m2 <= cut;
    }
    return inner;
}

/// Norm of the part of D with row or column degree above cut: || D - Pi D Pi ||.
inline double tail_compression(std::shared_ptr<const LinearOperator> d, const TruncationBox& box, int cut,
                               const SvdOptions& opt = {}) {
    MaskedTailOperator tail(std::move(d), inner_mask(box, cut));
    return operator_norm(tail, opt);
}

} // namespace bidisc
