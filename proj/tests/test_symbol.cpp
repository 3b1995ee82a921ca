#include <gtest/gtest.h>

#include <random>

#include "bidisc/symbol.hpp"
#include "oracles.hpp"

using namespace bidisc;

namespace {

const cplx I(0.0, 1.0);

Symbol2 z1() { return make_trigpoly2({{{1, 0}, 1.0}}); }
Symbol2 z1bar() { return make_trigpoly2({{{-1, 0}, 1.0}}); }

void expect_same_coeffs(const Symbol2& a, const Symbol2& b, double tol = 0.0) {
    for (const auto& [m, c] : a.coeffs()) EXPECT_LE(std::abs(c - b[m]), tol) << m.m1 << "," << m.m2;
    for (const auto& [m, c] : b.coeffs()) EXPECT_LE(std::abs(c - a[m]), tol) << m.m1 << "," << m.m2;
}

} // namespace

TEST(FourierCoeff, DeltaAndMonomial) {
    const auto one = constant2(1.0);
    EXPECT_EQ(fourier_coeff(one, {0, 0}), cplx(1.0));
    EXPECT_EQ(fourier_coeff(one, {1, 0}), cplx(0.0));
    EXPECT_EQ(fourier_coeff(one, {-3, 2}), cplx(0.0));
    const auto mono = make_trigpoly2({{{1, -1}, 1.0}});
    EXPECT_EQ(fourier_coeff(mono, {1, -1}), cplx(1.0));
    EXPECT_EQ(fourier_coeff(mono, {-1, 1}), cplx(0.0));
}

TEST(FourierCoeff, ArcTensorOneMatchesQuadrature) {
    const auto f = tensor(make_arc(0.0, kPi / 2), constant1(1.0));
    EXPECT_NEAR(std::abs(fourier_coeff(f, {0, 0}) - oracle::arc_coeff(0.0, kPi / 2, 0)), 0.0, 1e-10);
    EXPECT_NEAR(fourier_coeff(f, {0, 0}).real(), 0.25, 1e-15);
    for (int n : {-7, -1, 1, 3, 40})
        EXPECT_NEAR(std::abs(fourier_coeff(f, {n, 0}) - oracle::arc_coeff(0.0, kPi / 2, n)), 0.0, 1e-10) << n;
    EXPECT_EQ(fourier_coeff(f, {0, 1}), cplx(0.0));
}

TEST(Multiply, ModulusSquaredIsOne) {
    const auto p = multiply(z1(), z1bar(), 4);
    ASSERT_EQ(p.coeffs().size(), 1u);
    EXPECT_EQ(p.coeff(0, 0), cplx(1.0));
    EXPECT_TRUE(p.exact());
}

TEST(Multiply, Binomial) {
    const auto f = make_trigpoly2({{{1, 0}, 1.0}, {{0, 1}, 1.0}});
    const auto p = multiply(f, f, 2);
    EXPECT_EQ(p.coeffs().size(), 3u);
    EXPECT_EQ(p.coeff(2, 0), cplx(1.0));
    EXPECT_EQ(p.coeff(1, 1), cplx(2.0));
    EXPECT_EQ(p.coeff(0, 2), cplx(1.0));
    EXPECT_TRUE(p.exact());
}

TEST(Multiply, TruncationIsReported) {
    const auto f = make_trigpoly2({{{1, 0}, 1.0}, {{0, 1}, 1.0}});
    const auto p = multiply(f, f, 1);
    EXPECT_FALSE(p.exact());
    EXPECT_NEAR(p.tail().l2, std::sqrt(2.0), 1e-15);
    EXPECT_EQ(p.coeff(1, 1), cplx(2.0));
}

TEST(Multiply, MatchesGridSampling) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 3; ++trial) {
        const auto f = oracle::random_poly2(rng, 3);
        const auto g = oracle::random_poly2(rng, 3);
        const auto p = multiply(f, g, 6);
        ASSERT_TRUE(p.exact());
        // sample fg on the grid and invert the DFT
        const int n = 64;
        std::vector<cplx> vals(n * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double t1 = kTwoPi * i / n, t2 = kTwoPi * j / n;
                vals[i * n + j] = oracle::torus_value(f, t1, t2) * oracle::torus_value(g, t1, t2);
            }
        for (int a = -7; a <= 7; ++a)
            for (int b = -7; b <= 7; ++b) {
                cplx s{};
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        s += vals[i * n + j] * std::polar(1.0, -kTwoPi * (a * i + b * j) / n);
                s /= double(n * n);
                EXPECT_NEAR(std::abs(s - p.coeff(a, b)), 0.0, 1e-10) << a << "," << b;
            }
    }
}

TEST(Multiply, TailBoundsTruncatedProduct) {
    const auto f = tensor(make_tent(1.0, 0.5, 24), make_tent(2.0, 0.7, 24));
    const auto g = tensor(make_tent(1.3, 0.4, 24), make_arc(0.0, 1.0, 24));
    const auto fr = tensor(make_tent(1.0, 0.5, 200), make_tent(2.0, 0.7, 200));
    const auto gr = tensor(make_tent(1.3, 0.4, 200), make_arc(0.0, 1.0, 200));
    const auto p = multiply(f, g, 24);
    const auto ref = multiply(fr, gr, 200);
    double d2 = 0.0;
    for (const auto& [m, c] : ref.coeffs()) d2 += std::norm(c - p[m]);
    EXPECT_LE(std::sqrt(d2), p.tail().l2);
}

TEST(Conjugate, Basics) {
    const auto c = conjugate(z1());
    EXPECT_EQ(c.coeff(-1, 0), cplx(1.0));
    EXPECT_EQ(c.coeff(1, 0), cplx(0.0));
    // real symbol z1 + conj(z1)
    const auto re = make_trigpoly2({{{1, 0}, 1.0}, {{-1, 0}, 1.0}, {{2, -1}, I}, {{-2, 1}, -I}});
    expect_same_coeffs(conjugate(re), re);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 10; ++t) {
        const auto f = oracle::random_poly2(rng, 3);
        expect_same_coeffs(conjugate(conjugate(f)), f);
        const auto cf = conjugate(f);
        for (const auto& [m, v] : f.coeffs()) EXPECT_EQ(cf[-m], std::conj(v));
    }
}

TEST(QuadrantPart, MonomialAndConstant) {
    const auto f = make_trigpoly2({{{1, -1}, 1.0}});
    EXPECT_EQ(quadrant_part(f, Quadrant::PM).coeff(1, -1), cplx(1.0));
    EXPECT_TRUE(quadrant_part(f, Quadrant::PP).coeffs().empty());
    EXPECT_TRUE(quadrant_part(f, Quadrant::MP).coeffs().empty());
    EXPECT_TRUE(quadrant_part(f, Quadrant::MM).coeffs().empty());
    const auto one = constant2(1.0);
    EXPECT_EQ(quadrant_part(one, Quadrant::PP).coeff(0, 0), cplx(1.0));
    EXPECT_TRUE(quadrant_part(one, Quadrant::PM).coeffs().empty());
}

TEST(QuadrantPart, Partition) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 10; ++t) {
        const auto f = oracle::random_poly2(rng, 3);
        const auto sum = quadrant_part(f, Quadrant::PP) + quadrant_part(f, Quadrant::PM) +
                         quadrant_part(f, Quadrant::MP) + quadrant_part(f, Quadrant::MM);
        expect_same_coeffs(sum, f);
        std::size_t total = 0;
        for (auto q : {Quadrant::PP, Quadrant::PM, Quadrant::MP, Quadrant::MM}) {
            const auto part = quadrant_part(f, q);
            total += part.coeffs().size();
            for (const auto& [m, v] : part.coeffs()) EXPECT_EQ(quadrant_of(m), q);
        }
        EXPECT_EQ(total, f.coeffs().size());
    }
}

TEST(HarmonicExtension, ConstantAndOrigin) {
    const auto c = constant2(cplx(2.0, -1.0));
    const auto e = harmonic_extension(c, {cplx(0.3, 0.4), cplx(-0.1, 0.7)});
    EXPECT_EQ(e.value, cplx(2.0, -1.0));
    EXPECT_EQ(e.err, 0.0);
    std::mt19937_64 rng(9);
    const auto f = oracle::random_poly2(rng, 3);
    EXPECT_EQ(harmonic_extension(f, {0.0, 0.0}).value, f.coeff(0, 0));
}

TEST(HarmonicExtension, ArcMatchesPoissonIntegral) {
    const auto f = tensor(make_arc(0.0, kPi / 2), constant1(1.0));
    const auto e = harmonic_extension(f, {0.9, 0.0});
    const cplx ref =
        oracle::integrate([](double t) { return cplx(oracle::poisson(0.9, -t)); }, 0.0, kPi / 2, 256) / kTwoPi;
    EXPECT_NEAR(std::abs(e.value - ref), 0.0, 1e-8);
    EXPECT_LE(e.err, 1e-8);
}

TEST(HarmonicExtension, PoissonConsistency) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 25; ++t) {
        const auto f = oracle::random_poly2(rng, 6, 0.3);
        const BidiscPoint z{oracle::random_disc_point(rng, 0.9), oracle::random_disc_point(rng, 0.9)};
        const cplx ref =
            oracle::poisson_integral([&](double a, double b) { return oracle::torus_value(f, a, b); }, z.z1, z.z2);
        EXPECT_NEAR(std::abs(harmonic_extension(f, z).value - ref), 0.0, 1e-8);
    }
}

TEST(HarmonicExtension, TruncatedErrorBoundCovers) {
    const auto f = tensor(make_arc(0.5, 2.0, 16), make_tent(1.0, 0.8, 16));
    const auto ref = tensor(make_arc(0.5, 2.0, 1024), make_tent(1.0, 0.8, 1024));
    for (const BidiscPoint z : {BidiscPoint{0.5, 0.2}, BidiscPoint{cplx(0.6, 0.6), cplx(-0.9, 0.1)}}) {
        const auto e = harmonic_extension(f, z);
        const auto r = harmonic_extension(ref, z);
        EXPECT_LE(std::abs(e.value - r.value), e.err + r.err);
        EXPECT_GT(e.err, 0.0);
    }
}

TEST(HarmonicExtension, BoundaryRules) {
    const auto tent = tensor(make_tent(0.0, 1.0), make_tent(1.0, 1.0));
    const auto e = harmonic_extension(tent, {std::polar(1.0, 0.25), 0.3});
    EXPECT_TRUE(std::isfinite(e.err));
    // tent(0.25) = 0.75 times the Poisson extension of the second tent at 0.3
    const cplx second = oracle::integrate(
        [](double t) { return (1.0 - std::abs(t - 1.0)) * oracle::poisson(0.3, -t); }, 0.0, 2.0) / kTwoPi;
    EXPECT_NEAR(std::abs(e.value - 0.75 * second), 0.0, e.err + 1e-12);

    const auto arc = tensor(make_arc(0.0, 1.0), constant1(1.0));
    EXPECT_THROW(harmonic_extension(arc, {std::polar(1.0, 0.3), 0.2}), DivergenceError);
    EXPECT_NO_THROW(harmonic_extension(arc, {0.3, std::polar(1.0, 0.3)}) );
    EXPECT_THROW(harmonic_extension(tent, {1.0, cplx(0.0, 1.0)}), DomainError);
    EXPECT_THROW(harmonic_extension(tent, {1.2, 0.0}), DomainError);
}

TEST(Wirtinger, Monomials) {
    const BidiscPoint z{cplx(0.3, -0.2), cplx(0.1, 0.5)};
    EXPECT_EQ(wirtinger(z1(), z, Wirtinger::DZ1).value, cplx(1.0));
    EXPECT_EQ(wirtinger(z1(), z, Wirtinger::DZ1Bar).value, cplx(0.0));
    EXPECT_EQ(wirtinger(z1bar(), z, Wirtinger::DZ1Bar).value, cplx(1.0));
    std::mt19937_64 rng(2);
    const auto f = oracle::random_poly2_signed(rng, 3, 1, 0);
    for (int t = 0; t < 10; ++t) {
        const BidiscPoint p{oracle::random_disc_point(rng, 0.95), oracle::random_disc_point(rng, 0.95)};
        EXPECT_EQ(wirtinger(f, p, Wirtinger::DZ1Bar).value, cplx(0.0));
    }
}

TEST(Wirtinger, FiniteDifferences) {
    std::mt19937_64 rng(77);
    const double h = 1e-5;
    for (int t = 0; t < 25; ++t) {
        const auto f = oracle::random_poly2(rng, 3);
        const BidiscPoint z{oracle::random_disc_point(rng, 0.8), oracle::random_disc_point(rng, 0.8)};
        auto val = [&](cplx d1, cplx d2) { return harmonic_extension(f, {z.z1 + d1, z.z2 + d2}).value; };
        const cplx dx1 = (val(h, 0) - val(-h, 0)) / (2 * h);
        const cplx dy1 = (val(I * h, 0) - val(-I * h, 0)) / (2 * h);
        const cplx dx2 = (val(0, h) - val(0, -h)) / (2 * h);
        const cplx dy2 = (val(0, I * h) - val(0, -I * h)) / (2 * h);
        const std::pair<Wirtinger, cplx> cases[] = {{Wirtinger::DZ1, 0.5 * (dx1 - I * dy1)},
                                                    {Wirtinger::DZ1Bar, 0.5 * (dx1 + I * dy1)},
                                                    {Wirtinger::DZ2, 0.5 * (dx2 - I * dy2)},
                                                    {Wirtinger::DZ2Bar, 0.5 * (dx2 + I * dy2)}};
        for (const auto& [w, fd] : cases) {
            const cplx d = wirtinger(f, z, w).value;
            EXPECT_LE(std::abs(d - fd), 1e-6 * std::max(1.0, std::abs(d)));
        }
    }
}

TEST(Wirtinger, DifferentiatedVariableMustBeInterior) {
    const auto f = tensor(make_tent(0.0, 1.0), make_tent(1.0, 1.0));
    EXPECT_THROW(wirtinger(f, {1.0, 0.2}, Wirtinger::DZ1), DomainError);
    EXPECT_NO_THROW(wirtinger(f, {0.2, std::polar(1.0, 2.0)}, Wirtinger::DZ1));
}

TEST(Analytic, Axes) {
    const auto f = make_trigpoly2({{{1, 0}, 1.0}, {{0, 2}, 1.0}});
    EXPECT_TRUE(is_analytic_in(f, 1));
    EXPECT_TRUE(is_analytic_in(f, 2));
    const auto g = make_trigpoly2({{{-1, 1}, 1.0}});
    EXPECT_FALSE(is_analytic_in(g, 1));
    EXPECT_TRUE(is_analytic_in(g, 2));
    for (int bw : {1, 4, 64}) {
        const auto arc = tensor(make_arc(0.2, 1.7, bw), constant1(1.0));
        EXPECT_NE(arc.coeff(-1, 0), cplx(0.0));
        EXPECT_FALSE(is_analytic_in(arc, 1));
        EXPECT_TRUE(is_analytic_in(arc, 2));
    }
}

TEST(Tensor, Basics) {
    const auto one = tensor(constant1(1.0), constant1(1.0));
    ASSERT_EQ(one.coeffs().size(), 1u);
    EXPECT_EQ(one.coeff(0, 0), cplx(1.0));
    const auto t = tensor(make_trigpoly({{1, 1.0}}), make_trigpoly({{-1, 1.0}}));
    ASSERT_EQ(t.coeffs().size(), 1u);
    EXPECT_EQ(t.coeff(1, -1), cplx(1.0));
    EXPECT_NE(t.tensor_factors(), nullptr);
}

TEST(Tensor, ArcProductMatches2DQuadrature) {
    const double a1 = 0.3, b1 = 1.9, a2 = 2.0, b2 = 4.5;
    const auto f1 = make_arc(a1, b1), f2 = make_arc(a2, b2);
    const auto t = tensor(f1, f2);
    const auto g = oracle::gauss_legendre(20);
    const int panels = 16;
    for (int m1 = -4; m1 <= 4; ++m1)
        for (int m2 = -4; m2 <= 4; ++m2) {
            EXPECT_EQ(t.coeff(m1, m2), f1[m1] * f2[m2]);
            // composite tensor Gauss rule over the rectangle
            cplx s{};
            const double h1 = (b1 - a1) / panels, h2 = (b2 - a2) / panels;
            for (int p = 0; p < panels; ++p)
                for (int q = 0; q < panels; ++q)
                    for (std::size_t i = 0; i < g.x.size(); ++i)
                        for (std::size_t j = 0; j < g.x.size(); ++j) {
                            const double s1 = a1 + h1 * (p + 0.5 * (g.x[i] + 1));
                            const double s2 = a2 + h2 * (q + 0.5 * (g.x[j] + 1));
                            s += g.w[i] * g.w[j] * std::polar(1.0, -(m1 * s1 + m2 * s2));
                        }
            s *= 0.25 * h1 * h2 / (kTwoPi * kTwoPi);
            EXPECT_NEAR(std::abs(t.coeff(m1, m2) - s), 0.0, 1e-10) << m1 << "," << m2;
        }
}

TEST(Builders, TentCoefficients) {
    const auto t = make_tent(0.0, kPi / 4);
    EXPECT_NEAR(t[0].real(), (kPi / 4) / kTwoPi, 1e-16);
    EXPECT_NEAR(std::abs(t[0] - oracle::tent_coeff(0.0, kPi / 4, 0)), 0.0, 1e-12);
    const auto u = make_tent(2.1, 0.6);
    for (int n : {-9, -1, 1, 2, 17, 100})
        EXPECT_NEAR(std::abs(u[n] - oracle::tent_coeff(2.1, 0.6, n)), 0.0, 1e-12) << n;
    ASSERT_EQ(u.support_arcs().size(), 1u);
    EXPECT_NEAR(u.support_arcs()[0].start, 1.5, 1e-15);
    EXPECT_NEAR(u.support_arcs()[0].length, 1.2, 1e-15);
    EXPECT_EQ(evaluate_on_circle(u, 0.0), cplx(0.0));
    EXPECT_NEAR(evaluate_on_circle(u, 2.4).real(), 0.5, 1e-12);
}

TEST(Builders, ArcAndTrigpoly) {
    const auto full = make_arc(0.0, kTwoPi);
    ASSERT_EQ(full.coeffs().size(), 1u);
    EXPECT_EQ(full[0], cplx(1.0));
    EXPECT_TRUE(full.exact());
    const auto z = make_trigpoly({{1, 1.0}});
    ASSERT_EQ(z.coeffs().size(), 1u);
    EXPECT_EQ(z[1], cplx(1.0));
    const auto arc = make_arc(-0.4, 1.1);
    for (int n : {-5, 0, 3, 60}) EXPECT_NEAR(std::abs(arc[n] - oracle::arc_coeff(-0.4, 1.1, n)), 0.0, 1e-12);
    EXPECT_TRUE(std::isinf(arc.tail().l1));
}

TEST(Builders, Rejections) {
    EXPECT_THROW(make_arc(1.0, 1.0), DomainError);
    EXPECT_THROW(make_arc(2.0, 1.0), DomainError);
    EXPECT_THROW(make_arc(0.0, 7.0), DomainError);
    EXPECT_THROW(make_tent(0.0, 0.0), DomainError);
    EXPECT_THROW(make_tent(0.0, kPi), DomainError);
}

TEST(Builders, ZeroCoefficientsAreNotStored) {
    EXPECT_EQ(make_trigpoly({{2, 1.0}, {2, -1.0}}).coeffs().size(), 0u);
}

TEST(TailHonesty, Tent) {
    for (int B : {16, 64}) {
        for (double w : {0.3, kPi / 4, 2.5}) {
            const auto t = make_tent(1.0, w, B);
            const auto big = make_tent(1.0, w, 4 * B);
            double s2 = 0.0, s1 = 0.0;
            for (const auto& [n, c] : big.coeffs())
                if (std::abs(n) > B) {
                    s2 += std::norm(c);
                    s1 += std::abs(c);
                }
            EXPECT_LE(std::sqrt(s2), t.tail().l2);
            EXPECT_LE(s1, t.tail().l1);
        }
    }
}

TEST(TailHonesty, Arc) {
    for (int B : {16, 64}) {
        const auto a = make_arc(0.4, 2.9, B);
        const auto big = make_arc(0.4, 2.9, 64 * B);
        double s2 = 0.0;
        for (const auto& [n, c] : big.coeffs())
            if (std::abs(n) > B) s2 += std::norm(c);
        EXPECT_LE(std::sqrt(s2), a.tail().l2);
    }
}

TEST(Arcs, OverlapAndGaps) {
    EXPECT_EQ(arc_overlap({0.0, 1.0}, {1.0, 1.0}), 0.0);
    EXPECT_NEAR(arc_overlap({6.0, 1.0}, {0.0, 1.0}), 7.0 - kTwoPi, 1e-12);
    EXPECT_TRUE(arcs_disjoint({{0.0, kPi / 2}}, {{kPi, kPi / 2}}));
    EXPECT_NEAR(longest_uncovered_arc({{0.0, kPi / 2}, {kPi, kPi / 2}}), kPi / 2, 1e-12);
    EXPECT_NEAR(longest_uncovered_arc({{-0.5, 1.0}}), kTwoPi - 1.0, 1e-12);
}
