#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "bidisc/config.hpp"
#include "bidisc/io.hpp"
#include "oracles.hpp"

using namespace bidisc;
namespace fs = std::filesystem;

namespace {

bool same_tail(const Tail& a, const Tail& b) {
    return a.l2 == b.l2 && a.l1 == b.l1 && a.band1 == b.band1 && a.band2 == b.band2;
}

bool same_arcs(const std::vector<Arc>& a, const std::vector<Arc>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].start != b[i].start || a[i].length != b[i].length) return false;
    return true;
}

bool same(const Symbol1& a, const Symbol1& b) {
    return a.coeffs() == b.coeffs() && same_tail(a.tail(), b.tail()) && a.shape().index() == b.shape().index() &&
           same_arcs(a.support_arcs(), b.support_arcs()) &&
           (a.explicit_sup_bound() == b.explicit_sup_bound());
}

bool same(const Symbol2& a, const Symbol2& b) {
    if (a.coeffs() != b.coeffs() || !same_tail(a.tail(), b.tail()) || a.shape().index() != b.shape().index() ||
        a.explicit_sup_bound() != b.explicit_sup_bound())
        return false;
    if (const auto* t = a.tensor_factors()) return same(*t->f1, *b.tensor_factors()->f1) && same(*t->f2, *b.tensor_factors()->f2);
    return true;
}

template <class S>
S reimport(const S& s) {
    const Json j = parse_json(dump_json(to_json(s)));
    if constexpr (std::is_same_v<S, Symbol1>) return symbol1_from_json(j);
    else return symbol2_from_json(j);
}

struct CliResult {
    int status;
    std::string output;
};

CliResult cli(const std::string& args) {
    const fs::path log = fs::temp_directory_path() / ("bidisc_cli_" + std::to_string(::getpid()) + ".log");
    const std::string cmd = std::string(BIDISC_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, read_text(log)};
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("bidisc_io_" + std::to_string(::getpid())) / name;
    fs::remove_all(d);
    return d;
}

const std::string kData = std::string(BIDISC_SOURCE_DIR) + "/data/";

} // namespace

TEST(Numbers, ShortestRoundTrip) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 2000; ++i) {
        const double x = u(rng) * std::pow(10.0, int(rng() % 40) - 20);
        EXPECT_EQ(parse_double(format_double(x), "x"), x);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1.0), "1");
    EXPECT_EQ(parse_double(format_double(kInf), "x"), kInf);
    EXPECT_THROW(parse_double("1.0abc", "x"), ParseError);
}

TEST(SymbolIo, ExplicitRoundTrip) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 10; ++t) {
        const auto f = oracle::random_poly2(rng, 3);
        EXPECT_TRUE(same(reimport(f), f));
        const auto p = oracle::random_poly1(rng, 4);
        EXPECT_TRUE(same(reimport(p), p));
    }
}

TEST(SymbolIo, StructuralAndDerivedRoundTrip) {
    const auto tent = make_tent(0.3, 0.7, 64);
    const auto arc = make_arc(1.0, 2.5, 32);
    EXPECT_TRUE(same(reimport(tent), tent));
    EXPECT_TRUE(same(reimport(arc), arc));
    EXPECT_TRUE(same(reimport(truncate(tent, 10)), truncate(tent, 10)));
    EXPECT_TRUE(same(reimport(conjugate(arc)), conjugate(arc)));
    const auto t = tensor(tent, arc);
    EXPECT_TRUE(same(reimport(t), t));
    const auto prod = multiply(t, conjugate(t), 8);
    EXPECT_TRUE(same(reimport(prod), prod));
    const auto cut = truncate(t, 5);
    EXPECT_TRUE(same(reimport(cut), cut));
}

TEST(SymbolIo, BandwidthFieldAndDimensions) {
    const auto s = symbol_from_json(parse_json(R"({"type":"tent","a":0,"w":0.5,"bandwidth":16})"));
    ASSERT_TRUE(std::holds_alternative<Symbol1>(s));
    EXPECT_EQ(std::get<Symbol1>(s).max_freq(), 16);
    const auto t = symbol2_from_json(parse_json(
        R"({"type":"tensor","bandwidth":8,"f1":{"type":"tent","a":0,"w":0.5},"f2":{"type":"arc","a":0,"b":1,"bandwidth":4}})"));
    EXPECT_EQ(t.tensor_factors()->f1->max_freq(), 8);
    EXPECT_EQ(t.tensor_factors()->f2->max_freq(), 4);
    const auto e = symbol2_from_json(parse_json(R"({"type":"explicit","terms":[{"m1":3,"m2":-1,"re":2,"im":0}]})"));
    EXPECT_EQ(e.coeff(3, -1), cplx(2.0));
}

TEST(SymbolIo, DiagnosticsNameTheField) {
    auto message = [](const std::string& text) {
        try {
            symbol_from_json(parse_json(text, "f.json"), "f.json");
        } catch (const ParseError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_EQ(message("{\"type\":\n \"explicit\",, }"), "f.json:2:13: malformed JSON");
    EXPECT_EQ(message(R"({"type":"explicit","terms":[{"m1":1,"m2":0,"re":1,"im":0},{"m1":1,"re":1,"im":0}]})"),
              "f.json.terms[1].m2: missing field");
    EXPECT_EQ(message(R"({"type":"explicit","terms":[{"m1":1.5,"m2":0,"re":1,"im":0}]})"),
              "f.json.terms[0].m1: expected an integer");
    EXPECT_EQ(message(R"({"type":"circle"})"), "f.json.type: unknown two-variable type 'circle'");
    EXPECT_EQ(message(R"({"type":"tent","a":0,"w":-1})").rfind("f.json: ", 0), 0u);
}

TEST(MatrixIo, RoundTrip) {
    std::mt19937_64 rng(2);
    const auto f = oracle::random_poly2(rng, 2);
    const auto g = make_tent(0.4, 0.4, 16);
    for (const auto& m : {semicommutator_matrix(f, conjugate(f), {3, 2}), toeplitz_matrix(tensor(g, g), {2, 2}),
                          hankel_matrix(f, {2, 3})}) {
        const auto back = matrix_from_json(parse_json(dump_json(to_json(m))));
        EXPECT_EQ(back.entries, m.entries);
        EXPECT_EQ(back.rows, m.rows);
        EXPECT_EQ(back.cols, m.cols);
        EXPECT_EQ(back.exactness.exact, m.exactness.exact);
        EXPECT_EQ(back.exactness.bound, m.exactness.bound);
        EXPECT_EQ(back.exactness.entry_bound, m.exactness.entry_bound);
    }
}

TEST(VerdictIo, RoundTrip) {
    const auto a = make_tent(kPi / 4, kPi / 4), b = make_tent(5 * kPi / 4, kPi / 4);
    for (const auto& v : {check_thm1(make_trigpoly2({{{1, 0}, 1.0}}), make_trigpoly2({{{-1, 0}, 1.0}})),
                          check_thm2_necessary(tensor(a, a), tensor(b, b))}) {
        EXPECT_EQ(verdict_from_json(parse_json(dump_json(to_json(v)))), v);
    }
    Verdict odd;
    odd.add("x", kInf, std::nan(""), "none");
    const auto back = verdict_from_json(parse_json(dump_json(to_json(odd))));
    EXPECT_EQ(back.evidence[0].value, kInf);
    EXPECT_TRUE(std::isnan(back.evidence[0].err));
}

TEST(CsvIo, RoundTripAndSchema) {
    const auto t = boundary_probe(make_trigpoly2({{{1, 0}, 1.0}}), make_trigpoly2({{{-1, 0}, cplx(0.5, 0.25)}}),
                                  ProbeOptions{{0.5, 0.9}, 3, 0.5, 4096});
    const auto csv = probe_csv(t, 42);
    const std::string text = to_csv(csv);
    EXPECT_EQ(text.substr(0, text.find('\n', 10) + 1),
              "# seed=42\nr1,theta1,r2,theta2,hankel_product,berezin_re,berezin_im,err\n");
    EXPECT_EQ(parse_csv(text), csv);
    EXPECT_EQ(csv.rows.size(), t.rows.size());
    const auto sv = singular_value_csv({1.0, 0.5, 1e-300}, 7);
    EXPECT_EQ(parse_csv(to_csv(sv)), sv);
    EXPECT_THROW(parse_csv("# seed=1\na,b\n1\n"), ParseError);
}

TEST(Config, FlagsOverrideFile) {
    RunConfig c;
    apply_config_text(c, "# comment\nbox = 2,3\nradii = 0.5, 0.75\nseed = 9\ntol = 1e-6  # trailing\n");
    EXPECT_EQ(c.box.n1, 2);
    EXPECT_EQ(c.box.n2, 3);
    EXPECT_EQ(c.radii, (std::vector<double>{0.5, 0.75}));
    EXPECT_EQ(c.seed, 9u);
    apply_setting(c, "box", "4,4");
    EXPECT_EQ(c.box.n1, 4);
    EXPECT_THROW(apply_config_text(c, "box = 1\n"), ParseError);
    EXPECT_THROW(apply_config_text(c, "colour = red\n"), ParseError);
    c.radii = {0.5, 1.0};
    EXPECT_THROW(c.validate(), ParseError);
    c.radii = {0.5};
    c.tol = 0.0;
    EXPECT_THROW(c.validate(), ParseError);
}

TEST(Files, AtomicWriteReplaces) {
    const fs::path d = fresh_dir("atomic");
    write_atomic(d / "x.txt", "first");
    write_atomic(d / "x.txt", "second");
    EXPECT_EQ(read_text(d / "x.txt"), "second");
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(d)) ++n;
    EXPECT_EQ(n, 1u);
}

TEST(Cli, SymbolShowAndBuild) {
    auto r = cli("symbol show " + kData + "z1.json");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.output.find("1 stored coefficients"), std::string::npos);
    EXPECT_NE(r.output.find("m1,m2,re,im\n1,0,1,0\n"), std::string::npos);

    r = cli("symbol show " + kData + "tent_origin_64.json");
    EXPECT_EQ(r.status, 0);
    const auto at = r.output.find("tail: l2 ");
    ASSERT_NE(at, std::string::npos);
    EXPECT_GT(std::stod(r.output.substr(at + 9)), 0.0);

    const fs::path d = fresh_dir("build");
    r = cli("--f1 " + kData + "tent_f.json --f2 " + kData + "tent_g.json --out " + d.string() + " symbol build");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.output.find("\"type\": \"tensor\""), std::string::npos);
    const Symbol2 built = symbol2_from_json(parse_json(read_text(d / "symbol.json")));
    EXPECT_TRUE(same(built, tensor(make_tent(kPi / 4, kPi / 4), make_tent(5 * kPi / 4, kPi / 4))));
}

TEST(Cli, OperatorExports) {
    fs::path d = fresh_dir("semicomm");
    auto r = cli("--f " + kData + "conj_z1_times_z2.json --g " + kData + "z1_z2.json --box 8,8 --out " + d.string() +
                 " op semicomm");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.output.find("exactness exact"), std::string::npos);
    const auto m = matrix_from_json(parse_json(read_text(d / "matrix.json")));
    EXPECT_EQ(m.max_abs(), 0.0);
    EXPECT_TRUE(m.exactness.exact);

    d = fresh_dir("svd");
    r = cli("--f " + kData + "z1.json --g " + kData + "conj_z1.json --box 8,8 --out " + d.string() + " op svd");
    EXPECT_EQ(r.status, 0);
    const auto sv = parse_csv(read_text(d / "singular_values.csv"));
    ASSERT_EQ(sv.rows.size(), 81u);
    for (int i = 0; i < 9; ++i) EXPECT_NEAR(sv.rows[i][1], 1.0, 1e-12);
    EXPECT_LT(sv.rows[9][1], 1e-12);

    d = fresh_dir("toeplitz");
    r = cli("--f " + kData + "one.json --box 3,2 --out " + d.string() + " op toeplitz");
    EXPECT_EQ(r.status, 0);
    const auto t = matrix_from_json(parse_json(read_text(d / "matrix.json")));
    EXPECT_EQ(t.entries, Matrix::Identity(12, 12));
}

TEST(Cli, ChecksAndExitCodes) {
    fs::path d = fresh_dir("thm1");
    auto r = cli("--f " + kData + "conj_z1_times_z2.json --g " + kData + "z1_z2.json --out " + d.string() +
                 " check thm1");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.output.find("Zero, certified"), std::string::npos);
    const auto v = verdict_from_json(parse_json(read_text(d / "verdict.json")));
    EXPECT_EQ(v.conclusion, Conclusion::Zero);
    EXPECT_TRUE(v.certified);

    // a non-compact conclusion is still a completed analysis
    d = fresh_dir("thm2");
    r = cli("--f " + kData + "z1.json --g " + kData + "conj_z1.json --out " + d.string() + " check thm2");
    EXPECT_EQ(r.status, 0);
    EXPECT_EQ(verdict_from_json(parse_json(read_text(d / "verdict.json"))).conclusion,
              Conclusion::NonzeroNonCompactEvidence);

    r = cli("--f1 " + kData + "z.json --f2 " + kData + "zero1.json --g1 " + kData + "z.json --g2 " + kData +
            "z.json --out " + fresh_dir("thm3").string() + " check thm3");
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.output.find("rejected: "), std::string::npos);

    EXPECT_EQ(cli("--f " + kData + "missing.json --g " + kData + "z1.json check thm1").status, 1);
    EXPECT_EQ(cli("--f " + kData + "example4.cfg --g " + kData + "z1.json check thm1").status, 2);
    EXPECT_EQ(cli("--radii 0.5,1.5 check cor1").status, 2);
    EXPECT_NE(cli("check nonsense").status, 0);
}

TEST(Cli, Example4Report) {
    const fs::path d = fresh_dir("example4");
    auto r = cli("--config " + kData + "example4.cfg --bandwidths 8,16 --angles 4 --out " + d.string() +
                 " check example4");
    EXPECT_EQ(r.status, 0);
    const Json j = parse_json(read_text(d / "verdict.json"));
    const auto v = verdict_from_json(j);
    EXPECT_NE(v.find("witness.commutator_max_entry"), nullptr);
    EXPECT_NE(v.find("rank2.residual"), nullptr);
    EXPECT_NE(v.find("indicator.tail.N16"), nullptr);
    EXPECT_NE(v.find("probe.fg.r0.99"), nullptr);
    EXPECT_EQ(j["settings"]["bandwidths"], Json::array({8, 16}));
    EXPECT_EQ(parse_csv(read_text(d / "indicators.csv")).seed, 1u);
}

TEST(Cli, ProbeTables) {
    auto table = [](const std::string& f, const std::string& g, const std::string& name) {
        const fs::path d = fresh_dir(name);
        const auto r = cli("--f " + kData + f + " --g " + kData + g + " --angles 4 --out " + d.string() +
                           " probe boundary");
        EXPECT_EQ(r.status, 0);
        return parse_csv(read_text(d / "probe.csv"));
    };
    const auto analytic = table("z1.json", "z1_z2.json", "probe_analytic");
    EXPECT_EQ(analytic.header, probe_csv_header());
    for (const auto& row : analytic.rows) EXPECT_EQ(row[4], 0.0);

    // z1 held at radius 0.5 while |z2| -> 1: the product stays at 1 - 0.25
    const auto mixed = table("z1.json", "conj_z1.json", "probe_mixed");
    for (const auto& row : mixed.rows)
        if (row[0] == 0.5 && row[2] > 0.5) {
            EXPECT_GE(row[4], 0.5);
        }

    const auto tents = table("tensor_f.json", "tensor_g.json", "probe_tents");
    std::map<double, double> shell;
    for (const auto& row : tents.rows) {
        const double r = std::max(row[0], row[2]);
        shell[r] = std::max(shell[r], row[4]);
    }
    EXPECT_GT(shell[0.5], shell[0.9]);
    EXPECT_GT(shell[0.9], shell[0.99]);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
    const std::string base = "--f " + kData + "tensor_f.json --g " + kData + "tensor_g.json --seed 5 --angles 3 ";
    for (const std::string cmd : {"probe boundary", "check thm3", "op commutator"}) {
        const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
        ASSERT_EQ(cli(base + "--box 3,3 --out " + a.string() + " " + cmd).status, 0) << cmd;
        ASSERT_EQ(cli(base + "--box 3,3 --out " + b.string() + " " + cmd).status, 0) << cmd;
        for (const auto& e : fs::directory_iterator(a)) {
            const auto name = e.path().filename();
            if (name == "meta.json") continue;
            EXPECT_EQ(read_text(e.path()), read_text(b / name)) << cmd << " " << name;
            const auto text = read_text(e.path());
            EXPECT_TRUE(text.rfind("# seed=5\n", 0) == 0 || text.rfind("{\n  \"seed\": 5,", 0) == 0) << name;
        }
        EXPECT_TRUE(parse_json(read_text(a / "meta.json")).contains("timestamp"));
    }
    // the seed drives random symbol construction
    const fs::path a = fresh_dir("rand_a"), b = fresh_dir("rand_b");
    ASSERT_EQ(cli("--seed 11 --out " + a.string() + " symbol build --random 2").status, 0);
    ASSERT_EQ(cli("--seed 11 --out " + b.string() + " symbol build --random 2").status, 0);
    EXPECT_EQ(read_text(a / "symbol.json"), read_text(b / "symbol.json"));
}
