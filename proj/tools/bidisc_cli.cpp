// Command-line front end: symbol inspection, operator exports, theorem checks and boundary probes.
// Exit status: 0 when the requested analysis completed, whatever its conclusion; 1 for IO failures;
// 2 for rejected input (parse errors, violated preconditions); CLI11's own codes for bad flags.

#include <chrono>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "bidisc/config.hpp"
#include "bidisc/io.hpp"
#include "bidisc/mobius.hpp"
#include "bidisc/theorems.hpp"

using namespace bidisc;
namespace fs = std::filesystem;

namespace {

struct Run {
    RunConfig cfg;
    std::string command;
    std::vector<std::string> argv;
    std::vector<std::string> outputs;

    fs::path path(const std::string& name) const { return fs::path(cfg.out) / name; }

    // payload JSON leads with the seed; the payload itself never carries a timestamp
    void write_json(const std::string& name, const Json& body) {
        Json j{{"seed", cfg.seed}};
        for (const auto& [k, v] : body.items()) j[k] = v;
        write_atomic(path(name), dump_json(j));
        outputs.push_back(name);
    }
    void write_csv(const std::string& name, const CsvTable& t) {
        write_atomic(path(name), to_csv(t));
        outputs.push_back(name);
    }
    void write_meta() const {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::ostringstream ts;
        ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
        Json j{{"command", command}, {"argv", argv}, {"seed", cfg.seed}, {"timestamp", ts.str()}, {"outputs", outputs}};
        write_atomic(path("meta.json"), dump_json(j));
    }

    Json settings() const {
        return Json{{"box", Json::array({cfg.box.n1, cfg.box.n2})},
                    {"bandwidth", cfg.bandwidth},
                    {"bandwidths", cfg.bandwidths},
                    {"radii", cfg.radii},
                    {"angles", cfg.angles},
                    {"tol", cfg.tol}};
    }

    Symbol2 symbol(const std::string& file, const char* key) const {
        if (file.empty()) throw ParseError(std::string("missing symbol file: set ") + key);
        return load_symbol2(file, cfg.bandwidth);
    }
    Symbol1 factor(const std::string& file, const char* key) const {
        if (file.empty()) throw ParseError(std::string("missing symbol file: set ") + key);
        AnySymbol s = load_symbol(file, cfg.bandwidth);
        if (auto* f = std::get_if<Symbol1>(&s)) return *f;
        throw ParseError(file + ": expected a one-variable symbol");
    }
    Symbol2 f() const { return symbol(cfg.f, "f"); }
    Symbol2 g() const { return symbol(cfg.g, "g"); }
};

std::string quadrant_line(const Symbol2& f) {
    std::ostringstream s;
    for (Quadrant q : {Quadrant::PP, Quadrant::PM, Quadrant::MP, Quadrant::MM}) {
        const Symbol2 part = quadrant_part(f, q);
        s << "  " << to_string(q) << ": " << part.coeffs().size() << " terms, l2 " << format_double(part.stored_l2())
          << "\n";
    }
    return s.str();
}

std::string tail_line(const Tail& t) {
    return "tail: l2 " + format_double(t.l2) + ", l1 " + format_double(t.l1) + ", band (" + std::to_string(t.band1) +
           ", " + std::to_string(t.band2) + ")";
}

const char* kind(const Symbol1& f) {
    if (std::holds_alternative<TentShape>(f.shape())) return "tent";
    if (std::holds_alternative<ArcShape>(f.shape())) return "arc";
    return "explicit";
}

void show(const Symbol1& f) {
    std::cout << "one-variable " << kind(f) << " symbol, " << f.coeffs().size() << " stored coefficients\n"
              << tail_line(f.tail()) << "\n"
              << "analytic: " << (is_analytic(f) ? "yes" : "no")
              << ", co-analytic: " << (is_analytic(conjugate(f)) ? "yes" : "no") << "\n";
    for (const auto& a : f.support_arcs())
        std::cout << "support arc: [" << format_double(a.start) << ", " << format_double(a.end()) << "]\n";
    std::cout << "m,re,im\n";
    for (const auto& [n, c] : f.coeffs())
        std::cout << n << "," << format_double(c.real()) << "," << format_double(c.imag()) << "\n";
}

void show(const Symbol2& f) {
    const auto* t = f.tensor_factors();
    std::cout << "two-variable " << (t ? "tensor" : "explicit") << " symbol, " << f.coeffs().size()
              << " stored coefficients\n"
              << tail_line(f.tail()) << "\n";
    if (t) std::cout << "factors: " << kind(*t->f1) << " (z1), " << kind(*t->f2) << " (z2)\n";
    const Symbol2 fc = conjugate(f);
    std::cout << "analytic in z1: " << (is_analytic_in(f, 1) ? "yes" : "no")
              << ", in z2: " << (is_analytic_in(f, 2) ? "yes" : "no") << "\n"
              << "co-analytic in z1: " << (is_analytic_in(fc, 1) ? "yes" : "no")
              << ", in z2: " << (is_analytic_in(fc, 2) ? "yes" : "no") << "\n"
              << "quadrants:\n"
              << quadrant_line(f) << "m1,m2,re,im\n";
    for (const auto& [m, c] : f.coeffs())
        std::cout << m.m1 << "," << m.m2 << "," << format_double(c.real()) << "," << format_double(c.imag()) << "\n";
}

Symbol2 random_symbol(int degree, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Symbol2::Coeffs c;
    for (int a = -degree; a <= degree; ++a)
        for (int b = -degree; b <= degree; ++b) c[{a, b}] = cplx(u(rng), u(rng));
    return Symbol2(std::move(c));
}

void print_verdict(const Verdict& v) {
    std::cout << to_string(v.conclusion) << (v.certified ? ", certified" : ", evidence only") << "\n";
    for (const auto& e : v.evidence)
        std::cout << "  " << e.name << " = " << format_double(e.value) << " (err " << format_double(e.err) << ", "
                  << e.op << ")\n";
}

void export_matrix(Run& run, const OperatorMatrix& m) {
    run.write_json("matrix.json", to_json(m));
    const auto sigma = singular_values(m);
    run.write_csv("singular_values.csv", singular_value_csv(sigma, run.cfg.seed));
    std::cout << m.entries.rows() << "x" << m.entries.cols() << " matrix, exactness "
              << (m.exactness.exact ? "exact" : "bounded") << " (entry bound " << format_double(m.exactness.entry_bound)
              << ", operator bound " << format_double(m.exactness.bound) << ")\n"
              << "max |entry| " << format_double(m.max_abs()) << ", rank " << rank_estimate(sigma, run.cfg.tol) << "\n";
}

void cmd_symbol(Run& run, const std::string& sub, const std::string& file, int random_degree) {
    if (sub == "show") {
        const std::string path = file.empty() ? run.cfg.f : file;
        if (path.empty()) throw ParseError("symbol show needs a file");
        const AnySymbol s = load_symbol(path, run.cfg.bandwidth);
        std::visit([](const auto& x) { show(x); }, s);
        return;
    }
    Symbol2 s;
    if (random_degree >= 0) {
        s = random_symbol(random_degree, run.cfg.seed);
    } else {
        s = tensor(run.factor(run.cfg.f1, "f1"), run.factor(run.cfg.f2, "f2"));
    }
    const Json j = to_json(s);
    run.write_json("symbol.json", j);
    std::cout << dump_json(j);
}

void cmd_op(Run& run, const std::string& sub) {
    const TruncationBox box = run.cfg.box;
    if (sub == "toeplitz") return export_matrix(run, toeplitz_matrix(run.f(), box));
    if (sub == "hankel") return export_matrix(run, hankel_matrix(run.f(), box));
    if (sub == "semicomm") return export_matrix(run, semicommutator_matrix(run.f(), run.g(), box));
    if (sub == "commutator") return export_matrix(run, commutator_matrix(run.f(), run.g(), box));
    const auto m = semicommutator_matrix(run.f(), run.g(), box);
    const auto sigma = singular_values(m);
    run.write_csv("singular_values.csv", singular_value_csv(sigma, run.cfg.seed));
    std::cout << "semi-commutator singular values on box (" << box.n1 << "," << box.n2 << "), exactness "
              << (m.exactness.exact ? "exact" : "bounded") << "\n";
    for (std::size_t i = 0; i < sigma.size() && i < 32; ++i) std::cout << "  " << format_double(sigma[i]) << "\n";
    std::cout << "rank " << rank_estimate(sigma, run.cfg.tol) << "\n";
}

std::array<Symbol1, 4> tensor_quadruple(const Run& run) {
    const auto& c = run.cfg;
    if (!c.f1.empty() || !c.g1.empty())
        return {run.factor(c.f1, "f1"), run.factor(c.f2, "f2"), run.factor(c.g1, "g1"), run.factor(c.g2, "g2")};
    const Symbol2 f = run.f(), g = run.g();
    const auto* tf = f.tensor_factors();
    const auto* tg = g.tensor_factors();
    if (!tf || !tg) throw ParseError("thm3 needs tensor symbols: give f1, f2, g1, g2 or tensor files f and g");
    return {*tf->f1, *tf->f2, *tg->f1, *tg->f2};
}

void cmd_check(Run& run, const std::string& sub) {
    const auto& c = run.cfg;
    Verdict v;
    if (sub == "thm1") v = check_thm1(run.f(), run.g());
    else if (sub == "thm2") v = check_thm2_necessary(run.f(), run.g());
    else if (sub == "thm3") {
        const auto q = tensor_quadruple(run);
        Thm3Options o;
        o.radii = c.radii;
        o.angles = c.angles;
        v = check_thm3(q[0], q[1], q[2], q[3], o);
    } else if (sub == "cor1") {
        ProbeShells s;
        s.radii = c.radii;
        s.angles = c.angles;
        v = check_corollary1(run.f(), s);
    } else if (sub == "cor2") v = check_corollary2(run.f(), run.g());
    else {
        Section4Params p;
        p.bandwidths = c.bandwidths;
        p.radii = c.radii;
        p.angles = c.angles;
        // tent factors replace the default quadruple when all four are given
        if (!c.f1.empty() || !c.f2.empty() || !c.g1.empty() || !c.g2.empty() || !c.f.empty() || !c.g.empty()) {
            const auto q = tensor_quadruple(run);
            std::array<const TentShape*, 4> t{};
            for (int i = 0; i < 4; ++i)
                if (!(t[i] = std::get_if<TentShape>(&q[i].shape())))
                    throw DomainError("example4 needs tent factors");
            p.f1_center = t[0]->center, p.f1_half_width = t[0]->half_width;
            p.f2_center = t[1]->center, p.f2_half_width = t[1]->half_width;
            p.g1_center = t[2]->center, p.g1_half_width = t[2]->half_width;
            p.g2_center = t[3]->center, p.g2_half_width = t[3]->half_width;
        }
        const auto rep = example_section4(p);
        v = rep.verdict;
        run.write_csv("indicators.csv", indicator_csv(rep.indicators, c.seed));
        std::cout << "witness " << (rep.witness_ok ? "ok" : "missing") << ", rank-two identity "
                  << (rep.rank2_ok ? "ok" : "failed") << ", tail decay " << (rep.tail_decay ? "yes" : "no")
                  << ", sigma25/sigma1 decay " << (rep.ratio_decay ? "yes" : "no") << ", probe decay "
                  << (rep.probe_decay ? "yes" : "no") << "\n";
    }
    Json j = to_json(v);
    j["settings"] = run.settings();
    run.write_json("verdict.json", j);
    print_verdict(v);
}

void cmd_probe(Run& run) {
    ProbeOptions o;
    o.radii = run.cfg.radii;
    o.angles = run.cfg.angles;
    const ProbeTable t = boundary_probe(run.f(), run.g(), o);
    run.write_csv("probe.csv", probe_csv(t, run.cfg.seed));
    std::cout << t.rows.size() << " probe rows\nradius,diagonal_max,mixed_max\n";
    for (double r : run.cfg.radii) {
        const auto d = shell_maxima(t, {r}, {Shell::Diagonal})[0];
        const auto m = shell_maxima(t, {r}, {Shell::MixedFirstFixed, Shell::MixedSecondFixed})[0];
        std::cout << format_double(r) << "," << format_double(d.hankel_product) << ","
                  << format_double(m.hankel_product) << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Toeplitz and Hankel operators on the Hardy space of the bidisc"};
    app.require_subcommand(1);

    std::string config_path;
    std::map<std::string, std::string> flags;
    app.add_option("--config", config_path, "flat key = value configuration file");
    const std::pair<const char*, const char*> settings[] = {
        {"out", "output directory"},
        {"seed", "seed recorded in every output"},
        {"box", "truncation degrees N1,N2"},
        {"bandwidth", "coefficient cutoff for symbols without their own"},
        {"bandwidths", "indicator bandwidth ladder"},
        {"radii", "probe shell radii in (0,1)"},
        {"angles", "probe angles per coordinate"},
        {"tol", "relative rank tolerance"},
        {"f", "two-variable symbol file"},
        {"g", "two-variable symbol file"},
        {"f1", "one-variable factor file"},
        {"f2", "one-variable factor file"},
        {"g1", "one-variable factor file"},
        {"g2", "one-variable factor file"},
    };
    for (const auto& [key, help] : settings) app.add_option(std::string("--") + key, flags[key], help);

    auto* symbol = app.add_subcommand("symbol", "inspect or build symbols")->require_subcommand(1);
    std::string show_file;
    int random_degree = -1;
    symbol->add_subcommand("show", "print coefficients, quadrants, analyticity and tail bounds")
        ->add_option("file", show_file, "symbol file (defaults to f)");
    symbol->add_subcommand("build", "write the tensor of f1 and f2, or a seeded random polynomial")
        ->add_option("--random", random_degree, "degree of a random trigonometric polynomial");

    auto* op = app.add_subcommand("op", "build and export operator truncations")->require_subcommand(1);
    op->add_subcommand("toeplitz", "Toeplitz truncation of f");
    op->add_subcommand("hankel", "Hankel truncation of f");
    op->add_subcommand("semicomm", "semi-commutator of f and g");
    op->add_subcommand("commutator", "commutator of f and g");
    op->add_subcommand("svd", "singular values of the semi-commutator");

    auto* check = app.add_subcommand("check", "theorem checks")->require_subcommand(1);
    check->add_subcommand("thm1", "zero and finite-rank law for the semi-commutator");
    check->add_subcommand("thm2", "necessary conditions for compactness");
    check->add_subcommand("thm3", "compact nonzero semi-commutators of tensor symbols");
    check->add_subcommand("cor1", "compact Hankel operators are zero");
    check->add_subcommand("cor2", "compact commutators with an analytic symbol are zero");
    check->add_subcommand("example4", "compact nonzero commutator report");

    auto* probe = app.add_subcommand("probe", "boundary kernel probes")->require_subcommand(1);
    probe->add_subcommand("boundary", "kernel probes on shells approaching the torus");

    CLI11_PARSE(app, argc, argv);

    Run run;
    run.argv.assign(argv + 1, argv + argc);
    try {
        if (!config_path.empty()) {
            apply_config_text(run.cfg, read_text(config_path), config_path);
            // symbol paths in a config file are relative to that file
            const fs::path base = fs::path(config_path).parent_path();
            for (std::string* p : {&run.cfg.f, &run.cfg.g, &run.cfg.f1, &run.cfg.f2, &run.cfg.g1, &run.cfg.g2})
                if (!p->empty() && fs::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
        }
        for (const auto& [key, value] : flags)
            if (app.count("--" + key)) apply_setting(run.cfg, key, value);
        run.cfg.validate();

        CLI::App* group = app.get_subcommands().front();
        CLI::App* leaf = group->get_subcommands().front();
        run.command = group->get_name() + " " + leaf->get_name();
        if (group == symbol) cmd_symbol(run, leaf->get_name(), show_file, random_degree);
        else if (group == op) cmd_op(run, leaf->get_name());
        else if (group == check) cmd_check(run, leaf->get_name());
        else cmd_probe(run);
        if (!run.outputs.empty()) run.write_meta();
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "rejected: " << e.what() << "\n";
        return 2;
    } catch (const CoverageError& e) {
        std::cerr << "coverage: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
