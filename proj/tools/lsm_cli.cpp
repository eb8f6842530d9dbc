// Command line front end: identity verification suites, moment tables, the
// integrated-moment table, and regeneration of the frozen audit constants.
//
//   lsm verify <special|arith|g|convolution|voronoi|k1> [flags]
//   lsm moment --k 2 --k 3 --N 1 --N 5 --t 0 --t 1 [flags]
//   lsm integrated --k 2 --N 5 --T 5 [flags]
//   lsm --recalibrate
//
// Output is CSV (default) or JSON with identical numeric payloads, every
// float printed with 17 significant digits.  Exit codes: 0 pass, 1 check
// failure, 2 usage error.

#include "CLI11.hpp"

#include "lsm/arith.hpp"
#include "lsm/calibration.hpp"
#include "lsm/gseries.hpp"
#include "lsm/moments.hpp"
#include "lsm/regular.hpp"
#include "lsm/special.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

using namespace lsm;

namespace {

struct Cell {
    std::string key;
    std::string text;
    bool quoted = false; // JSON: quote the token
};
using Row = std::vector<Cell>;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Cell num(const std::string& key, double x) { return {key, fmt(x), false}; }
Cell txt(const std::string& key, const std::string& s) { return {key, s, true}; }
Cell boolean(const std::string& key, bool b) { return {key, b ? "true" : "false", false}; }

void emit(std::ostream& os, const std::vector<Row>& rows, bool json) {
    if (json) {
        os << "[\n";
        for (size_t i = 0; i < rows.size(); ++i) {
            os << "  {";
            for (size_t j = 0; j < rows[i].size(); ++j) {
                const Cell& c = rows[i][j];
                os << '"' << c.key << "\": ";
                if (c.quoted)
                    os << '"' << c.text << '"';
                else
                    os << c.text;
                if (j + 1 < rows[i].size()) os << ", ";
            }
            os << '}' << (i + 1 < rows.size() ? "," : "") << '\n';
        }
        os << "]\n";
        return;
    }
    if (rows.empty()) return;
    for (size_t j = 0; j < rows[0].size(); ++j)
        os << rows[0][j].key << (j + 1 < rows[0].size() ? ',' : '\n');
    for (const Row& r : rows)
        for (size_t j = 0; j < r.size(); ++j)
            os << r[j].text << (j + 1 < r.size() ? ',' : '\n');
}

struct CheckSink {
    std::vector<Row> rows;
    bool all_pass = true;
    void add(const std::string& name, cplx lhs, cplx rhs, double residual,
             double tolerance) {
        bool ok = residual <= tolerance;
        all_pass = all_pass && ok;
        rows.push_back({txt("name", name), num("lhs", lhs.real()),
                        num("rhs", rhs.real()), num("residual", residual),
                        num("tolerance", tolerance), boolean("pass", ok)});
    }
    void add_rel(const std::string& name, cplx lhs, cplx rhs, double tolerance) {
        double resid = std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
        add(name, lhs, rhs, resid, tolerance);
    }
};

// ---------------------------------------------------------------------------
// verify suites

void suite_special(CheckSink& sink) {
    // Lerch functional equation, the left side from the Euler-Maclaurin
    // route and the right side assembled from Hurwitz zeta values
    for (double alpha : {1.0 / 3.0, 1.0 / 4.0, 2.0 / 5.0}) {
        for (cplx s : {cplx(1.4, 6.0), cplx(2.1, -13.0), cplx(2.9, 18.0)}) {
            cplx lhs = lerch_xi_em(alpha, 1.0 - s);
            cplx g = std::exp(log_gamma(s) - s * std::log(2.0 * M_PI));
            cplx rhs = g * (std::exp(cplx(0.0, M_PI / 2.0) * s) * hurwitz_zeta(s, alpha) +
                            std::exp(cplx(0.0, -M_PI / 2.0) * s) * hurwitz_zeta(s, 1.0 - alpha));
            char nm[64];
            std::snprintf(nm, sizeof nm, "lerch_fe_a%.3f_im%g", alpha, s.imag());
            sink.add_rel(nm, lhs, rhs, 1e-8);
        }
    }
    // zeta functional equation
    for (cplx s : {cplx(0.3, 4.0), cplx(-1.5, 9.0)}) {
        cplx lhs = riemann_zeta(s);
        cplx rhs = std::pow(cplx(2.0, 0.0), s) * std::pow(cplx(M_PI, 0.0), s - 1.0) *
                   std::sin(M_PI * s / 2.0) * std::exp(log_gamma(1.0 - s)) *
                   riemann_zeta(1.0 - s);
        sink.add_rel("zeta_fe_re" + std::to_string(s.real()).substr(0, 4), lhs, rhs, 1e-9);
    }
    // gamma reflection
    cplx z(0.3, 2.5);
    cplx refl = std::exp(log_gamma(z) + log_gamma(1.0 - z)) * std::sin(M_PI * z);
    sink.add_rel("gamma_reflection", refl, cplx(M_PI, 0.0), 1e-10);
}

void suite_arith(CheckSink& sink) {
    auto rep = weil_audit(200, 20);
    sink.add("weil_audit_q200_m20", cplx(rep.max_ratio, 0.0), cplx(1.0, 0.0),
             std::max(0.0, rep.max_ratio - 1.0), 0.0);
    // tau_s multiplicativity on coprime arguments
    cplx v(0.0, 0.7);
    sink.add_rel("tau_multiplicative_6", tau_s(v, 6), tau_s(v, 2) * tau_s(v, 3), 1e-12);
    // gamma-coefficient Dirichlet series vs its closed form
    cplx s(3.0, 0.0), vv(0.0, 0.4);
    long M = 3, N = 2;
    kahan_sum<cplx> acc;
    for (long q = 1; q <= 100000; ++q)
        acc += gamma_coeff(vv, M, q * N) * std::exp(-s * std::log(double(q)));
    cplx sv = (s + vv) / 2.0;
    cplx closed = tau_s(sv, M) * std::exp(-sv * std::log(double(M))) *
                  riemann_zeta(s) / riemann_zeta(1.0 + s + vv) *
                  phi_s(vv, N) / phi_s(s + vv, N);
    sink.add_rel("gamma_coeff_series_M3_N2", acc.get(), closed, 1e-7);
}

void suite_g(CheckSink& sink) {
    for (long q : {2L, 3L, 5L}) {
        cplx v(0.0, 0.35);
        cplx sr(3.0, 0.4), sl(-1.7, 0.3);
        auto ser = g_series(sr, v, q, 5e-7);
        sink.add("g_series_vs_lerch_q" + std::to_string(q), ser.value,
                 g_via_lerch(sr, v, q),
                 std::abs(ser.value - g_via_lerch(sr, v, q)), 1e-6);
        auto con = g_continued(sl, v, q, 5e-7);
        sink.add("g_continued_vs_lerch_q" + std::to_string(q), con.value,
                 g_via_lerch(sl, v, q),
                 std::abs(con.value - g_via_lerch(sl, v, q)), 1e-6);
    }
    cplx s(2.8, 0.5), v(0.0, 0.25);
    sink.add("g_level_one_zeta_product", g_via_lerch(s, v, 1),
             riemann_zeta(s - v) * riemann_zeta(s + v),
             std::abs(g_via_lerch(s, v, 1) - riemann_zeta(s - v) * riemann_zeta(s + v)),
             1e-9);
}

void suite_convolution(CheckSink& sink, long k, long N, double u, double t,
                       long X, double tol) {
    long Xc = (X > 0) ? X : 2500000;
    long Xd = std::min(30000L, std::max(8000L, Xc / 100));
    MomentParams pd{k, N, t, cplx(u, 0.0), {}, Xd, 1e-7};
    auto dn = dn_direct(pd);
    double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    cplx lhs = riemann_zeta(1.0 + 2.0 * u) + 2.0 * M_PI * sgn * dn.value;
    MomentParams pc{k, N, t, cplx(u, 0.0), {}, Xc, 1e-7};
    auto rhs = convolution_rhs(pc);
    double resid = std::abs(lhs - rhs.total) /
                   std::max({1.0, std::abs(lhs), std::abs(rhs.total)});
    char nm[64];
    std::snprintf(nm, sizeof nm, "convolution_k%ld_N%ld_u%g_t%g", k, N, u, t);
    sink.add(nm, lhs, rhs.total, resid,
             std::max(tol, dn.tail_bound + rhs.tail_bound));
}

void suite_voronoi(CheckSink& sink) {
    const std::pair<double, double> bumps[3] = {{1.0, 3.0}, {5.0, 9.0}, {2.0, 7.0}};
    const std::pair<long, long> moduli[3] = {{1, 1}, {2, 1}, {3, 2}};
    for (auto [lo, hi] : bumps) {
        for (auto [q, M] : moduli) {
            for (cplx s : {cplx(0.0, 0.0), cplx(0.0, 0.2)}) {
                auto f = bump_test_function(lo, hi);
                auto rep = voronoi_check(f, q, M, s);
                char nm[64];
                std::snprintf(nm, sizeof nm, "voronoi_%g_%g_q%ld_im%g", lo, hi, q, s.imag());
                sink.add(nm, rep.lhs, rep.rhs_main + rep.rhs_dual, rep.residual, 1e-4);
            }
        }
    }
}

void suite_k1(CheckSink& sink) {
    auto sys = build_cutoffs(0.7, 3);
    std::mt19937_64 rng(20240811);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    double we = 0.0, wa = 0.0;
    for (int i = 0; i < 1000; ++i) {
        double x = std::exp2(U(rng));
        we = std::max(we, std::abs(sys.eta.v(x) + sys.eta.v(1.0 / x) - 1.0));
        wa = std::max(wa, std::abs(sys.alpha.v(x * sys.P) + sys.beta.v(x * sys.P) - 1.0));
    }
    sink.add("eta_partition_of_unity", cplx(1.0 - we, 0.0), cplx(1.0, 0.0), we, 1e-13);
    sink.add("alpha_beta_partition", cplx(1.0 - wa, 0.0), cplx(1.0, 0.0), wa, 1e-13);
    double wm = 0.0;
    for (cplx s : {cplx(0.5, 3.0), cplx(-0.3, 7.0), cplx(1.1, -4.0)})
        wm = std::max(wm, std::abs(mellin_eta(sys, s) + mellin_eta(sys, -s)));
    sink.add("mellin_eta_antisymmetry", cplx(wm, 0.0), cplx(0.0, 0.0), wm, 1e-10);
    cplx near = mellin_eta(sys, cplx(1e-3, 0.0));
    sink.add("mellin_eta_residue", near * 1e-3, cplx(1.0, 0.0),
             std::abs(near * 1e-3 - 1.0), 1e-3);
    auto sys11 = build_cutoffs(0.0, 11);
    auto r = k1_second_moment(11, 0.0, sys11);
    bool pos = r.total.real() > 0.0 && std::abs(r.total.imag()) < 1e-8;
    sink.add("k1_level11_positive_total", r.total, cplx(r.tail_bound, 0.0),
             pos ? 0.0 : 1.0, 0.5);
}

// ---------------------------------------------------------------------------
// tables

void cmd_moment(std::vector<Row>& rows, const std::vector<long>& ks,
                const std::vector<long>& Ns, const std::vector<double>& ts,
                long X, double tol) {
    for (long k : ks)
        for (long N : Ns)
            for (double t : ts) {
                Row row{num("k", double(k)), num("N", double(N)), num("t", t)};
                try {
                    MomentBreakdown r;
                    if (k == 1) {
                        auto sys = build_cutoffs(t, N);
                        r = k1_second_moment(N, t, sys);
                    } else {
                        r = second_moment(k, N, t, X, tol);
                    }
                    row.push_back(num("W", r.main_W));
                    row.push_back(r.has_U ? num("U_or_empty", r.main_U.real())
                                          : txt("U_or_empty", ""));
                    row.push_back(num("V1", r.tail_V1.real()));
                    row.push_back(num("total", r.total.real()));
                    row.push_back(num("tail_bound", r.tail_bound));
                    row.push_back(txt("error", ""));
                } catch (const NumericsError& e) {
                    row.push_back(txt("W", ""));
                    row.push_back(txt("U_or_empty", ""));
                    row.push_back(txt("V1", ""));
                    row.push_back(txt("total", ""));
                    row.push_back(txt("tail_bound", ""));
                    row.push_back(txt("error", e.what()));
                }
                rows.push_back(std::move(row));
            }
}

void cmd_integrated(std::vector<Row>& rows, const std::vector<long>& ks,
                    const std::vector<long>& Ns, const std::vector<double>& Ts,
                    long X, double tol, double bound_value) {
    for (long k : ks)
        for (long N : Ns)
            for (double T : Ts) {
                auto r = integrated_moment(k, N, T, X, tol);
                double ratio = std::abs(r.V2) * double(k) * double(N) / std::pow(T, 1.1);
                rows.push_back({num("k", double(k)), num("N", double(N)), num("T", T),
                                num("main_integral", r.main_integral), num("V2", r.V2),
                                num("bound_value", bound_value), num("ratio", ratio)});
            }
}

int do_recalibrate(const std::string& out_path) {
    std::string path = out_path.empty() ? default_calibration_path() : out_path;
    Calibration old;
    try {
        old = load_calibration(path);
    } catch (const CalibrationError&) {
        // no previous file: diff against nothing
    }
    auto fresh = run_calibration();
    for (const auto& [key, value] : fresh.values) {
        auto it = old.values.find(key);
        if (it == old.values.end())
            std::printf("%s (new) -> %.17g\n", key.c_str(), value);
        else if (it->second != value)
            std::printf("%s %.17g -> %.17g\n", key.c_str(), it->second, value);
        else
            std::printf("%s %.17g (unchanged)\n", key.c_str(), value);
    }
    write_calibration(path, fresh);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"second-moment verification toolkit"};
    app.require_subcommand(0, 1);

    std::string format = "csv", out_path;
    long X = 0;
    double tol = 1e-6;
    int threads = 1;
    bool recalibrate = false;
    app.add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", out_path, "write the table to PATH instead of stdout");
    app.add_option("--X", X, "series truncation cap (0 = module default)");
    auto* tol_opt =
        app.add_option("--tol", tol, "target tolerance")->check(CLI::PositiveNumber);
    app.add_option("--threads", threads,
                   "reserved; evaluation is sequential and deterministic")
        ->check(CLI::PositiveNumber);
    app.add_flag("--recalibrate", recalibrate,
                 "refit the frozen audit constants and print the diff");

    auto* verify = app.add_subcommand("verify", "run an identity verification suite");
    verify->fallthrough();
    std::string suite;
    long vk = 3, vN = 2;
    double vu = 1.0, vt = 0.5;
    verify->add_option("suite", suite, "one of special, arith, g, convolution, voronoi, k1")
        ->required()
        ->check(CLI::IsMember({"special", "arith", "g", "convolution", "voronoi", "k1"}));
    verify->add_option("--k", vk, "half weight for the convolution suite");
    verify->add_option("--N", vN, "level for the convolution suite");
    verify->add_option("--u", vu, "real shift for the convolution suite");
    verify->add_option("--t", vt, "spectral point for the convolution suite");

    auto* moment = app.add_subcommand("moment", "pointwise second-moment table");
    moment->fallthrough();
    std::vector<long> mk{2}, mN{1};
    std::vector<double> mt{0.0};
    std::vector<double> tgrid;
    moment->add_option("--k", mk, "half weights (k = 1 uses the weight-2 path)");
    moment->add_option("--N", mN, "levels");
    auto* topt = moment->add_option("--t", mt, "spectral points");
    moment->add_option("--t-grid", tgrid, "LO STEP COUNT arithmetic t grid")
        ->expected(3)
        ->excludes(topt);

    auto* integrated = app.add_subcommand("integrated", "integrated-moment table");
    integrated->fallthrough();
    std::vector<long> ik{2}, iN{5};
    std::vector<double> iT{5.0};
    integrated->add_option("--k", ik, "half weights (k >= 2)");
    integrated->add_option("--N", iN, "levels");
    integrated->add_option("--T", iT, "integration endpoints (T > 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (recalibrate) return do_recalibrate(out_path);
        if (app.get_subcommands().empty()) {
            std::cerr << app.help();
            return 2;
        }

        std::ofstream ofs;
        std::ostream* os = &std::cout;
        if (!out_path.empty()) {
            ofs.open(out_path);
            if (!ofs) {
                std::cerr << "cannot open " << out_path << "\n";
                return 2;
            }
            os = &ofs;
        }
        bool json = (format == "json");

        if (verify->parsed()) {
            CheckSink sink;
            if (suite == "special") suite_special(sink);
            else if (suite == "arith") suite_arith(sink);
            else if (suite == "g") suite_g(sink);
            else if (suite == "convolution") suite_convolution(sink, vk, vN, vu, vt, X, tol);
            else if (suite == "voronoi") suite_voronoi(sink);
            else suite_k1(sink);
            emit(*os, sink.rows, json);
            return sink.all_pass ? 0 : 1;
        }
        if (moment->parsed()) {
            std::vector<double> ts = mt;
            if (tgrid.size() == 3) {
                ts.clear();
                for (long i = 0; i < long(tgrid[2]); ++i)
                    ts.push_back(tgrid[0] + tgrid[1] * double(i));
            }
            std::vector<Row> rows;
            cmd_moment(rows, mk, mN, ts, X, tol);
            emit(*os, rows, json);
            return 0;
        }
        if (integrated->parsed()) {
            for (long k : ik)
                if (k < 2) {
                    std::cerr << "integrated: needs k >= 2\n";
                    return 2;
                }
            for (double T : iT)
                if (!(T > 1.0)) {
                    std::cerr << "integrated: needs T > 1\n";
                    return 2;
                }
            double cv2 = load_calibration().at("c_v2");
            std::vector<Row> rows;
            cmd_integrated(rows, ik, iN, iT, X, tol_opt->count() ? tol : 1e-4, cv2);
            emit(*os, rows, json);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
