#include "lsm/arith.hpp"
#include "lsm/moments.hpp"
#include "lsm/regular.hpp"
#include "lsm/special.hpp"
#include "testkit.hpp"

#include <cmath>
#include <random>

using namespace lsm;

static cplx powc(double b, cplx e) { return std::exp(e * std::log(b)); }

static void test_cutoff_partitions() {
    auto sys = build_cutoffs(0.7, 3);
    CHECK(std::abs(sys.P - std::pow(1.7, 6.0) * 27.0) < 1e-9);
    // plateaus
    CHECK(sys.eta.v(0.3) == 1.0);
    CHECK(sys.eta.v(3.0) == 0.0);
    CHECK(sys.alpha.v(sys.P / 2.0) == 0.0);
    CHECK(sys.alpha.v(4.0 * sys.P) == 1.0);
    // exact partition identities at random points
    std::mt19937 rng(20240817);
    std::uniform_real_distribution<double> in(0.05, 20.0);
    double w1 = 0.0, w2 = 0.0;
    for (int i = 0; i < 1000; ++i) {
        double x = in(rng);
        w1 = std::max(w1, std::abs(sys.eta.v(x) + sys.eta.v(1.0 / x) - 1.0));
        double y = sys.P * x / 5.0;
        w2 = std::max(w2, std::abs(sys.alpha.v(y) + sys.beta.v(y) - 1.0));
    }
    CHECK(w1 < 1e-13);
    CHECK(w2 < 1e-13);
    // ranges stay in [0,1]
    for (double x : {0.4, 0.6, 1.0, 1.4, 1.9, 2.5}) {
        CHECK(sys.eta.v(x) >= 0.0 && sys.eta.v(x) <= 1.0);
    }
    // derivative evaluators against central differences
    for (double x : {0.7, 1.0, 1.6}) {
        double h = 1e-5;
        double fd1 = (sys.eta.v(x + h) - sys.eta.v(x - h)) / (2.0 * h);
        CHECK_SMALL(fd1 - sys.eta.d1(x), 1e-7);
        double fd2 = (sys.eta.d1(x + h) - sys.eta.d1(x - h)) / (2.0 * h);
        CHECK_SMALL(fd2 - sys.eta.d2(x), 1e-5);
    }
    for (double r : {1.1, 1.5, 1.9}) {
        double x = sys.P * r, h = sys.P * 1e-6;
        double fd1 = (sys.alpha.v(x + h) - sys.alpha.v(x - h)) / (2.0 * h);
        CHECK_SMALL(fd1 - sys.alpha.d1(x), 1e-7);
        double fd2 = (sys.alpha.d1(x + h) - sys.alpha.d1(x - h)) / (2.0 * h);
        CHECK_SMALL(fd2 - sys.alpha.d2(x), 1e-5);
    }
    CHECK_THROWS(build_cutoffs(0.0, 0), UnsupportedParameterRange);
}

static void test_mellin_eta() {
    auto sys = build_cutoffs(0.0, 1);
    // antisymmetry
    for (cplx s : {cplx(0.7, 2.0), cplx(0.5, -7.0), cplx(-1.3, 4.0)}) {
        CHECK_SMALL(mellin_eta(sys, s) + mellin_eta(sys, -s), 1e-10);
    }
    // simple pole at 0 with residue 1
    for (double eps : {1e-3, 1e-4}) {
        CHECK_SMALL(cplx(eps, 0.0) * mellin_eta(sys, cplx(eps, 0.0)) - 1.0, 1e-3);
        CHECK_SMALL(cplx(0.0, eps) * mellin_eta(sys, cplx(0.0, eps)) - 1.0, 1e-3);
    }
    // quadratic decay along Re s = 1/2
    double c5 = std::abs(mellin_eta(sys, cplx(0.5, 5.0))) * 36.0;
    for (double tau : {10.0, 20.0, 40.0}) {
        double v = std::abs(mellin_eta(sys, cplx(0.5, tau))) * (1.0 + tau) * (1.0 + tau);
        CHECK(v < 4.0 * c5 + 1e-12);
    }
    CHECK_THROWS(mellin_eta(sys, cplx(0.0, 0.0)), NearPole);
    CHECK_THROWS(mellin_eta(sys, cplx(-1.0, 0.0)), NearPole);
}

static void test_bump_function() {
    auto f = bump_test_function(2.0, 5.0);
    CHECK(f.f(2.0) == 0.0 && f.f(5.0) == 0.0);
    CHECK(f.f(3.5) == 1.0); // normalized peak
    for (double x : {2.7, 3.5, 4.4}) {
        double h = 1e-6;
        CHECK_SMALL((f.f(x + h) - f.f(x - h)) / (2.0 * h) - f.f1(x), 1e-5);
        CHECK_SMALL((f.f1(x + h) - f.f1(x - h)) / (2.0 * h) - f.f2(x), 1e-4);
    }
    // zero function transforms to zero
    VoronoiTestFunction z;
    z.x_lo = 1.0;
    z.x_hi = 2.0;
    z.f = z.f1 = z.f2 = [](double) { return 0.0; };
    auto r = g_transform(+1, cplx(0.0, 0.2), 3.0, z);
    CHECK(r.value == cplx(0.0, 0.0));
}

static void test_z_functions() {
    auto sys = build_cutoffs(0.0, 3);
    // integrated-by-parts form against the direct quadrature where it converges
    {
        cplx u(0.0, 0.3), v(0.0, 0.2), lam(2.0, 0.0);
        auto zp = z_functions(u, v, lam, sys, 1e-10);
        CHECK_SMALL(zp.Z1 - z1_direct(u, v, lam, sys, 1e-12), 1e-9);
    }
    {
        cplx u(0.1, 0.0), v(0.0, 0.0), lam(2.5, 0.0);
        auto zp = z_functions(u, v, lam, sys, 1e-10);
        CHECK_SMALL(zp.Z1 - z1_direct(u, v, lam, sys, 1e-12), 1e-9);
    }
    // doubling P rescales the Z1 integral by 2^{1+u+v-lambda}
    {
        cplx u(0.0, 0.25), v(0.0, -0.15), lam(1.0, 0.0);
        auto s8 = build_cutoffs(0.0, 2, 6.0, 3.0);  // P = 8
        auto s16 = build_cutoffs(0.0, 2, 6.0, 4.0); // P = 16
        auto a = z_functions(u, v, lam, s8, 1e-10);
        auto b = z_functions(u, v, lam, s16, 1e-10);
        CHECK_SMALL(b.Z1 - powc(2.0, 1.0 + u + v - lam) * a.Z1, 1e-9);
    }
    CHECK_THROWS(z_functions(cplx(0.0, 0.3), cplx(0.0, -0.3), cplx(1.0, 0.0), sys),
                 PoleAtLambdaEqualOnePlusUV);
    CHECK_THROWS(z1_direct(cplx(0.0, 0.3), cplx(0.0, 0.2), cplx(1.0, 0.0), sys),
                 OutsideConvergenceRegion);
    // Z2 at u = 0 is finite and smooth near v = 0 (the 1/v of the block sits
    // in the zeta prefactor outside Z2)
    {
        cplx a = z_functions(cplx(0.0, 0.0), cplx(0.0, 0.20), cplx(1.0, 0.0), sys).Z2;
        cplx b = z_functions(cplx(0.0, 0.0), cplx(0.0, 0.10), cplx(1.0, 0.0), sys).Z2;
        cplx c = z_functions(cplx(0.0, 0.0), cplx(0.0, 0.05), cplx(1.0, 0.0), sys).Z2;
        CHECK(std::isfinite(std::abs(a)) && std::isfinite(std::abs(c)));
        CHECK(std::abs(c - b) < std::abs(b - a) + 1e-10);
    }
}

static void test_h_and_t_script() {
    // h(0,v) against the tangent form through tanh on the imaginary axis
    cplx v(0.0, 0.4);
    cplx want = (M_PI / 2.0) * 0.4 * std::tanh(0.2 * M_PI);
    CHECK_SMALL(h_zero_v(v) - want, 1e-12);
    // combined v -> 0 limit of the script-T pair at N = 6, k = 1 with one
    // Richardson step in the (even) limit variable
    const long N = 6;
    auto sys = build_cutoffs(0.0, N);
    cplx ph0 = phi_s(cplx(0.0, 0.0), N), ph1 = phi_s(cplx(1.0, 0.0), N);
    cplx target = -M_PI * M_PI / riemann_zeta(cplx(2.0, 0.0)) * ph0 /
                  (double(N) * ph1) *
                  (std::log(double(N)) + 2.0 * phi_s_deriv(cplx(0.0, 0.0), N) / ph0);
    auto at = [&](double tv) {
        cplx vv(0.0, tv);
        return 4.0 * h_zero_v(vv) *
               (t_script(vv, 1, N, sys, 1e-11) + t_script(-vv, 1, N, sys, 1e-11));
    };
    cplx lim = (4.0 * at(0.005) - at(0.01)) / 3.0;
    CHECK_SMALL(lim - target, 1e-5);
    CHECK_THROWS(t_script(cplx(0.0, 0.0), 1, N, sys), PoleAtUVSum);
}

static void test_series_blocks() {
    // s_beta: empty when the transition ends before the first term
    {
        auto tiny = build_cutoffs(0.0, 50, 6.0, 0.1); // P ~ 1.5, 2P < N - 1
        auto r = s_beta(cplx(0.0, 0.0), cplx(0.0, 0.3), 1, 50, tiny);
        CHECK(r.terms_used == 0);
        CHECK(r.value == cplx(0.0, 0.0));
    }
    // N = 1 minus branch starts at d = 2 (m = 1 is its only survivor at P = 1)
    {
        auto s1 = build_cutoffs(0.0, 1);
        auto r = s_beta(cplx(0.0, 0.0), cplx(0.0, 0.0), 1, 1, s1);
        CHECK(r.terms_used == 1);
        CHECK(std::isfinite(std::abs(r.value)));
    }
    // c_correction: truncation below the support is an empty (zero) sum
    {
        auto big = build_cutoffs(5.0, 13);
        auto r = c_correction(+1, cplx(0.0, 0.0), cplx(0.0, 0.4), 1, 13, big, 1000);
        CHECK(r.value == cplx(0.0, 0.0) && r.terms_used == 0);
    }
    // the hypergeometric bracket is O(1/m) along the series
    {
        auto sys = build_cutoffs(0.0, 3);
        cplx u(0.0, 0.2), v(0.0, 0.5), lam(1.0, 0.0);
        cplx pg = std::exp(h_lambda_log_prefactor(lam, u, v));
        double worst = 0.0;
        for (long m : {29L, 101L, 1009L, 20011L}) {
            cplx br = h_lambda(lam, u, v, 1.0 / double(m)) - pg;
            worst = std::max(worst, std::abs(br) * double(m));
        }
        CHECK(worst < 5.0);
    }
    CHECK_THROWS(s_beta(cplx(0.0, 0.0), cplx(0.0, 0.0), 0, 2, build_cutoffs(0.0, 2)),
                 WeightTooSmall);
}

static void test_voronoi() {
    // classical q = 1 case and a shifted higher-modulus case
    {
        auto f = bump_test_function(1.0, 3.0);
        auto rep = voronoi_check(f, 1, 1, cplx(0.0, 0.0));
        CHECK(rep.residual < 1e-4);
        CHECK_CLOSE(rep.lhs, cplx(2.0, 0.0), 1e-12); // tau(2) = 2 is the only point
    }
    {
        auto f = bump_test_function(5.0, 9.0);
        auto rep = voronoi_check(f, 2, 1, cplx(0.0, 0.2));
        CHECK(rep.residual < 1e-4);
    }
    // rhs is invariant under s -> -s (lhs manifestly is)
    {
        auto f = bump_test_function(2.0, 7.0);
        auto a = voronoi_check(f, 3, 2, cplx(0.0, 0.2));
        auto b = voronoi_check(f, 3, 2, cplx(0.0, -0.2));
        CHECK_SMALL((a.rhs_main + a.rhs_dual) - (b.rhs_main + b.rhs_dual), 1e-6);
        CHECK_SMALL(a.lhs - b.lhs, 1e-14);
    }
    CHECK_THROWS(voronoi_check(bump_test_function(1.0, 40.0), 3, 1, cplx(0.0, 0.0), 3),
                 BudgetExhausted);
}

// k = 2 cross-module identity: the beta block plus the reassembled alpha
// blocks must reproduce the two hyperbola sums of the convolution right side
static void test_alpha_beta_vs_hyperbola() {
    const long k = 2, N = 3;
    const double t = 0.4;
    const cplx u(0.3, 0.0), v(0.0, t), lam(2.0, 0.0);
    auto sys = build_cutoffs(t, N);

    auto sb = s_beta(u, v, k, N, sys);
    auto cpl = c_correction(+1, u, v, k, N, sys, 0, 2e-4);
    auto cmi = c_correction(-1, u, v, k, N, sys, 0, 2e-4);
    auto apl = a_direct(+1, u, v, lam, N, sys, 0, 5e-4);
    auto ami = a_direct(-1, u, v, lam, N, sys, 0, 5e-4);

    cplx pref = 2.0 * powc(2.0 * M_PI, 2.0 * u - 1.0) * powc(double(N), -2.0 * u);
    cplx G2 = std::exp(log_gamma(lam - u + v) + log_gamma(lam - u - v) -
                       log_gamma(2.0 * lam));
    cplx cplus = std::cos(M_PI * (lam - u)), cminus = std::cos(M_PI * v);
    cplx salpha = pref * (cplus * cpl.value + cminus * cmi.value) +
                  pref * G2 * (cplus * apl.value + cminus * ami.value);
    cplx lhs = 2.0 * M_PI * (salpha + sb.value);

    MomentParams p;
    p.k = k;
    p.N = N;
    p.t = t;
    p.u = u;
    p.X = 400000;
    auto cb = convolution_rhs(p);
    CHECK_SMALL(lhs - (cb.plus_block + cb.minus_block), 1e-2);
}

// k = 2 decomposition: the direct alpha series equals the continued block
// combination plus the truncated dual sums, within reported slack
static void test_a_decomposition() {
    const long k = 2, N = 2;
    const double t = 0.4;
    const cplx u(0.0, 0.1), v(0.0, t), lam(2.0, 0.0);
    auto sys = build_cutoffs(t, N);
    auto apl = a_direct(+1, u, v, lam, N, sys, 0, 5e-4);
    auto ami = a_direct(-1, u, v, lam, N, sys, 0, 5e-4);
    cplx A = a_script(u, v, lam, sys, 1e-9);
    auto rp = r_dual_pair(u, v, k, N, sys);
    auto rm = r_dual_pair(-u, v, k, N, sys);
    cplx n2u = powc(double(N), 2.0 * u);
    cplx Rp = rp.plus.value + n2u * rm.plus.value;
    cplx Rm = rp.minus.value + n2u * rm.minus.value;
    double slack = 0.02 + rp.plus.tail_bound + rm.plus.tail_bound +
                   apl.tail_bound + ami.tail_bound;
    CHECK_SMALL(apl.value - (A + Rp), slack);
    CHECK_SMALL(ami.value - (A + Rm), slack);
    CHECK_THROWS(r_dual_pair(u, cplx(0.3, 0.0), k, N, sys), OffCriticalV);
    CHECK_THROWS(a_script(cplx(0.0, 0.0), v, lam, sys), NearPole);
    CHECK_THROWS(a_script(u, cplx(0.0, 0.0), lam, sys), NearPole);
}

static void test_k1_level_one_cancellation() {
    auto sys = build_cutoffs(0.0, 1);
    auto r = k1_second_moment(1, 0.0, sys);
    CHECK(r.has_U);
    // the two main terms cancel at level 1, weight 2
    CHECK_SMALL(cplx(r.main_W, 0.0) - r.main_U, 1e-10);
    CHECK_SMALL(cplx(0.0, r.total.imag()), 1e-8);
    CHECK(std::isfinite(r.tail_bound));
}

int main() {
    test_cutoff_partitions();
    test_mellin_eta();
    test_bump_function();
    test_z_functions();
    test_h_and_t_script();
    test_series_blocks();
    test_voronoi();
    test_alpha_beta_vs_hyperbola();
    test_a_decomposition();
    test_k1_level_one_cancellation();
    return tk_report("regular");
}
