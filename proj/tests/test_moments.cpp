#include "lsm/arith.hpp"
#include "lsm/moments.hpp"
#include "lsm/special.hpp"
#include "testkit.hpp"

#include <cmath>

using namespace lsm;

static cplx powc(double b, cplx e) { return std::exp(e * std::log(b)); }

static void test_w_main() {
    CHECK_CLOSE(cplx(w_main(1, 1, 0.0), 0.0), cplx(-2.0 * std::log(2.0 * M_PI), 0.0), 1e-14);
    CHECK_CLOSE(cplx(w_main(2, 1, 0.0), 0.0), cplx(-2.0 * std::log(2.0 * M_PI) + 2.0, 0.0), 1e-14);
    CHECK_SMALL(cplx(w_main(2, 5, 3.7) - w_main(2, 5, -3.7), 0.0), 1e-12);
}

static void test_u_main() {
    CHECK_SMALL(cplx(0.0, u_main(3, 1.3).imag()), 1e-10);
    CHECK_SMALL(u_main(2, 2.5) - u_main(2, -2.5), 1e-12);
    // the t -> 0 limit closes the gap to W at level 1
    CHECK_SMALL(u_main_limit0(2) - cplx(w_main(2, 1, 0.0), 0.0), 1e-7);
    CHECK_SMALL(u_main_limit0(5) - cplx(w_main(5, 1, 0.0), 0.0), 1e-7);
    CHECK_THROWS(u_main(2, 0.0), RemovableSingularity);
}

static void test_d_term() {
    // 2 pi d(0, it, k) = U at (k, t) = (2, 1.1)
    CHECK_CLOSE(2.0 * M_PI * d_term(0.0, cplx(0.0, 1.1), 2.0), u_main(2, 1.1), 1e-12);
    CHECK_CLOSE(d_term(0.2, cplx(0.0, 0.5), 2.0), d_term(0.2, cplx(0.0, -0.5), 2.0), 1e-13);
    CHECK_SMALL(cplx(0.0, d_term(0.0, cplx(0.0, 0.6), 3.0).imag()), 1e-13);
    CHECK_THROWS(d_term(0.2, cplx(0.0, 0.0), 2.0), PoleAtVZero);
}

// the two identities the table-driven Kloosterman evaluator relies on,
// checked against the direct residue-sum evaluator
static void test_kloosterman_identities() {
    // S(m,n;q) = sum over e | (m,n,q) of e S(mn/e^2, 1; q/e)
    for (long q : {4L, 6L, 9L, 12L, 18L}) {
        for (long m = 1; m <= 6; ++m) {
            for (long n = 1; n <= 6; ++n) {
                cplx lhs = kloosterman({q, m, n, 1});
                cplx rhs = 0.0;
                for (long e = 1; e <= q; ++e) {
                    if (m % e || n % e || q % e) continue;
                    rhs += double(e) * kloosterman({q / e, (m * n) / (e * e), 1, 1});
                }
                CHECK_SMALL(lhs - rhs, 1e-9);
            }
        }
    }
    // twisted multiplicativity: S(g,1;q1 q2) = S(g c2,1;q1) S(g c1,1;q2)
    // with c2 = q2^{-2} mod q1, c1 = q1^{-2} mod q2
    auto inv = [](long a, long m) {
        long t = 0, nt = 1, r = m, nr = a % m;
        while (nr) {
            long qq = r / nr;
            std::swap(t -= qq * nt, nt);
            std::swap(r -= qq * nr, nr);
        }
        return t < 0 ? t + m : t;
    };
    for (auto [q1, q2] : {std::pair<long, long>{4, 9}, {8, 3}, {5, 7}, {9, 16}}) {
        for (long g = 0; g < q1 * q2; g += 5) {
            long i2 = inv(q2 % q1, q1), i1 = inv(q1 % q2, q2);
            cplx lhs = kloosterman({q1 * q2, g % (q1 * q2), 1, 1});
            cplx rhs = kloosterman({q1, (g % q1) * ((i2 * i2) % q1) % q1, 1, 1}) *
                       kloosterman({q2, (g % q2) * ((i1 * i1) % q2) % q2, 1, 1});
            CHECK_SMALL(lhs - rhs, 1e-8);
        }
    }
}

// the sieved hyperbola sums against a brute-force enumeration of
// m1 m2 - n1 n2 = +-1 with N | n1
static void test_hyperbola_blocks_brute() {
    const long k = 3, N = 2, X = 300;
    const cplx u(0.8, 0.0), v(0.0, 0.3);
    MomentParams p;
    p.k = k;
    p.N = N;
    p.t = 0.3;
    p.u = u;
    p.X = X;
    auto cb = convolution_rhs(p);

    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    cplx twist = 2.0 * powc(2.0 * M_PI, 2.0 * u);
    for (int sg : {1, -1}) {
        kahan_sum<cplx> brute;
        for (const auto& s : enumerate_hyperbola(N, sg, X)) {
            double m = double(s.m1) * double(s.m2);
            cplx w = powc(double(s.m2) / double(s.m1), v) * powc(m, u) *
                     powc(double(s.n1), -2.0 * u) * powc(m, -double(k)) *
                     h_lambda(double(k), u, v, double(sg) / m);
            brute += w;
        }
        cplx expect = (sg == 1) ? twist * std::cos(M_PI * u) * brute.get()
                                : twist * sign * std::cos(M_PI * v) * brute.get();
        CHECK_SMALL((sg == 1 ? cb.plus_block : cb.minus_block) - expect, 1e-10);
    }
}

static void test_convolution_blocks() {
    MomentParams p;
    p.k = 3;
    p.u = 1.0;
    p.t = 0.0;
    p.X = 2000;
    p.N = 1;
    auto n1 = convolution_rhs(p);
    CHECK(std::abs(n1.delta_block) > 1e-3);
    p.N = 3;
    auto n3 = convolution_rhs(p);
    CHECK(n3.delta_block == cplx(0.0, 0.0));

    MomentParams bad = p;
    bad.k = 1;
    CHECK_THROWS(convolution_rhs(bad), WeightTooSmall);
    bad.k = 3;
    bad.u = 2.5;
    CHECK_THROWS(convolution_rhs(bad), OutsideConvergenceRegion);
    bad.u = 0.0;
    CHECK_THROWS(convolution_rhs(bad), RemovableSingularity);
}

static void test_dn_errors_and_consistency() {
    MomentParams p;
    p.k = 3;
    p.u = 0.5;
    CHECK_THROWS(dn_direct(p), OutsideConvergenceRegion);
    p.u = 1.0;
    p.lambda = cplx(3.0, 0.5);
    CHECK_THROWS(dn_direct(p), UnsupportedParameterRange);

    // doubling X moves the value by less than the combined tail bounds
    MomentParams q;
    q.k = 3;
    q.N = 2;
    q.u = 1.0;
    q.t = 0.0;
    q.X = 4000;
    auto r1 = dn_direct(q);
    q.X = 8000;
    auto r2 = dn_direct(q);
    CHECK_SMALL(r1.value - r2.value, r1.tail_bound + r2.tail_bound);
}

// central identity: convolution total = zeta(1+2u) + 2 pi (-1)^k D
static void test_central_identity() {
    {
        MomentParams p;
        p.k = 3;
        p.N = 2;
        p.u = 1.0;
        p.t = 0.0;
        p.X = 1000000;
        auto cb = convolution_rhs(p);
        MomentParams q = p;
        q.X = 20000;
        auto dn = dn_direct(q);
        double sign = -1.0; // k = 3
        cplx lhs = cb.total;
        cplx rhs = riemann_zeta(cplx(3.0, 0.0)) + 2.0 * M_PI * sign * dn.value;
        CHECK_SMALL(lhs - rhs, 1e-5);
    }
    {
        // large-order point: lambda = k = 8, level 1
        MomentParams p;
        p.k = 8;
        p.N = 1;
        p.u = 1.0;
        p.t = 0.0;
        p.X = 3000;
        auto cb = convolution_rhs(p);
        MomentParams q = p;
        q.X = 20000;
        auto dn = dn_direct(q);
        cplx rhs = riemann_zeta(cplx(3.0, 0.0)) + 2.0 * M_PI * dn.value;
        CHECK_SMALL(cb.total - rhs, 1e-5);
    }
}

// the closed-form pair zeta(1+2u) + (4 pi^2/N)^{2u} (Gamma ratio) zeta(1-2u)
// approaches W linearly in u
static void test_small_shift_limit() {
    const long k = 2, N = 3;
    const double t = 0.8;
    const cplx v(0.0, t);
    double prev = 1e9;
    for (double uu : {1e-2, 1e-3, 1e-4}) {
        cplx u(uu, 0.0);
        cplx pairv = riemann_zeta(1.0 + 2.0 * u) +
                     powc(4.0 * M_PI * M_PI / double(N), 2.0 * u) *
                         std::exp(log_gamma(double(k) - u + v) + log_gamma(double(k) - u - v) -
                                  log_gamma(double(k) + u + v) - log_gamma(double(k) + u - v)) *
                         riemann_zeta(1.0 - 2.0 * u);
        double err = std::abs(pairv - cplx(w_main(k, N, t), 0.0));
        CHECK(err < prev);
        CHECK(err < 60.0 * uu); // linear in u with a moderate slope
        prev = err;
    }
}

static void test_second_moment() {
    for (auto [k, N, t] : {std::tuple<long, long, double>{2, 1, 0.0},
                           {2, 3, 1.5},
                           {3, 2, 0.7},
                           {5, 1, 0.0}}) {
        auto r = second_moment(k, N, t, 4000);
        CHECK_SMALL(cplx(0.0, r.total.imag()), 1e-8);
        auto rm = second_moment(k, N, -t, 4000);
        CHECK_SMALL(r.total - rm.total, 1e-8);
        CHECK((N == 1) == r.has_U);
    }
    // remainder size sanity at (2, 7, 0): |V1| k N / (1 + |t|) moderate
    auto r = second_moment(2, 7, 0.0, 4000);
    CHECK(std::abs(r.tail_V1) * 2.0 * 7.0 / 1.0 < 5.0);
    CHECK_THROWS(second_moment(1, 1, 0.0), WeightTooSmall);
}

static void test_integrated() {
    auto r = integrated_moment(2, 1, 2.0, 1500, 1e-5);
    CHECK(std::isfinite(r.V2));
    CHECK(std::abs(r.lhs_integral - r.main_integral - r.V2) < 1e-12);
    auto s = integrated_moment(2, 5, 1.01, 1500, 1e-5);
    CHECK(std::abs(s.V2) < 0.5);
    CHECK_THROWS(integrated_moment(1, 1, 2.0), WeightTooSmall);
}

int main() {
    test_w_main();
    test_u_main();
    test_d_term();
    test_kloosterman_identities();
    test_hyperbola_blocks_brute();
    test_convolution_blocks();
    test_dn_errors_and_consistency();
    test_central_identity();
    test_small_shift_limit();
    test_second_moment();
    test_integrated();
    return tk_report("moments");
}
