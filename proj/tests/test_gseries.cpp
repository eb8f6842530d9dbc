#include "lsm/gseries.hpp"
#include "lsm/special.hpp"
#include "testkit.hpp"

using namespace lsm;

static void test_series() {
    // q = 1 closed form
    auto r = g_series(cplx(3.0, 0.0), cplx(0.5, 0.0), 1, 1e-9);
    CHECK_CLOSE(r.value, riemann_zeta(cplx(2.5, 0.0)) * riemann_zeta(cplx(3.5, 0.0)), 1e-8);

    // v -> -v symmetry (m <-> n in the double sum)
    auto a = g_series(cplx(2.5, 0.0), cplx(0.0, 0.3), 3, 1e-8);
    auto b = g_series(cplx(2.5, 0.0), cplx(0.0, -0.3), 3, 1e-8);
    CHECK_SMALL(a.value - b.value, 1e-9 + a.tail_bound + b.tail_bound);

    // q = 2, s = 3, v = 0: S_2(m,n;1) = (-1)^{m+n}, so the double sum is the
    // square of the alternating zeta partial sums
    kahan_sum<double> alt;
    for (long m = 1; m <= 10000; ++m)
        alt += ((m % 2 == 0) ? 1.0 : -1.0) * std::pow(double(m), -3.0);
    double oracle = alt.get() * alt.get();
    auto c = g_series(cplx(3.0, 0.0), cplx(0.0, 0.0), 2, 1e-10);
    CHECK_CLOSE(c.value, cplx(oracle, 0.0), 1e-9);

    CHECK_THROWS(g_series(cplx(1.2, 0.0), cplx(0.5, 0.0), 2, 1e-8),
                 OutsideConvergenceStrip);
}

static void test_lerch_rep() {
    // overlap with the defining series
    auto s1 = g_series(cplx(2.5, 0.0), cplx(0.0, 0.3), 3, 1e-8);
    cplx l1 = g_via_lerch(cplx(2.5, 0.0), cplx(0.0, 0.3), 3);
    CHECK_SMALL(s1.value - l1, 1e-7);

    // finiteness at an interior point
    cplx l2 = g_via_lerch(cplx(0.5, 3.0), cplx(0.0, 0.25), 5);
    CHECK(std::isfinite(l2.real()) && std::isfinite(l2.imag()));

    // q = 1 closed form
    CHECK_CLOSE(g_via_lerch(cplx(3.0, 0.0), cplx(0.5, 0.0), 1),
                riemann_zeta(cplx(2.5, 0.0)) * riemann_zeta(cplx(3.5, 0.0)), 1e-13);
}

static void test_continued() {
    // overlap with the Lerch representation left of the critical strip
    for (long q : {2L, 3L, 5L}) {
        cplx s(-1.2, 0.0), v(0.0, 0.0);
        auto c = g_continued(s, v, q, 1e-6);
        cplx l = g_via_lerch(s, v, q);
        CHECK_SMALL(c.value - l, 1e-6 + c.tail_bound);
    }
    // v <-> -v symmetry
    auto p = g_continued(cplx(-2.0, 0.0), cplx(0.0, 0.4), 3, 1e-8);
    auto m = g_continued(cplx(-2.0, 0.0), cplx(0.0, -0.4), 3, 1e-8);
    CHECK_SMALL(p.value - m.value, 1e-8 + p.tail_bound + m.tail_bound);

    CHECK_THROWS(g_continued(cplx(0.5, 0.0), cplx(0.0, 0.0), 3, 1e-8),
                 OutsideValidityHalfPlane);
    CHECK_THROWS(g_continued(cplx(-2.0, 0.0), cplx(0.0, 0.0), 1, 1e-8),
                 OutsideValidityHalfPlane);
}

static void test_pairwise_consistency() {
    // right overlap: series vs lerch; left overlap: continued vs lerch
    for (long q : {2L, 3L, 5L}) {
        for (cplx v : {cplx(0.0, 0.0), cplx(0.0, 0.35), cplx(0.2, 0.1)}) {
            cplx sr(3.0, 0.4);
            auto ser = g_series(sr, v, q, 5e-7);
            CHECK_SMALL(ser.value - g_via_lerch(sr, v, q), 1e-6);

            cplx sl(-1.7, 0.3);
            auto con = g_continued(sl, v, q, 5e-7);
            CHECK_SMALL(con.value - g_via_lerch(sl, v, q), 1e-6);
        }
    }
}

static void test_dispatch() {
    GQuery qy{cplx(2.6, 0.0), cplx(0.0, 0.3), 3, GRep::series};
    cplx a = g_eval(qy, 1e-8);
    qy.representation = GRep::lerch;
    cplx b = g_eval(qy);
    CHECK_SMALL(a - b, 1e-6);
    GQuery qc{cplx(-2.0, 0.0), cplx(0.0, 0.0), 1, GRep::continued};
    CHECK_CLOSE(g_eval(qc), riemann_zeta(cplx(-2.0, 0.0)) * riemann_zeta(cplx(-2.0, 0.0)), 1e-12);
}

int main() {
    test_series();
    test_lerch_rep();
    test_continued();
    test_pairwise_consistency();
    test_dispatch();
    return tk_report("gseries");
}
