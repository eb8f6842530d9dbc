#include "lsm/numerics.hpp"
#include "testkit.hpp"

using namespace lsm;

static void test_kahan() {
    // classic compensation case: naive double summation loses the small parts
    kahan_sum<double> s;
    s += 1.0e16;
    for (int i = 0; i < 10000; ++i) s += 1.0;
    s += -1.0e16;
    CHECK(s.get() == 10000.0);

    kahan_sum<cplx> c;
    for (int i = 0; i < 1000; ++i) c += cplx(0.1, -0.1);
    CHECK_CLOSE(c.get(), cplx(100.0, -100.0), 1e-15);
}

static void test_sum_with_tail() {
    // geometric series
    auto r = sum_with_tail([](long n) { return cplx(std::pow(0.5, n), 0.0); },
                           {TailKind::exponential, 0.5}, 1e-12);
    CHECK_CLOSE(r.value, cplx(1.0, 0.0), 1e-12);
    CHECK(r.tail_bound < 1e-12);

    // sum n^-4 = pi^4 / 90
    auto r2 = sum_with_tail([](long n) { return cplx(std::pow(double(n), -4.0), 0.0); },
                            {TailKind::power, 4.0}, 1e-10);
    const double pi4_90 = 1.0823232337111381916;
    CHECK_CLOSE(r2.value, cplx(pi4_90, 0.0), 2e-10);

    // too-slow decay exhausts the budget
    CHECK_THROWS(sum_with_tail([](long n) { return cplx(1.0 / double(n), 0.0); },
                               {TailKind::power, 1.5}, 1e-10, 10000),
                 BudgetExhausted);

    CHECK_THROWS(sum_with_tail([](long n) {
                     return n < 5 ? cplx(1.0, 0.0)
                                  : cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
                 },
                               {TailKind::power, 2.0}, 1e-10),
                 NonFiniteTerm);
}

static void test_quadrature() {
    auto q1 = integrate_interval([](double x) { return cplx(x * x * x, 0.0); },
                                 0.0, 1.0, 1e-13);
    CHECK_CLOSE(q1.value, cplx(0.25, 0.0), 1e-13);

    auto q2 = integrate_interval([](double x) { return std::exp(cplx(0.0, x)); },
                                 0.0, M_PI, 1e-13);
    CHECK_CLOSE(q2.value, cplx(0.0, 2.0), 1e-13);

    // oscillatory: int_0^{20 pi} x cos x dx = 0
    auto q3 = integrate_interval([](double x) { return cplx(x * std::cos(x), 0.0); },
                                 0.0, 20.0 * M_PI, 1e-11);
    CHECK_SMALL(q3.value, 1e-10);

    // half line
    auto q4 = integrate_interval([](double x) { return cplx(std::exp(-x), 0.0); },
                                 0.0, std::numeric_limits<double>::infinity(), 1e-12);
    CHECK_CLOSE(q4.value, cplx(1.0, 0.0), 1e-12);

    auto q5 = integrate_interval([](double x) { return cplx(std::exp(-x * x), 0.0); },
                                 0.0, std::numeric_limits<double>::infinity(), 1e-12, 0.5);
    CHECK_CLOSE(q5.value, cplx(0.88622692545275801365, 0.0), 1e-12);

    auto q6 = integrate_interval([](double x) { return cplx(x * x * std::exp(-3.0 * x), 0.0); },
                                 0.0, std::numeric_limits<double>::infinity(), 1e-12, 0.3);
    CHECK_CLOSE(q6.value, cplx(2.0 / 27.0, 0.0), 1e-12);
}

static void test_vertical_line() {
    // (1/2 pi i) int_{(2)} x^{s}/(s(s+1)) ds = 1 - 1/x for x > 1 (residues
    // at s=0 and s=-1)
    double x = 3.0;
    auto f = [&](cplx s) { return std::pow(cplx(x, 0.0), s) / (s * (s + 1.0)); };
    ContourSpec spec;
    spec.abscissa = 2.0;
    spec.half_height = 4000.0;
    spec.node_density = 0.05;
    auto q = integrate_vertical_line(f, spec, 1e-6);
    CHECK_CLOSE(q.value, cplx(1.0 - 1.0 / x, 0.0), 2e-5);

    // |f| growing toward the endpoints must be rejected
    ContourSpec s2;
    s2.abscissa = 2.0;
    s2.half_height = 10.0;
    CHECK_THROWS(integrate_vertical_line([](cplx s) { return std::exp(-s * s); },
                                         s2, 1e-8),
                 TailTooFat);
}

int main() {
    test_kahan();
    test_sum_with_tail();
    test_quadrature();
    test_vertical_line();
    return tk_report("numerics");
}
