// tiny check/report harness shared by the test binaries
#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>

inline int tk_checks = 0;
inline int tk_failures = 0;

#define CHECK(cond)                                                        \
    do {                                                                   \
        ++tk_checks;                                                       \
        if (!(cond)) {                                                     \
            ++tk_failures;                                                 \
            std::printf("FAIL %s:%d  %s\n", __FILE__, __LINE__, #cond);    \
        }                                                                  \
    } while (0)

#define CHECK_THROWS(expr, ex)                                             \
    do {                                                                   \
        ++tk_checks;                                                       \
        bool tk_caught = false;                                            \
        try {                                                              \
            (void)(expr);                                                  \
        } catch (const ex&) {                                              \
            tk_caught = true;                                              \
        }                                                                  \
        if (!tk_caught) {                                                  \
            ++tk_failures;                                                 \
            std::printf("FAIL %s:%d  %s did not throw %s\n", __FILE__,     \
                        __LINE__, #expr, #ex);                             \
        }                                                                  \
    } while (0)

inline void tk_close(const char* file, int line, const char* what,
                     std::complex<double> got, std::complex<double> want,
                     double tol) {
    ++tk_checks;
    double den = std::max(std::abs(want), 1.0e-300);
    double rel = std::abs(got - want) / den;
    if (!(rel < tol)) {
        ++tk_failures;
        std::printf("FAIL %s:%d  %s rel=%.3e (got %.17g%+.17gi want %.17g%+.17gi)\n",
                    file, line, what, rel, got.real(), got.imag(),
                    want.real(), want.imag());
    }
}

#define CHECK_CLOSE(got, want, tol) tk_close(__FILE__, __LINE__, #got, got, want, tol)

#define CHECK_SMALL(got, tol)                                              \
    do {                                                                   \
        ++tk_checks;                                                       \
        double tk_a = std::abs(got);                                       \
        if (!(tk_a < (tol))) {                                             \
            ++tk_failures;                                                 \
            std::printf("FAIL %s:%d  |%s| = %.3e >= %.3e\n", __FILE__,     \
                        __LINE__, #got, tk_a, double(tol));                \
        }                                                                  \
    } while (0)

inline int tk_report(const char* name) {
    std::printf("%s: %d checks, %d failures\n", name, tk_checks, tk_failures);
    return tk_failures == 0 ? 0 : 1;
}
