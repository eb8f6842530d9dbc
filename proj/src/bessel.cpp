// Bessel J of complex order, K of imaginary order, and the kernel pair.
#include "lsm/special.hpp"

#include <boost/multiprecision/cpp_complex.hpp>

#include <cmath>

namespace lsm {

namespace {

const cplx I(0.0, 1.0);

using hp50 = boost::multiprecision::cpp_complex_50;
using hp110 = boost::multiprecision::cpp_complex<110>;
using hp170 = boost::multiprecision::cpp_complex<170>;

// sum_{m>=0} (-1)^m (x^2/4)^m / (m! (s+1)_m), accumulated at a precision
// chosen for the cancellation of the alternating series (about 0.44 x digits)
template <class C>
cplx j_series_sum(cplx s, double x, double stop) {
    const C x24 = C(x) * C(x) / C(4);
    const C sc(s.real(), s.imag());
    C term(1), sum(1);
    int quiet = 0;
    for (long m = 0; m < 4000; ++m) {
        term *= -x24 / (C(double(m + 1)) * (sc + C(double(m + 1))));
        sum += term;
        if (double(abs(term)) < stop) {
            if (++quiet >= 3)
                return {double(sum.real()), double(sum.imag())};
        } else {
            quiet = 0;
        }
    }
    throw NoConvergence("bessel_j: series did not converge");
}

cplx j_series(cplx s, double x) {
    if (x <= 25.0) return j_series_sum<hp50>(s, x, 1e-45);
    if (x <= 130.0) return j_series_sum<hp110>(s, x, 1e-105);
    return j_series_sum<hp170>(s, x, 1e-165);
}

bool is_negative_int(cplx s) {
    return std::abs(s.imag()) < 1e-14 && s.real() < -0.5 &&
           std::abs(s.real() - std::round(s.real())) < 1e-14;
}

// Y_0 by its power series, at the same precision tiers as J
template <class C>
double y0_sum(double x, double stop) {
    const C x24 = C(x) * C(x) / C(4);
    // J_0 part and the harmonic-weighted part together
    C jterm(1), jsum(1);
    C hterm(1), hsum(0), harm(0);
    for (long m = 1; m < 4000; ++m) {
        C m2 = C(double(m)) * C(double(m));
        jterm *= -x24 / m2;
        jsum += jterm;
        harm += C(1) / C(double(m));
        hterm *= x24 / m2;
        C piece = ((m % 2 == 1) ? hterm : -hterm) * harm;
        hsum += piece;
        if (double(abs(jterm)) < stop && double(abs(piece)) < stop && m > 3) break;
    }
    C r = (C(std::log(x / 2.0)) + C(euler_gamma)) * jsum + hsum;
    return (2.0 / M_PI) * double(r.real());
}

double y0_hp(double x) {
    if (x <= 25.0) return y0_sum<hp50>(x, 1e-45);
    if (x <= 130.0) return y0_sum<hp110>(x, 1e-105);
    if (x <= 260.0) return y0_sum<hp170>(x, 1e-165);
    throw DomainTooLarge("Y0: argument above series range");
}

// K_nu(z) for small |nu| via the cosh integral on (0, U)
cplx k_small_order(cplx nu, double z) {
    double rn = std::abs(nu.real());
    double U = std::acosh(1.0 + 45.0 / z);
    for (int it = 0; it < 3; ++it)
        U = std::acosh(1.0 + (45.0 + rn * U + std::abs(nu.imag())) / z);
    auto g = [&](double u) -> cplx {
        return std::exp(-z * (std::cosh(u) - 1.0)) * std::cosh(nu * u);
    };
    auto q = integrate_interval(g, 0.0, U, 1e-13);
    return std::exp(-z) * q.value;
}

} // namespace

cplx bessel_j(cplx s, double x) {
    if (x < 0.0) throw UnsupportedParameterRange("bessel_j: need x >= 0");
    if (x > 260.0) throw DomainTooLarge("bessel_j: argument above series range");
    if (std::abs(s) > 130.0) throw DomainTooLarge("bessel_j: order too large");
    if (is_negative_int(s)) {
        long n = long(std::llround(s.real()));
        cplx v = bessel_j(cplx(double(-n), 0.0), x);
        return (n % 2 == 0) ? v : -v;
    }
    if (x == 0.0) return (std::abs(s) < 1e-300) ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
    cplx pref = std::exp(s * std::log(x / 2.0) - log_gamma(s + 1.0));
    return pref * j_series(s, x);
}

double bessel_k_imag(double t, double x) {
    if (!(x > 0.0)) throw UnsupportedParameterRange("bessel_k_imag: need x > 0");
    if (t < 0.0) t = -t;
    if (x > 700.0) return 0.0;
    // K_{it}(x) = Re int_0^inf exp(-x cosh u + i t u) du; rotate the path to
    // height phi so it passes near the saddle and the integrand magnitude
    // matches the size of the result
    double phi = std::asin(std::min(1.0, t / x));
    if (x > 1.0) phi = std::min(phi, std::acos(1.0 / x));
    phi = std::min(phi, M_PI / 2.0 - 0.05);
    double c = x * std::cos(phi), sn = x * std::sin(phi);
    double W = std::acosh(1.0 + 45.0 / c) + 1.0;
    auto g = [&](double w) -> cplx {
        double ch = std::cosh(w), sh = std::sinh(w);
        return std::exp(-c * (ch - 1.0)) * std::exp(I * (t * w - sn * sh));
    };
    // integrate chunk by chunk at the oscillation scale; a single adaptive
    // pass can under-resolve panels holding several cycles
    double h = std::min(0.75, 0.75 * 2.0 * M_PI / (t + 1.0));
    long m = long(std::ceil(W / h));
    kahan_sum<cplx> acc;
    for (long i = 0; i < m; ++i) {
        double a = W * double(i) / double(m);
        double b = W * double(i + 1) / double(m);
        acc += integrate_interval(g, a, b, 1e-16).value;
    }
    double ex = -t * phi - c;
    if (ex < -745.0) return 0.0;
    return std::exp(ex) * acc.get().real();
}

cplx kernel_k(int sign, cplx s, double z) {
    if (!(z > 0.0)) throw UnsupportedParameterRange("kernel_k: need z > 0");
    if (sign == -1) {
        cplx cs = std::cos(M_PI * s);
        if (std::abs(s.real()) < 1e-13)
            return (2.0 / M_PI) * cs * bessel_k_imag(2.0 * s.imag(), z);
        if (std::abs(s.real()) <= 2.5 && std::abs(s.imag()) <= 2.5)
            return (2.0 / M_PI) * cs * k_small_order(2.0 * s, z);
        throw UnsupportedParameterRange("kernel_k: K order outside supported range");
    }
    if (sign != 1) throw UnsupportedParameterRange("kernel_k: sign must be +-1");
    if (std::abs(s) < 1e-10) return cplx(-y0_hp(z), 0.0);
    if (std::abs(s.imag()) < 1e-8 &&
        std::abs(s.real() - std::round(s.real())) < 1e-8)
        throw SingularOrder("kernel_k: order at an integer, limit form not implemented");
    return (bessel_j(-2.0 * s, z) - bessel_j(2.0 * s, z)) / (2.0 * std::sin(M_PI * s));
}

} // namespace lsm
