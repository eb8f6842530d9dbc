#include "lsm/special.hpp"

#include <boost/multiprecision/cpp_complex.hpp>

#include <cmath>
#include <vector>

namespace lsm {

namespace {

const cplx I(0.0, 1.0);

// B_{2j} / (2j)!  for j = 1..12
const double b2j_fact[13] = {0.0,
    8.3333333333333333333e-02, -1.3888888888888888889e-03,
    3.3068783068783068783e-05, -8.2671957671957671958e-07,
    2.0876756987868098979e-08, -5.2841901386874931848e-10,
    1.3382536530684678833e-11, -3.3896802963225828668e-13,
    8.5860620562778445639e-15, -2.1748686985580618730e-16,
    5.5090028283602295152e-18, -1.3954464685812523341e-19};

// B_{2n} / (2n (2n-1))  for the Stirling series of log Gamma
const double stirling_c[11] = {0.0,
    1.0 / 12, -1.0 / 360, 1.0 / 1260, -1.0 / 1680, 1.0 / 1188,
    -691.0 / 360360, 1.0 / 156, -3617.0 / 122400,
    43867.0 / 244188, -174611.0 / 125400};

// B_{2n} / (2n)  for the asymptotic series of psi
const double psi_c[11] = {0.0,
    1.0 / 12, -1.0 / 120, 1.0 / 252, -1.0 / 240, 1.0 / 132,
    -691.0 / 32760, 1.0 / 12, -3617.0 / 8160,
    43867.0 / 14364, -174611.0 / 6600};

cplx powc(double base, cplx e) { return std::exp(e * std::log(base)); }

cplx expm1c(cplx w) {
    if (std::abs(w) > 0.25) return std::exp(w) - 1.0;
    cplx term = w, sum = w;
    for (int k = 2; k <= 20; ++k) {
        term *= w / double(k);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

// log Gamma by the Stirling series after shifting to Re w >= 16
cplx log_gamma_shifted(cplx z) {
    cplx w = z;
    kahan_sum<cplx> logs;
    while (w.real() < 16.0) {
        logs += std::log(w);
        w += 1.0;
    }
    cplx iw2 = 1.0 / (w * w);
    cplx p = 1.0 / w;
    kahan_sum<cplx> ser;
    for (int n = 1; n <= 10; ++n) {
        ser += stirling_c[n] * p;
        p *= iw2;
    }
    cplx r = (w - 0.5) * std::log(w) - w + 0.5 * std::log(2.0 * M_PI) + ser.get();
    return r - logs.get();
}

// log sin(pi z), branch continuous off the real axis, matching the principal
// branch of log Gamma through the reflection formula
cplx log_sin_pi(cplx z) {
    if (z.imag() < 0.0) return std::conj(log_sin_pi(std::conj(z)));
    // Im z >= 0: sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 pi i z})
    return I * M_PI / 2.0 - std::log(2.0) - I * M_PI * z +
           std::log(1.0 - std::exp(2.0 * M_PI * I * z));
}

bool near_nonpositive_int(cplx z, double eps = 1e-12) {
    if (z.real() > 0.5 || std::abs(z.imag()) > eps) return false;
    return std::abs(z.real() - std::round(z.real())) < eps;
}

} // namespace

cplx log_gamma(cplx z) {
    if (near_nonpositive_int(z))
        throw PoleError("log_gamma: pole at nonpositive integer");
    if (z.real() >= 0.5) return log_gamma_shifted(z);
    return std::log(M_PI) - log_sin_pi(z) - log_gamma_shifted(1.0 - z);
}

cplx digamma(cplx z) {
    if (near_nonpositive_int(z))
        throw PoleError("digamma: pole at nonpositive integer");
    if (z.real() < 0.5) {
        // pi cot(pi z), written to stay bounded for large |Im z|
        cplx w = (z.imag() >= 0.0) ? z : std::conj(z);
        cplx q = std::exp(2.0 * M_PI * I * w);
        cplx cot = I * (q + 1.0) / (q - 1.0);
        if (z.imag() < 0.0) cot = std::conj(cot);
        return digamma(1.0 - z) - M_PI * cot;
    }
    cplx w = z;
    kahan_sum<cplx> recip;
    while (w.real() < 16.0) {
        recip += 1.0 / w;
        w += 1.0;
    }
    cplx iw2 = 1.0 / (w * w);
    cplx p = iw2;
    kahan_sum<cplx> ser;
    for (int n = 1; n <= 10; ++n) {
        ser += psi_c[n] * p;
        p *= iw2;
    }
    return std::log(w) - 0.5 / w - ser.get() - recip.get();
}

namespace {

long em_cutoff(cplx s) {
    double m = 25.0 + 1.3 * std::abs(s.imag()) + 6.0 * std::max(0.0, -s.real());
    long M = long(std::ceil(m));
    if (M > 20000)
        throw DomainTooLarge("euler-maclaurin cutoff too large for this argument");
    return M;
}

} // namespace

cplx hurwitz_zeta(cplx s, double a) {
    if (!(a > 0.0 && a <= 1.0))
        throw UnsupportedParameterRange("hurwitz_zeta: need 0 < a <= 1");
    if (std::abs(s - 1.0) < 1e-13)
        throw PoleError("hurwitz_zeta: pole at s = 1");
    if (s.real() <= -9.0)
        throw DomainTooLarge("hurwitz_zeta: Re s <= -9 not supported here");
    long M = em_cutoff(s);
    kahan_sum<cplx> sum;
    for (long n = 0; n < M; ++n)
        sum += powc(double(n) + a, -s);
    double Ma = double(M) + a;
    cplx r = powc(Ma, 1.0 - s) / (s - 1.0) + 0.5 * powc(Ma, -s);
    // Bernoulli corrections: B_{2j}/(2j)! * (s)_{2j-1} * (M+a)^{-s-2j+1}
    cplx poch = s;                    // (s)_1
    cplx mp = powc(Ma, -s - 1.0);     // (M+a)^{-s-1}
    kahan_sum<cplx> corr;
    for (int j = 1; j <= 12; ++j) {
        corr += b2j_fact[j] * poch * mp;
        poch *= (s + double(2 * j - 1)) * (s + double(2 * j));
        mp /= Ma * Ma;
    }
    return sum.get() + r + corr.get();
}

cplx riemann_zeta(cplx s) {
    if (std::abs(s - 1.0) < 1e-13)
        throw PoleError("riemann_zeta: pole at s = 1");
    // below Re s = -1/2 the direct sum cancels against the integral term and
    // loses digits, so switch to the functional equation early
    if (s.real() > -0.5) return hurwitz_zeta(s, 1.0);
    // zeta(s) = 2 (2 pi)^{s-1} sin(pi s / 2) Gamma(1-s) zeta(1-s)
    cplx w = 1.0 - s;
    return 2.0 * powc(2.0 * M_PI, s - 1.0) * std::sin(M_PI * s / 2.0) *
           std::exp(log_gamma(w)) * hurwitz_zeta(w, 1.0);
}

cplx riemann_zeta_deriv(cplx s) {
    if (std::abs(s - 1.0) < 1e-13)
        throw PoleError("riemann_zeta_deriv: pole at s = 1");
    if (s.real() <= -9.0)
        throw DomainTooLarge("riemann_zeta_deriv: Re s <= -9 not supported");
    long M = em_cutoff(s);
    kahan_sum<cplx> sum;
    for (long n = 2; n < M; ++n)
        sum += -std::log(double(n)) * powc(double(n), -s);
    double Md = double(M);
    double lM = std::log(Md);
    cplx M1s = powc(Md, 1.0 - s);
    cplx Ms = powc(Md, -s);
    cplx r = -lM * M1s / (s - 1.0) - M1s / ((s - 1.0) * (s - 1.0)) - 0.5 * lM * Ms;
    // d/ds of B_{2j}/(2j)! (s)_{2j-1} M^{-s-2j+1}
    kahan_sum<cplx> corr;
    cplx poch = s;
    cplx dpoch = 1.0;
    cplx mp = powc(Md, -s - 1.0);
    for (int j = 1; j <= 12; ++j) {
        corr += b2j_fact[j] * (dpoch * mp - poch * lM * mp);
        cplx f1 = s + double(2 * j - 1), f2 = s + double(2 * j);
        dpoch = dpoch * f1 * f2 + poch * (f1 + f2);
        poch *= f1 * f2;
        mp /= Md * Md;
    }
    return sum.get() + r + corr.get();
}

namespace {

// zeta(1 + eps) - 1/eps, stable as eps -> 0
cplx zeta_shift(cplx eps) {
    if (std::abs(eps) > 0.5)
        return riemann_zeta(1.0 + eps) - 1.0 / eps;
    long M = em_cutoff(1.0 + eps);
    kahan_sum<cplx> sum;
    for (long n = 1; n < M; ++n)
        sum += powc(double(n), -1.0 - eps);
    double Md = double(M);
    double lM = std::log(Md);
    // M^{-eps}/eps - 1/eps = expm1(-eps log M)/eps
    cplx pole_part = (std::abs(eps) < 1e-30)
                         ? cplx(-lM, 0.0)
                         : expm1c(-eps * lM) / eps;
    cplx s = 1.0 + eps;
    cplx r = pole_part + 0.5 * powc(Md, -s);
    cplx poch = s;
    cplx mp = powc(Md, -s - 1.0);
    kahan_sum<cplx> corr;
    for (int j = 1; j <= 12; ++j) {
        corr += b2j_fact[j] * poch * mp;
        poch *= (s + double(2 * j - 1)) * (s + double(2 * j));
        mp /= Md * Md;
    }
    return sum.get() + r + corr.get();
}

} // namespace

std::pair<cplx, cplx> zeta_laurent_pair(cplx u) {
    return {zeta_shift(2.0 * u), zeta_shift(-2.0 * u)};
}

namespace {

// beta as a reduced fraction a/q with q <= 4096, or q = 0 on failure
std::pair<long, long> rationalize(double beta) {
    beta -= std::floor(beta);
    for (long q = 1; q <= 4096; ++q) {
        double aq = beta * double(q);
        double a = std::round(aq);
        if (std::abs(aq - a) < 1e-9 * double(q))
            return {long(a), q};
    }
    return {0, 0};
}

cplx unit_e(double x) { return std::exp(2.0 * M_PI * I * x); }

} // namespace

cplx lerch_xi_em(double beta, cplx s) {
    auto [a, q] = rationalize(beta);
    if (q == 0)
        throw UnsupportedParameterRange("lerch_xi: beta must be rational with denominator <= 4096");
    if (a % q == 0) return riemann_zeta(s);
    kahan_sum<cplx> sum;
    for (long r = 1; r <= q; ++r)
        sum += unit_e(double(r * a) / double(q)) * hurwitz_zeta(s, double(r) / double(q));
    return powc(double(q), -s) * sum.get();
}

cplx lerch_xi(double alpha, double beta, cplx s) {
    if (alpha != 0.0 && beta != 0.0)
        throw UnsupportedParameterRange("lerch_xi: one of alpha, beta must vanish");
    if (beta == 0.0) {
        if (alpha == 0.0) return riemann_zeta(s);
        if (!(alpha > 0.0 && alpha <= 1.0))
            throw UnsupportedParameterRange("lerch_xi: need 0 < alpha <= 1");
        if (s.real() > -2.0) return hurwitz_zeta(s, alpha);
        // Hurwitz functional equation: with S = 1 - s,
        // zeta(s, alpha) = Gamma(S) (2 pi)^{-S}
        //   [ e^{-i pi S/2} xi(0,alpha;S) + e^{i pi S/2} xi(0,1-alpha;S) ]
        cplx S = 1.0 - s;
        cplx g = std::exp(log_gamma(S)) * powc(2.0 * M_PI, -S);
        return g * (std::exp(-I * M_PI * S / 2.0) * lerch_xi_em(alpha, S) +
                    std::exp(I * M_PI * S / 2.0) * lerch_xi_em(1.0 - alpha, S));
    }
    // beta-type
    beta -= std::floor(beta);
    if (beta == 0.0) return riemann_zeta(s);
    if (s.real() > 0.0) return lerch_xi_em(beta, s);
    // functional equation: xi(0,beta;1-S) =
    //   Gamma(S) (2 pi)^{-S} [ e^{i pi S/2} zeta(S,beta) + e^{-i pi S/2} zeta(S,1-beta) ]
    cplx S = 1.0 - s;
    cplx g = std::exp(log_gamma(S)) * powc(2.0 * M_PI, -S);
    return g * (std::exp(I * M_PI * S / 2.0) * hurwitz_zeta(S, beta) +
                std::exp(-I * M_PI * S / 2.0) * hurwitz_zeta(S, 1.0 - beta));
}

namespace {

template <class C>
struct f21_run {
    C sum;
    double max_term;     // largest |term| relative to the unit first term
    bool converged;
};

template <class C>
f21_run<C> f21_series(C a, C b, C c, double y, double tol, long max_terms) {
    C term(1);
    C sum(1);
    double max_term = 1.0;
    int quiet = 0;
    for (long n = 0; n < max_terms; ++n) {
        term *= (a + C(double(n))) * (b + C(double(n))) /
                ((c + C(double(n))) * C(double(n + 1))) * C(y);
        sum += term;
        double at = double(abs(term));
        if (at > max_term) max_term = at;
        if (at < tol) {
            if (++quiet >= 3) return {sum, max_term, true};
        } else {
            quiet = 0;
        }
    }
    return {sum, max_term, false};
}

using hp50 = boost::multiprecision::cpp_complex_50;
using hp100 = boost::multiprecision::cpp_complex<100>;

template <class C>
C to_hp(cplx z) { return C(z.real(), z.imag()); }

template <class C>
cplx from_hp(const C& z) {
    return {double(z.real()), double(z.imag())};
}

// series evaluation with escalation to higher precision when the running
// cancellation estimate says double is not enough
cplx f21_series_dispatch(cplx a, cplx b, cplx c, double y) {
    auto r = f21_series<cplx>(a, b, c, y, 1e-18, 100000);
    if (!r.converged)
        throw NoConvergence("gauss_2f1: series did not converge");
    double cancel = r.max_term / std::max(1e-300, std::abs(r.sum));
    if (cancel < 1e12) return r.sum;
    if (cancel < 1e40) {
        auto rh = f21_series<hp50>(to_hp<hp50>(a), to_hp<hp50>(b), to_hp<hp50>(c),
                                   y, 1e-45, 200000);
        if (!rh.converged) throw NoConvergence("gauss_2f1: series did not converge");
        return from_hp(rh.sum);
    }
    if (cancel < 1e90) {
        auto rh = f21_series<hp100>(to_hp<hp100>(a), to_hp<hp100>(b), to_hp<hp100>(c),
                                    y, 1e-95, 400000);
        if (!rh.converged) throw NoConvergence("gauss_2f1: series did not converge");
        return from_hp(rh.sum);
    }
    throw NoConvergence("gauss_2f1: cancellation beyond supported precision");
}

bool near_int(cplx z, double eps) {
    return std::abs(z.imag()) < eps &&
           std::abs(z.real() - std::round(z.real())) < eps;
}

} // namespace

cplx gauss_2f1(cplx a, cplx b, cplx c, double y) {
    if (near_nonpositive_int(c))
        throw PoleError("gauss_2f1: c at a nonpositive integer");
    if (y < -1.0 || y > 1.0)
        throw UnsupportedParameterRange("gauss_2f1: need -1 <= y <= 1");
    if (y == 1.0) {
        cplx d = c - a - b;
        if (d.real() <= 0.0)
            throw DivergentAtUnit("gauss_2f1: divergent at y = 1");
        return std::exp(log_gamma(c) + log_gamma(d) - log_gamma(c - a) - log_gamma(c - b));
    }
    if (std::abs(y) <= 0.6)
        return f21_series_dispatch(a, b, c, y);
    if (y < 0.0) {
        // Pfaff: (1-y)^{-a} 2F1(a, c-b, c; y/(y-1)), argument in (0, 1/2]
        double w = y / (y - 1.0);
        return powc(1.0 - y, -a) * f21_series_dispatch(a, c - b, c, w);
    }
    // y in (0.6, 1): connection at 1 - y; needs c-a-b away from the integers
    cplx d = c - a - b;
    if (near_int(d, 1e-8))
        throw UnsupportedParameterRange(
            "gauss_2f1: c-a-b too close to an integer for the y -> 1 connection");
    double w = 1.0 - y;
    cplx t1 = std::exp(log_gamma(c) + log_gamma(d) - log_gamma(c - a) - log_gamma(c - b)) *
              f21_series_dispatch(a, b, a + b - c + 1.0, w);
    cplx t2 = std::exp(log_gamma(c) + log_gamma(-d) - log_gamma(a) - log_gamma(b)) *
              powc(w, d) * f21_series_dispatch(c - a, c - b, d + 1.0, w);
    return t1 + t2;
}

cplx h_lambda_log_prefactor(cplx lambda, cplx u, cplx v) {
    return log_gamma(lambda - u + v) + log_gamma(lambda - u - v) - log_gamma(2.0 * lambda);
}

cplx h_lambda_f21(cplx lambda, cplx u, cplx v, double y) {
    return gauss_2f1(lambda - u + v, lambda - u - v, 2.0 * lambda, y);
}

cplx h_lambda(cplx lambda, cplx u, cplx v, double y) {
    return std::exp(h_lambda_log_prefactor(lambda, u, v)) * h_lambda_f21(lambda, u, v, y);
}

} // namespace lsm
