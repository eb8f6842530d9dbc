// Complex special functions: gamma family, zeta family, Lerch zeta,
// Bessel functions, the kernel pair built from them, and the Gauss
// hypergeometric function.
#pragma once

#include "lsm/numerics.hpp"

#include <utility>

namespace lsm {

struct SpecialError : std::runtime_error {
    explicit SpecialError(const std::string& what) : std::runtime_error(what) {}
};
struct PoleError : SpecialError { using SpecialError::SpecialError; };
struct DomainTooLarge : SpecialError { using SpecialError::SpecialError; };
struct SingularOrder : SpecialError { using SpecialError::SpecialError; };
struct UnsupportedParameterRange : SpecialError { using SpecialError::SpecialError; };
struct DivergentAtUnit : SpecialError { using SpecialError::SpecialError; };

inline constexpr double euler_gamma = 0.57721566490153286060651209008240243;

// principal branch log Gamma
cplx log_gamma(cplx z);
cplx digamma(cplx z);

// Hurwitz zeta(s, a), 0 < a <= 1, by Euler-Maclaurin (Re s > -12 or so);
// building block for zeta and the Lerch function.
cplx hurwitz_zeta(cplx s, double a);

cplx riemann_zeta(cplx s);
cplx riemann_zeta_deriv(cplx s);

// (zeta(1+2u) - 1/(2u), zeta(1-2u) + 1/(2u)); both tend to gamma as u->0.
std::pair<cplx, cplx> zeta_laurent_pair(cplx u);

// Lerch zeta xi(alpha,beta;s) = sum_{n+alpha>0} e(n beta)/(n+alpha)^s.
// Supported parameters: (alpha,0) with 0<alpha<=1, or (0,beta).
// For beta-type arguments with Re s <= 0 the functional equation is applied;
// the Euler-Maclaurin evaluator below covers the rest.
cplx lerch_xi(double alpha, double beta, cplx s);

// beta-type Lerch value xi(0,beta;s) evaluated through the periodic Hurwitz
// decomposition only (no functional equation); valid for Re s > -10.
// Used to cross-check the functional equation with independent sides.
cplx lerch_xi_em(double beta, cplx s);

// J_order(x), complex order, x > 0.  Power series with an extended-precision
// accumulator sized to the cancellation of the series (|x| <= 260,
// |order| <= 60).
cplx bessel_j(cplx order, double x);

// K_{it}(x) for t >= 0, x > 0, real valued.  Quadrature of the cosine-cosh
// integral on a rotated path that passes near the saddle, so the integrand
// magnitude matches the exponentially small result.
double bessel_k_imag(double t, double x);

// kernel pair: sign=+1 -> (J_{-2s}(z) - J_{2s}(z)) / (2 sin(pi s));
//              sign=-1 -> (2/pi) cos(pi s) K_{2s}(z).
cplx kernel_k(int sign, cplx s, double z);

// 2F1(a,b,c;y) for real y in [-1,1].
cplx gauss_2f1(cplx a, cplx b, cplx c, double y);

// H_lambda(u,v;y) = Gamma(l-u+v)Gamma(l-u-v)/Gamma(2l) * 2F1(l-u+v,l-u-v,2l;y)
cplx h_lambda(cplx lambda, cplx u, cplx v, double y);

// log of Gamma(l-u+v)Gamma(l-u-v)/Gamma(2l); the 2F1 factor of H is
// h_lambda_f21 below.  Exposed so that products like cosh(pi t) * H can be
// assembled in log space for large |Im v|.
cplx h_lambda_log_prefactor(cplx lambda, cplx u, cplx v);
cplx h_lambda_f21(cplx lambda, cplx u, cplx v, double y);

} // namespace lsm
