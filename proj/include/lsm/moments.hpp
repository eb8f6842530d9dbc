// Second-moment evaluators for weights 2k >= 4: the closed main terms W and
// U, the Kloosterman-Bessel double series D, the convolution right side, and
// the pointwise / integrated moment assemblies.
#pragma once

#include "lsm/numerics.hpp"

namespace lsm {

struct WeightTooSmall : NumericsError { using NumericsError::NumericsError; };
struct OffCriticalV : NumericsError { using NumericsError::NumericsError; };
struct OutsideConvergenceRegion : NumericsError { using NumericsError::NumericsError; };
struct RemovableSingularity : NumericsError { using NumericsError::NumericsError; };
struct PoleAtVZero : NumericsError { using NumericsError::NumericsError; };

struct MomentParams {
    long k = 2;              // half weight, weight = 2k
    long N = 1;              // level
    double t = 0.0;          // spectral point, v = i t
    cplx u = {0.0, 0.0};     // shift
    cplx lambda = {0.0, 0.0}; // Bessel order parameter; 0 means "use k"
    long X = 0;              // truncation cap; 0 means default_truncation(k, N)
    double tol = 1e-6;
};

long default_truncation(long k, long N);

// log N + 2 gamma - 2 log 2pi + psi(k+it) + psi(k-it)
double w_main(long k, long N, double t);

// zeta(1+2it) (2pi)^{-2it} Gamma(k+it)/Gamma(k-it) + conjugate term;
// throws RemovableSingularity at t = 0 (see u_main_limit0)
cplx u_main(long k, double t);

// removable t = 0 value, symmetric average of +-1e-5 evaluations
cplx u_main_limit0(long k);

// zeta(1+2v)/(2pi)^{1-2u+2v} * Gamma(l-u+v)/Gamma(l+u-v) + (v -> -v) term
cplx d_term(cplx u, cplx v, cplx lambda);

// the double series sum_{m,n} (mn)^{-1/2-u} (m/n)^v *
//   sum_{q = N, 2N, ...} S_q(m,n;1)/q J_{2l-1}(4 pi sqrt(mn)/q),
// grouped by d = mn and truncated at d = X.  Needs Re u > 3/4, Re l > 3/4,
// real l (the Bessel order 2l-1 is evaluated on the real line).
SeriesResult dn_direct(const MomentParams& params);

struct ConvolutionBreakdown {
    cplx zeta_block;      // zeta(1+2u)
    cplx reflected_block; // (2pi/sqrt N)^{4u} Gamma-ratio zeta(1-2u)
    cplx delta_block;     // the level-one pair, zero for N > 1
    cplx plus_block;      // hyperbola sum over m1 m2 - n1 n2 = +1
    cplx minus_block;     // hyperbola sum over m1 m2 - n1 n2 = -1
    cplx total;
    double tail_bound = 0.0;
    long terms_used = 0;
};

// all five blocks of the convolution identity; needs k >= 2, |Re u| < k-1,
// u != 0, Re v = 0 (v = i t)
ConvolutionBreakdown convolution_rhs(const MomentParams& params);

struct MomentBreakdown {
    double main_W = 0.0;
    bool has_U = false;   // set iff N = 1
    cplx main_U = {0.0, 0.0};
    cplx tail_V1 = {0.0, 0.0};
    cplx total = {0.0, 0.0};
    double tail_bound = 0.0;
};

// pointwise second moment at u -> 0 taken analytically: W (+ U at N = 1)
// plus the two hyperbola sums evaluated at u = 0, v = it
MomentBreakdown second_moment(long k, long N, double t, long X = 0,
                              double tol = 1e-6);

struct IntegratedMoment {
    double lhs_integral = 0.0;  // integral of the full moment over [0, T]
    double main_integral = 0.0; // integral of W (+ U at N = 1)
    double V2 = 0.0;            // difference of the two
    double err_est = 0.0;
};

IntegratedMoment integrated_moment(long k, long N, double T, long X = 0,
                                   double tol = 1e-4);

} // namespace lsm
