// Weight-2 machinery: smooth cutoff partitions, the Mellin transform of the
// dyadic cutoff, Voronoi summation checks, Bessel-kernel transforms g^+-,
// the Z / omega / script-T functions, the corrected and direct alpha-weighted
// series, truncated dual Kloosterman sums, and the assembled k = 1 second
// moment.
#pragma once

#include "lsm/moments.hpp"
#include "lsm/numerics.hpp"

#include <functional>

namespace lsm {

struct NearPole : NumericsError { using NumericsError::NumericsError; };
struct PoleAtLambdaEqualOnePlusUV : NumericsError { using NumericsError::NumericsError; };
struct PoleAtUVSum : NumericsError { using NumericsError::NumericsError; };

// scalar function with derivative evaluators up to order 2
struct SmoothFn {
    std::function<double(double)> v, d1, d2;
    double operator()(double x) const { return v(x); }
};

// partition system: eta is the dyadic cutoff (1 on [0,1/2], 0 on [2,inf),
// eta(x) + eta(1/x) = 1 exactly), alpha/beta split at scale P
// (beta = 1 on [0,P], 0 on [2P,inf), alpha = 1 - beta)
struct CutoffSystem {
    double P = 1.0;
    double t = 0.0; // spectral point the system was built for
    long N = 1;     // level the system was built for
    SmoothFn eta, alpha, beta;
};

CutoffSystem build_cutoffs(double t, long N, double a = 6.0, double b = 3.0);

// Mellin transform of eta through the twice-integrated-by-parts form
// (1/(s(s+1))) int_{1/2}^{2} eta''(x) x^{s+1} dx; antisymmetric in s with a
// simple pole of residue 1 at s = 0
cplx mellin_eta(const CutoffSystem& sys, cplx s);

// compactly supported test function, separated from zero
struct VoronoiTestFunction {
    double x_lo = 1.0, x_hi = 2.0;
    std::function<double(double)> f, f1, f2;
};

// C-infinity bump on [x_lo, x_hi] with closed-form derivatives
VoronoiTestFunction bump_test_function(double x_lo, double x_hi);

// g^{+-}(y) = int K^{+-}(s; sqrt(xy)) f(x) dx over the support of f
QuadratureResult g_transform(int sign, cplx s, double y,
                             const VoronoiTestFunction& f, double tol = 1e-10);

// cutoff composite alpha(x) x^{power} eta(scale / x); the transform of this
// half-line weight is evaluated as a finite oscillatory part plus an
// analytic Hankel-asymptotic tail
struct ThetaComposite {
    const CutoffSystem* sys = nullptr;
    double scale = 1.0; // q^2 N
    cplx power = {-1.0, 0.0};
};

QuadratureResult g_transform(int sign, cplx s, double y,
                             const ThetaComposite& f, double tol = 1e-10);

struct VoronoiReport {
    cplx lhs;
    cplx rhs_main;
    cplx rhs_dual;
    double residual = 0.0;
    double tail_bound = 0.0;
};

// both sides of the arithmetic summation formula for sum f(n) tau_s(n) over
// n = M mod q; budget caps the dual (m,n) range
VoronoiReport voronoi_check(const VoronoiTestFunction& f, long q, long M,
                            cplx s, long budget = 4000);

struct ZPair {
    cplx Z1;
    cplx Z2;
};

// Z1 in the integrated-by-parts form (regular at lambda = 1 for u+v != 0);
// Z2 as a vertical-line integral against mellin_eta on Re s = -1/2
ZPair z_functions(cplx u, cplx v, cplx lambda, const CutoffSystem& sys,
                  double tol = 1e-9);

// direct quadrature form of Z1 (needs Re(lambda - u - v) > 1); test oracle
cplx z1_direct(cplx u, cplx v, cplx lambda, const CutoffSystem& sys,
               double tol = 1e-10);

// sum over d of tau_u(d) tau_v(m) alpha(m) / (d^u m^{k-u}) times the
// hypergeometric bracket (H_k(u,v;sign/m) - Gamma ratio), m = dN + sign
SeriesResult c_correction(int sign, cplx u, cplx v, long k, long N,
                          const CutoffSystem& sys, long X = 0,
                          double tol = 1e-9);

// the same series without the bracket correction (converges for Re k-u > 1)
SeriesResult a_direct(int sign, cplx u, cplx v, cplx lambda, long N,
                      const CutoffSystem& sys, long X = 0, double tol = 1e-8);

// finite beta-weighted block of the regularized split, both +-1 branches
SeriesResult s_beta(cplx u, cplx v, long k, long N, const CutoffSystem& sys,
                    double tol = 1e-12);

// h(0,v) = -(pi/2) v tan(pi v / 2)
cplx h_zero_v(cplx v);

// script-T(v,k): quadrature of alpha'(x) x^v against the closed u-derivative
// of omega_1 at u = 0
cplx t_script(cplx v, long k, long N, const CutoffSystem& sys,
              double tol = 1e-10);

// the eight-term Z combination continuing the direct alpha series
cplx a_script(cplx u, cplx v, cplx lambda, const CutoffSystem& sys,
              double tol = 1e-9);

// truncated dual sum R^{sign}(u,v,k): Kloosterman sums against g^{+-}
// transforms of the cutoff composite, grouped by r = mn
SeriesResult r_dual(int sign, cplx u, cplx v, long k, long N,
                    const CutoffSystem& sys, long budget = 0);

// both signs in one pass (they share every Kloosterman sum and transform)
struct RDualPair {
    SeriesResult plus, minus;
};
RDualPair r_dual_pair(cplx u, cplx v, long k, long N, const CutoffSystem& sys,
                      long budget = 0);

// assembled weight-2 second moment; t = 0 is routed to the closed
// limit form, t != 0 to the continued block formula
MomentBreakdown k1_second_moment(long N, double t, const CutoffSystem& sys,
                                 long budget = 0);

} // namespace lsm
