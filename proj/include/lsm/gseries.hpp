// The Kloosterman-weighted double Dirichlet series
//   G(s,v;q) = sum_{m,n>=1} S_q(m,n;1) (mn)^{-s} (m/n)^v
// in three representations: the defining series, a finite combination of
// Lerch zeta values (entire in s), and the continued form valid left of
// Re s = -|Re v|.
#pragma once

#include "lsm/numerics.hpp"

namespace lsm {

struct OutsideConvergenceStrip : NumericsError { using NumericsError::NumericsError; };
struct OutsideValidityHalfPlane : NumericsError { using NumericsError::NumericsError; };

enum class GRep { series, lerch, continued };

struct GQuery {
    cplx s;
    cplx v;
    long q = 1;
    GRep representation = GRep::lerch;
};

// defining double series grouped by d = mn; Re s > 1 + |Re v|
SeriesResult g_series(cplx s, cplx v, long q, double tol);

// finite sum of Lerch zeta products over ab = 1 (mod q); any s.
// q = 1 is the zeta(s-v) zeta(s+v) closed form.
cplx g_via_lerch(cplx s, cplx v, long q);

// continued form: gamma prefactor times the two congruence sums,
// valid for Re s < -|Re v|, q > 1
SeriesResult g_continued(cplx s, cplx v, long q, double tol);

cplx g_eval(const GQuery& query, double tol = 1e-10);

} // namespace lsm
