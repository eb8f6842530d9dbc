// Exact integer arithmetic: divisor sums, Moebius-weighted sums, Kloosterman
// sums, and enumeration of m1*m2 - n1*n2 = +-1 with a congruence condition.
#pragma once

#include "lsm/numerics.hpp"

#include <vector>

namespace lsm {

struct BoundViolation : std::runtime_error {
    explicit BoundViolation(const std::string& what) : std::runtime_error(what) {}
};

struct KloostermanQuery {
    long q = 1;
    long m1 = 0, m2 = 0;
    long M = 1;
};

struct HyperbolaSolution {
    long m1, m2, n1, n2;
    int sign;
};

struct WeilReport {
    long triples = 0;
    double max_ratio = 0.0;
    long at_q = 0, at_m1 = 0, at_m2 = 0;
};

int mobius(long n);
long divisor_count(long n);
std::vector<long> divisors(long n);

// tau_s(n) = sum over n1 n2 = n of (n1/n2)^s
cplx tau_s(cplx s, long n);

// phi_s(n) = sum over d|n of mu(d) d^{-1-s}, and its s-derivative
cplx phi_s(cplx s, long n);
cplx phi_s_deriv(cplx s, long n);

// gamma(s; M; q) = sum over d | (M,q) of d^{-s} phi_s(q/d)
cplx gamma_coeff(cplx s, long M, long q);

// S_q(m1,m2;M) = sum over a,b mod q with ab = M (mod q) of e((m1 a + m2 b)/q).
// O(q) over invertible residues when gcd(M,q)=1, brute force O(q^2) otherwise.
cplx kloosterman(const KloostermanQuery& query);

// exhaustive |S_q(m1,m2;+-1)| <= tau(q) gcd(m1,m2,q)^{1/2} q^{1/2} check
WeilReport weil_audit(long q_max, long m_max);

// all (m1,m2,n1,n2) with m1 m2 <= X, m1 m2 - n1 n2 = sign, N | n1,
// sorted by (m1 m2, m1, n1)
std::vector<HyperbolaSolution> enumerate_hyperbola(long N, int sign, long X);

} // namespace lsm
