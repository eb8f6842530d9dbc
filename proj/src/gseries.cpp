#include "lsm/gseries.hpp"
#include "lsm/arith.hpp"
#include "lsm/special.hpp"

#include <cmath>
#include <vector>

namespace lsm {

namespace {

cplx powc(double base, cplx e) { return std::exp(e * std::log(base)); }

// S_q(a,b;1) for all residue pairs, via the invertible-residue form
std::vector<std::vector<cplx>> kloosterman_table(long q) {
    std::vector<std::vector<cplx>> t(q, std::vector<cplx>(q));
    for (long a = 0; a < q; ++a)
        for (long b = 0; b < q; ++b)
            t[a][b] = kloosterman({q, a, b, 1});
    return t;
}

// lazily grown sieve of c[d] = sum_{mn=d} w[m%q][n%q] (m/n)^v
// (w omitted when null); divisor-pair enumeration is O(D log D)
class coeff_sieve {
    cplx v_;
    long q_;
    const std::vector<std::vector<cplx>>* w_;
    std::vector<cplx> c_;
    static constexpr long cap_ = 1L << 23;

    void build(long D) {
        std::vector<cplx> pw(D + 1);
        for (long m = 1; m <= D; ++m) pw[m] = powc(double(m), v_);
        c_.assign(D + 1, cplx(0.0, 0.0));
        for (long m = 1; m <= D; ++m) {
            for (long n = 1; m * n <= D; ++n) {
                cplx t = pw[m] / pw[n];
                if (w_) t *= (*w_)[m % q_][n % q_];
                c_[m * n] += t;
            }
        }
    }

public:
    coeff_sieve(cplx v, long q, const std::vector<std::vector<cplx>>* w)
        : v_(v), q_(q), w_(w) {}

    cplx at(long d) {
        if (d >= long(c_.size())) {
            long D = std::max<long>(1L << 16, long(c_.size()) - 1);
            while (D < d) D *= 2;
            if (D > cap_)
                throw NoConvergence("g sums: sieve range exhausted before the tail bound closed");
            build(D);
        }
        return c_[d];
    }
};

} // namespace

SeriesResult g_series(cplx s, cplx v, long q, double tol) {
    double av = std::abs(v.real());
    if (!(s.real() > 1.0 + av))
        throw OutsideConvergenceStrip("g_series: need Re s > 1 + |Re v|");
    auto table = kloosterman_table(q);
    coeff_sieve sieve(v, q, &table);
    double rate = std::max(1.05, s.real() - av - 0.3);
    auto term = [&](long d) -> cplx { return sieve.at(d) * powc(double(d), -s); };
    return sum_with_tail(term, {TailKind::power, rate}, tol);
}

cplx g_via_lerch(cplx s, cplx v, long q) {
    if (q == 1)
        return riemann_zeta(s - v) * riemann_zeta(s + v);
    kahan_sum<cplx> acc;
    for (long a = 1; a < q; ++a) {
        // b = a^{-1} mod q; skip non-invertible a
        long t = 0, nt = 1, r = q, nr = a;
        while (nr != 0) {
            long quot = r / nr;
            std::swap(t -= quot * nt, nt);
            std::swap(r -= quot * nr, nr);
        }
        if (r != 1) continue;
        long b = t < 0 ? t + q : t;
        acc += lerch_xi(0.0, double(a) / double(q), s - v) *
               lerch_xi(0.0, double(b) / double(q), s + v);
    }
    return acc.get();
}

SeriesResult g_continued(cplx s, cplx v, long q, double tol) {
    double av = std::abs(v.real());
    if (!(s.real() < -av))
        throw OutsideValidityHalfPlane("g_continued: need Re s < -|Re v|");
    if (q <= 1)
        throw OutsideValidityHalfPlane("g_continued: q = 1 uses the closed form");
    double rate = std::max(1.05, 1.0 - s.real() - av - 0.3);
    coeff_sieve sieve(v, q, nullptr);
    // congruence class sums over d = mn with d = res (mod q), weight tau_v(d)
    auto class_sum = [&](long res) {
        auto term = [&, res](long k) -> cplx {
            long d = (k - 1) * q + res; // res=1 -> 1, q+1, ...; res=q-1 -> q-1, 2q-1, ...
            if (d < 1) return cplx(0.0, 0.0);
            return sieve.at(d) * powc(double(d), s - 1.0);
        };
        return sum_with_tail(term, {TailKind::power, rate}, tol);
    };
    auto plus = class_sum(1);
    auto minus = class_sum(q - 1);
    cplx pref = 2.0 * std::exp(log_gamma(1.0 - s + v) + log_gamma(1.0 - s - v) +
                               (2.0 * s - 2.0) * std::log(2.0 * M_PI / double(q)));
    cplx value = pref * (-std::cos(M_PI * s) * plus.value +
                         std::cos(M_PI * v) * minus.value);
    double ptail = std::abs(pref) *
                   (std::abs(std::cos(M_PI * s)) * plus.tail_bound +
                    std::abs(std::cos(M_PI * v)) * minus.tail_bound);
    return {value, ptail, plus.terms_used + minus.terms_used};
}

cplx g_eval(const GQuery& query, double tol) {
    switch (query.representation) {
        case GRep::series: return g_series(query.s, query.v, query.q, tol).value;
        case GRep::continued:
            if (query.q == 1)
                return g_via_lerch(query.s, query.v, 1);
            return g_continued(query.s, query.v, query.q, tol).value;
        case GRep::lerch: default: return g_via_lerch(query.s, query.v, query.q);
    }
}

} // namespace lsm
