#include "lsm/arith.hpp"
#include "lsm/special.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lsm {

namespace {

std::vector<std::pair<long, int>> factorize(long n) {
    std::vector<std::pair<long, int>> f;
    for (long p = 2; p * p <= n; p += (p == 2) ? 1 : 2) {
        if (n % p == 0) {
            int e = 0;
            while (n % p == 0) { n /= p; ++e; }
            f.push_back({p, e});
        }
    }
    if (n > 1) f.push_back({n, 1});
    return f;
}

cplx powc(double base, cplx e) { return std::exp(e * std::log(base)); }

long mod_inverse(long a, long q) {
    long t = 0, nt = 1, r = q, nr = a % q;
    while (nr != 0) {
        long quot = r / nr;
        std::swap(t -= quot * nt, nt);
        std::swap(r -= quot * nr, nr);
    }
    if (r != 1) return -1;
    return t < 0 ? t + q : t;
}

} // namespace

int mobius(long n) {
    int m = 1;
    for (auto [p, e] : factorize(n)) {
        if (e > 1) return 0;
        m = -m;
    }
    return m;
}

long divisor_count(long n) {
    long c = 1;
    for (auto [p, e] : factorize(n)) c *= e + 1;
    return c;
}

std::vector<long> divisors(long n) {
    std::vector<long> d{1};
    for (auto [p, e] : factorize(n)) {
        size_t sz = d.size();
        long pk = 1;
        for (int i = 1; i <= e; ++i) {
            pk *= p;
            for (size_t j = 0; j < sz; ++j) d.push_back(d[j] * pk);
        }
    }
    std::sort(d.begin(), d.end());
    return d;
}

cplx tau_s(cplx s, long n) {
    kahan_sum<cplx> acc;
    for (long d : divisors(n))
        acc += powc(double(d) / double(n / d), s);
    return acc.get();
}

cplx phi_s(cplx s, long n) {
    kahan_sum<cplx> acc;
    acc += cplx(1.0, 0.0);
    auto f = factorize(n);
    // squarefree divisors only; mu vanishes elsewhere
    size_t k = f.size();
    for (size_t mask = 1; mask < (size_t(1) << k); ++mask) {
        long d = 1;
        int mu = 1;
        for (size_t i = 0; i < k; ++i)
            if (mask & (size_t(1) << i)) { d *= f[i].first; mu = -mu; }
        acc += double(mu) * powc(double(d), -1.0 - s);
    }
    return acc.get();
}

cplx phi_s_deriv(cplx s, long n) {
    kahan_sum<cplx> acc;
    auto f = factorize(n);
    size_t k = f.size();
    for (size_t mask = 1; mask < (size_t(1) << k); ++mask) {
        long d = 1;
        int mu = 1;
        for (size_t i = 0; i < k; ++i)
            if (mask & (size_t(1) << i)) { d *= f[i].first; mu = -mu; }
        acc += double(-mu) * std::log(double(d)) * powc(double(d), -1.0 - s);
    }
    return acc.get();
}

cplx gamma_coeff(cplx s, long M, long q) {
    long g = std::gcd(M, q);
    kahan_sum<cplx> acc;
    for (long d : divisors(g))
        acc += powc(double(d), -s) * phi_s(s, q / d);
    return acc.get();
}

cplx kloosterman(const KloostermanQuery& query) {
    const long q = query.q;
    if (q < 1) throw UnsupportedParameterRange("kloosterman: need q >= 1");
    if (q == 1) return cplx(1.0, 0.0);
    auto em = [&](long r) {
        r %= q;
        if (r < 0) r += q;
        double ang = 2.0 * M_PI * double(r) / double(q);
        return cplx(std::cos(ang), std::sin(ang));
    };
    long M = ((query.M % q) + q) % q;
    kahan_sum<cplx> acc;
    if (std::gcd(M, q) == 1) {
        for (long a = 1; a < q; ++a) {
            long ai = mod_inverse(a, q);
            if (ai < 0) continue;
            acc += em(query.m1 * a + query.m2 * ((M * ai) % q));
        }
        return acc.get();
    }
    for (long a = 0; a < q; ++a)
        for (long b = 0; b < q; ++b)
            if ((a * b - M) % q == 0)
                acc += em(query.m1 * a + query.m2 * b);
    return acc.get();
}

WeilReport weil_audit(long q_max, long m_max) {
    WeilReport rep;
    for (long q = 1; q <= q_max; ++q) {
        double bound_base = double(divisor_count(q)) * std::sqrt(double(q));
        // inverse table once per q
        std::vector<long> inv(q, -1);
        for (long a = 1; a < q; ++a) inv[a] = mod_inverse(a, q);
        std::vector<cplx> e(q);
        for (long r = 0; r < q; ++r) {
            double ang = 2.0 * M_PI * double(r) / double(q);
            e[r] = cplx(std::cos(ang), std::sin(ang));
        }
        for (long M : {1L, q - 1 == 0 ? 1L : q - 1}) { // M = +1 and -1 mod q
            for (long m1 = 1; m1 <= m_max; ++m1)
                for (long m2 = 1; m2 <= m_max; ++m2) {
                    kahan_sum<cplx> acc;
                    if (q == 1) {
                        acc += cplx(1.0, 0.0);
                    } else {
                        for (long a = 1; a < q; ++a) {
                            if (inv[a] < 0) continue;
                            acc += e[(m1 * a + m2 * ((M * inv[a]) % q)) % q];
                        }
                    }
                    cplx s = acc.get();
                    if (std::abs(s.imag()) > 1e-9)
                        throw BoundViolation("weil_audit: Kloosterman sum not real");
                    double g = double(std::gcd(std::gcd(m1, m2), q));
                    double ratio = std::abs(s) / (bound_base * std::sqrt(g));
                    ++rep.triples;
                    if (ratio > rep.max_ratio) {
                        rep.max_ratio = ratio;
                        rep.at_q = q; rep.at_m1 = m1; rep.at_m2 = m2;
                    }
                    if (ratio > 1.0 + 1e-9)
                        throw BoundViolation("weil_audit: bound exceeded at q=" +
                                             std::to_string(q));
                }
            if (q <= 2) break; // +1 and -1 coincide mod 1, 2
        }
    }
    return rep;
}

std::vector<HyperbolaSolution> enumerate_hyperbola(long N, int sign, long X) {
    if (sign != 1 && sign != -1)
        throw UnsupportedParameterRange("enumerate_hyperbola: sign must be +-1");
    std::vector<HyperbolaSolution> out;
    for (long m = 1; m <= X; ++m) {
        long np = m - sign;
        if (np < 1) continue;
        auto md = divisors(m);
        auto nd = divisors(np);
        for (long m1 : md) {
            for (long n1 : nd) {
                if (n1 % N != 0) continue;
                out.push_back({m1, m / m1, n1, np / n1, sign});
            }
        }
    }
    return out;
}

} // namespace lsm
