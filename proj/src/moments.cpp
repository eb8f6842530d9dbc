#include "lsm/moments.hpp"
#include "lsm/arith.hpp"
#include "lsm/special.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

namespace lsm {

namespace {

cplx powc(double base, cplx e) { return std::exp(e * std::log(base)); }

long mod_inv(long a, long m) {
    long t = 0, nt = 1, r = m, nr = a % m;
    while (nr != 0) {
        long q = r / nr;
        std::swap(t -= q * nt, nt);
        std::swap(r -= q * nr, nr);
    }
    return t < 0 ? t + m : t;
}

// S(g,1;q) through tables per prime power: for q = q1 q2 with (q1,q2) = 1,
// S(g,1;q) = S(g c2^{-2},1;q1) S(g c1^{-2},1;q2) where ci is the cofactor.
// Each prime-power table is filled by an incremental rotation over the
// invertible residues, cost p^e phi(p^e) once per modulus actually used.
class kloos_engine {
public:
    explicit kloos_engine(long qmax) : info_(qmax + 1) {
        spf_.assign(qmax + 1, 0);
        for (long i = 2; i <= qmax; ++i)
            if (!spf_[i])
                for (long j = i; j <= qmax; j += i)
                    if (!spf_[j]) spf_[j] = int(i);
    }

    double at(long q, long g) {
        if (q == 1) return 1.0;
        MInfo& mi = info_[q];
        if (!mi.ready) prepare(q, mi);
        double r = 1.0;
        for (const Part& p : mi.parts)
            r *= p.tab[((g % p.pe) * p.mult) % p.pe];
        return r;
    }

private:
    struct Part {
        long pe, mult;
        const double* tab;
    };
    struct MInfo {
        std::vector<Part> parts;
        bool ready = false;
    };

    std::vector<int> spf_;
    std::vector<MInfo> info_;
    std::unordered_map<long, std::vector<double>> pp_;

    const double* pp_table(long pe, long p) {
        auto it = pp_.find(pe);
        if (it != pp_.end()) return it->second.data();
        std::vector<double> tab(pe, 0.0);
        const double w = 2.0 * M_PI / double(pe);
        for (long a = 1; a < pe; ++a) {
            if (a % p == 0) continue;
            long ai = mod_inv(a, pe);
            cplx z = std::polar(1.0, w * double(ai));
            const cplx rot = std::polar(1.0, w * double(a));
            double* tb = tab.data();
            for (long g = 0; g < pe; ++g) {
                tb[g] += z.real();
                z *= rot;
            }
        }
        auto ins = pp_.emplace(pe, std::move(tab));
        return ins.first->second.data();
    }

    void prepare(long q, MInfo& mi) {
        long r = q;
        while (r > 1) {
            long p = spf_[r], pe = 1;
            while (r % p == 0) {
                r /= p;
                pe *= p;
            }
            long c = (q / pe) % pe;
            long mult = 1;
            if (pe > 1 && c != 1) {
                long ci = mod_inv(c, pe);
                mult = (ci * ci) % pe;
            }
            mi.parts.push_back({pe, mult, pp_table(pe, p)});
        }
        mi.ready = true;
    }
};

// J_nu on a uniform grid with 4-point Lagrange interpolation; the grid step
// keeps the interpolation error near 3e-11 * max|J''''|
class jtable {
public:
    jtable(double nu, double xmax) : h_(0.005) {
        long n = long(std::ceil(xmax / h_)) + 4;
        t_.resize(n);
        for (long i = 0; i < n; ++i) t_[i] = std::cyl_bessel_j(nu, double(i) * h_);
    }

    double operator()(double x) const {
        double s = x / h_;
        long i = long(s);
        if (i < 1) i = 1;
        if (i > long(t_.size()) - 3) i = long(t_.size()) - 3;
        double f = s - double(i);
        double fm = f + 1.0, f0 = f, f1 = f - 1.0, f2 = f - 2.0;
        return t_[i - 1] * (f0 * f1 * f2) * (-1.0 / 6.0) +
               t_[i] * (fm * f1 * f2) * 0.5 +
               t_[i + 1] * (fm * f0 * f2) * (-0.5) +
               t_[i + 2] * (fm * f0 * f1) * (1.0 / 6.0);
    }

private:
    double h_;
    std::vector<double> t_;
};

// tau_v over [A, B] into out[m - A]; pairs (delta, m/delta) contribute
// 2 cos(t_v log(m/delta^2)) when v = i t_v, 2 cosh(v log(m/delta^2)) otherwise
void sieve_tau(cplx v, long A, long B, std::vector<cplx>& out) {
    out.assign(B - A + 1, cplx(0.0, 0.0));
    const bool vimag = (v.real() == 0.0);
    const double tv = v.imag();
    for (long del = 1; del * del <= B; ++del) {
        const double ld2 = 2.0 * std::log(double(del));
        long start = std::max(A, del * del);
        long m = ((start + del - 1) / del) * del;
        for (; m <= B; m += del) {
            if (m == del * del) {
                out[m - A] += 1.0;
                continue;
            }
            double w = std::log(double(m)) - ld2;
            if (vimag)
                out[m - A] += 2.0 * std::cos(tv * w);
            else
                out[m - A] += 2.0 * std::cosh(v * w);
        }
    }
}

struct HypCore {
    cplx plus, minus;
    double tail = 0.0;
    long terms = 0;
};

// core hyperbola sums without their gamma/cosine prefactors:
//   plus  = sum_{m>=2} tau_v(m) sig(m-1) m^{u-l} 2F1(l-u+v, l-u-v, 2l; 1/m)
//   minus = sum_{m>=1} tau_v(m) sig(m+1) m^{u-l} 2F1(...; -1/m)
// where sig(n) = sum over n1 | n with N | n1 of n1^{-2u}
HypCore hyperbola_core(cplx u, cplx v, cplx lam, long N, long X) {
    const cplx a = lam - u + v, b = lam - u - v, c = 2.0 * lam;
    const int JMAX = 128;
    std::vector<cplx> co(JMAX);
    co[0] = 1.0;
    for (int j = 1; j < JMAX; ++j)
        co[j] = co[j - 1] * (a + double(j - 1)) * (b + double(j - 1)) /
                ((c + double(j - 1)) * double(j));
    auto fser = [&](double y) -> cplx {
        cplx s = co[0];
        double yj = 1.0;
        for (int j = 1; j < JMAX; ++j) {
            yj *= y;
            cplx t = co[j] * yj;
            s += t;
            if (std::abs(t) < 1e-17 * (1.0 + std::abs(s))) break;
        }
        return s;
    };

    const bool uzero = (u == cplx(0.0, 0.0));
    const bool ureal = (u.imag() == 0.0);

    kahan_sum<cplx> plus, minus;
    double rho = lam.real() - u.real() - 0.2;
    if (rho < 1.05) rho = 1.05;
    const int W = 512;
    std::vector<double> window(W, 0.0);
    double env = 0.0;

    const long L = 1L << 20;
    std::vector<cplx> tau, sig;
    std::vector<double> lnm;
    for (long A = 1; A <= X; A += L) {
        const long B = std::min(X, A + L - 1);
        const long n0 = A - 1; // sigma and lnm cover [A-1, B+1]
        lnm.resize(B - n0 + 2);
        for (long n = std::max(1L, n0); n <= B + 1; ++n)
            lnm[n - n0] = std::log(double(n));
        sieve_tau(v, A, B, tau);
        sig.assign(B - n0 + 2, cplx(0.0, 0.0));
        for (long d1 = N; d1 <= B + 1; d1 += N) {
            long first = std::max(std::max(n0, 1L), d1);
            long n = ((first + d1 - 1) / d1) * d1;
            if (n > B + 1) continue;
            cplx val;
            if (uzero)
                val = 1.0;
            else if (ureal)
                val = std::pow(double(d1), -2.0 * u.real());
            else
                val = std::exp(-2.0 * u * std::log(double(d1)));
            for (; n <= B + 1; n += d1) sig[n - n0] += val;
        }
        for (long m = A; m <= B; ++m) {
            cplx mp = std::exp((u - lam) * lnm[m - n0]);
            double y = 1.0 / double(m);
            cplx fp(0.0, 0.0), fm;
            if (m >= 2) fp = (m < 8) ? gauss_2f1(a, b, c, y) : fser(y);
            fm = (m < 8) ? gauss_2f1(a, b, c, -y) : fser(-y);
            cplx base = tau[m - A] * mp;
            cplx tp = (m >= 2) ? base * sig[m - 1 - n0] * fp : cplx(0.0, 0.0);
            cplx tm = base * sig[m + 1 - n0] * fm;
            plus += tp;
            minus += tm;
            double at = (std::abs(tp) + std::abs(tm)) * std::pow(double(m), rho);
            double evicted = window[m % W];
            window[m % W] = at;
            if (at >= env) {
                env = at;
            } else if (evicted == env) {
                env = 0.0;
                for (int i = 0; i < W; ++i) env = std::max(env, window[i]);
            }
        }
    }
    double tail = env * std::pow(double(X), 1.0 - rho) / (rho - 1.0);
    return {plus.get(), minus.get(), tail, X};
}

} // namespace

long default_truncation(long k, long N) {
    return std::max(1000L, (k * N) * (k * N));
}

double w_main(long k, long N, double t) {
    return std::log(double(N)) + 2.0 * euler_gamma - 2.0 * std::log(2.0 * M_PI) +
           2.0 * digamma(cplx(double(k), t)).real();
}

cplx u_main(long k, double t) {
    if (t == 0.0)
        throw RemovableSingularity("u_main: t = 0 is a removable point, use u_main_limit0");
    cplx it(0.0, t);
    cplx first = riemann_zeta(1.0 + 2.0 * it) * powc(2.0 * M_PI, -2.0 * it) *
                 std::exp(log_gamma(double(k) + it) - log_gamma(double(k) - it));
    return {2.0 * first.real(), 0.0};
}

cplx u_main_limit0(long k) {
    return 0.5 * (u_main(k, 1e-5) + u_main(k, -1e-5));
}

cplx d_term(cplx u, cplx v, cplx lambda) {
    if (std::abs(v) < 1e-12)
        throw PoleAtVZero("d_term: zeta(1 +- 2v) poles at v = 0");
    auto half = [&](cplx vv) {
        return riemann_zeta(1.0 + 2.0 * vv) * powc(2.0 * M_PI, 2.0 * u - 2.0 * vv - 1.0) *
               std::exp(log_gamma(lambda - u + vv) - log_gamma(lambda + u - vv));
    };
    return half(v) + half(-v);
}

SeriesResult dn_direct(const MomentParams& params) {
    cplx lam = (params.lambda == cplx(0.0, 0.0)) ? cplx(double(params.k), 0.0)
                                                 : params.lambda;
    if (std::abs(lam.imag()) > 1e-12)
        throw UnsupportedParameterRange("dn_direct: the Bessel order 2l-1 must be real");
    const double nu = 2.0 * lam.real() - 1.0;
    if (!(params.u.real() > 0.75) || !(lam.real() > 0.75))
        throw OutsideConvergenceRegion("dn_direct: need Re u > 3/4 and Re l > 3/4");
    const long N = params.N;
    const long X = params.X > 0 ? params.X : default_truncation(params.k, N);
    const cplx u = params.u, v(0.0, params.t);

    // q cut: beyond x = x_cut the order-nu envelope (x/2)^nu / Gamma(nu+1)
    // is under 1e-10; clamped for low orders where that point is impractical
    double x_cut = 2.0 * std::exp((std::lgamma(nu + 1.0) + std::log(1e-10)) / nu);
    x_cut = std::clamp(x_cut, 0.3, 6.0);
    const long Qmin = 64;
    // smooth tapers: the Bessel phase runs through many cycles across each
    // taper, so the oscillatory truncation bias is suppressed far below the
    // monotone envelope bound.  What survives is a smooth c/X component,
    // removed by Richardson extrapolation of the two tapered partial sums
    // at X/2 and X.
    const long Xh = X / 2;
    const long Xhe = long(std::ceil(1.3 * double(Xh)));
    const long Xe = long(std::ceil(1.3 * double(X)));
    const long qmax = std::max(Qmin, long(std::ceil(4.0 * M_PI * std::sqrt(double(Xe)) / x_cut)));

    jtable jt(nu, 4.0 * M_PI * std::sqrt(double(Xe)) / double(N) + 1.0);
    kloos_engine ke(qmax);

    std::vector<cplx> tau;
    sieve_tau(v, 1, Xe, tau);
    std::vector<int> cnt(Xe + 1, 0);
    for (long d1 = 1; d1 <= Xe; ++d1)
        for (long m = d1; m <= Xe; m += d1) ++cnt[m];
    std::vector<std::vector<int>> sq(Xe + 1); // e >= 2 with e^2 | d
    for (long e = 2; e * e <= Xe; ++e)
        for (long d = e * e; d <= Xe; d += e * e) sq[d].push_back(int(e));

    auto bump = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
    auto taper = [&](long d, long lo, long hi) -> double {
        if (d <= lo) return 1.0;
        if (d >= hi) return 0.0;
        double s = double(d - lo) / double(hi - lo);
        return bump(1.0 - s) / (bump(1.0 - s) + bump(s));
    };

    kahan_sum<cplx> acc, acc_half;
    kahan_sum<double> qtail;
    const double ru = u.real();
    double rho = 0.5 + ru;
    const int W = 512;
    std::vector<double> window(W, 0.0);
    double env = 0.0;

    for (long d = 1; d <= Xe; ++d) {
        const double sqd = std::sqrt(double(d));
        const long Qd = std::max(Qmin, long(std::ceil(4.0 * M_PI * sqd / x_cut)));
        cplx inner(0.0, 0.0);
        for (long q = N; q <= Qd; q += N) {
            double Jx = jt(4.0 * M_PI * sqd / double(q));
            cplx T = tau[d - 1] * ke.at(q, d % q);
            for (int e : sq[d])
                if (q % e == 0) {
                    long d2 = d / (long(e) * e), q2 = q / e;
                    T += double(e) * tau[d2 - 1] * ke.at(q2, d2 % q2);
                }
            inner += (Jx / double(q)) * T;
        }
        cplx cd = std::exp((-0.5 - u) * std::log(double(d))) * inner;
        acc += taper(d, X, Xe) * cd;
        if (d < Xhe) acc_half += taper(d, Xh, Xhe) * cd;

        // truncated-q remainder: tau(d)^{3/2} tau(q) sqrt(q) Weil-type size
        // against the small-argument Bessel envelope, integrated over q > Qd
        double lq = std::log(double(Qd));
        double qm = std::pow(double(cnt[d]), 1.5) *
                    std::exp(nu * std::log(2.0 * M_PI * sqd) - std::lgamma(nu + 1.0) -
                             (nu - 0.5) * lq) *
                    (2.0 * lq) / ((nu - 0.5) * double(N));
        qtail += qm * std::pow(double(d), -0.5 - ru);

        double at = std::abs(cd) * std::pow(double(d), rho);
        double evicted = window[d % W];
        window[d % W] = at;
        if (at >= env) {
            env = at;
        } else if (evicted == env) {
            env = 0.0;
            for (int i = 0; i < W; ++i) env = std::max(env, window[i]);
        }
    }
    double dtail = env * std::pow(double(Xe), 1.0 - rho) / (rho - 1.0);
    // S(Y) = D - c/Y + o(1/Y); half the applied correction is kept as the
    // extrapolation's own uncertainty
    cplx corr = acc.get() - acc_half.get();
    return {acc.get() + corr, dtail + qtail.get() + 0.5 * std::abs(corr), Xe};
}

ConvolutionBreakdown convolution_rhs(const MomentParams& params) {
    const long k = params.k, N = params.N;
    if (k < 2)
        throw WeightTooSmall("convolution_rhs: needs k >= 2");
    const cplx u = params.u, v(0.0, params.t);
    if (!(std::abs(u.real()) < double(k) - 1.0))
        throw OutsideConvergenceRegion("convolution_rhs: need |Re u| < k - 1");
    if (std::abs(u) < 1e-9)
        throw RemovableSingularity("convolution_rhs: u = 0 handled by second_moment");
    if (std::abs(v.real()) > 1e-12)
        throw OffCriticalV("convolution_rhs: need Re v = 0");
    const long X = params.X > 0 ? params.X : default_truncation(k, N);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const cplx lam(double(k), 0.0);
    const double sqN = std::sqrt(double(N));

    ConvolutionBreakdown out;
    out.zeta_block = riemann_zeta(1.0 + 2.0 * u);
    out.reflected_block =
        powc(2.0 * M_PI / sqN, 4.0 * u) *
        std::exp(log_gamma(lam - u + v) + log_gamma(lam - u - v) -
                 log_gamma(lam + u + v) - log_gamma(lam + u - v)) *
        riemann_zeta(1.0 - 2.0 * u);
    out.delta_block = 0.0;
    if (N == 1) {
        // the pair is even in v, so the v = 0 pole of each half cancels;
        // a symmetric off-pole evaluation keeps the error at O(v0^2)
        cplx vv = (std::abs(v) < 1e-8) ? cplx(0.0, 1e-5) : v;
        auto half = [&](cplx w) {
            return powc(2.0 * M_PI, 2.0 * u - 2.0 * w) *
                   std::exp(log_gamma(lam - u + w) - log_gamma(lam + u - w)) *
                   riemann_zeta(1.0 + 2.0 * w);
        };
        out.delta_block = sign * (half(vv) + half(-vv));
    }

    auto core = hyperbola_core(u, v, lam, N, X);
    const cplx P = std::exp(h_lambda_log_prefactor(lam, u, v));
    const cplx twist = 2.0 * powc(2.0 * M_PI, 2.0 * u);
    out.plus_block = twist * std::cos(M_PI * u) * P * core.plus;
    out.minus_block = twist * sign * std::cos(M_PI * v) * P * core.minus;
    out.total = out.zeta_block + out.reflected_block + out.delta_block +
                out.plus_block + out.minus_block;
    out.tail_bound = core.tail * std::abs(twist) * std::abs(P) *
                     std::max(std::abs(std::cos(M_PI * u)), std::abs(std::cos(M_PI * v)));
    out.terms_used = core.terms;
    return out;
}

MomentBreakdown second_moment(long k, long N, double t, long X, double tol) {
    if (k < 2)
        throw WeightTooSmall("second_moment: needs k >= 2");
    if (X <= 0) X = default_truncation(k, N);
    (void)tol;
    const cplx v(0.0, t);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;

    MomentBreakdown out;
    out.main_W = w_main(k, N, t);
    out.has_U = (N == 1);
    if (N == 1)
        out.main_U = (std::abs(t) < 1e-12) ? u_main_limit0(k) : u_main(k, t);

    auto core = hyperbola_core(cplx(0.0, 0.0), v, cplx(double(k), 0.0), N, X);
    // assemble in log space: exp(lp) decays like e^{-pi|t|} while the minus
    // block carries the compensating cosh(pi t)
    const double lp = h_lambda_log_prefactor(cplx(double(k), 0.0), 0.0, v).real();
    const double at = M_PI * std::abs(t);
    const double logcosh = (at > 30.0) ? at - M_LN2 : std::log(std::cosh(M_PI * t));
    out.tail_V1 = 2.0 * std::exp(lp) * core.plus +
                  2.0 * sign * std::exp(lp + logcosh) * core.minus;
    out.total = cplx(out.main_W, 0.0) + (out.has_U ? sign * out.main_U : cplx(0.0, 0.0)) +
                out.tail_V1;
    out.tail_bound = 2.0 * core.tail * (std::exp(lp) + std::exp(lp + logcosh));
    return out;
}

IntegratedMoment integrated_moment(long k, long N, double T, long X, double tol) {
    if (k < 2)
        throw WeightTooSmall("integrated_moment: needs k >= 2");
    if (X <= 0) X = default_truncation(k, N);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    double worst_tail = 0.0;
    auto ftot = [&](double t) -> cplx {
        auto r = second_moment(k, N, t, X, tol);
        worst_tail = std::max(worst_tail, r.tail_bound);
        return r.total;
    };
    auto fmain = [&](double t) -> cplx {
        cplx m(w_main(k, N, t), 0.0);
        if (N == 1)
            m += sign * (std::abs(t) < 1e-12 ? u_main_limit0(k) : u_main(k, t));
        return m;
    };
    auto I1 = integrate_interval(ftot, 0.0, T, tol);
    auto I2 = integrate_interval(fmain, 0.0, T, 0.5 * tol);
    IntegratedMoment out;
    out.lhs_integral = I1.value.real();
    out.main_integral = I2.value.real();
    out.V2 = out.lhs_integral - out.main_integral;
    out.err_est = I1.err_est + I2.err_est + worst_tail * T;
    return out;
}

} // namespace lsm
