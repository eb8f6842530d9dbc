#include "lsm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace lsm {

SeriesResult sum_with_tail(const std::function<cplx(long)>& term,
                           TailModel tail, double tol, long budget) {
    kahan_sum<cplx> acc;
    double tail_bound = std::numeric_limits<double>::infinity();
    long n = 0;
    // require a few consecutive terms under the threshold so that interior
    // zeros of oscillatory terms do not trigger a premature stop
    int quiet = 0;
    const int quiet_needed = 3;
    // envelope of |a_j| j^rate over a trailing window, so the bound is not
    // taken from a single atypically small coefficient
    const int W = 128;
    double window[W];
    for (int i = 0; i < W; ++i) window[i] = 0.0;
    double env = 0.0;
    while (n < budget) {
        ++n;
        cplx t = term(n);
        if (!std::isfinite(t.real()) || !std::isfinite(t.imag()))
            throw NonFiniteTerm("sum_with_tail: term " + std::to_string(n) + " not finite");
        acc += t;
        double at = std::abs(t);
        if (tail.kind == TailKind::power) {
            // with |a_m| <= A m^{-rate} for m >= n and rate > 1:
            // sum_{m>n} <= A n^{1-rate} / (rate - 1)
            double weighted = at * std::pow(double(n), tail.rate);
            double evicted = window[n % W];
            window[n % W] = weighted;
            if (weighted >= env) {
                env = weighted;
            } else if (evicted == env) {
                env = 0.0;
                for (int i = 0; i < W; ++i) env = std::max(env, window[i]);
            }
            tail_bound = env * std::pow(double(n), 1.0 - tail.rate) / (tail.rate - 1.0);
        } else {
            tail_bound = at * tail.rate / (1.0 - tail.rate);
        }
        if (tail_bound < tol) {
            if (++quiet >= quiet_needed) break;
        } else {
            quiet = 0;
        }
    }
    if (tail_bound >= tol)
        throw BudgetExhausted("sum_with_tail: tail bound " + std::to_string(tail_bound) +
                              " >= tol after " + std::to_string(n) + " terms");
    return {acc.get(), tail_bound, n};
}

namespace {

// Gauss 7 / Kronrod 15 nodes on [-1,1]
const double xgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
const double wgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
const double wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelResult {
    cplx value;
    double err;
};

PanelResult gk15(const std::function<cplx(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    cplx fc = f(c);
    cplx resk = fc * wgk[7];
    cplx resg = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
        double dx = h * xgk[j];
        cplx fs = f(c - dx) + f(c + dx);
        resk += fs * wgk[j];
        if (j % 2 == 1) resg += fs * wg[j / 2];
    }
    resk *= h;
    resg *= h;
    double err = std::abs(resk - resg);
    err = std::pow(200.0 * err, 1.5);
    double scale = std::abs(resk);
    if (scale > 0.0 && err > scale) err = scale;
    return {resk, std::min(err, std::abs(resk - resg) * 200.0)};
}

struct Panel {
    double a, b;
    cplx value;
    double err;
};

QuadratureResult adaptive_finite(const std::function<cplx(double)>& f,
                                 double a, double b, double tol,
                                 int initial_panels) {
    std::vector<Panel> heap;
    long nodes = 0;
    initial_panels = std::max(1, initial_panels);
    for (int i = 0; i < initial_panels; ++i) {
        double pa = a + (b - a) * i / initial_panels;
        double pb = a + (b - a) * (i + 1) / initial_panels;
        auto r = gk15(f, pa, pb);
        nodes += 15;
        heap.push_back({pa, pb, r.value, r.err});
    }
    auto cmp = [](const Panel& x, const Panel& y) { return x.err < y.err; };
    std::make_heap(heap.begin(), heap.end(), cmp);
    const size_t max_panels = 20000;
    while (true) {
        kahan_sum<cplx> vs;
        kahan_sum<double> es;
        for (const auto& p : heap) {
            vs += p.value;
            es += p.err;
        }
        if (es.get() < tol || heap.size() >= max_panels) {
            if (es.get() >= tol && heap.size() >= max_panels)
                throw NoConvergence("integrate_interval: error " + std::to_string(es.get()) +
                                    " >= tol with max panels");
            // deterministic final pass: sum in interval order
            std::vector<Panel> sorted = heap;
            std::sort(sorted.begin(), sorted.end(),
                      [](const Panel& x, const Panel& y) { return x.a < y.a; });
            kahan_sum<cplx> v2;
            kahan_sum<double> e2;
            for (const auto& p : sorted) {
                v2 += p.value;
                e2 += p.err;
            }
            return {v2.get(), e2.get(), nodes};
        }
        std::pop_heap(heap.begin(), heap.end(), cmp);
        Panel worst = heap.back();
        heap.pop_back();
        double m = 0.5 * (worst.a + worst.b);
        auto r1 = gk15(f, worst.a, m);
        auto r2 = gk15(f, m, worst.b);
        nodes += 30;
        heap.push_back({worst.a, m, r1.value, r1.err});
        std::push_heap(heap.begin(), heap.end(), cmp);
        heap.push_back({m, worst.b, r2.value, r2.err});
        std::push_heap(heap.begin(), heap.end(), cmp);
    }
}

} // namespace

QuadratureResult integrate_interval(const std::function<cplx(double)>& f,
                                    double a, double b, double tol,
                                    double decay_hint) {
    if (std::isinf(b)) {
        if (decay_hint <= 0) decay_hint = 1.0;
        const double L = decay_hint;
        // x = a + L * t/(1-t), dx = L/(1-t)^2 dt, t in (0,1)
        auto g = [&](double t) -> cplx {
            double om = 1.0 - t;
            double x = a + L * t / om;
            if (!std::isfinite(x)) return {0.0, 0.0};
            cplx v = f(x);
            return v * (L / (om * om));
        };
        return adaptive_finite(g, 0.0, 1.0, tol, 8);
    }
    int panels = 4;
    return adaptive_finite(f, a, b, tol, panels);
}

QuadratureResult integrate_vertical_line(const std::function<cplx(cplx)>& f,
                                         const ContourSpec& spec, double tol) {
    const double D = spec.abscissa, T = spec.half_height;
    auto g = [&](double y) -> cplx { return f(cplx(D, y)); };
    // truncation tail: fit a local exponential decay to |f| near each end
    // (checked before integrating so a growing integrand fails fast)
    double tail = 0.0;
    for (double sgn : {-1.0, 1.0}) {
        double f1 = std::abs(f(cplx(D, sgn * T)));
        double f0 = std::abs(f(cplx(D, sgn * 0.9 * T)));
        if (f1 <= 0) continue;
        if (f0 > f1) {
            double lambda = std::log(f0 / f1) / (0.1 * T);
            tail += f1 / lambda;
        } else {
            throw TailTooFat("integrate_vertical_line: |f| not decaying at the contour ends");
        }
    }
    int panels = std::max(8, int(2.0 * T * spec.node_density / 15.0));
    auto r = adaptive_finite(g, -T, T, tol * 2.0 * M_PI, panels);
    // value = (1/2 pi i) * i * int f(D+iy) dy = (1/2 pi) * int f(D+iy) dy
    return {r.value / (2.0 * M_PI), (r.err_est + tail) / (2.0 * M_PI), r.nodes};
}

} // namespace lsm
