// Deterministic summation and quadrature primitives.
#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

namespace lsm {

using cplx = std::complex<double>;

struct NumericsError : std::runtime_error {
    explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};
struct BudgetExhausted : NumericsError { using NumericsError::NumericsError; };
struct NonFiniteTerm : NumericsError { using NumericsError::NumericsError; };
struct NoConvergence : NumericsError { using NumericsError::NumericsError; };
struct TailTooFat : NumericsError { using NumericsError::NumericsError; };

// Error-free transformation accumulator (Kahan-Babuska-Neumaier).
template <class T>
class kahan_sum {
    T s_{}, c_{};
public:
    kahan_sum& operator+=(const T& x) {
        T t = s_ + x;
        if (std::abs(s_) >= std::abs(x))
            c_ += (s_ - t) + x;
        else
            c_ += (x - t) + s_;
        s_ = t;
        return *this;
    }
    T get() const { return s_ + c_; }
};

template <>
class kahan_sum<cplx> {
    kahan_sum<double> re_, im_;
public:
    kahan_sum& operator+=(const cplx& x) {
        re_ += x.real();
        im_ += x.imag();
        return *this;
    }
    cplx get() const { return {re_.get(), im_.get()}; }
};

struct SeriesResult {
    cplx value;
    double tail_bound = 0.0;
    long terms_used = 0;
};

struct QuadratureResult {
    cplx value;
    double err_est = 0.0;
    long nodes = 0;
};

struct ContourSpec {
    double abscissa = 0.0;     // Re s on the line
    double half_height = 50.0; // integrate over [abscissa-iT, abscissa+iT]
    double node_density = 4.0; // initial panels per unit height
};

enum class TailKind { power, exponential };

// power: |a_n| <= |a_n0| * (n0/n)^rate eventually (rate > 1),
//   tail bounded by integral comparison.
// exponential: |a_{n+1}| <= rate * |a_n| eventually (rate < 1),
//   tail bounded by the geometric series.
struct TailModel {
    TailKind kind = TailKind::power;
    double rate = 2.0;
};

SeriesResult sum_with_tail(const std::function<cplx(long)>& term,
                           TailModel tail, double tol,
                           long budget = 4000000);

// Adaptive Gauss-Kronrod over (a,b); pass b = +infinity for a half line
// (decay_hint > 0 sets the scale of the substitution x = a + decay*t/(1-t)).
QuadratureResult integrate_interval(const std::function<cplx(double)>& f,
                                    double a, double b, double tol,
                                    double decay_hint = 1.0);

// (1/2 pi i) * integral of f over the segment [D - iT, D + iT] of the line
// Re s = D.  The truncation tail is estimated from the decay of |f| near the
// endpoints and folded into err_est.
QuadratureResult integrate_vertical_line(const std::function<cplx(cplx)>& f,
                                         const ContourSpec& spec, double tol);

} // namespace lsm
