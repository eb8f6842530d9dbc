#include "lsm/calibration.hpp"

#include "lsm/moments.hpp"
#include "lsm/regular.hpp"
#include "lsm/special.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lsm {

namespace {

// rho(z) = sqrt(z^2-1) - arccos(1/z), the exponential rate of K_{it}(tz)
// past the turning point z = 1
double rho(double z) { return std::sqrt(z * z - 1.0) - std::acos(1.0 / z); }

void bump(std::map<std::string, double>& m, const std::string& key, double x) {
    auto it = m.find(key);
    if (it == m.end() || it->second < x) m[key] = x;
}

// bound ratios for the two halves of the K_{it}(tz) estimate and for the
// oscillatory kernel; grid t = 1..50, z = 0.1..5.0
void kernel_ratios(std::map<std::string, double>& m) {
    for (long ti = 1; ti <= 50; ++ti) {
        double t = double(ti);
        for (long zi = 1; zi <= 50; ++zi) {
            double z = 0.1 * double(zi);
            double kv = bessel_k_imag(t, t * z);
            if (z >= 1.0) {
                double env = std::min(std::pow(t, -1.0 / 3.0),
                                      (z > 1.0) ? 1.0 / (std::sqrt(t) * std::pow(z * z - 1.0, 0.25))
                                                : 1e300);
                double lb = -M_PI * t / 2.0 - t * rho(z) + std::log(env);
                if (kv > 0.0) bump(m, "c_k_gt1", std::exp(std::log(kv) - lb));
            } else {
                double env = std::min(std::pow(t, -1.0 / 3.0),
                                      1.0 / (std::sqrt(t) * std::pow(1.0 - z * z, 0.25)));
                double lb = -M_PI * t / 2.0 + std::log(env);
                if (kv != 0.0) bump(m, "c_k_lt1", std::exp(std::log(std::abs(kv)) - lb));
            }
            cplx kp = kernel_k(+1, cplx(0.0, t), t * z);
            bump(m, "c_k_plus", std::abs(kp) * std::sqrt(t) * std::pow(1.0 + z * z, 0.25));
        }
    }
}

// decay of the transforms of the cutoff composite theta(x) = alpha(x)
// eta(d^2 N / x): with M the start of the support and a = sqrt(M y)/t,
//   |g^-(y)| <= c e^{-t rho(a)} / (a t)^{3/2}   for a > 2,
//   |g^+(y)| <= c t^{-5/2} (1 + a^2)^{-5/4}     for a > 1
void transform_ratios(std::map<std::string, double>& m) {
    for (double t : {1.0, 2.0, 5.0, 10.0, 20.0, 35.0, 50.0}) {
        auto sys = build_cutoffs(t, 1);
        long d = long(std::ceil(std::sqrt(2.0 * sys.P)));
        double scale = double(d) * double(d);
        double M = std::max(sys.P, scale / 2.0);
        ThetaComposite th{&sys, scale, cplx(-1.0, 0.0)};
        cplx v(0.0, t / 2.0);
        for (double a : {2.05, 2.2, 2.5, 3.0, 4.0, 5.0}) {
            double y = a * a * t * t / M;
            auto g = g_transform(-1, v, y, th, 1e-12);
            if (std::abs(g.value) == 0.0) continue;
            bump(m, "c_g_minus",
                 std::exp(std::log(std::abs(g.value)) + t * rho(a) + 1.5 * std::log(a * t)));
        }
        for (double a : {1.1, 1.5, 2.0, 3.0, 5.0}) {
            double y = a * a * t * t / M;
            auto g = g_transform(+1, v, y, th, 1e-12);
            bump(m, "c_g_plus",
                 std::abs(g.value) * std::pow(t, 2.5) * std::pow(1.0 + a * a, 1.25));
        }
    }
}

// shape of the pointwise remainder: |V1| k N / (1+|t|)^{1.1} on the
// acceptance grid
void pointwise_ratios(std::map<std::string, double>& m) {
    for (long k : {2L, 3L, 4L}) {
        for (long N : {1L, 2L, 5L, 11L}) {
            for (double t : {0.0, 1.0, 5.0}) {
                auto r = second_moment(k, N, t);
                bump(m, "c_v1", std::abs(r.tail_V1) * double(k) * double(N) /
                                    std::pow(1.0 + std::abs(t), 1.1));
            }
        }
    }
}

// shape of the integrated remainder: |V2| k N / T^{1.1}
void integrated_ratios(std::map<std::string, double>& m) {
    for (auto [k, N] : {std::pair<long, long>{2, 5}, {3, 2}}) {
        auto r = integrated_moment(k, N, 5.0, 30000);
        bump(m, "c_v2", std::abs(r.V2) * double(k) * double(N) / std::pow(5.0, 1.1));
    }
}

// seed points for the direct-vs-continued alpha series slack: the part of
// |A - (script A + R)| not covered by the reported truncation tails, scaled
// by P N / (P N)^{0.05}
void decomposition_ratios(std::map<std::string, double>& m) {
    const cplx u(0.0, 0.1);
    const long k = 2;
    for (auto [N, t] : {std::pair<long, double>{2, 0.4}, {3, 1.5}}) {
        auto sys = build_cutoffs(t, N);
        const cplx v(0.0, t);
        cplx A = a_script(u, v, cplx(2.0, 0.0), sys);
        auto rp = r_dual_pair(u, v, k, N, sys);
        auto rm = r_dual_pair(-u, v, k, N, sys);
        cplx n2u = std::exp(2.0 * u * std::log(double(N)));
        double PN = sys.P * double(N);
        for (int sign : {+1, -1}) {
            auto dir = a_direct(sign, u, v, cplx(2.0, 0.0), N, sys, 0, 5e-4);
            cplx R = (sign > 0) ? rp.plus.value + n2u * rm.plus.value
                                : rp.minus.value + n2u * rm.minus.value;
            double tails = dir.tail_bound +
                           ((sign > 0) ? rp.plus.tail_bound + std::abs(n2u) * rm.plus.tail_bound
                                       : rp.minus.tail_bound + std::abs(n2u) * rm.minus.tail_bound);
            double excess = std::max(0.0, std::abs(dir.value - (A + R)) - tails);
            bump(m, "c_decomp", excess * PN / std::pow(PN, 0.05));
        }
    }
    bump(m, "c_decomp", 0.5); // floor so the frozen slack never degenerates
}

} // namespace

double Calibration::at(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end())
        throw CalibrationError("calibration: missing constant " + key);
    return it->second;
}

std::string default_calibration_path() {
#ifdef LSM_CALIBRATION_FILE
    return LSM_CALIBRATION_FILE;
#else
    return "data/calibration.txt";
#endif
}

Calibration load_calibration(const std::string& path) {
    std::string p = path.empty() ? default_calibration_path() : path;
    std::ifstream in(p);
    if (!in) throw CalibrationError("calibration: cannot open " + p);
    Calibration cal;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        double value;
        if (!(ls >> key >> value))
            throw CalibrationError("calibration: bad line '" + line + "' in " + p);
        cal.values[key] = value;
    }
    if (cal.values.empty())
        throw CalibrationError("calibration: no constants in " + p);
    return cal;
}

void write_calibration(const std::string& path, const Calibration& cal) {
    std::ofstream out(path);
    if (!out) throw CalibrationError("calibration: cannot write " + path);
    out << "# frozen audit constants: observed seed-grid maxima times a 1.5\n"
           "# safety margin; regenerate with `lsm --recalibrate`\n";
    char buf[64];
    for (const auto& [key, value] : cal.values) {
        std::snprintf(buf, sizeof buf, "%.17g", value);
        out << key << ' ' << buf << '\n';
    }
    if (!out.flush()) throw CalibrationError("calibration: write failed for " + path);
}

std::map<std::string, double> audit_maxima() {
    std::map<std::string, double> m;
    kernel_ratios(m);
    transform_ratios(m);
    pointwise_ratios(m);
    integrated_ratios(m);
    return m;
}

Calibration run_calibration() {
    Calibration cal;
    cal.values["format_version"] = 1.0;
    auto m = audit_maxima();
    decomposition_ratios(m);
    for (const auto& [key, value] : m) cal.values[key] = 1.5 * value;
    return cal;
}

} // namespace lsm
