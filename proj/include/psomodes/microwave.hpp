#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "psomodes/error.hpp"
#include "psomodes/netlist.hpp"
#include "psomodes/pso_model.hpp"

namespace psomodes {

/// Two-port chain matrix evaluated at one complex frequency: [V1; I1] = [a b; c d] [V2; I2].
struct Abcd {
    Complex a{1.0}, b{0.0}, c{0.0}, d{1.0};

    Complex det() const { return a * d - b * c; }

    friend Abcd operator*(const Abcd& x, const Abcd& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
};

inline Abcd series_impedance(Complex z) { return {1.0, z, 0.0, 1.0}; }
inline Abcd shunt_admittance(Complex y) { return {1.0, 0.0, y, 1.0}; }

/// Lossless line; at s = i omega this is cos, i z0 sin, i sin / z0, cos of omega len / v.
inline Abcd line_segment(double z0, double v, double length, Complex s) {
    if (!(z0 > 0.0) || !(v > 0.0) || !(length >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "line segment needs z0 > 0, v > 0 and length >= 0");
    }
    const Complex g = s * length / v;
    const Complex ch = std::cosh(g), sh = std::sinh(g);
    return {ch, z0 * sh, sh / z0, ch};
}

inline Abcd cascade(const std::vector<Abcd>& chain) {
    Abcd out;
    for (const auto& x : chain) out = out * x;
    return out;
}

/// Load value standing for an open circuit.
inline const Complex kOpen{std::numeric_limits<double>::infinity(), 0.0};

inline bool is_open(Complex z) { return std::isinf(z.real()) || std::isinf(z.imag()); }

/// (A Z_L + B) / (C Z_L + D); an open load gives A / C. Z_in = infinity raises PoleAtPoint.
inline Complex input_impedance(const Abcd& m, Complex load) {
    const bool open = is_open(load);
    const Complex num = open ? m.a : m.a * load + m.b;
    const Complex den = open ? m.c : m.c * load + m.d;
    if (std::abs(den) <= 1e-14 * std::abs(num)) {
        throw Error(ErrorCode::PoleAtPoint, "input impedance has a pole at this frequency");
    }
    return num / den;
}

inline Complex input_impedance(const std::vector<Abcd>& chain, Complex load) {
    return input_impedance(cascade(chain), load);
}

/// One-ports in parallel (admittances add). Opens drop out; a short wins.
inline Complex parallel(Complex z1, Complex z2) {
    if (is_open(z1)) return z2;
    if (is_open(z2)) return z1;
    if (z1 == Complex(0.0) || z2 == Complex(0.0)) return 0.0;
    return 1.0 / (1.0 / z1 + 1.0 / z2);
}

/// Shorted line of `length` seen from its open end, with shunt impedances hung off it at the
/// given distances from that end.
inline Complex shorted_line_with_shunts(double z0, double v, double length,
                                        std::vector<std::pair<double, Complex>> shunts, Complex s) {
    std::sort(shunts.begin(), shunts.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    double pos = length;
    Complex z = 0.0;
    for (const auto& [d, zs] : shunts) {
        z = parallel(input_impedance(line_segment(z0, v, pos - d, s), z), zs);
        pos = d;
    }
    return input_impedance(line_segment(z0, v, pos, s), z);
}

enum class EnvironmentKind {
    DirectFeedline,  ///< resonator open end -> Cr -> node of two matched feedline halves
    PurcellFilter,   ///< resonator open end -> Cr -> filter line shorted at both ends, tapped at xt by matched lines
};

/// Transmon environment parameters; lengths from the resonator short (xc) or the filter's left end (xt, xr).
struct EnvironmentParams {
    EnvironmentKind kind = EnvironmentKind::DirectFeedline;
    double lr = 0.0, xc = 0.0, cr = 0.0, cc = 0.0;
    double cj = 0.0, lj = 0.0;
    double nu = 0.0, z0 = 0.0;
    double lf = 0.0, xt = 0.0, xr = 0.0;  ///< PurcellFilter only
};

/// Reads lr, xc, Cr, Cc, Cj, Lj, nu, Z0 (and lf, xt, xr when lf exists) from the netlist's params.
inline EnvironmentParams environment_params(const Netlist& net) {
    auto get = [&](const char* name) {
        if (!net.find("param", name)) {
            throw Error(ErrorCode::MissingParameter, std::string("environment needs param '") + name + "'");
        }
        return parameter_value(net, name);
    };
    EnvironmentParams p;
    p.lr = get("lr");
    p.xc = get("xc");
    p.cr = get("Cr");
    p.cc = get("Cc");
    p.cj = get("Cj");
    p.lj = get("Lj");
    p.nu = get("nu");
    p.z0 = get("Z0");
    if (net.find("param", "lf")) {
        p.kind = EnvironmentKind::PurcellFilter;
        p.lf = get("lf");
        p.xt = get("xt");
        p.xr = get("xr");
    }
    return p;
}

/// Exact Y_e(s) of the continuous network seen from the transmon terminals, transmon removed.
inline Complex environment_admittance(const EnvironmentParams& p, Complex s) {
    if (s == Complex(0.0)) throw Error(ErrorCode::SingularAtPoint, "environment admittance is evaluated for s != 0");
    Complex z_end;  // impedance hanging off the resonator's open end, Cr included
    if (p.kind == EnvironmentKind::DirectFeedline) {
        z_end = 1.0 / (s * p.cr) + p.z0 / 2.0;
    } else {
        std::vector<std::pair<double, Complex>> left, right;
        for (double t : {p.xt, p.lf - p.xt}) {
            if (t <= p.xr) {
                left.emplace_back(p.xr - t, p.z0);
            } else {
                right.emplace_back(t - p.xr, p.z0);
            }
        }
        const Complex zl = shorted_line_with_shunts(p.z0, p.nu, p.xr, left, s);
        const Complex zr = shorted_line_with_shunts(p.z0, p.nu, p.lf - p.xr, right, s);
        z_end = 1.0 / (s * p.cr) + parallel(zl, zr);
    }
    const Complex z_open_side = input_impedance(line_segment(p.z0, p.nu, p.lr - p.xc, s), z_end);
    const Complex z_short_side = input_impedance(line_segment(p.z0, p.nu, p.xc, s), 0.0);
    const Complex z = parallel(z_open_side, z_short_side) + 1.0 / (s * p.cc);
    if (std::abs(z) == 0.0) throw Error(ErrorCode::PoleAtPoint, "environment admittance has a pole at this frequency");
    return 1.0 / z;
}

inline Complex environment_admittance(const EnvironmentParams& p, double omega) {
    return environment_admittance(p, Complex(0.0, omega));
}

/// Samples with |Y| above `factor` times the scan's median |Y| (treated as sitting on a pole).
inline std::vector<bool> pole_mask(const std::vector<Complex>& y, double factor = 1e3) {
    std::vector<double> mag;
    for (const auto& v : y) mag.push_back(std::abs(v));
    std::vector<bool> mask(y.size(), false);
    if (mag.empty()) return mask;
    auto sorted = mag;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    const double median = sorted[sorted.size() / 2];
    for (std::size_t i = 0; i < mag.size(); ++i) mask[i] = !std::isfinite(mag[i]) || mag[i] > factor * median;
    return mask;
}

/// Im Y(i omega) ~ -l_e_inv / omega + c_e omega over a log-spaced window.
struct ReactanceFit {
    double c_e = 0.0;       ///< F, >= 0
    double l_e_inv = 0.0;   ///< 1/H
    double f_lo = 0.0, f_hi = 0.0;
    int points = 0;
    double residual = 0.0;  ///< ||fit - Im Y|| / ||Im Y||
};

using AdmittanceFn = std::function<Complex(double omega)>;

inline std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        out[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, t);
    }
    out.back() = hi;
    return out;
}

inline ReactanceFit fit_reactances(const AdmittanceFn& y, double f_lo, double f_hi, int n_points) {
    if (!(f_lo > 0.0) || !(f_hi > f_lo) || n_points < 2) {
        throw Error(ErrorCode::InvalidArgument, "fit window needs 0 < f_lo < f_hi and at least 2 points");
    }
    const auto freqs = log_grid(f_lo, f_hi, n_points);
    std::vector<Complex> samples;
    Eigen::VectorXd w(n_points), b(n_points);
    for (int i = 0; i < n_points; ++i) {
        w(i) = 2.0 * std::numbers::pi * freqs[static_cast<std::size_t>(i)];
        try {
            samples.push_back(y(w(i)));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::PoleAtPoint) throw;
            throw Error(ErrorCode::WindowContainsResonance,
                        "fit window hits a pole at " + std::to_string(freqs[static_cast<std::size_t>(i)]) + " Hz");
        }
        b(i) = samples.back().imag();
    }
    // Between poles a (nearly) lossless susceptance only rises with frequency, so a sign change or
    // a drop between neighbors means a narrow resonance fell between two samples.
    for (int i = 1; i < n_points; ++i) {
        const bool sign_change = (b(i) > 0.0) != (b(i - 1) > 0.0);
        const bool drop = b(i) < b(i - 1) - 1e-9 * std::abs(b(i - 1));
        if (sign_change || drop) {
            throw Error(ErrorCode::WindowContainsResonance,
                        "Im Y is not increasing near " + std::to_string(freqs[static_cast<std::size_t>(i)]) + " Hz");
        }
    }
    const auto mask = pole_mask(samples);
    if (std::find(mask.begin(), mask.end(), true) != mask.end()) {
        throw Error(ErrorCode::WindowContainsResonance, "|Y| spikes inside the fit window");
    }

    // Columns scaled to unit norm so the two unknowns (1e-15 F vs ~1 1/H) solve on equal footing.
    Eigen::MatrixXd a(n_points, 2);
    a.col(0) = -w.cwiseInverse();
    a.col(1) = w;
    const Eigen::Vector2d scale(a.col(0).norm(), a.col(1).norm());
    Eigen::MatrixXd as = a * scale.cwiseInverse().asDiagonal();
    Eigen::Vector2d x = as.colPivHouseholderQr().solve(b).cwiseQuotient(scale);
    if (x(1) < 0.0) {  // c_e >= 0: refit the inductive term alone
        x(1) = 0.0;
        x(0) = a.col(0).dot(b) / a.col(0).squaredNorm();
    }
    ReactanceFit fit;
    fit.l_e_inv = x(0);
    fit.c_e = x(1);
    fit.f_lo = f_lo;
    fit.f_hi = f_hi;
    fit.points = n_points;
    const double bn = b.norm();
    fit.residual = bn > 0.0 ? (a * x - b).norm() / bn : (a * x).norm();
    return fit;
}

inline ReactanceFit fit_reactances(const EnvironmentParams& p, double f_lo = 0.1e9, double f_hi = 1.0e9,
                                   int n_points = 50) {
    return fit_reactances([&](double w) { return environment_admittance(p, w); }, f_lo, f_hi, n_points);
}

/// Parallel LRC picture of the transmon: L, C from the junction plus fitted environment reactances,
/// R from Re Y_e at the bare frequency.
struct AdmittanceT1 {
    double omega_q = 0.0;  ///< rad/s
    double t1 = 0.0;       ///< s
    double c_total = 0.0;  ///< F
    double l_total = 0.0;  ///< H
    Complex y_e{};         ///< Y_e(i omega_q)
};

inline AdmittanceT1 admittance_t1(const AdmittanceFn& y, double cj, double lj, const ReactanceFit& fit) {
    if (!(lj > 0.0) || !(cj > 0.0)) throw Error(ErrorCode::InvalidArgument, "Lj and Cj must be positive");
    const double l_inv = 1.0 / lj + fit.l_e_inv;
    if (!(l_inv > 0.0)) throw Error(ErrorCode::InvalidArgument, "total inverse inductance is not positive");
    AdmittanceT1 out;
    out.c_total = cj + fit.c_e;
    out.l_total = 1.0 / l_inv;
    out.omega_q = 1.0 / std::sqrt(out.l_total * out.c_total);
    try {
        out.y_e = y(out.omega_q);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::PoleAtPoint) throw;
        throw Error(ErrorCode::ResonantPoint, "Y_e has a pole at the transmon frequency");
    }
    if (!std::isfinite(out.y_e.real())) throw Error(ErrorCode::ResonantPoint, "Re Y_e is not finite at omega_q");
    out.t1 = out.y_e.real() > 0.0 ? out.c_total / out.y_e.real() : std::numeric_limits<double>::infinity();
    return out;
}

inline AdmittanceT1 admittance_t1(const EnvironmentParams& p, double lj, const ReactanceFit& fit) {
    return admittance_t1([&](double w) { return environment_admittance(p, w); }, p.cj, lj, fit);
}

} // namespace psomodes
