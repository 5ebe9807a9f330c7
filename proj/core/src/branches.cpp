#include "cfgrid/branches.hpp"

#include <cmath>

#include "cfgrid/error.hpp"

namespace cfgrid {

namespace {
constexpr Complex kJ{0.0, 1.0};
}

Complex rl_admittance(const ComplexFrequency& xi, double R, double L, double eps_sing) {
    Complex z = L * xi.value() + R;
    if (!(std::abs(z) > eps_sing)) fail(ErrorKind::SingularAdmittance, "|L xi + R| <= eps_sing");
    return 1.0 / z;
}

ComplexFrequency chi_rl(const ComplexFrequency& xi, Complex dxi_dt, double R, double L, double eps_sing) {
    if (xi.singular) return ComplexFrequency::flagged();
    Complex den = xi.value() + R / L;
    if (!(std::abs(den) > eps_sing)) return ComplexFrequency::flagged();
    return ComplexFrequency::from(-dxi_dt / den);
}

Complex gc_admittance(const ComplexFrequency& eta, double G, double C) { return C * eta.value() + G; }

ComplexFrequency chi_gc(const ComplexFrequency& eta, Complex deta_dt, double G, double C, double eps_sing) {
    if (eta.singular) return ComplexFrequency::flagged();
    Complex den = eta.value() + G / C;
    if (!(std::abs(den) > eps_sing)) return ComplexFrequency::flagged();
    return ComplexFrequency::from(deta_dt / den);
}

double equivalent_resistance(double i, double di_dt, double R, double L, double eps_mag) {
    if (!(std::abs(i) > eps_mag)) fail(ErrorKind::MagnitudeUnderflow, "|i| <= eps_mag");
    return L * di_dt / i + R;
}

Block2 series_block(Complex y) {
    Block2 b;
    b << -y, y, y, -y;
    return b;
}

// ======================================================================
// Transformer
// ======================================================================

Block2 transformer_admittance_block(const TransformerState& ts) {
    if (!(ts.m > 0.0)) fail(ErrorKind::InvalidArgument, "transformer tap m must be positive");
    const Complex tap = std::polar(ts.m, ts.alpha);
    Block2 b;
    b << -ts.y_t, tap * ts.y_t, std::conj(tap) * ts.y_t, -ts.m * ts.m * ts.y_t;
    return b;
}

Block2 transformer_chi_block(const TransformerState& ts) {
    if (!(ts.m > 0.0)) fail(ErrorKind::InvalidArgument, "transformer tap m must be positive");
    const double r = ts.dm_dt / ts.m;
    Block2 x;
    x << 0.0, Complex(r, ts.dalpha_dt), Complex(r, -ts.dalpha_dt), 2.0 * r;
    return x;
}

Block2 transformer_admittance_dot(const TransformerState& ts) {
    return transformer_chi_block(ts).cwiseProduct(transformer_admittance_block(ts));
}

// ======================================================================
// Converter
// ======================================================================

ConverterCurrents converter_primitive(const ConverterState& cs, Complex y) {
    ConverterCurrents out;
    out.v_int = cs.v_dc * std::polar(cs.m, cs.theta_ac + cs.alpha);
    const Complex v_ac = std::polar(cs.v_ac, cs.theta_ac);
    out.i_ac = (out.v_int - v_ac) * y;
    // 0 = v_dc i_dc + Re{v_int conj(i_ac)}
    out.i_dc = -std::real(out.v_int * std::conj(out.i_ac)) / cs.v_dc;
    return out;
}

Block2 converter_admittance_block(const ConverterState& cs, Complex y) {
    if (!(cs.m > 0.0 && cs.v_dc > 0.0 && cs.v_ac > 0.0))
        fail(ErrorKind::InvalidArgument, "converter block needs m, v_ac, v_dc > 0");
    const double g = y.real(), b = y.imag();
    const double phase = cs.alpha + cs.theta_ac;
    Block2 blk;
    blk(0, 0) = -y;
    blk(0, 1) = std::polar(cs.m, phase) * y;
    blk(1, 0) = std::polar(cs.m, -phase) * y;
    blk(1, 1) = Complex(-cs.m * cs.m * g,
                        cs.m * (cs.v_ac / cs.v_dc) * (g * std::sin(cs.alpha) - b * std::cos(cs.alpha)));
    return blk;
}

ConverterChi converter_chi_block(const ConverterState& cs, Complex y, double eps_sing) {
    const double g = y.real(), b = y.imag();
    const double r = cs.dm_dt / cs.m;
    const double phase_rate = cs.dalpha_dt + cs.dtheta_ac_dt;
    ConverterChi out;
    out.chi(0, 0) = 0.0;
    out.chi(0, 1) = Complex(r, phase_rate);
    out.chi(1, 0) = Complex(r, -phase_rate);

    const double sa = std::sin(cs.alpha), ca = std::cos(cs.alpha);
    const double s = g * sa - b * ca;
    out.y_dcdc_1 = -cs.m * cs.m * g;
    out.y_dcdc_2 = Complex(0.0, cs.m * (cs.v_ac / cs.v_dc) * s);
    out.chi_dcdc_1 = 2.0 * r;
    const double log_rate = r + cs.dv_ac_dt / cs.v_ac - cs.dv_dc_dt / cs.v_dc;
    if (std::abs(s) > eps_sing) {
        out.chi_dcdc_2 = log_rate + cs.dalpha_dt * (g * ca + b * sa) / s;
    } else {
        out.chi_dcdc_2 = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
        out.singular_dcdc_2 = true;
    }

    const Complex y_dcdc = out.y_dcdc_1 + out.y_dcdc_2;
    const Complex dot = converter_admittance_dot(cs, y)(1, 1);
    if (std::abs(y_dcdc) > eps_sing) {
        out.chi(1, 1) = dot / y_dcdc;
    } else {
        out.chi(1, 1) = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
        out.singular[3] = true;
    }
    return out;
}

Block2 converter_admittance_dot(const ConverterState& cs, Complex y) {
    const Block2 blk = converter_admittance_block(cs, y);
    const double g = y.real(), b = y.imag();
    const double r = cs.dm_dt / cs.m;
    const double phase_rate = cs.dalpha_dt + cs.dtheta_ac_dt;
    Block2 d;
    d(0, 0) = 0.0;
    d(0, 1) = Complex(r, phase_rate) * blk(0, 1);
    d(1, 0) = Complex(r, -phase_rate) * blk(1, 0);
    const double sa = std::sin(cs.alpha), ca = std::cos(cs.alpha);
    const double s = g * sa - b * ca;
    const double k = cs.m * cs.v_ac / cs.v_dc;
    const double dk = k * (r + cs.dv_ac_dt / cs.v_ac - cs.dv_dc_dt / cs.v_dc);
    const double ds = cs.dalpha_dt * (g * ca + b * sa);
    d(1, 1) = Complex(-2.0 * cs.m * cs.dm_dt * g, dk * s + k * ds);
    return d;
}

}  // namespace cfgrid
