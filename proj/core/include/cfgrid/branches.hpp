#pragma once

#include <Eigen/Core>
#include <array>

#include "cfgrid/complex_frequency.hpp"

namespace cfgrid {

/// 2x2 admittance block. Port order is (k, h) for transformers and (AC, DC)
/// for converters.
using Block2 = Eigen::Matrix2cd;

struct BranchCfState {
    Block2 y = Block2::Zero();
    Block2 chi = Block2::Zero();
    bool singular_flag = false;
};

struct TransformerState {
    double m = 1.0;
    double alpha = 0.0;
    double dm_dt = 0.0;
    double dalpha_dt = 0.0;
    Complex y_t{0.0, 0.0};
};

/// theta_ac and its rate are taken in whatever frame the AC quantities live
/// in; the physical CF uses the stationary frame (rate includes omega_nom).
struct ConverterState {
    double m = 1.0;
    double alpha = 0.0;
    double theta_ac = 0.0;
    double v_ac = 1.0;
    double v_dc = 1.0;
    double dm_dt = 0.0;
    double dalpha_dt = 0.0;
    double dtheta_ac_dt = 0.0;
    double dv_ac_dt = 0.0;
    double dv_dc_dt = 0.0;
};

// ----------------------------------------------------------------------
// RL / GC
// ----------------------------------------------------------------------

/// 1/(L xi + R). SingularAdmittance when |L xi + R| <= eps_sing.
Complex rl_admittance(const ComplexFrequency& xi, double R, double L, double eps_sing = kDefaultEpsSing);

/// -xi_dot/(xi + R/L); flagged when |xi + R/L| <= eps_sing.
ComplexFrequency chi_rl(const ComplexFrequency& xi, Complex dxi_dt, double R, double L,
                        double eps_sing = kDefaultEpsSing);

/// C eta + G
Complex gc_admittance(const ComplexFrequency& eta, double G, double C);

/// eta_dot/(eta + G/C); flagged when |eta + G/C| <= eps_sing.
ComplexFrequency chi_gc(const ComplexFrequency& eta, Complex deta_dt, double G, double C,
                        double eps_sing = kDefaultEpsSing);

/// L i_dot/i + R. MagnitudeUnderflow when |i| <= eps_mag.
double equivalent_resistance(double i, double di_dt, double R, double L, double eps_mag = kDefaultEpsMag);

// ----------------------------------------------------------------------
// Regulating transformer
// ----------------------------------------------------------------------

/// [[-Y_T, m e^{ja} Y_T], [m e^{-ja} Y_T, -m^2 Y_T]]
Block2 transformer_admittance_block(const TransformerState& ts);

/// [[0, m'/m + j a'], [m'/m - j a', 2 m'/m]]
Block2 transformer_chi_block(const TransformerState& ts);

/// Element-wise time derivative of the block.
Block2 transformer_admittance_dot(const TransformerState& ts);

// ----------------------------------------------------------------------
// AC/DC converter
// ----------------------------------------------------------------------

struct ConverterCurrents {
    Complex v_int{0.0, 0.0};
    Complex i_ac{0.0, 0.0};  // into the AC bus
    double i_dc = 0.0;       // into the DC bus
};

/// Averaged model solved directly: v_int = v_dc m e^{j(theta_ac + alpha)},
/// i_ac = (v_int - v_ac) Y, and the DC current from the power balance.
ConverterCurrents converter_primitive(const ConverterState& cs, Complex y);

Block2 converter_admittance_block(const ConverterState& cs, Complex y);

struct ConverterChi {
    Block2 chi = Block2::Zero();
    std::array<bool, 4> singular{};  // row-major (acac, acdc, dcac, dcdc)
    Complex chi_dcdc_1{0.0, 0.0};
    Complex chi_dcdc_2{0.0, 0.0};
    bool singular_dcdc_2 = false;
    Complex y_dcdc_1{0.0, 0.0};
    Complex y_dcdc_2{0.0, 0.0};

    bool any_singular() const { return singular[0] || singular[1] || singular[2] || singular[3]; }
};

ConverterChi converter_chi_block(const ConverterState& cs, Complex y, double eps_sing = kDefaultEpsSing);

/// Element-wise time derivative of the block, valid even where a chi entry
/// is singular.
Block2 converter_admittance_dot(const ConverterState& cs, Complex y);

/// Two-terminal block [[-Y, Y], [Y, -Y]].
Block2 series_block(Complex y);

}  // namespace cfgrid
