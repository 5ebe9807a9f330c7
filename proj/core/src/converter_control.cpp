#include "cfgrid/converter_control.hpp"

namespace cfgrid {

double d_axis_measurement(const ConverterControl& scheme, const ConverterMeasurements& meas) {
    return scheme.d_mode == DAxisMode::Vdc ? meas.v_dc : meas.p;
}

double q_axis_measurement(const ConverterControl& scheme, const ConverterMeasurements& meas) {
    return scheme.q_mode == QAxisMode::Vac ? meas.v_ac : meas.q;
}

ConverterControlOutput converter_control(const ConverterControl& scheme, const ConverterControlState& state,
                                         const ConverterMeasurements& meas) {
    ConverterControlOutput out;

    double yd, dyd;
    if (scheme.t_filter_d > 0.0) {
        out.dxd_dt = (d_axis_measurement(scheme, meas) - state.xd) / scheme.t_filter_d;
        yd = state.xd;
        dyd = out.dxd_dt;
    } else {
        out.dxd_dt = meas.dv_dc_dt;
        yd = meas.v_dc;
        dyd = meas.dv_dc_dt;
    }
    switch (scheme.d_mode) {
        case DAxisMode::Vdc:
            // more alpha pushes power to the AC side and lowers v_dc
            out.dalpha_dt = scheme.kp_d * dyd + scheme.ki_d * (yd - scheme.v_dc_ref);
            break;
        case DAxisMode::P:
            out.dalpha_dt = scheme.ki_d * (scheme.p_ref - yd) - scheme.kp_d * dyd;
            break;
        case DAxisMode::Fac: {
            const double p_ref = scheme.p_ref - scheme.k_f * (meas.omega_meas - 1.0);
            out.dalpha_dt = scheme.ki_d * (p_ref - yd) - scheme.kp_d * dyd;
            break;
        }
    }

    out.dxq_dt = (q_axis_measurement(scheme, meas) - state.xq) / scheme.t_filter_q;
    const double ref = scheme.q_mode == QAxisMode::Vac ? scheme.v_ac_ref : scheme.q_ref;
    out.dm_dt = scheme.ki_q * (ref - state.xq) - scheme.kp_q * out.dxq_dt;
    return out;
}

}  // namespace cfgrid
