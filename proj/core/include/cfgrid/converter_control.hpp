#pragma once

#include "cfgrid/network.hpp"

namespace cfgrid {

struct ConverterMeasurements {
    double v_ac = 1.0;
    double v_dc = 1.0;
    double p = 0.0;           // into the AC bus
    double q = 0.0;
    double omega_meas = 1.0;  // pu
    double dv_dc_dt = 0.0;    // only read when the d-axis filter is bypassed
};

/// Filter states of the two loops. xd filters the d-axis measurement
/// (v_dc or P), xq the q-axis one (|v_ac| or Q).
struct ConverterControlState {
    double xd = 0.0;
    double xq = 0.0;
};

struct ConverterControlOutput {
    double dm_dt = 0.0;
    double dalpha_dt = 0.0;
    double dxd_dt = 0.0;
    double dxq_dt = 0.0;
};

/// Decoupled PI loops written in I-P form, so dm/dt and dalpha/dt are
/// explicit functions of the state.
ConverterControlOutput converter_control(const ConverterControl& scheme, const ConverterControlState& state,
                                         const ConverterMeasurements& meas);

/// Measurement the d-axis filter tracks in steady state.
double d_axis_measurement(const ConverterControl& scheme, const ConverterMeasurements& meas);
double q_axis_measurement(const ConverterControl& scheme, const ConverterMeasurements& meas);

}  // namespace cfgrid
