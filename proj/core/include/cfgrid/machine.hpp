#pragma once

#include <vector>

#include "cfgrid/complex_frequency.hpp"
#include "cfgrid/network.hpp"

namespace cfgrid {

/// Two-axis machine with first-order governor and AVR. Speed in pu, angle in
/// rad relative to the frame rotating at nominal frequency.
struct MachineState {
    double delta = 0.0;
    double omega = 1.0;
    double eqp = 0.0;
    double edp = 0.0;
    double pm = 0.0;
    double efd = 0.0;
};

struct MachineInputs {
    double p_ref = 0.0;
    double v_ref = 1.0;
};

struct MachineOutput {
    MachineState dxdt;
    Complex current{0.0, 0.0};  // injected into the bus
    double pe = 0.0;            // air-gap power
    double id = 0.0, iq = 0.0;
};

MachineOutput machine_model(const MachineParams& p, const MachineState& s, Complex v_bus, const MachineInputs& in,
                            double omega_base);

struct MachineInit {
    MachineState state;
    MachineInputs inputs;
};

/// Steady state behind a terminal voltage and injected complex power.
MachineInit initialize_machine(const MachineParams& p, Complex v_bus, Complex s_injected);

/// sum(H w) / sum(H). EmptyArea when no machine is given.
double coi_frequency(const std::vector<double>& inertia, const std::vector<double>& omega);

}  // namespace cfgrid
