#pragma once

#include <vector>

#include "cfgrid/admittance.hpp"
#include "cfgrid/network.hpp"

namespace cfgrid {

struct PowerFlowOptions {
    double tol = 1e-8;
    int max_iter = 50;
    double eps_sing = kDefaultEpsSing;
};

/// Currents and complex powers injected into the two terminal buses by one
/// element. For shunts only the `from` side is meaningful.
struct ElementFlow {
    Complex i_from{0.0, 0.0};
    Complex i_to{0.0, 0.0};
    Complex s_from{0.0, 0.0};
    Complex s_to{0.0, 0.0};
};

struct PowerFlowSolution {
    std::vector<Complex> v;                 // per bus
    std::vector<Complex> device_injection;  // per device, complex power into the bus
    std::vector<Element> elements;
    std::vector<ElementFlow> flows;   // per element
    std::vector<TapSetting> taps;     // per element (m, alpha of transformers and converters)
    int iterations = 0;
    double max_mismatch = 0.0;

    /// Net device current injected at a bus.
    Complex bus_injection_current(const NetworkCase& c, std::size_t bus) const;
    BranchStates branch_states(const NetworkCase& c) const;
};

/// Newton-Raphson on polar power mismatches. Cases must be purely AC.
PowerFlowSolution solve_ac_powerflow(const NetworkCase& c, const PowerFlowOptions& options = {});

/// Unified Newton over AC, DC and converter unknowns.
PowerFlowSolution solve_hybrid_powerflow(const NetworkCase& c, const PowerFlowOptions& options = {});

/// Picks the AC solver for AC-only cases and the hybrid one otherwise.
PowerFlowSolution solve_powerflow(const NetworkCase& c, const PowerFlowOptions& options = {});

}  // namespace cfgrid
