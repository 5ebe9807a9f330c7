#pragma once

#include <vector>

#include "cfgrid/dae_model.hpp"
#include "cfgrid/network.hpp"
#include "cfgrid/powerflow.hpp"
#include "cfgrid/trajectory.hpp"

namespace cfgrid {

struct SimState {
    double t = 0.0;
    std::vector<double> x;  // differential
    std::vector<double> y;  // algebraic
    Setpoints setpoints;
    Status status;
};

struct SimOptions {
    double newton_tol = 1e-10;
    int max_newton = 12;
    double init_tol = 1e-8;
    PowerFlowOptions powerflow;
};

/// Builds every dynamic state from a converged operating point and checks
/// that all derivatives vanish. InitResidual lists the offending equations.
SimState initialize_dynamics(const NetworkCase& c, const PowerFlowSolution& pf, double tol = 1e-8);

/// Power flow, initialization and integration in one call.
Trajectory simulate(const NetworkCase& c, double tstop, double dt, const SimOptions& options = {});

/// Implicit trapezoidal integration from a given state. Events of the case
/// fire at the sample nearest to their time: that sample is recorded with
/// the pre-event state, then the algebraic variables are re-solved.
/// StepNonConvergence, EventTargetMissing.
Trajectory simulate(const NetworkCase& c, const SimState& start, double tstop, double dt,
                    const SimOptions& options = {});

}  // namespace cfgrid
