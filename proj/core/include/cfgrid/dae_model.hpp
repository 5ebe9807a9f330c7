#pragma once

#include <string>
#include <vector>

#include "cfgrid/converter_control.hpp"
#include "cfgrid/machine.hpp"
#include "cfgrid/network.hpp"

namespace cfgrid {

/// In-service flags, one per element and one per device.
struct Status {
    std::vector<char> element_on;
    std::vector<char> device_on;
};

struct LoadSetpoint {
    Complex y_eq{0.0, 0.0};  // consumed current = y_eq v (impedance model)
    Complex i0{0.0, 0.0};    // consumed current at the initial voltage
    Complex s0{0.0, 0.0};    // consumed power
    Complex v0{1.0, 0.0};
};

/// Quantities fixed at initialization from the operating point.
struct Setpoints {
    std::vector<MachineInputs> machine;  // per device
    std::vector<LoadSetpoint> load;      // per device
};

/// Optional detail collected during an evaluation.
struct Probe {
    std::vector<Complex> v;               // per bus, rotating frame
    std::vector<Complex> device_current;  // per bus, net device injection
    std::vector<double> machine_pe;       // per device
    std::vector<Complex> converter_s_ac;  // per element
    std::vector<double> converter_omega;  // per element, measured pu frequency
};

/// Semi-explicit DAE x' = f(x, y), 0 = g(x, y) of a case. AC quantities are
/// phasors in the frame rotating at nominal frequency.
///
/// Differential: voltages of buses with capacitance, RL currents, machine
/// (delta, omega, e'q, e'd, Pm, Efd), converter (m, alpha, xd, xq, psi),
/// transformer (m, alpha), AGC integrators.
/// Algebraic: voltages of the remaining buses.
class DaeModel {
public:
    struct BusVar {
        bool differential = false;
        int idx = -1;  // re at idx, im at idx + 1 on AC buses
    };

    explicit DaeModel(const NetworkCase& c);

    const NetworkCase& network_case() const { return c_; }
    const std::vector<Element>& elements() const { return elements_; }
    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    double omega_nom() const { return w0_; }

    BusVar bus_var(std::size_t bus) const { return bus_var_[bus]; }
    int rl_var(std::size_t element) const { return rl_var_[element]; }
    int machine_var(std::size_t device) const { return machine_var_[device]; }
    int converter_var(std::size_t element) const { return conv_var_[element]; }
    int transformer_var(std::size_t element) const { return trafo_var_[element]; }
    int agc_var(std::size_t k) const { return agc_var_[k]; }

    /// Area labels that own at least one machine, sorted.
    const std::vector<int>& areas() const { return areas_; }
    std::vector<double> coi(const double* x, const Status& status) const;

    Complex bus_voltage(std::size_t bus, const double* x, const double* y) const;
    void set_bus_voltage(std::size_t bus, Complex v, double* x, double* y) const;

    Status initial_status() const;

    /// Human-readable names of every variable, for diagnostics.
    std::vector<std::string> x_names() const;
    std::vector<std::string> y_names() const;

    /// Structural capacitance at a bus with the given status.
    double bus_capacitance(std::size_t bus, const Status& status) const;

    void evaluate(const double* x, const double* y, const Setpoints& sp, const Status& status, double* f, double* g,
                  Probe* probe = nullptr) const;

private:
    NetworkCase c_;
    std::vector<Element> elements_;
    double w0_;
    std::size_t nx_ = 0, ny_ = 0;
    std::vector<BusVar> bus_var_;
    std::vector<int> rl_var_, machine_var_, conv_var_, trafo_var_, agc_var_;
    std::vector<int> areas_;
    std::vector<int> agc_area_;  // per agc entry
    mutable std::vector<Complex> v_, inj_;
    mutable std::vector<double> cap_, cond_;
};

}  // namespace cfgrid
