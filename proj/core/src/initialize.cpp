#include <cmath>
#include <sstream>

#include "cfgrid/error.hpp"
#include "cfgrid/simulation.hpp"

namespace cfgrid {

SimState initialize_dynamics(const NetworkCase& c, const PowerFlowSolution& pf, double tol) {
    DaeModel model(c);
    SimState st;
    st.x.assign(model.nx(), 0.0);
    st.y.assign(model.ny(), 0.0);
    st.status = model.initial_status();
    st.setpoints.machine.assign(c.devices.size(), {});
    st.setpoints.load.assign(c.devices.size(), {});

    for (std::size_t b = 0; b < c.buses.size(); ++b) model.set_bus_voltage(b, pf.v[b], st.x.data(), st.y.data());

    const auto& elements = model.elements();
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const auto& e = elements[i];
        if (int k = model.rl_var(i); k >= 0) {
            // current from `from` to `to` is minus what the element injects at `from`
            const Complex cur = -pf.flows[i].i_from;
            st.x[k] = cur.real();
            if (e.ac) st.x[k + 1] = cur.imag();
        }
        if (int k = model.transformer_var(i); k >= 0) {
            st.x[k] = pf.taps[i].m;
            st.x[k + 1] = pf.taps[i].alpha;
        }
        if (int k = model.converter_var(i); k >= 0) {
            const auto& cc = c.branches[e.branch].converter;
            const Complex s_ac = pf.flows[i].s_from;
            ConverterMeasurements meas;
            meas.v_ac = std::abs(pf.v[e.from]);
            meas.v_dc = pf.v[e.to].real();
            meas.p = s_ac.real();
            meas.q = s_ac.imag();
            st.x[k] = pf.taps[i].m;
            st.x[k + 1] = pf.taps[i].alpha;
            st.x[k + 2] = d_axis_measurement(cc, meas);
            st.x[k + 3] = q_axis_measurement(cc, meas);
            st.x[k + 4] = std::arg(pf.v[e.from]);
        }
    }

    for (std::size_t d = 0; d < c.devices.size(); ++d) {
        const auto& dev = c.devices[d];
        const Complex vb = pf.v[dev.bus_idx];
        const Complex s = pf.device_injection[d];
        if (dev.model == DeviceModel::SynchronousMachine) {
            MachineInit mi = initialize_machine(dev.machine, vb, s);
            const int k = model.machine_var(d);
            st.x[k] = mi.state.delta;
            st.x[k + 1] = mi.state.omega;
            st.x[k + 2] = mi.state.eqp;
            st.x[k + 3] = mi.state.edp;
            st.x[k + 4] = mi.state.pm;
            st.x[k + 5] = mi.state.efd;
            st.setpoints.machine[d] = mi.inputs;
        } else {
            auto& ls = st.setpoints.load[d];
            ls.s0 = -s;  // consumed
            ls.v0 = vb;
            ls.i0 = std::conj(ls.s0 / vb);
            ls.y_eq = dev.model == DeviceModel::ConstantImpedanceLoad ? dev.y : std::conj(ls.s0) / std::norm(vb);
        }
    }

    std::vector<double> f(model.nx()), g(model.ny());
    model.evaluate(st.x.data(), st.y.data(), st.setpoints, st.status, f.data(), g.data());
    const auto xn = model.x_names();
    const auto yn = model.y_names();
    std::ostringstream bad;
    int n_bad = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!(std::abs(f[i]) < tol) && n_bad++ < 10) bad << " d/dt " << xn[i] << " = " << f[i] << ';';
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!(std::abs(g[i]) < tol) && n_bad++ < 10) bad << " mismatch " << yn[i] << " = " << g[i] << ';';
    if (n_bad > 0) fail(ErrorKind::InitResidual, std::to_string(n_bad) + " equations not stationary:" + bad.str());
    return st;
}

}  // namespace cfgrid
