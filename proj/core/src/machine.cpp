#include "cfgrid/machine.hpp"

#include <cmath>
#include <numbers>

#include "cfgrid/error.hpp"

namespace cfgrid {

namespace {

// Park rotation: network phasor -> (d, q) components for rotor angle delta.
void to_dq(Complex z, double delta, double& d, double& q) {
    Complex r = z * std::polar(1.0, -(delta - std::numbers::pi / 2.0));
    d = r.real();
    q = r.imag();
}

Complex from_dq(double d, double q, double delta) {
    return Complex(d, q) * std::polar(1.0, delta - std::numbers::pi / 2.0);
}

}  // namespace

MachineOutput machine_model(const MachineParams& p, const MachineState& s, Complex v_bus, const MachineInputs& in,
                            double omega_base) {
    double vd, vq;
    to_dq(v_bus, s.delta, vd, vq);
    // 0 = vq + Ra iq - e'q + X'd id ;  0 = vd + Ra id - e'd - X'q iq
    const double a11 = p.Xdp, a12 = p.Ra, b1 = s.eqp - vq;
    const double a21 = p.Ra, a22 = -p.Xqp, b2 = s.edp - vd;
    const double det = a11 * a22 - a12 * a21;
    MachineOutput out;
    out.id = (b1 * a22 - a12 * b2) / det;
    out.iq = (a11 * b2 - a21 * b1) / det;
    out.current = from_dq(out.id, out.iq, s.delta);
    out.pe = vd * out.id + vq * out.iq + p.Ra * (out.id * out.id + out.iq * out.iq);

    const double dw = s.omega - 1.0;
    out.dxdt.delta = omega_base * dw;
    out.dxdt.omega = (s.pm - out.pe - p.D * dw) / (2.0 * p.H);
    out.dxdt.eqp = (-s.eqp - (p.Xd - p.Xdp) * out.id + s.efd) / p.Td0p;
    out.dxdt.edp = (-s.edp + (p.Xq - p.Xqp) * out.iq) / p.Tq0p;
    const double gov = p.R_droop > 0.0 ? dw / p.R_droop : 0.0;
    out.dxdt.pm = (in.p_ref - gov - s.pm) / p.Tg;
    out.dxdt.efd = p.KA > 0.0 ? (p.KA * (in.v_ref - std::abs(v_bus)) - s.efd) / p.TA : 0.0;
    return out;
}

MachineInit initialize_machine(const MachineParams& p, Complex v_bus, Complex s_injected) {
    const Complex i = std::conj(s_injected / v_bus);
    const Complex e = v_bus + Complex(p.Ra, p.Xq) * i;
    MachineInit init;
    auto& s = init.state;
    s.delta = std::arg(e);
    s.omega = 1.0;
    double id, iq, vd, vq;
    to_dq(i, s.delta, id, iq);
    to_dq(v_bus, s.delta, vd, vq);
    s.edp = vd + p.Ra * id - p.Xqp * iq;
    s.eqp = vq + p.Ra * iq + p.Xdp * id;
    s.efd = s.eqp + (p.Xd - p.Xdp) * id;
    s.pm = vd * id + vq * iq + p.Ra * (id * id + iq * iq);
    init.inputs.p_ref = s.pm;
    init.inputs.v_ref = p.KA > 0.0 ? std::abs(v_bus) + s.efd / p.KA : std::abs(v_bus);
    return init;
}

double coi_frequency(const std::vector<double>& inertia, const std::vector<double>& omega) {
    if (inertia.empty() || inertia.size() != omega.size())
        fail(ErrorKind::EmptyArea, "center of inertia needs at least one machine");
    double hw = 0.0, h = 0.0;
    for (std::size_t i = 0; i < inertia.size(); ++i) {
        hw += inertia[i] * omega[i];
        h += inertia[i];
    }
    if (!(h > 0.0)) fail(ErrorKind::EmptyArea, "total inertia is zero");
    return hw / h;
}

}  // namespace cfgrid
