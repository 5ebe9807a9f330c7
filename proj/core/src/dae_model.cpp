#include "cfgrid/dae_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cfgrid/branches.hpp"
#include "cfgrid/error.hpp"

namespace cfgrid {

namespace {
constexpr Complex kJ{0.0, 1.0};
}

DaeModel::DaeModel(const NetworkCase& c) : c_(c), elements_(expand_elements(c)), w0_(c.omega_nom()) {
    const std::size_t nb = c_.buses.size();
    std::vector<char> has_cap(nb, 0);
    for (const auto& e : elements_)
        if (e.kind == ElementKind::ShuntGC) has_cap[e.from] = 1;

    int nx = 0, ny = 0;
    bus_var_.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        const int width = c_.is_ac(b) ? 2 : 1;
        bus_var_[b].differential = has_cap[b];
        bus_var_[b].idx = has_cap[b] ? nx : ny;
        (has_cap[b] ? nx : ny) += width;
    }
    rl_var_.assign(elements_.size(), -1);
    conv_var_.assign(elements_.size(), -1);
    trafo_var_.assign(elements_.size(), -1);
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        const auto& e = elements_[i];
        if (e.kind == ElementKind::SeriesRL) {
            rl_var_[i] = nx;
            nx += e.ac ? 2 : 1;
        } else if (e.kind == ElementKind::Converter) {
            conv_var_[i] = nx;
            nx += 5;
        } else if (e.kind == ElementKind::Transformer) {
            trafo_var_[i] = nx;
            nx += 2;
        }
    }
    machine_var_.assign(c_.devices.size(), -1);
    std::set<int> areas;
    for (std::size_t d = 0; d < c_.devices.size(); ++d) {
        if (c_.devices[d].model != DeviceModel::SynchronousMachine) continue;
        machine_var_[d] = nx;
        nx += 6;
        areas.insert(c_.buses[c_.devices[d].bus_idx].area);
    }
    areas_.assign(areas.begin(), areas.end());
    for (const auto& a : c_.agc) {
        if (!areas.count(a.area)) fail(ErrorKind::EmptyArea, "agc area " + std::to_string(a.area) + " has no machine");
        agc_area_.push_back(a.area);
        agc_var_.push_back(nx++);
    }
    nx_ = static_cast<std::size_t>(nx);
    ny_ = static_cast<std::size_t>(ny);
    v_.resize(nb);
    inj_.resize(nb);
    cap_.resize(nb);
    cond_.resize(nb);
}

Status DaeModel::initial_status() const {
    Status s;
    s.element_on.assign(elements_.size(), 1);
    s.device_on.assign(c_.devices.size(), 1);
    return s;
}

std::vector<std::string> DaeModel::x_names() const {
    std::vector<std::string> n(nx_);
    auto put = [&](int k, const std::string& base, std::initializer_list<const char*> parts) {
        for (const char* p : parts) n[static_cast<std::size_t>(k++)] = base + "." + p;
    };
    for (std::size_t b = 0; b < c_.buses.size(); ++b)
        if (bus_var_[b].differential)
            c_.is_ac(b) ? put(bus_var_[b].idx, "bus " + c_.buses[b].id, {"v_re", "v_im"})
                        : put(bus_var_[b].idx, "bus " + c_.buses[b].id, {"v"});
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        const std::string base = "element " + elements_[i].id;
        if (rl_var_[i] >= 0) elements_[i].ac ? put(rl_var_[i], base, {"i_re", "i_im"}) : put(rl_var_[i], base, {"i"});
        if (conv_var_[i] >= 0) put(conv_var_[i], base, {"m", "alpha", "xd", "xq", "psi"});
        if (trafo_var_[i] >= 0) put(trafo_var_[i], base, {"m", "alpha"});
    }
    for (std::size_t d = 0; d < c_.devices.size(); ++d)
        if (machine_var_[d] >= 0)
            put(machine_var_[d], "machine " + c_.devices[d].id, {"delta", "omega", "eqp", "edp", "pm", "efd"});
    for (std::size_t a = 0; a < agc_var_.size(); ++a) n[agc_var_[a]] = "agc " + std::to_string(agc_area_[a]);
    return n;
}

std::vector<std::string> DaeModel::y_names() const {
    std::vector<std::string> n(ny_);
    for (std::size_t b = 0; b < c_.buses.size(); ++b) {
        if (bus_var_[b].differential) continue;
        const std::string base = "bus " + c_.buses[b].id;
        n[bus_var_[b].idx] = base + (c_.is_ac(b) ? ".i_re" : ".i");
        if (c_.is_ac(b)) n[bus_var_[b].idx + 1] = base + ".i_im";
    }
    return n;
}

Complex DaeModel::bus_voltage(std::size_t bus, const double* x, const double* y) const {
    const auto& bv = bus_var_[bus];
    const double* src = bv.differential ? x : y;
    if (c_.is_ac(bus)) return {src[bv.idx], src[bv.idx + 1]};
    return {src[bv.idx], 0.0};
}

void DaeModel::set_bus_voltage(std::size_t bus, Complex v, double* x, double* y) const {
    const auto& bv = bus_var_[bus];
    double* dst = bv.differential ? x : y;
    dst[bv.idx] = v.real();
    if (c_.is_ac(bus)) dst[bv.idx + 1] = v.imag();
}

double DaeModel::bus_capacitance(std::size_t bus, const Status& status) const {
    double cap = 0.0;
    for (std::size_t i = 0; i < elements_.size(); ++i)
        if (status.element_on[i] && elements_[i].kind == ElementKind::ShuntGC && elements_[i].from == bus)
            cap += elements_[i].c;
    return cap;
}

std::vector<double> DaeModel::coi(const double* x, const Status& status) const {
    std::vector<double> out;
    for (int area : areas_) {
        std::vector<double> h, w;
        for (std::size_t d = 0; d < c_.devices.size(); ++d) {
            if (machine_var_[d] < 0 || !status.device_on[d]) continue;
            if (c_.buses[c_.devices[d].bus_idx].area != area) continue;
            h.push_back(c_.devices[d].machine.H);
            w.push_back(x[machine_var_[d] + 1]);
        }
        out.push_back(h.empty() ? std::numeric_limits<double>::quiet_NaN() : coi_frequency(h, w));
    }
    return out;
}

void DaeModel::evaluate(const double* x, const double* y, const Setpoints& sp, const Status& status, double* f,
                        double* g, Probe* probe) const {
    const std::size_t nb = c_.buses.size();
    std::fill(f, f + nx_, 0.0);
    std::fill(g, g + ny_, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        v_[b] = bus_voltage(b, x, y);
        inj_[b] = 0.0;
        cap_[b] = 0.0;
        cond_[b] = 0.0;
    }
    if (probe) {
        probe->v = v_;
        probe->device_current.assign(nb, 0.0);
        probe->machine_pe.assign(c_.devices.size(), 0.0);
        probe->converter_s_ac.assign(elements_.size(), 0.0);
        probe->converter_omega.assign(elements_.size(), 1.0);
    }

    // ------------------------------------------------------------------ elements
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        const auto& e = elements_[i];
        if (!status.element_on[i]) continue;
        const Complex vf = v_[e.from];
        const Complex vt = e.to == kGround ? Complex(0.0, 0.0) : v_[e.to];
        switch (e.kind) {
            case ElementKind::ConstantY: {
                const Complex cur = (vf - vt) * e.y;
                inj_[e.from] -= cur;
                if (e.to != kGround) inj_[e.to] += cur;
                break;
            }
            case ElementKind::SeriesRL: {
                const int k = rl_var_[i];
                const Complex cur = e.ac ? Complex(x[k], x[k + 1]) : Complex(x[k], 0.0);
                inj_[e.from] -= cur;
                if (e.to != kGround) inj_[e.to] += cur;
                Complex di = (vf - vt - e.r * cur) / e.l;
                if (e.ac) {
                    di -= kJ * w0_ * cur;
                    f[k] = di.real();
                    f[k + 1] = di.imag();
                } else {
                    f[k] = di.real();
                }
                break;
            }
            case ElementKind::ShuntGC:
                cap_[e.from] += e.c;
                cond_[e.from] += e.g;
                break;
            case ElementKind::Transformer: {
                const int k = trafo_var_[i];
                TransformerState ts{x[k], x[k + 1], 0.0, 0.0, e.y};
                const Block2 blk = transformer_admittance_block(ts);
                const Complex ik = blk(0, 0) * vf + blk(0, 1) * vt;
                const Complex ih = blk(1, 0) * vf + blk(1, 1) * vt;
                inj_[e.from] += ik;
                inj_[e.to] += ih;
                const auto& tc = c_.branches[e.branch].transformer;
                if (tc.mode == TransformerControl::Mode::ActivePower) {
                    const double p_meas = -(vf * std::conj(ik)).real();
                    f[k + 1] = tc.k_alpha * (p_meas - tc.p_ref);
                }
                break;
            }
            case ElementKind::Converter: {
                const int k = conv_var_[i];
                const double m = x[k], alpha = x[k + 1];
                const double vac = std::abs(vf);
                const Complex v_int = vt.real() * m * (vf / vac) * std::polar(1.0, alpha);
                const Complex i_ac = (v_int - vf) * e.y;
                const double i_dc = -(v_int * std::conj(i_ac)).real() / vt.real();
                inj_[e.from] += i_ac;
                inj_[e.to] += i_dc;
                break;
            }
        }
    }

    // ------------------------------------------------------------------ devices
    std::vector<double> agc_signal(c_.agc.size(), 0.0);
    for (std::size_t k = 0; k < c_.agc.size(); ++k) agc_signal[k] = x[agc_var_[k]];

    for (std::size_t d = 0; d < c_.devices.size(); ++d) {
        if (!status.device_on[d]) continue;
        const auto& dev = c_.devices[d];
        const Complex vb = v_[dev.bus_idx];
        Complex cur = 0.0;
        switch (dev.model) {
            case DeviceModel::SynchronousMachine: {
                const int k = machine_var_[d];
                MachineState ms{x[k], x[k + 1], x[k + 2], x[k + 3], x[k + 4], x[k + 5]};
                MachineInputs in = sp.machine[d];
                for (std::size_t a = 0; a < c_.agc.size(); ++a)
                    if (agc_area_[a] == c_.buses[dev.bus_idx].area)
                        in.p_ref += dev.machine.agc_participation * agc_signal[a];
                MachineOutput out = machine_model(dev.machine, ms, vb, in, w0_);
                cur = out.current;
                f[k] = out.dxdt.delta;
                f[k + 1] = out.dxdt.omega;
                f[k + 2] = out.dxdt.eqp;
                f[k + 3] = out.dxdt.edp;
                f[k + 4] = out.dxdt.pm;
                f[k + 5] = out.dxdt.efd;
                if (probe) probe->machine_pe[d] = out.pe;
                break;
            }
            case DeviceModel::ConstantPowerLoad:
            case DeviceModel::ConstantImpedanceLoad:
            case DeviceModel::DcPower: {
                const auto& ls = sp.load[d];
                LoadDynamics dyn = dev.model == DeviceModel::ConstantImpedanceLoad ? LoadDynamics::Impedance : dev.dynamics;
                switch (dyn) {
                    case LoadDynamics::Impedance: cur = -ls.y_eq * vb; break;
                    case LoadDynamics::Current:
                        cur = c_.is_ac(dev.bus_idx)
                                  ? -ls.i0 * (vb / std::abs(vb)) / (ls.v0 / std::abs(ls.v0))
                                  : -ls.i0;
                        break;
                    case LoadDynamics::Power: cur = -std::conj(ls.s0 / vb); break;
                }
                break;
            }
        }
        inj_[dev.bus_idx] += cur;
        if (probe) probe->device_current[dev.bus_idx] += cur;
    }

    // ------------------------------------------------------------------ buses
    for (std::size_t b = 0; b < nb; ++b) {
        const auto& bv = bus_var_[b];
        const Complex net = inj_[b] - cond_[b] * v_[b];
        if (bv.differential) {
            if (!(cap_[b] > 0.0))
                fail(ErrorKind::InvalidArgument, "bus '" + c_.buses[b].id + "' lost all capacitance");
            Complex dv = net / cap_[b];
            if (c_.is_ac(b)) {
                dv -= kJ * w0_ * v_[b];
                f[bv.idx] = dv.real();
                f[bv.idx + 1] = dv.imag();
            } else {
                f[bv.idx] = dv.real();
            }
        } else {
            g[bv.idx] = net.real();
            if (c_.is_ac(b)) g[bv.idx + 1] = net.imag();
        }
    }

    // ------------------------------------------------------------------ controls
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        const auto& e = elements_[i];
        if (e.kind != ElementKind::Converter || !status.element_on[i]) continue;
        const int k = conv_var_[i];
        const auto& cc = c_.branches[e.branch].converter;
        const Complex vf = v_[e.from];
        const double vdc = v_[e.to].real();
        const double m = x[k], alpha = x[k + 1];
        const Complex v_int = vdc * m * (vf / std::abs(vf)) * std::polar(1.0, alpha);
        const Complex s_ac = vf * std::conj((v_int - vf) * e.y);
        const double theta_rel = std::arg(vf * std::polar(1.0, -x[k + 4]));

        ConverterMeasurements meas;
        meas.v_ac = std::abs(vf);
        meas.v_dc = vdc;
        meas.p = s_ac.real();
        meas.q = s_ac.imag();
        meas.omega_meas = 1.0 + theta_rel / (w0_ * cc.t_freq);
        const auto& dcv = bus_var_[e.to];
        meas.dv_dc_dt = dcv.differential ? f[dcv.idx] : 0.0;
        ConverterControlOutput out = converter_control(cc, {x[k + 2], x[k + 3]}, meas);
        f[k] = out.dm_dt;
        f[k + 1] = out.dalpha_dt;
        f[k + 2] = out.dxd_dt;
        f[k + 3] = out.dxq_dt;
        f[k + 4] = theta_rel / cc.t_freq;
        if (probe) {
            probe->converter_s_ac[i] = s_ac;
            probe->converter_omega[i] = meas.omega_meas;
        }
    }

    if (!c_.agc.empty()) {
        std::vector<double> coi_now = coi(x, status);
        for (std::size_t a = 0; a < c_.agc.size(); ++a) {
            auto it = std::find(areas_.begin(), areas_.end(), agc_area_[a]);
            const double w = coi_now[static_cast<std::size_t>(it - areas_.begin())];
            f[agc_var_[a]] = c_.agc[a].ki * (1.0 - w);
        }
    }
}

}  // namespace cfgrid
