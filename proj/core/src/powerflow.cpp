#include "cfgrid/powerflow.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "cfgrid/error.hpp"

namespace cfgrid {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class BusType { Slack, PV, PQ, DC };

// Unknowns, residuals and their bookkeeping for one case.
class PfProblem {
public:
    PfProblem(const NetworkCase& c, const PowerFlowOptions& opt)
        : c_(c), opt_(opt), elements_(expand_elements(c)), w0_(c.omega_nom()) {
        const std::size_t nb = c.buses.size();
        type_.assign(nb, BusType::PQ);
        v_fix_.assign(nb, 1.0);
        th_fix_.assign(nb, 0.0);
        for (std::size_t b = 0; b < nb; ++b) {
            v_fix_[b] = c.buses[b].v0;
            th_fix_[b] = c.buses[b].theta0;
            if (c.buses[b].kind == BusKind::DC) type_[b] = BusType::DC;
        }
        for (const auto& d : c.devices) {
            if (d.model != DeviceModel::SynchronousMachine) continue;
            type_[d.bus_idx] = d.role == MachineRole::Slack ? BusType::Slack : BusType::PV;
            v_fix_[d.bus_idx] = d.v_set;
        }
        for (const auto& e : elements_) {
            if (e.kind != ElementKind::Converter) continue;
            const auto& cc = c.branches[e.branch].converter;
            if (cc.q_mode == QAxisMode::Vac && type_[e.from] != BusType::PQ)
                fail(ErrorKind::SchemaError, "converter '" + e.id + "' regulates the voltage of a bus already held by a machine");
            if (cc.d_mode == DAxisMode::Vdc) v_fix_[e.to] = cc.v_dc_ref;
        }

        th_idx_.assign(nb, -1);
        vm_idx_.assign(nb, -1);
        int n = 0;
        for (std::size_t b = 0; b < nb; ++b) {
            switch (type_[b]) {
                case BusType::Slack: break;
                case BusType::PV: th_idx_[b] = n++; break;
                case BusType::PQ: th_idx_[b] = n++; vm_idx_[b] = n++; break;
                case BusType::DC: vm_idx_[b] = n++; break;
            }
        }
        n_bus_unknowns_ = n;
        m_idx_.assign(elements_.size(), -1);
        a_idx_.assign(elements_.size(), -1);
        for (std::size_t i = 0; i < elements_.size(); ++i) {
            const auto& e = elements_[i];
            if (e.kind == ElementKind::Converter) {
                m_idx_[i] = n++;
                a_idx_[i] = n++;
            } else if (e.kind == ElementKind::Transformer &&
                       c.branches[e.branch].transformer.mode == TransformerControl::Mode::ActivePower) {
                a_idx_[i] = n++;
            }
        }
        n_ = n;
    }

    int size() const { return n_; }
    int bus_unknowns() const { return n_bus_unknowns_; }
    const std::vector<Element>& elements() const { return elements_; }

    VectorXd initial() const {
        VectorXd x(n_);
        for (std::size_t b = 0; b < c_.buses.size(); ++b) {
            if (th_idx_[b] >= 0) x[th_idx_[b]] = th_fix_[b];
            if (vm_idx_[b] >= 0) x[vm_idx_[b]] = v_fix_[b];
        }
        for (std::size_t i = 0; i < elements_.size(); ++i) {
            const auto& br = c_.branches[elements_[i].branch];
            if (m_idx_[i] >= 0) x[m_idx_[i]] = br.m0;
            if (a_idx_[i] >= 0) x[a_idx_[i]] = br.alpha0;
        }
        return x;
    }

    void unpack(const VectorXd& x, std::vector<Complex>& v, std::vector<TapSetting>& taps) const {
        const std::size_t nb = c_.buses.size();
        v.resize(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            double vm = vm_idx_[b] >= 0 ? x[vm_idx_[b]] : v_fix_[b];
            double th = th_idx_[b] >= 0 ? x[th_idx_[b]] : th_fix_[b];
            v[b] = type_[b] == BusType::DC ? Complex(vm, 0.0) : std::polar(vm, th);
        }
        taps.resize(elements_.size());
        for (std::size_t i = 0; i < elements_.size(); ++i) {
            const auto& br = c_.branches[elements_[i].branch];
            taps[i].m = m_idx_[i] >= 0 ? x[m_idx_[i]] : br.m0;
            taps[i].alpha = a_idx_[i] >= 0 ? x[a_idx_[i]] : br.alpha0;
        }
    }

    // Element currents injected into every bus.
    std::vector<Complex> element_injections(const std::vector<Complex>& v, const std::vector<TapSetting>& taps,
                                            std::vector<ElementFlow>* flows = nullptr) const {
        std::vector<Complex> inj(c_.buses.size(), 0.0);
        if (flows) flows->assign(elements_.size(), {});
        for (std::size_t i = 0; i < elements_.size(); ++i) {
            const auto& e = elements_[i];
            Block2 blk = steady_block(e, w0_, v, taps[i], opt_.eps_sing);
            auto [i_f, i_t] = element_currents(e, blk, v);
            inj[e.from] += i_f;
            if (e.to != kGround) inj[e.to] += i_t;
            if (flows) {
                auto& f = (*flows)[i];
                f.i_from = i_f;
                f.s_from = v[e.from] * std::conj(i_f);
                if (e.to != kGround) {
                    f.i_to = i_t;
                    f.s_to = v[e.to] * std::conj(i_t);
                }
            }
        }
        return inj;
    }

    // Known device power at a bus (machines with fixed P included, slack excluded).
    Complex scheduled_power(std::size_t b, Complex vb, bool include_impedance) const {
        Complex s = 0.0;
        for (const auto& d : c_.devices) {
            if (d.bus_idx != b) continue;
            switch (d.model) {
                case DeviceModel::SynchronousMachine:
                    if (d.role == MachineRole::PV) s += d.p;
                    break;
                case DeviceModel::ConstantPowerLoad: s -= Complex(d.p, d.q); break;
                case DeviceModel::ConstantImpedanceLoad:
                    if (include_impedance) s -= std::conj(d.y) * std::norm(vb);
                    break;
                case DeviceModel::DcPower: s += d.p; break;
            }
        }
        return s;
    }

    VectorXd residual(const VectorXd& x) const {
        std::vector<Complex> v;
        std::vector<TapSetting> taps;
        unpack(x, v, taps);
        std::vector<ElementFlow> flows;
        auto inj = element_injections(v, taps, &flows);
        VectorXd f(n_);
        int row = 0;
        for (std::size_t b = 0; b < c_.buses.size(); ++b) {
            Complex mis = scheduled_power(b, v[b], true) + v[b] * std::conj(inj[b]);
            switch (type_[b]) {
                case BusType::Slack: break;
                case BusType::PV: f[row++] = mis.real(); break;
                case BusType::PQ: f[row++] = mis.real(); f[row++] = mis.imag(); break;
                case BusType::DC: f[row++] = mis.real(); break;
            }
        }
        for (std::size_t i = 0; i < elements_.size(); ++i) {
            const auto& e = elements_[i];
            const auto& br = c_.branches[e.branch];
            if (e.kind == ElementKind::Converter) {
                const auto& cc = br.converter;
                const Complex s_ac = flows[i].s_from;
                switch (cc.d_mode) {
                    case DAxisMode::Vdc: f[row++] = v[e.to].real() - cc.v_dc_ref; break;
                    case DAxisMode::P:
                    case DAxisMode::Fac: f[row++] = s_ac.real() - cc.p_ref; break;
                }
                switch (cc.q_mode) {
                    case QAxisMode::Vac: f[row++] = std::abs(v[e.from]) - cc.v_ac_ref; break;
                    case QAxisMode::Q: f[row++] = s_ac.imag() - cc.q_ref; break;
                }
            } else if (a_idx_[i] >= 0) {
                // power from `from` into the transformer
                f[row++] = -flows[i].s_from.real() - br.transformer.p_ref;
            }
        }
        return f;
    }

    // Analytic polar Jacobian of the bus rows/columns (AC only); remaining
    // columns by central differences.
    MatrixXd jacobian_ac(const VectorXd& x) const {
        std::vector<Complex> v;
        std::vector<TapSetting> taps;
        unpack(x, v, taps);
        const std::size_t nb = c_.buses.size();
        auto states = steady_branch_states(c_, elements_, v, taps, opt_.eps_sing);
        SparseY ycf = assemble_admittance(nb, elements_, states);
        Eigen::MatrixXcd ytb = -Eigen::MatrixXcd(ycf);
        for (const auto& d : c_.devices)
            if (d.model == DeviceModel::ConstantImpedanceLoad) ytb(d.bus_idx, d.bus_idx) += d.y;

        std::vector<double> P(nb), Q(nb), V(nb), th(nb);
        for (std::size_t i = 0; i < nb; ++i) {
            V[i] = std::abs(v[i]);
            th[i] = std::arg(v[i]);
        }
        for (std::size_t i = 0; i < nb; ++i) {
            Complex s = v[i] * std::conj((ytb.row(i) * Eigen::Map<const Eigen::VectorXcd>(v.data(), nb))(0));
            P[i] = s.real();
            Q[i] = s.imag();
        }
        // row index of each bus equation
        std::vector<int> prow(nb, -1), qrow(nb, -1);
        int row = 0;
        for (std::size_t b = 0; b < nb; ++b) {
            if (type_[b] == BusType::PV) prow[b] = row++;
            if (type_[b] == BusType::PQ) { prow[b] = row++; qrow[b] = row++; }
        }
        MatrixXd J = MatrixXd::Zero(n_, n_);
        for (std::size_t i = 0; i < nb; ++i) {
            if (prow[i] < 0) continue;
            for (std::size_t k = 0; k < nb; ++k) {
                const double G = ytb(i, k).real(), B = ytb(i, k).imag();
                if (G == 0.0 && B == 0.0 && i != k) continue;
                const double tik = th[i] - th[k];
                const double ct = std::cos(tik), st = std::sin(tik);
                double dP_dth, dP_dV, dQ_dth, dQ_dV;
                if (i == k) {
                    dP_dth = -Q[i] - B * V[i] * V[i];
                    dP_dV = P[i] / V[i] + G * V[i];
                    dQ_dth = P[i] - G * V[i] * V[i];
                    dQ_dV = Q[i] / V[i] - B * V[i];
                } else {
                    dP_dth = V[i] * V[k] * (G * st - B * ct);
                    dP_dV = V[i] * (G * ct + B * st);
                    dQ_dth = -V[i] * V[k] * (G * ct + B * st);
                    dQ_dV = V[i] * (G * st - B * ct);
                }
                // mismatch = scheduled - calculated
                if (th_idx_[k] >= 0) {
                    J(prow[i], th_idx_[k]) = -dP_dth;
                    if (qrow[i] >= 0) J(qrow[i], th_idx_[k]) = -dQ_dth;
                }
                if (vm_idx_[k] >= 0) {
                    J(prow[i], vm_idx_[k]) = -dP_dV;
                    if (qrow[i] >= 0) J(qrow[i], vm_idx_[k]) = -dQ_dV;
                }
            }
        }
        for (int col = n_bus_unknowns_; col < n_; ++col) J.col(col) = fd_column(x, col);
        // Transformer control rows against bus unknowns.
        if (n_ > n_bus_unknowns_) {
            for (int col = 0; col < n_bus_unknowns_; ++col) {
                VectorXd d = fd_column(x, col);
                J.block(n_bus_unknowns_, col, n_ - n_bus_unknowns_, 1) = d.tail(n_ - n_bus_unknowns_);
            }
        }
        return J;
    }

    MatrixXd jacobian_fd(const VectorXd& x) const {
        MatrixXd J(n_, n_);
        for (int col = 0; col < n_; ++col) J.col(col) = fd_column(x, col);
        return J;
    }

    PowerFlowSolution finish(const VectorXd& x, int iterations, double mismatch) const {
        PowerFlowSolution sol;
        unpack(x, sol.v, sol.taps);
        sol.elements = elements_;
        auto inj = element_injections(sol.v, sol.taps, &sol.flows);
        sol.iterations = iterations;
        sol.max_mismatch = mismatch;
        sol.device_injection.assign(c_.devices.size(), 0.0);
        for (std::size_t di = 0; di < c_.devices.size(); ++di) {
            const auto& d = c_.devices[di];
            const Complex vb = sol.v[d.bus_idx];
            switch (d.model) {
                case DeviceModel::SynchronousMachine: {
                    // whatever the network draws, minus the other devices
                    Complex others = scheduled_power(d.bus_idx, vb, true);
                    if (d.role == MachineRole::PV) others -= d.p;
                    Complex s = -vb * std::conj(inj[d.bus_idx]) - others;
                    if (d.role == MachineRole::PV) s = Complex(d.p, s.imag());
                    sol.device_injection[di] = s;
                    break;
                }
                case DeviceModel::ConstantPowerLoad: sol.device_injection[di] = -Complex(d.p, d.q); break;
                case DeviceModel::ConstantImpedanceLoad:
                    sol.device_injection[di] = -std::conj(d.y) * std::norm(vb);
                    break;
                case DeviceModel::DcPower: sol.device_injection[di] = d.p; break;
            }
        }
        for (std::size_t b = 0; b < c_.buses.size(); ++b)
            if (c_.buses[b].kind == BusKind::DC && !(sol.v[b].real() > 0.0))
                fail(ErrorKind::NonConvergence, "DC bus '" + c_.buses[b].id + "' converged to a non-positive voltage");
        for (std::size_t i = 0; i < elements_.size(); ++i) {
            const auto& e = elements_[i];
            if (e.kind != ElementKind::Converter) continue;
            const auto& br = c_.branches[e.branch];
            if (sol.taps[i].m < br.m_min || sol.taps[i].m > br.m_max) {
                std::ostringstream ss;
                ss << "converter '" << e.id << "' needs m = " << sol.taps[i].m << " outside [" << br.m_min << ", "
                   << br.m_max << "]";
                fail(ErrorKind::OverModulation, ss.str());
            }
        }
        return sol;
    }

private:
    VectorXd fd_column(const VectorXd& x, int col) const {
        const double h = 1e-7 * std::max(1.0, std::abs(x[col]));
        VectorXd xp = x, xm = x;
        xp[col] += h;
        xm[col] -= h;
        return (residual(xp) - residual(xm)) / (2.0 * h);
    }

    const NetworkCase& c_;
    PowerFlowOptions opt_;
    std::vector<Element> elements_;
    double w0_;
    std::vector<BusType> type_;
    std::vector<double> v_fix_, th_fix_;
    std::vector<int> th_idx_, vm_idx_, m_idx_, a_idx_;
    int n_bus_unknowns_ = 0;
    int n_ = 0;
};

template <class JacobianFn>
PowerFlowSolution newton(const PfProblem& pb, const PowerFlowOptions& opt, JacobianFn jac) {
    VectorXd x = pb.initial();
    if (pb.size() == 0) return pb.finish(x, 0, 0.0);
    VectorXd f = pb.residual(x);
    double norm = f.lpNorm<Eigen::Infinity>();
    int it = 0;
    auto step = [&](const VectorXd& xk) -> VectorXd {
        MatrixXd J = jac(xk);
        Eigen::FullPivLU<MatrixXd> lu(J);
        if (!lu.isInvertible()) fail(ErrorKind::SingularJacobian, "power-flow Jacobian is singular");
        return lu.solve(-pb.residual(xk));
    };
    while (!(norm <= opt.tol)) {
        if (it >= opt.max_iter || !std::isfinite(norm)) {
            std::ostringstream ss;
            ss << "no convergence after " << it << " iterations, residual " << norm;
            fail(ErrorKind::NonConvergence, ss.str());
        }
        VectorXd dx = step(x);
        double lambda = 1.0;
        VectorXd xn, fn;
        double nn = 0.0;
        for (int ls = 0; ls < 8; ++ls) {
            xn = x + lambda * dx;
            fn = pb.residual(xn);
            nn = fn.lpNorm<Eigen::Infinity>();
            if (std::isfinite(nn) && nn < norm) break;
            lambda *= 0.5;
        }
        x = xn;
        f = fn;
        norm = nn;
        ++it;
    }
    // Polish: full steps while they still help.
    for (int k = 0; k < 2; ++k) {
        VectorXd xn = x + step(x);
        VectorXd fn = pb.residual(xn);
        double nn = fn.lpNorm<Eigen::Infinity>();
        if (!(nn < norm)) break;
        x = xn;
        norm = nn;
    }
    return pb.finish(x, it, norm);
}

}  // namespace

Complex PowerFlowSolution::bus_injection_current(const NetworkCase& c, std::size_t bus) const {
    Complex s = 0.0;
    for (std::size_t di = 0; di < c.devices.size(); ++di)
        if (c.devices[di].bus_idx == bus) s += device_injection[di];
    return std::conj(s / v[bus]);
}

BranchStates PowerFlowSolution::branch_states(const NetworkCase& c) const {
    return steady_branch_states(c, elements, v, taps);
}

PowerFlowSolution solve_ac_powerflow(const NetworkCase& c, const PowerFlowOptions& options) {
    for (const auto& b : c.buses)
        if (b.kind == BusKind::DC)
            fail(ErrorKind::InvalidArgument, "solve_ac_powerflow: case has DC bus '" + b.id + "'");
    PfProblem pb(c, options);
    return newton(pb, options, [&](const VectorXd& x) { return pb.jacobian_ac(x); });
}

PowerFlowSolution solve_hybrid_powerflow(const NetworkCase& c, const PowerFlowOptions& options) {
    PfProblem pb(c, options);
    return newton(pb, options, [&](const VectorXd& x) { return pb.jacobian_fd(x); });
}

PowerFlowSolution solve_powerflow(const NetworkCase& c, const PowerFlowOptions& options) {
    for (const auto& b : c.buses)
        if (b.kind == BusKind::DC) return solve_hybrid_powerflow(c, options);
    return solve_ac_powerflow(c, options);
}

}  // namespace cfgrid
