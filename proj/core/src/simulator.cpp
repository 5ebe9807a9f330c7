#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "cfgrid/error.hpp"
#include "cfgrid/simulation.hpp"

namespace cfgrid {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Column handles into the trajectory, filled once per sample.
struct Recorder {
    struct BusCols { std::size_t vm, va, rho, omega, ire, iim, dre, dim; };
    struct RlCols { std::size_t element, ire, iim, xre, xim; };
    struct TapCols { std::size_t element, m, a, dm, da, p, q; bool converter; };
    struct MachineCols { std::size_t device, w, delta, pe; };

    std::vector<BusCols> bus;
    std::vector<RlCols> rl;
    std::vector<TapCols> taps;
    std::vector<MachineCols> machines;
    std::vector<std::size_t> coi;

    Recorder(const DaeModel& model, Trajectory& tr) {
        const auto& c = model.network_case();
        for (const auto& b : c.buses) {
            BusCols bc{};
            bc.vm = tr.add_column("v_mag:" + b.id);
            bc.va = tr.add_column("v_ang:" + b.id);
            bc.rho = tr.add_column("rho:" + b.id);
            bc.omega = tr.add_column("omega:" + b.id);
            bc.ire = tr.add_column("inj_re:" + b.id);
            bc.iim = tr.add_column("inj_im:" + b.id);
            bc.dre = tr.add_column("dinj_re:" + b.id);
            bc.dim = tr.add_column("dinj_im:" + b.id);
            bus.push_back(bc);
        }
        const auto& el = model.elements();
        for (std::size_t i = 0; i < el.size(); ++i) {
            if (model.rl_var(i) >= 0) {
                rl.push_back({i, tr.add_column("il_re:" + el[i].id), tr.add_column("il_im:" + el[i].id),
                              tr.add_column("xi_re:" + el[i].id), tr.add_column("xi_im:" + el[i].id)});
            }
            const bool conv = model.converter_var(i) >= 0;
            if (conv || model.transformer_var(i) >= 0) {
                TapCols t{};
                t.element = i;
                t.converter = conv;
                t.m = tr.add_column("m:" + el[i].id);
                t.a = tr.add_column("alpha:" + el[i].id);
                t.dm = tr.add_column("dm:" + el[i].id);
                t.da = tr.add_column("dalpha:" + el[i].id);
                if (conv) {
                    t.p = tr.add_column("p_ac:" + el[i].id);
                    t.q = tr.add_column("q_ac:" + el[i].id);
                }
                taps.push_back(t);
            }
        }
        for (std::size_t d = 0; d < c.devices.size(); ++d) {
            if (model.machine_var(d) < 0) continue;
            const auto& id = c.devices[d].id;
            machines.push_back({d, tr.add_column("omega_m:" + id), tr.add_column("delta:" + id),
                                tr.add_column("pe:" + id)});
        }
        for (int a : model.areas()) coi.push_back(tr.add_column("coi:" + std::to_string(a)));
    }
};

class Integrator {
public:
    Integrator(const NetworkCase& c, const SimState& start, double dt, const SimOptions& opt)
        : model_(c), c_(model_.network_case()), opt_(opt), dt_(dt),
          nx_(model_.nx()), ny_(model_.ny()), n_(nx_ + ny_),
          sp_(start.setpoints), status_(start.status) {
        if (start.x.size() != nx_ || start.y.size() != ny_)
            fail(ErrorKind::DimensionMismatch, "initial state does not match the case layout");
        z_.resize(static_cast<Eigen::Index>(n_));
        for (std::size_t i = 0; i < nx_; ++i) z_[i] = start.x[i];
        for (std::size_t i = 0; i < ny_; ++i) z_[nx_ + i] = start.y[i];
        f_.resize(nx_);
        g_.resize(ny_);
        fn_.resize(nx_);
        zdot_ = VectorXd::Zero(static_cast<Eigen::Index>(n_));
    }

    const DaeModel& model() const { return model_; }

    void eval(const VectorXd& z, std::vector<double>& f, std::vector<double>& g, Probe* probe = nullptr) const {
        model_.evaluate(z.data(), z.data() + nx_, sp_, status_, f.data(), g.data(), probe);
    }

    VectorXd residual(const VectorXd& z) {
        eval(z, f_, g_);
        VectorXd r(static_cast<Eigen::Index>(n_));
        for (std::size_t i = 0; i < nx_; ++i) r[i] = z[i] - xn_[i] - 0.5 * dt_ * (fn_[i] + f_[i]);
        for (std::size_t i = 0; i < ny_; ++i) r[nx_ + i] = g_[i];
        return r;
    }

    void refresh_jacobian(const VectorXd& z) {
        MatrixXd J(n_, n_);
        VectorXd r0 = residual(z);
        VectorXd zp = z;
        for (std::size_t j = 0; j < n_; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(z[j]));
            zp[j] = z[j] + h;
            J.col(j) = (residual(zp) - r0) / h;
            zp[j] = z[j];
        }
        lu_.compute(J);
        if (ny_ > 0) gy_lu_.compute(J.bottomRightCorner(ny_, ny_));
        stale_ = false;
    }

    // Derivatives at the current point: x' from f, y' from g_x x' + g_y y' = 0.
    void derivatives() {
        eval(z_, f_, g_);
        for (std::size_t i = 0; i < nx_; ++i) zdot_[i] = f_[i];
        if (ny_ == 0) return;
        if (gy_lu_.rows() == 0) refresh_gy();
        VectorXd ydot = VectorXd::Zero(static_cast<Eigen::Index>(ny_));
        for (int it = 0; it < 8; ++it) {
            for (std::size_t i = 0; i < ny_; ++i) zdot_[nx_ + i] = ydot[i];
            VectorXd r = directional_g(zdot_);
            const double scale = std::max(1.0, ydot.lpNorm<Eigen::Infinity>());
            if (it > 0 && r.lpNorm<Eigen::Infinity>() < 1e-12 * scale) break;
            ydot -= gy_lu_.solve(r);
        }
        for (std::size_t i = 0; i < ny_; ++i) zdot_[nx_ + i] = ydot[i];
    }

    void refresh_gy() {
        std::vector<double> f(nx_), g0(ny_), gp(ny_);
        eval(z_, f, g0);
        MatrixXd gy(ny_, ny_);
        VectorXd zp = z_;
        for (std::size_t j = 0; j < ny_; ++j) {
            const std::size_t col = nx_ + j;
            const double h = 1e-7 * std::max(1.0, std::abs(z_[col]));
            zp[col] = z_[col] + h;
            eval(zp, f, gp);
            for (std::size_t i = 0; i < ny_; ++i) gy(i, j) = (gp[i] - g0[i]) / h;
            zp[col] = z_[col];
        }
        gy_lu_.compute(gy);
    }

    VectorXd directional_g(const VectorXd& dir) {
        const double norm = dir.lpNorm<Eigen::Infinity>();
        const double eps = 1e-5 / std::max(norm, 1e-5);
        std::vector<double> f(nx_), gp(ny_), gm(ny_);
        VectorXd zp = z_ + eps * dir, zm = z_ - eps * dir;
        eval(zp, f, gp);
        eval(zm, f, gm);
        VectorXd r(static_cast<Eigen::Index>(ny_));
        for (std::size_t i = 0; i < ny_; ++i) r[i] = (gp[i] - gm[i]) / (2.0 * eps);
        return r;
    }

    void apply_event(const Event& ev, std::size_t sample, Trajectory& tr) {
        const auto& el = model_.elements();
        if (ev.action == EventAction::DisconnectBranch) {
            auto bi = c_.find_branch(ev.target);
            for (std::size_t i = 0; i < el.size(); ++i) {
                if (el[i].branch != *bi) continue;
                status_.element_on[i] = 0;
                if (int k = model_.rl_var(i); k >= 0) {
                    z_[k] = 0.0;
                    if (el[i].ac) z_[k + 1] = 0.0;
                }
            }
        } else {
            status_.device_on[*c_.find_device(ev.target)] = 0;
        }
        for (std::size_t b = 0; b < c_.buses.size(); ++b)
            if (model_.bus_var(b).differential && !(model_.bus_capacitance(b, status_) > 0.0))
                fail(ErrorKind::InvalidArgument, "event on '" + ev.target + "' removes all capacitance at bus '" +
                                                     c_.buses[b].id + "'");

        // Re-solve the algebraic variables with the states frozen.
        VectorXd y_before = z_.tail(ny_);
        std::vector<double> f(nx_), g(ny_);
        for (int it = 0; it < 30 && ny_ > 0; ++it) {
            refresh_gy();
            eval(z_, f, g);
            VectorXd dy = gy_lu_.solve(-Eigen::Map<VectorXd>(g.data(), static_cast<Eigen::Index>(ny_)));
            z_.tail(ny_) += dy;
            if (dy.lpNorm<Eigen::Infinity>() < opt_.newton_tol) break;
            if (it == 29) fail(ErrorKind::StepNonConvergence, "algebraic re-solve after event '" + ev.target + "'");
        }
        EventRecord rec;
        rec.t = static_cast<double>(sample) * dt_;
        rec.sample = sample;
        rec.target = ev.target;
        rec.discontinuity = ny_ > 0 ? (z_.tail(ny_) - y_before).lpNorm<Eigen::Infinity>() : 0.0;
        tr.events.push_back(rec);
        stale_ = true;
        zdot_.tail(ny_).setZero();
        eval(z_, f_, g_);
        for (std::size_t i = 0; i < nx_; ++i) zdot_[i] = f_[i];
    }

    void step(double t_next) {
        xn_.assign(z_.data(), z_.data() + nx_);
        eval(z_, fn_, g_);
        VectorXd guess = z_ + dt_ * zdot_;
        for (int attempt = 0; attempt < 2; ++attempt) {
            VectorXd z = guess;
            if (stale_ || attempt > 0) refresh_jacobian(z);
            bool ok = false;
            int it = 0;
            for (; it < opt_.max_newton; ++it) {
                VectorXd r = residual(z);
                if (!r.allFinite()) break;
                VectorXd dz = lu_.solve(-r);
                z += dz;
                if (dz.lpNorm<Eigen::Infinity>() < opt_.newton_tol) {
                    ok = true;
                    break;
                }
            }
            if (ok) {
                z_ = z;
                if (it > 4) stale_ = true;
                return;
            }
        }
        std::ostringstream ss;
        ss << "Newton failed at t = " << t_next;
        fail(ErrorKind::StepNonConvergence, ss.str());
    }

    void record(Trajectory& tr, const Recorder& rec, double t) {
        derivatives();
        tr.time.push_back(t);
        Probe probe, pp, pm;
        std::vector<double> f(nx_), g(ny_);
        eval(z_, f, g, &probe);
        const double norm = zdot_.lpNorm<Eigen::Infinity>();
        const double eps = 1e-5 / std::max(norm, 1e-5);
        VectorXd zp = z_ + eps * zdot_, zm = z_ - eps * zdot_;
        eval(zp, f, g, &pp);
        eval(zm, f, g, &pm);

        const double w0 = model_.omega_nom();
        for (std::size_t b = 0; b < rec.bus.size(); ++b) {
            const auto& bc = rec.bus[b];
            const Complex v = probe.v[b];
            const auto bv = model_.bus_var(b);
            const std::size_t base = bv.differential ? static_cast<std::size_t>(bv.idx)
                                                     : nx_ + static_cast<std::size_t>(bv.idx);
            const bool ac = c_.is_ac(b);
            const Complex vdot = ac ? Complex(zdot_[base], zdot_[base + 1]) : Complex(zdot_[base], 0.0);
            const Complex eta = vdot / v + Complex(0.0, ac ? w0 : 0.0);
            const Complex inj = probe.device_current[b];
            const Complex dinj = (pp.device_current[b] - pm.device_current[b]) / (2.0 * eps);
            tr.column(bc.vm).push_back(std::abs(v));
            tr.column(bc.va).push_back(std::arg(v));
            tr.column(bc.rho).push_back(eta.real());
            tr.column(bc.omega).push_back(ac ? eta.imag() : 0.0);
            tr.column(bc.ire).push_back(inj.real());
            tr.column(bc.iim).push_back(ac ? inj.imag() : 0.0);
            tr.column(bc.dre).push_back(dinj.real());
            tr.column(bc.dim).push_back(ac ? dinj.imag() : 0.0);
        }
        const auto& el = model_.elements();
        for (const auto& r : rec.rl) {
            const int k = model_.rl_var(r.element);
            const bool ac = el[r.element].ac;
            const Complex i = ac ? Complex(z_[k], z_[k + 1]) : Complex(z_[k], 0.0);
            const Complex di = ac ? Complex(zdot_[k], zdot_[k + 1]) : Complex(zdot_[k], 0.0);
            Complex xi(kNaN, kNaN);
            if (status_.element_on[r.element] && std::abs(i) > kDefaultEpsMag)
                xi = di / i + Complex(0.0, ac ? w0 : 0.0);
            tr.column(r.ire).push_back(i.real());
            tr.column(r.iim).push_back(i.imag());
            tr.column(r.xre).push_back(xi.real());
            tr.column(r.xim).push_back(ac ? xi.imag() : (std::isnan(xi.real()) ? kNaN : 0.0));
        }
        for (const auto& t : rec.taps) {
            const int k = t.converter ? model_.converter_var(t.element) : model_.transformer_var(t.element);
            tr.column(t.m).push_back(z_[k]);
            tr.column(t.a).push_back(z_[k + 1]);
            tr.column(t.dm).push_back(zdot_[k]);
            tr.column(t.da).push_back(zdot_[k + 1]);
            if (t.converter) {
                tr.column(t.p).push_back(probe.converter_s_ac[t.element].real());
                tr.column(t.q).push_back(probe.converter_s_ac[t.element].imag());
            }
        }
        for (const auto& m : rec.machines) {
            const int k = model_.machine_var(m.device);
            tr.column(m.w).push_back(z_[k + 1]);
            tr.column(m.delta).push_back(z_[k]);
            tr.column(m.pe).push_back(probe.machine_pe[m.device]);
        }
        const auto coi = model_.coi(z_.data(), status_);
        for (std::size_t a = 0; a < rec.coi.size(); ++a) tr.column(rec.coi[a]).push_back(coi[a]);
    }

private:
    DaeModel model_;
    const NetworkCase& c_;
    SimOptions opt_;
    double dt_;
    std::size_t nx_, ny_, n_;
    Setpoints sp_;
    Status status_;
    VectorXd z_, zdot_;
    std::vector<double> xn_, fn_, f_, g_;
    Eigen::PartialPivLU<MatrixXd> lu_;
    Eigen::PartialPivLU<MatrixXd> gy_lu_;
    bool stale_ = true;
};

}  // namespace

Trajectory simulate(const NetworkCase& c, const SimState& start, double tstop, double dt, const SimOptions& options) {
    if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "dt must be positive");
    if (!(tstop >= 0.0)) fail(ErrorKind::InvalidArgument, "tstop must be non-negative");
    for (const auto& ev : c.events) {
        const bool found = ev.action == EventAction::DisconnectBranch ? c.find_branch(ev.target).has_value()
                                                                      : c.find_device(ev.target).has_value();
        if (!found) fail(ErrorKind::EventTargetMissing, "event target '" + ev.target + "' does not exist");
    }

    Integrator integ(c, start, dt, options);
    const auto n_steps = static_cast<std::size_t>(std::llround(tstop / dt));
    std::multimap<std::size_t, const Event*> schedule;
    for (const auto& ev : c.events) {
        const double rel = (ev.t - start.t) / dt;
        if (rel < -0.5) continue;
        const auto n = static_cast<std::size_t>(std::llround(rel));
        if (n <= n_steps) schedule.emplace(n, &ev);
    }

    Trajectory tr;
    tr.dt = dt;
    Recorder rec(integ.model(), tr);
    tr.reserve(n_steps + 1);
    integ.record(tr, rec, start.t);
    for (std::size_t n = 0; n < n_steps; ++n) {
        auto range = schedule.equal_range(n);
        for (auto it = range.first; it != range.second; ++it) integ.apply_event(*it->second, n, tr);
        const double t_next = start.t + static_cast<double>(n + 1) * dt;
        integ.step(t_next);
        integ.record(tr, rec, t_next);
    }
    return tr;
}

Trajectory simulate(const NetworkCase& c, double tstop, double dt, const SimOptions& options) {
    PowerFlowSolution pf = solve_powerflow(c, options.powerflow);
    SimState st = initialize_dynamics(c, pf, options.init_tol);
    return simulate(c, st, tstop, dt, options);
}

}  // namespace cfgrid
