#include "cfgrid/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <set>

#include "cfgrid/branches.hpp"
#include "cfgrid/error.hpp"

namespace cfgrid {

namespace {

constexpr Complex kJ{0.0, 1.0};
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

ComplexFrequency ratio_cf(Complex num, Complex den, double eps) {
    if (!(std::abs(den) > eps) || !finite(num)) return ComplexFrequency::flagged();
    return ComplexFrequency::from(num / den);
}

bool is_symmetric(ElementKind k) {
    return k == ElementKind::ConstantY || k == ElementKind::SeriesRL || k == ElementKind::ShuntGC;
}

struct Incidence {
    std::size_t element;
    int row;  // 0 when the bus is the element's `from`, 1 when it is `to`
};

std::vector<std::vector<Incidence>> incidence(std::size_t n_bus, const std::vector<Element>& elements) {
    std::vector<std::vector<Incidence>> inc(n_bus);
    for (std::size_t i = 0; i < elements.size(); ++i) {
        inc[elements[i].from].push_back({i, 0});
        if (elements[i].to != kGround) inc[elements[i].to].push_back({i, 1});
    }
    return inc;
}

// Everything the decomposition of one bus at one instant needs. Blocks and
// their derivatives are indexed by element; only incident ones are read.
struct PointInputs {
    const std::vector<Complex>* v = nullptr;
    const BranchStates* blocks = nullptr;
    const BranchStates* dots = nullptr;                 // null: constant admittances
    const std::vector<Complex>* injection = nullptr;
    const std::vector<Complex>* injection_dot = nullptr;  // stationary frame; null: no xi term
    const std::vector<ComplexFrequency>* eta = nullptr;   // null: zero CFs
    const std::vector<char>* in_service = nullptr;
};

enum class PointStatus { Ok, Magnitude, SingularBus };

PointStatus decompose_point(const NetworkCase& c, std::size_t h, const std::vector<Element>& elements,
                            const std::vector<Incidence>& inc, const PointInputs& in, const AnalysisOptions& opt,
                            CfDecomposition& d) {
    const auto& v = *in.v;
    d.bus = c.buses[h].id;
    const Complex vh = v[h];
    if (!(std::abs(vh) > opt.eps_mag)) return PointStatus::Magnitude;

    Complex y_hh = 0.0, y_hh_dot = 0.0, ground = 0.0, ground_dot = 0.0;
    bool has_ground = false;
    for (const auto& ic : inc) {
        if (in.in_service && !(*in.in_service)[ic.element]) continue;
        const Complex D = (*in.blocks)[ic.element](ic.row, ic.row);
        const Complex Dd = in.dots ? (*in.dots)[ic.element](ic.row, ic.row) : Complex(0.0, 0.0);
        y_hh += D;
        y_hh_dot += Dd;
        if (elements[ic.element].is_shunt()) {
            ground += D;
            ground_dot += Dd;
            has_ground = true;
        }
    }
    d.y_hh = y_hh;
    if (!(std::abs(y_hh) > opt.eps_sing)) return PointStatus::SingularBus;
    const Complex denom = vh * y_hh;

    const Complex inj = (*in.injection)[h];
    d.c_xi = -inj / denom;
    if (in.injection_dot) {
        const Complex idot = (*in.injection_dot)[h];
        d.xi_product = -idot / denom;
        d.xi = std::abs(inj) > opt.eps_mag ? ComplexFrequency::from(idot / inj) : ComplexFrequency::flagged();
    } else {
        d.xi = {};
        d.xi_product = 0.0;
    }

    for (const auto& ic : inc) {
        if (in.in_service && !(*in.in_service)[ic.element]) continue;
        const auto& e = elements[ic.element];
        if (e.is_shunt()) continue;
        const int r = ic.row, o = 1 - ic.row;
        const std::size_t k = r == 0 ? e.to : e.from;
        const Complex vk = v[k];
        const Complex D = (*in.blocks)[ic.element](r, r);
        const Complex O = (*in.blocks)[ic.element](r, o);
        const Complex Dd = in.dots ? (*in.dots)[ic.element](r, r) : Complex(0.0, 0.0);
        const Complex Od = in.dots ? (*in.dots)[ic.element](r, o) : Complex(0.0, 0.0);

        EtaTerm et;
        et.element = e.id;
        et.neighbor = c.buses[k].id;
        et.coefficient = -vk * O / denom;
        et.eta = in.eta ? (*in.eta)[k] : ComplexFrequency{};
        d.c_eta.push_back(et);

        const Complex flow_coef = -(D * vh + O * vk) / denom;
        d.c_chi_branch.emplace_back(e.id, flow_coef);
        if (is_symmetric(e.kind)) {
            ChiTerm t;
            t.element = e.id;
            t.counterpart = c.buses[k].id;
            t.entry = ChiEntry::Branch;
            t.coefficient = flow_coef;
            t.chi = ratio_cf(Od, O, opt.eps_sing);
            t.product = -(Dd * vh + Od * vk) / denom;
            d.c_chi.push_back(t);
        } else {
            ChiTerm td;
            td.element = e.id;
            td.counterpart = c.buses[h].id;
            td.entry = ChiEntry::Diagonal;
            td.coefficient = -D / y_hh;
            td.chi = ratio_cf(Dd, D, opt.eps_sing);
            td.product = -Dd / y_hh;
            d.c_chi.push_back(td);
            ChiTerm to;
            to.element = e.id;
            to.counterpart = c.buses[k].id;
            to.entry = ChiEntry::OffDiagonal;
            to.coefficient = et.coefficient;
            to.chi = ratio_cf(Od, O, opt.eps_sing);
            to.product = -Od * vk / denom;
            d.c_chi.push_back(to);
        }
    }
    if (has_ground) {
        ChiTerm t;
        t.element = kGroundId;
        t.counterpart = kGroundId;
        t.entry = ChiEntry::Branch;
        t.coefficient = -ground / y_hh;
        t.chi = ratio_cf(ground_dot, ground, opt.eps_sing);
        t.product = -ground_dot / y_hh;
        d.c_chi.push_back(t);
        d.c_chi_branch.emplace_back(kGroundId, t.coefficient);
    }
    d.chi_hh = ComplexFrequency::from(y_hh_dot / y_hh);
    d.eta_reconstructed = reconstruct_eta(d);
    return PointStatus::Ok;
}

}  // namespace

std::string to_string(ChiEntry e) {
    switch (e) {
        case ChiEntry::Branch: return "branch";
        case ChiEntry::Diagonal: return "diag";
        case ChiEntry::OffDiagonal: return "off";
    }
    return "?";
}

std::map<std::string, Complex> CfDecomposition::c_eta_by_neighbor() const {
    std::map<std::string, Complex> out;
    for (const auto& t : c_eta) out[t.neighbor] += t.coefficient;
    return out;
}

double CfDecomposition::property1_residual() const {
    Complex s = c_xi;
    for (const auto& t : c_eta) s += t.coefficient;
    return std::abs(s - 1.0);
}

double CfDecomposition::property2_residual() const {
    Complex s = c_xi;
    for (const auto& t : c_chi) s += t.coefficient;
    return std::abs(s);
}

double CfDecomposition::property2_unsigned_residual() const {
    Complex s = -c_xi;
    for (const auto& t : c_chi) s += t.coefficient;
    return std::abs(s);
}

ComplexFrequency reconstruct_eta(const CfDecomposition& d) {
    Complex s = d.xi_product;
    for (const auto& t : d.c_chi) s += t.product;
    for (const auto& t : d.c_eta) {
        if (t.eta.singular) return ComplexFrequency::flagged();
        s += t.coefficient * t.eta.value();
    }
    if (!finite(s)) return ComplexFrequency::flagged();
    return ComplexFrequency::from(s);
}

ComplexFrequency compute_chi_hh(const std::vector<Complex>& y_hk, const std::vector<ComplexFrequency>& chi_hk,
                                double eps_sing) {
    if (y_hk.size() != chi_hk.size()) fail(ErrorKind::DimensionMismatch, "one chi per branch admittance expected");
    Complex y_hh = 0.0, num = 0.0;
    for (std::size_t i = 0; i < y_hk.size(); ++i) {
        y_hh -= y_hk[i];
        num += y_hk[i] * chi_hk[i].value();
    }
    if (!(std::abs(y_hh) > eps_sing)) fail(ErrorKind::SingularBus, "|Y_hh| <= eps_sing");
    return ComplexFrequency::from(-num / y_hh);
}

std::vector<CouplingMetric> coupling_metrics(const CfDecomposition& d) {
    std::vector<CouplingMetric> out;
    for (const auto& [nb, c] : d.c_eta_by_neighbor()) {
        CouplingMetric m;
        m.neighbor = nb;
        m.self = std::abs(c.real());
        m.cross = std::abs(c.imag());
        m.ratio = m.cross > 0.0 ? m.self / m.cross : std::numeric_limits<double>::infinity();
        out.push_back(m);
    }
    return out;
}

CfDecomposition compute_coefficients(const NetworkCase& c, std::size_t h, const std::vector<Complex>& v,
                                     const std::vector<Element>& elements, const BranchStates& blocks,
                                     const std::vector<Complex>& injections, const std::vector<char>* in_service,
                                     const AnalysisOptions& options) {
    if (h >= c.buses.size() || v.size() != c.buses.size() || injections.size() != c.buses.size() ||
        blocks.size() != elements.size())
        fail(ErrorKind::DimensionMismatch, "compute_coefficients: inconsistent input sizes");
    auto inc = incidence(c.buses.size(), elements);
    PointInputs in;
    in.v = &v;
    in.blocks = &blocks;
    in.injection = &injections;
    in.in_service = in_service;
    CfDecomposition d;
    switch (decompose_point(c, h, elements, inc[h], in, options, d)) {
        case PointStatus::Magnitude: fail(ErrorKind::SingularBus, "bus '" + c.buses[h].id + "': |v| <= eps_mag");
        case PointStatus::SingularBus: fail(ErrorKind::SingularBus, "bus '" + c.buses[h].id + "': |Y_hh| <= eps_sing");
        case PointStatus::Ok: break;
    }
    return d;
}

std::vector<CfDecomposition> steady_state_coefficients(const NetworkCase& c, const PowerFlowSolution& pf,
                                                       const AnalysisOptions& options) {
    BranchStates blocks = steady_branch_states(c, pf.elements, pf.v, pf.taps, options.eps_sing);
    std::vector<Complex> inj(c.buses.size());
    for (std::size_t b = 0; b < c.buses.size(); ++b) inj[b] = pf.bus_injection_current(c, b);
    std::vector<CfDecomposition> out;
    for (std::size_t b = 0; b < c.buses.size(); ++b)
        out.push_back(compute_coefficients(c, b, pf.v, pf.elements, blocks, inj, nullptr, options));
    return out;
}

// ======================================================================
// Trajectory analysis
// ======================================================================

struct TrajectoryAnalyzer::Impl {
    const NetworkCase& c;
    const Trajectory& tr;
    AnalysisOptions opt;
    std::vector<Element> elements;
    std::vector<std::vector<Incidence>> inc;
    double w0 = 0.0;
    std::size_t n = 0;

    // per bus
    std::vector<const std::vector<double>*> vmag, vang, rho, omega, ire, iim;
    std::vector<std::vector<double>> dire, diim;  // rotating-frame derivative of the injection
    std::vector<std::vector<ComplexFrequency>> eta_direct;
    std::vector<std::vector<Complex>> eta_dot;  // only buses with shunt GC
    // per element
    std::vector<const std::vector<double>*> xre, xim, m, alpha, dm, dalpha;
    std::vector<std::vector<Complex>> xi_dot;

    std::vector<std::size_t> event_samples;
    std::vector<std::pair<std::size_t, std::vector<char>>> status_segments;  // first sample, mask

    Impl(const NetworkCase& c_, const Trajectory& tr_, const AnalysisOptions& o) : c(c_), tr(tr_), opt(o) {
        elements = expand_elements(c);
        inc = incidence(c.buses.size(), elements);
        w0 = c.omega_nom();
        n = tr.rows();
        if (n < 3) fail(ErrorKind::TooFewSamples, "trajectory needs at least 3 samples");
        const std::size_t nb = c.buses.size();
        vmag.resize(nb);
        vang.resize(nb);
        rho.resize(nb);
        omega.resize(nb);
        ire.resize(nb);
        iim.resize(nb);
        dire.resize(nb);
        diim.resize(nb);
        eta_direct.resize(nb);
        eta_dot.resize(nb);
        std::vector<char> has_gc(nb, 0);
        for (const auto& e : elements)
            if (e.kind == ElementKind::ShuntGC) has_gc[e.from] = 1;
        for (std::size_t b = 0; b < nb; ++b) {
            const auto& id = c.buses[b].id;
            vmag[b] = &tr.column("v_mag:" + id);
            vang[b] = &tr.column("v_ang:" + id);
            ire[b] = &tr.column("inj_re:" + id);
            iim[b] = &tr.column("inj_im:" + id);
            ComplexSignal sig;
            sig.dt = tr.dt;
            sig.samples.resize(n);
            for (std::size_t k = 0; k < n; ++k) sig.samples[k] = std::polar((*vmag[b])[k], (*vang[b])[k]);
            eta_direct[b] = estimate_cf(sig, {opt.eps_mag});
            if (c.is_ac(b))
                for (auto& cf : eta_direct[b]) cf.omega += w0;
            if (tr.has("rho:" + id)) {
                rho[b] = &tr.column("rho:" + id);
                omega[b] = &tr.column("omega:" + id);
            } else {
                rho[b] = omega[b] = nullptr;
            }
            if (tr.has("dinj_re:" + id)) {
                dire[b] = tr.column("dinj_re:" + id);
                diim[b] = tr.column("dinj_im:" + id);
            } else {
                dire[b] = differentiate(*ire[b], tr.dt);
                diim[b] = differentiate(*iim[b], tr.dt);
            }
            if (has_gc[b]) {
                std::vector<double> re(n), im(n);
                for (std::size_t k = 0; k < n; ++k) {
                    auto e = eta(b, k);
                    re[k] = e.rho;
                    im[k] = e.omega;
                }
                auto dre = differentiate(re, tr.dt), dim = differentiate(im, tr.dt);
                eta_dot[b].resize(n);
                for (std::size_t k = 0; k < n; ++k) eta_dot[b][k] = {dre[k], dim[k]};
            }
        }
        const std::size_t ne = elements.size();
        xre.assign(ne, nullptr);
        xim.assign(ne, nullptr);
        m.assign(ne, nullptr);
        alpha.assign(ne, nullptr);
        dm.assign(ne, nullptr);
        dalpha.assign(ne, nullptr);
        xi_dot.resize(ne);
        for (std::size_t i = 0; i < ne; ++i) {
            const auto& e = elements[i];
            if (e.kind == ElementKind::SeriesRL) {
                xre[i] = &tr.column("xi_re:" + e.id);
                xim[i] = &tr.column("xi_im:" + e.id);
                const auto& ir = tr.column("il_re:" + e.id);
                const auto& ii = tr.column("il_im:" + e.id);
                // L di/dt + R i = v_from - v_to, differentiated once more:
                // xi' = ((eta_f v_f - eta_t v_t)/i - R xi)/L - xi^2
                xi_dot[i].resize(n);
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex cur(ir[k], ii[k]);
                    const Complex x = xi(i, k);
                    const Complex dv = eta(e.from, k).value() * voltage(e.from, k) -
                                       eta(e.to, k).value() * voltage(e.to, k);
                    xi_dot[i][k] = (dv / cur - e.r * x) / e.l - x * x;
                }
            } else if (e.kind == ElementKind::Transformer || e.kind == ElementKind::Converter) {
                m[i] = &tr.column("m:" + e.id);
                alpha[i] = &tr.column("alpha:" + e.id);
                dm[i] = &tr.column("dm:" + e.id);
                dalpha[i] = &tr.column("dalpha:" + e.id);
            }
        }

        // Status timeline from the case events.
        std::vector<std::pair<std::size_t, const Event*>> evs;
        const double t0 = tr.time.front();
        for (const auto& ev : c.events) {
            const double rel = (ev.t - t0) / tr.dt;
            if (rel < -0.5 || rel > static_cast<double>(n - 1) + 0.5) continue;
            evs.emplace_back(static_cast<std::size_t>(std::llround(rel)), &ev);
        }
        std::stable_sort(evs.begin(), evs.end(), [](auto& a, auto& b) { return a.first < b.first; });
        std::vector<char> mask(ne, 1);
        status_segments.emplace_back(0, mask);
        for (const auto& [s, ev] : evs) {
            event_samples.push_back(s);
            if (ev->action != EventAction::DisconnectBranch) continue;
            auto bi = c.find_branch(ev->target);
            if (!bi) continue;
            for (std::size_t i = 0; i < ne; ++i)
                if (elements[i].branch == *bi) mask[i] = 0;
            status_segments.emplace_back(s + 1, mask);
        }
    }

    const std::vector<char>& status_at(std::size_t k) const {
        const std::vector<char>* out = &status_segments.front().second;
        for (const auto& [first, mask] : status_segments)
            if (first <= k) out = &mask;
        return *out;
    }

    Complex voltage(std::size_t b, std::size_t k) const { return std::polar((*vmag[b])[k], (*vang[b])[k]); }

    ComplexFrequency eta(std::size_t b, std::size_t k) const {
        if (rho[b]) return {(*rho[b])[k], (*omega[b])[k], false};
        return eta_direct[b][k];
    }

    Complex xi(std::size_t i, std::size_t k) const { return {(*xre[i])[k], (*xim[i])[k]}; }

    // Block and its time derivative of element i at sample k.
    void block(std::size_t i, std::size_t k, Block2& y, Block2& yd, bool& singular) const {
        const auto& e = elements[i];
        singular = false;
        switch (e.kind) {
            case ElementKind::ConstantY:
                y = series_block(e.y);
                yd.setZero();
                return;
            case ElementKind::SeriesRL: {
                const Complex z = e.l * xi(i, k) + e.r;
                if (!(std::abs(z) > opt.eps_sing) || !finite(z)) {
                    singular = true;
                    y = series_block(Complex(kNaN, kNaN));
                    yd = y;
                    return;
                }
                const Complex yy = 1.0 / z;
                y = series_block(yy);
                yd = series_block(-e.l * xi_dot[i][k] * yy * yy);
                return;
            }
            case ElementKind::ShuntGC: {
                auto et = eta(e.from, k);
                y = series_block(gc_admittance(et, e.g, e.c));
                yd = series_block(e.c * eta_dot[e.from][k]);
                return;
            }
            case ElementKind::Transformer: {
                TransformerState ts{(*m[i])[k], (*alpha[i])[k], (*dm[i])[k], (*dalpha[i])[k], e.y};
                y = transformer_admittance_block(ts);
                yd = transformer_admittance_dot(ts);
                return;
            }
            case ElementKind::Converter: {
                ConverterState cs;
                cs.m = (*m[i])[k];
                cs.alpha = (*alpha[i])[k];
                cs.dm_dt = (*dm[i])[k];
                cs.dalpha_dt = (*dalpha[i])[k];
                cs.v_ac = (*vmag[e.from])[k];
                cs.theta_ac = (*vang[e.from])[k];
                cs.v_dc = (*vmag[e.to])[k];
                const auto eac = eta(e.from, k), edc = eta(e.to, k);
                cs.dtheta_ac_dt = eac.omega;
                cs.dv_ac_dt = eac.rho * cs.v_ac;
                cs.dv_dc_dt = edc.rho * cs.v_dc;
                if (!(cs.m > 0.0 && cs.v_ac > 0.0 && cs.v_dc > 0.0)) {
                    singular = true;
                    y = Block2::Constant(Complex(kNaN, kNaN));
                    yd = y;
                    return;
                }
                y = converter_admittance_block(cs, e.y);
                yd = converter_admittance_dot(cs, e.y);
                return;
            }
        }
    }

    Complex y_hh_at(std::size_t h, std::size_t k) const {
        const auto& on = status_at(k);
        Complex s = 0.0;
        Block2 y, yd;
        bool sing;
        for (const auto& ic : inc[h]) {
            if (!on[ic.element]) continue;
            block(ic.element, k, y, yd, sing);
            s += y(ic.row, ic.row);
        }
        return s;
    }

    CfDecomposition at(std::size_t h, std::size_t k) const {
        CfDecomposition d;
        d.bus = c.buses[h].id;
        d.time = tr.time[k];
        d.eta_direct = eta_direct[h][k];
        auto flag = [&](const std::string& why) {
            if (!d.flagged) {
                d.flagged = true;
                d.flag_reason = why;
            }
        };
        for (std::size_t s : event_samples)
            if (k == s || k == s + 1) flag("event");

        const auto& on = status_at(k);
        const bool dc = !c.is_ac(h);
        // stencil checks on incident RL elements
        for (const auto& ic : inc[h]) {
            if (!on[ic.element]) continue;
            const auto& e = elements[ic.element];
            if (e.kind != ElementKind::SeriesRL) continue;
            const Complex z = e.l * xi(ic.element, k) + e.r;
            if (!(std::abs(z) > opt.eps_sing)) flag("singular_admittance");
            if (dc) {
                const double r0 = z.real();
                for (std::size_t kk : {k - 1, k + 1}) {
                    if ((k == 0 && kk == k - 1) || kk >= n) continue;
                    const double r1 = (e.l * xi(ic.element, kk) + e.r).real();
                    if ((r0 > 0.0) != (r1 > 0.0)) flag("req_sign_change");
                }
            }
        }
        if (dc) {
            const double y0 = y_hh_at(h, k).real();
            for (std::size_t kk : {k - 1, k + 1}) {
                if ((k == 0 && kk == k - 1) || kk >= n) continue;
                if ((y0 > 0.0) != (y_hh_at(h, kk).real() > 0.0)) flag("singular_bus");
            }
        }
        if (d.eta_direct.singular) flag("magnitude");

        std::vector<Complex> v(c.buses.size()), inj(c.buses.size(), 0.0), inj_dot(c.buses.size(), 0.0);
        std::vector<ComplexFrequency> etas(c.buses.size());
        std::set<std::size_t> needed{h};
        for (const auto& ic : inc[h]) {
            const auto& e = elements[ic.element];
            if (!e.is_shunt()) needed.insert(ic.row == 0 ? e.to : e.from);
        }
        for (std::size_t b : needed) {
            v[b] = voltage(b, k);
            etas[b] = eta(b, k);
        }
        inj[h] = {(*ire[h])[k], (*iim[h])[k]};
        inj_dot[h] = Complex(dire[h][k], diim[h][k]) + (c.is_ac(h) ? kJ * w0 * inj[h] : Complex(0.0, 0.0));

        BranchStates blocks(elements.size(), Block2::Zero()), dots(elements.size(), Block2::Zero());
        for (const auto& ic : inc[h]) {
            if (!on[ic.element]) continue;
            bool sing = false;
            block(ic.element, k, blocks[ic.element], dots[ic.element], sing);
            if (sing) flag("singular_admittance");
        }
        PointInputs in;
        in.v = &v;
        in.blocks = &blocks;
        in.dots = &dots;
        in.injection = &inj;
        in.injection_dot = &inj_dot;
        in.eta = &etas;
        in.in_service = &on;
        CfDecomposition full;
        const double time = d.time;
        auto status = decompose_point(c, h, elements, inc[h], in, opt, full);
        const bool was_flagged = d.flagged;
        const std::string reason = d.flag_reason;
        const ComplexFrequency direct = d.eta_direct;
        d = std::move(full);
        d.time = time;
        d.eta_direct = direct;
        d.flagged = was_flagged;
        d.flag_reason = reason;
        if (status == PointStatus::Magnitude) flag("magnitude");
        if (status == PointStatus::SingularBus) flag("singular_bus");
        if (status == PointStatus::Ok && (d.eta_reconstructed.singular || !finite(d.eta_reconstructed.value())))
            flag("nonfinite");
        return d;
    }
};

TrajectoryAnalyzer::TrajectoryAnalyzer(const NetworkCase& c, const Trajectory& tr, const AnalysisOptions& options)
    : impl_(std::make_shared<const Impl>(c, tr, options)) {}

std::size_t TrajectoryAnalyzer::samples() const { return impl_->n; }

CfDecomposition TrajectoryAnalyzer::at(std::size_t bus, std::size_t sample) const {
    if (bus >= impl_->c.buses.size() || sample >= impl_->n)
        fail(ErrorKind::DimensionMismatch, "bus or sample index out of range");
    return impl_->at(bus, sample);
}

const std::vector<char>& TrajectoryAnalyzer::in_service(std::size_t sample) const { return impl_->status_at(sample); }

AuditReport audit_trajectory(const Trajectory& tr, const NetworkCase& c, const AnalysisOptions& options) {
    TrajectoryAnalyzer an(c, tr, options);
    AuditReport rep;
    rep.dt = tr.dt;
    rep.recon_tol = options.recon_tol;
    for (std::size_t h = 0; h < c.buses.size(); ++h) {
        BusAudit ba;
        ba.bus = c.buses[h].id;
        for (std::size_t k = 0; k < an.samples(); ++k) {
            ++ba.samples;
            CfDecomposition d = an.at(h, k);
            if (d.flag_reason == "req_sign_change") ba.req_sign_change_samples.push_back(k);
            if (d.flagged) {
                ++ba.flagged;
                ++ba.flag_counts[d.flag_reason];
                continue;
            }
            ba.max_property1 = std::max(ba.max_property1, d.property1_residual());
            ba.max_property2 = std::max(ba.max_property2, d.property2_residual());
            ba.max_property2_unsigned = std::max(ba.max_property2_unsigned, d.property2_unsigned_residual());
            const double err = std::max(std::abs(d.eta_reconstructed.rho - d.eta_direct.rho),
                                        std::abs(d.eta_reconstructed.omega - d.eta_direct.omega));
            ++ba.recon_checked;
            if (err < options.recon_tol) ++ba.recon_within_tol;
            if (err > ba.max_recon_error) {
                ba.max_recon_error = err;
                ba.max_recon_time = d.time;
            }
        }
        rep.buses.push_back(std::move(ba));
    }
    return rep;
}

std::size_t AuditReport::total_checked() const {
    std::size_t s = 0;
    for (const auto& b : buses) s += b.recon_checked;
    return s;
}

std::size_t AuditReport::total_within_tol() const {
    std::size_t s = 0;
    for (const auto& b : buses) s += b.recon_within_tol;
    return s;
}

std::size_t AuditReport::total_flagged() const {
    std::size_t s = 0;
    for (const auto& b : buses) s += b.flagged;
    return s;
}

double AuditReport::max_property1() const {
    double m = 0.0;
    for (const auto& b : buses) m = std::max(m, b.max_property1);
    return m;
}

double AuditReport::max_property2() const {
    double m = 0.0;
    for (const auto& b : buses) m = std::max(m, b.max_property2);
    return m;
}

std::string AuditReport::to_text() const {
    std::string s;
    s += fmt::format("cf audit  dt={}  reconstruction tolerance={}\n", format_number(dt), format_number(recon_tol));
    s += "property 1: |sum c_eta + c_xi - 1|\n";
    s += "property 2: |sum c_chi + c_xi| (signed), |sum c_chi - c_xi| (unsigned)\n\n";
    s += fmt::format("{:<10} {:>8} {:>8} {:>12} {:>12} {:>12} {:>12} {:>10} {:>10}\n", "bus", "samples", "flagged",
                     "max_p1", "max_p2", "max_p2_uns", "max_recon", "t_recon", "within");
    for (const auto& b : buses) {
        const double frac = b.recon_checked ? static_cast<double>(b.recon_within_tol) / b.recon_checked : 1.0;
        s += fmt::format("{:<10} {:>8} {:>8} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e} {:>10.4f} {:>10.6f}\n", b.bus,
                         b.samples, b.flagged, b.max_property1, b.max_property2, b.max_property2_unsigned,
                         b.max_recon_error, b.max_recon_time, frac);
    }
    s += "\nflagged samples by reason\n";
    for (const auto& b : buses) {
        if (b.flag_counts.empty()) continue;
        s += fmt::format("  {}:", b.bus);
        for (const auto& [why, count] : b.flag_counts) s += fmt::format(" {}={}", why, count);
        s += "\n";
        if (!b.req_sign_change_samples.empty()) {
            s += "    R_eq sign change at t =";
            std::size_t shown = 0;
            for (std::size_t k : b.req_sign_change_samples) {
                if (shown++ == 40) {
                    s += " ...";
                    break;
                }
                s += " " + format_number(static_cast<double>(k) * dt);
            }
            s += "\n";
        }
    }
    const std::size_t checked = total_checked();
    s += fmt::format("\noverall: {} of {} non-flagged bus-samples within tolerance ({} flagged)\n", total_within_tol(),
                     checked, total_flagged());
    return s;
}

void for_each_decomposition(const Trajectory& tr, const NetworkCase& c, const std::vector<std::string>& buses,
                            std::size_t stride, const std::function<void(const CfDecomposition&)>& sink,
                            const AnalysisOptions& options) {
    std::vector<std::size_t> sel;
    if (buses.empty()) {
        for (std::size_t b = 0; b < c.buses.size(); ++b) sel.push_back(b);
    } else {
        for (const auto& id : buses) sel.push_back(c.bus_index(id));
    }
    if (stride == 0) stride = 1;
    TrajectoryAnalyzer an(c, tr, options);
    for (std::size_t k = 0; k < an.samples(); k += stride)
        for (std::size_t b : sel) sink(an.at(b, k));
}

}  // namespace cfgrid
