#pragma once

#include <cfgrid/admittance.hpp>
#include <cfgrid/branches.hpp>
#include <cfgrid/case_io.hpp>
#include <cfgrid/network.hpp>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace cfgrid::testing {

inline std::filesystem::path case_path(const std::string& name) {
    return std::filesystem::path(CFGRID_CASES_DIR) / name;
}

inline NetworkCase load_case(const std::string& name) { return parse_case(case_path(name)); }

// Steady-state coefficients printed with two decimals in the reference
// publication for the WSCC 9-bus system. Empty c_xi means a transit bus.
struct TableRow {
    const char* bus;
    std::vector<std::pair<const char*, Complex>> c_eta;
    bool transit;
    Complex c_xi;
};

inline const std::vector<TableRow>& wscc_table() {
    static const std::vector<TableRow> rows = {
        {"1", {{"4", {0.99, -0.04}}}, false, {0.01, 0.04}},
        {"2", {{"7", {1.00, -0.10}}}, false, {0.00, 0.10}},
        {"3", {{"9", {1.01, -0.05}}}, false, {-0.01, 0.05}},
        {"4", {{"1", {0.45, -0.02}}, {"5", {0.29, 0.00}}, {"6", {0.27, 0.02}}}, true, {}},
        {"5", {{"4", {0.69, 0.00}}, {"7", {0.35, 0.07}}}, false, {-0.04, -0.07}},
        {"6", {{"4", {0.67, 0.01}}, {"9", {0.36, 0.04}}}, false, {-0.03, -0.05}},
        {"7", {{"2", {0.45, 0.01}}, {"5", {0.17, 0.00}}, {"8", {0.38, -0.01}}}, true, {}},
        {"8", {{"7", {0.59, 0.03}}, {"9", {0.43, 0.01}}}, false, {-0.02, -0.04}},
        {"9", {{"3", {0.53, -0.02}}, {"6", {0.17, 0.01}}, {"8", {0.30, 0.01}}}, true, {}},
    };
    return rows;
}

/// A validated case together with an arbitrary (not necessarily steady)
/// operating point: voltages, one block per element and the device
/// injections that satisfy current balance at every bus.
struct RandomOperatingPoint {
    NetworkCase c;
    std::vector<Element> elements;
    BranchStates blocks;
    std::vector<Complex> v;
    std::vector<Complex> injections;
};

/// Connected mixed AC/DC network with n_bus buses. Every element family
/// appears with random parameters and random instantaneous CFs.
inline RandomOperatingPoint random_operating_point(std::mt19937_64& rng, int n_bus) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto uni = [&](double a, double b) { return a + (b - a) * u(rng); };
    auto pick = [&](int n) { return static_cast<int>(u(rng) * n) % n; };

    RandomOperatingPoint op;
    NetworkCase& c = op.c;
    c.name = "random";
    c.base_mva = 100.0;
    c.f_nom_hz = 50.0;

    const int n_dc = n_bus >= 5 ? 1 + pick(n_bus / 3) : 0;
    const int n_ac = n_bus - n_dc;
    for (int i = 0; i < n_bus; ++i) {
        Bus b;
        b.id = (i < n_ac ? "a" : "d") + std::to_string(i);
        b.kind = i < n_ac ? BusKind::AC : BusKind::DC;
        b.base_kv = i < n_ac ? 230.0 : 320.0;
        c.buses.push_back(b);
    }
    int next = 0;
    auto add = [&](Branch br) {
        br.id = "e" + std::to_string(next++);
        c.branches.push_back(br);
    };
    auto ac_series = [&](int a, int b) {
        Branch br;
        br.from = c.buses[a].id;
        br.to = c.buses[b].id;
        switch (pick(4)) {
            case 0:
                br.model = BranchModel::ConstantY;
                br.y = 1.0 / Complex(uni(0.0, 0.05), uni(0.02, 0.3));
                break;
            case 1:
                br.model = BranchModel::PiLine;
                br.r = uni(0.0, 0.05);
                br.l = uni(1e-4, 1e-3);
                br.c = uni(0.0, 5e-4);
                br.dynamic = u(rng) < 0.5;
                break;
            case 2:
                br.model = BranchModel::SeriesRL;
                br.r = uni(0.0, 0.05);
                br.l = uni(1e-4, 1e-3);
                break;
            default:
                br.model = BranchModel::RegulatingTransformer;
                br.y = 1.0 / Complex(uni(0.0, 0.01), uni(0.05, 0.2));
                break;
        }
        add(br);
    };
    auto dc_series = [&](int a, int b) {
        Branch br;
        br.from = c.buses[a].id;
        br.to = c.buses[b].id;
        if (u(rng) < 0.3) {
            br.model = BranchModel::ConstantY;
            br.y = {uni(5.0, 50.0), 0.0};
        } else {
            br.model = BranchModel::SeriesRL;
            br.r = uni(0.005, 0.05);
            br.l = uni(1e-3, 1e-2);
        }
        add(br);
    };

    // Spanning trees plus a few extra meshes on each side.
    for (int i = 1; i < n_ac; ++i) ac_series(pick(i), i);
    for (int k = 0; k < n_ac / 4; ++k) {
        int a = pick(n_ac), b = pick(n_ac);
        if (a != b) ac_series(a, b);
    }
    for (int i = 1; i < n_dc; ++i) dc_series(n_ac + pick(i), n_ac + i);
    for (int k = 0; k < n_dc / 3; ++k) {
        int a = n_ac + pick(n_dc), b = n_ac + pick(n_dc);
        if (a != b) dc_series(a, b);
    }
    // Shunts.
    for (int i = 0; i < n_bus; ++i) {
        if (u(rng) < 0.5) continue;
        Branch br;
        br.from = c.buses[i].id;
        br.to = kGroundId;
        if (c.buses[i].kind == BusKind::DC || u(rng) < 0.5) {
            br.model = BranchModel::ShuntGC;
            br.g = uni(0.0, 0.05);
            br.c = uni(1e-3, 5e-2);
        } else {
            br.model = BranchModel::ConstantY;
            br.y = {uni(0.0, 0.1), uni(-0.3, 0.3)};
        }
        add(br);
    }
    // Converters: the first one holds the DC voltage of the single DC island.
    const int n_conv = n_dc > 0 ? 1 + pick(std::min(n_dc, 3)) : 0;
    for (int k = 0; k < n_conv; ++k) {
        Branch br;
        br.model = BranchModel::AcDcConverter;
        br.from = c.buses[pick(n_ac)].id;
        br.to = c.buses[n_ac + (k == 0 ? 0 : pick(n_dc))].id;
        br.y = 1.0 / Complex(uni(0.0, 0.02), uni(0.05, 0.2));
        br.converter.d_mode = k == 0 ? DAxisMode::Vdc : DAxisMode::P;
        add(br);
    }

    Device slack;
    slack.id = "G0";
    slack.bus = c.buses[0].id;
    slack.model = DeviceModel::SynchronousMachine;
    slack.role = MachineRole::Slack;
    c.devices.push_back(slack);
    validate(c);

    op.elements = expand_elements(c);
    op.v.resize(n_bus);
    for (int i = 0; i < n_bus; ++i)
        op.v[i] = c.buses[i].kind == BusKind::AC ? std::polar(uni(0.9, 1.1), uni(-0.6, 0.6))
                                                 : Complex(uni(0.95, 1.05), 0.0);

    const double w0 = c.omega_nom();
    for (const auto& e : op.elements) {
        const double w = e.ac ? w0 : 0.0;
        switch (e.kind) {
            case ElementKind::ConstantY:
                op.blocks.push_back(series_block(e.y));
                break;
            case ElementKind::SeriesRL: {
                ComplexFrequency xi{uni(-20.0, 20.0), w + (e.ac ? uni(-5.0, 5.0) : 0.0)};
                op.blocks.push_back(series_block(rl_admittance(xi, e.r, e.l)));
                break;
            }
            case ElementKind::ShuntGC: {
                ComplexFrequency eta{uni(-5.0, 5.0), w + (e.ac ? uni(-2.0, 2.0) : 0.0)};
                op.blocks.push_back(series_block(gc_admittance(eta, e.g, e.c)));
                break;
            }
            case ElementKind::Transformer:
                op.blocks.push_back(transformer_admittance_block({uni(0.9, 1.1), uni(-0.3, 0.3), 0.0, 0.0, e.y}));
                break;
            case ElementKind::Converter: {
                ConverterState cs;
                cs.m = uni(0.7, 1.2);
                cs.alpha = uni(-0.4, 0.4);
                cs.theta_ac = std::arg(op.v[e.from]);
                cs.v_ac = std::abs(op.v[e.from]);
                cs.v_dc = op.v[e.to].real();
                op.blocks.push_back(converter_admittance_block(cs, e.y));
                break;
            }
        }
    }

    // Device injection closes current balance: i_h = -sum_k Ybus(h,k) v_k.
    op.injections.assign(n_bus, Complex(0.0, 0.0));
    for (std::size_t i = 0; i < op.elements.size(); ++i) {
        const auto& e = op.elements[i];
        const auto& b = op.blocks[i];
        const Complex vf = op.v[e.from];
        if (e.to == kGround) {
            op.injections[e.from] -= b(0, 0) * vf;
            continue;
        }
        const Complex vt = op.v[e.to];
        op.injections[e.from] -= b(0, 0) * vf + b(0, 1) * vt;
        op.injections[e.to] -= b(1, 0) * vf + b(1, 1) * vt;
    }
    return op;
}

}  // namespace cfgrid::testing
