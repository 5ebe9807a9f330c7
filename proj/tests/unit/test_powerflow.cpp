#include <catch_amalgamated.hpp>

#include <cfgrid/case_io.hpp>
#include <cfgrid/error.hpp>
#include <cfgrid/powerflow.hpp>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "test_support.hpp"

using namespace cfgrid;
using Catch::Approx;
using json = nlohmann::json;

namespace {

json radial_case(double p_load, double q_load, double x) {
    json doc = json::parse(R"({
      "base_mva": 100, "f_nom_hz": 50,
      "buses": [{"id": "s", "kind": "AC", "base_kv": 110}, {"id": "r", "kind": "AC", "base_kv": 110}],
      "devices": [{"id": "g", "bus": "s", "model": "SynchronousMachine", "role": "slack", "V": 1.0}]
    })");
    doc["branches"] = {{{"id", "l"}, {"model", "ConstantY"}, {"from", "s"}, {"to", "r"}, {"R", 0.0}, {"X", x}}};
    if (p_load != 0.0 || q_load != 0.0)
        doc["devices"].push_back(
            {{"id", "load"}, {"bus", "r"}, {"model", "ConstantPowerLoad"}, {"P", p_load}, {"Q", q_load}});
    return doc;
}

// AC slack - line - AC bus - converter - DC bus with a constant power load.
json toy_hybrid_case() {
    return json::parse(R"({
      "base_mva": 100, "f_nom_hz": 50,
      "buses": [{"id": "a", "kind": "AC", "base_kv": 220}, {"id": "b", "kind": "AC", "base_kv": 220},
                {"id": "d", "kind": "DC", "base_kv": 300}],
      "branches": [
        {"id": "l", "model": "ConstantY", "from": "a", "to": "b", "R": 0.02, "X": 0.2},
        {"id": "c", "model": "AcDcConverter", "from": "b", "to": "d", "R": 0.01, "X": 0.15,
         "control": {"d_mode": "v_dc", "q_mode": "Q", "v_dc_ref": 1.0, "q_ref": 0.1}}],
      "devices": [{"id": "g", "bus": "a", "model": "SynchronousMachine", "role": "slack", "V": 1.02},
                  {"id": "load", "bus": "d", "model": "DcLoad", "P": 0.5}]
    })");
}

std::size_t element_index(const PowerFlowSolution& pf, const std::string& id) {
    for (std::size_t i = 0; i < pf.elements.size(); ++i)
        if (pf.elements[i].id == id) return i;
    FAIL("no element " << id);
    return 0;
}

}  // namespace

TEST_CASE("WSCC dispatch", "[powerflow]") {
    auto c = testing::load_case("wscc9.json");
    auto pf = solve_ac_powerflow(c);
    CHECK(pf.max_mismatch <= 1e-8);
    const auto g2 = *c.find_device("G2"), g3 = *c.find_device("G3"), g1 = *c.find_device("G1");
    CHECK(pf.device_injection[g2].real() * c.base_mva == Approx(163.0).margin(1e-6));
    CHECK(pf.device_injection[g3].real() * c.base_mva == Approx(85.0).margin(1e-6));
    // Slack output of the standard dataset.
    CHECK(pf.device_injection[g1].real() * c.base_mva == Approx(71.6).margin(0.1));
    CHECK(std::abs(pf.v[c.bus_index("1")]) == Approx(1.04).margin(1e-10));
    CHECK(std::abs(pf.v[c.bus_index("2")]) == Approx(1.025).margin(1e-10));
}

TEST_CASE("lossless two-bus without load", "[powerflow]") {
    auto c = parse_case_string(radial_case(0.0, 0.0, 0.1).dump());
    auto pf = solve_ac_powerflow(c);
    for (const auto& v : pf.v) CHECK(std::arg(v) == Approx(0.0).margin(1e-12));
    CHECK(pf.device_injection[0].real() == Approx(0.0).margin(1e-12));
}

TEST_CASE("radial two-bus matches the closed form", "[powerflow]") {
    for (auto [p, q, x] : {std::tuple{1.0, 0.0, 0.1}, {0.8, 0.3, 0.2}, {2.0, -0.5, 0.05}}) {
        auto c = parse_case_string(radial_case(p, q, x).dump());
        auto pf = solve_ac_powerflow(c);
        const double a = 1.0 - 2.0 * q * x;
        const double v2 = (a + std::sqrt(a * a - 4.0 * x * x * (p * p + q * q))) / 2.0;
        const double vr = std::sqrt(v2);
        const double delta = -std::asin(p * x / vr);
        CHECK(std::abs(pf.v[1]) == Approx(vr).epsilon(1e-10));
        CHECK(std::arg(pf.v[1]) == Approx(delta).epsilon(1e-10));
        CHECK(pf.device_injection[0].real() == Approx(p).epsilon(1e-9));
    }
    CHECK(std::abs(solve_ac_powerflow(parse_case_string(radial_case(1.0, 0.0, 0.1).dump())).v[1]) ==
          Approx(0.99494).margin(1e-5));
}

TEST_CASE("hybrid toy case matches an independent solution", "[powerflow]") {
    auto c = parse_case_string(toy_hybrid_case().dump());
    auto pf = solve_hybrid_powerflow(c);

    // Unknowns: v_b and v_int in rectangular form. Equations: current balance
    // at b, converter reactive power into b, and DC power delivered to the load.
    const Complex va = 1.02, yl = 1.0 / Complex(0.02, 0.2), yc = 1.0 / Complex(0.01, 0.15);
    auto residual = [&](const Eigen::Vector4d& x) {
        const Complex vb(x[0], x[1]), vi(x[2], x[3]);
        const Complex iac = (vi - vb) * yc;
        const Complex kcl = yl * (va - vb) + iac;
        Eigen::Vector4d r;
        r << kcl.real(), kcl.imag(), std::imag(vb * std::conj(iac)) - 0.1, -std::real(vi * std::conj(iac)) - 0.5;
        return r;
    };
    Eigen::Vector4d x(1.0, 0.0, 1.0, 0.0);
    for (int it = 0; it < 30; ++it) {
        Eigen::Matrix4d jac;
        const Eigen::Vector4d r0 = residual(x);
        for (int k = 0; k < 4; ++k) {
            Eigen::Vector4d xp = x;
            xp[k] += 1e-7;
            jac.col(k) = (residual(xp) - r0) / 1e-7;
        }
        x -= jac.partialPivLu().solve(r0);
    }
    REQUIRE(residual(x).norm() < 1e-12);
    const Complex vb(x[0], x[1]), vi(x[2], x[3]);

    const auto b = c.bus_index("b"), d = c.bus_index("d");
    CHECK(std::abs(pf.v[b] - vb) < 1e-8);
    CHECK(pf.v[d].real() == 1.0);
    CHECK(pf.v[d].imag() == 0.0);
    const auto& tap = pf.taps[element_index(pf, "c")];
    CHECK(tap.m == Approx(std::abs(vi)).epsilon(1e-8));
    CHECK(tap.alpha == Approx(std::arg(vi) - std::arg(vb)).margin(1e-8));
}

TEST_CASE("lossless converter passes power through", "[powerflow]") {
    auto doc = toy_hybrid_case();
    doc["branches"][1]["R"] = 0.0;
    auto c = parse_case_string(doc.dump());
    auto pf = solve_hybrid_powerflow(c);
    const auto& f = pf.flows[element_index(pf, "c")];
    // Power into the AC bus plus power into the DC bus is zero without losses.
    CHECK(f.s_from.real() + f.s_to.real() == Approx(0.0).margin(1e-9));
    CHECK(f.s_to.real() == Approx(0.5).margin(1e-9));
}

TEST_CASE("modulation limits", "[powerflow]") {
    auto doc = toy_hybrid_case();
    doc["branches"][1]["m_max"] = 0.5;
    auto c = parse_case_string(doc.dump());
    try {
        solve_hybrid_powerflow(c);
        FAIL("limit ignored");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OverModulation);
    }
}

TEST_CASE("power balance", "[powerflow]") {
    for (const char* name : {"wscc9.json", "mtdc_dc.json", "mtdc_hybrid.json"}) {
        INFO(name);
        auto c = testing::load_case(name);
        auto pf = solve_powerflow(c);
        CHECK(pf.max_mismatch <= 1e-8);
        double balance = 0.0;
        for (const auto& s : pf.device_injection) balance += s.real();
        for (std::size_t i = 0; i < pf.elements.size(); ++i) {
            balance += pf.flows[i].s_from.real();
            if (!pf.elements[i].is_shunt()) balance += pf.flows[i].s_to.real();
        }
        CHECK(std::abs(balance) < 1e-7);
        for (std::size_t b = 0; b < c.buses.size(); ++b)
            if (!c.is_ac(b)) {
                CHECK(pf.v[b].imag() == 0.0);
                CHECK(pf.v[b].real() > 0.0);
            }
    }
}

TEST_CASE("hybrid solver on an AC-only case", "[powerflow]") {
    auto c = testing::load_case("wscc9.json");
    auto a = solve_ac_powerflow(c);
    auto h = solve_hybrid_powerflow(c);
    for (std::size_t b = 0; b < c.buses.size(); ++b) CHECK(std::abs(a.v[b] - h.v[b]) < 1e-10);
    for (std::size_t d = 0; d < c.devices.size(); ++d)
        CHECK(std::abs(a.device_injection[d] - h.device_injection[d]) < 1e-10);
}

TEST_CASE("v_dc reference is met exactly", "[powerflow]") {
    auto c = testing::load_case("mtdc_hybrid.json");
    auto pf = solve_powerflow(c);
    for (const auto& br : c.branches)
        if (br.model == BranchModel::AcDcConverter && br.converter.d_mode == DAxisMode::Vdc)
            CHECK(pf.v[br.to_idx].real() == Approx(br.converter.v_dc_ref).margin(1e-12));
}

TEST_CASE("non-convergence is reported", "[powerflow]") {
    auto c = parse_case_string(radial_case(20.0, 0.0, 0.1).dump());
    try {
        solve_ac_powerflow(c);
        FAIL("infeasible case converged");
    } catch (const Error& e) {
        CHECK((e.kind() == ErrorKind::NonConvergence || e.kind() == ErrorKind::SingularJacobian));
    }
    auto ok = parse_case_string(radial_case(1.0, 0.0, 0.1).dump());
    PowerFlowOptions opt;
    opt.max_iter = 1;
    CHECK_THROWS_AS(solve_ac_powerflow(ok, opt), Error);
}
