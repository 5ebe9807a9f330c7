#include "cfgrid/case_io.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "cfgrid/error.hpp"

namespace cfgrid {

namespace {

using json = nlohmann::json;

// Field access with path-qualified messages and rejection of unknown keys.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(ErrorKind::SchemaError, path_ + ": expected an object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    double num(const char* key) {
        const json& v = at(key);
        if (!v.is_number()) fail(ErrorKind::SchemaError, field(key) + ": expected a number");
        double x = v.get<double>();
        if (!std::isfinite(x)) fail(ErrorKind::SchemaError, field(key) + ": not finite");
        return x;
    }
    double num(const char* key, double fallback) { return has(key) ? num(key) : fallback; }

    std::string str(const char* key) {
        const json& v = at(key);
        if (v.is_number_integer()) return std::to_string(v.get<long long>());
        if (!v.is_string()) fail(ErrorKind::SchemaError, field(key) + ": expected a string");
        return v.get<std::string>();
    }
    std::string str(const char* key, const std::string& fallback) { return has(key) ? str(key) : fallback; }

    bool boolean(const char* key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_boolean()) fail(ErrorKind::SchemaError, field(key) + ": expected true/false");
        return v.get<bool>();
    }

    Complex cplx(const char* key) {
        const json& v = at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            fail(ErrorKind::SchemaError, field(key) + ": expected [re, im]");
        return {v[0].get<double>(), v[1].get<double>()};
    }

    const json& array(const char* key) {
        const json& v = at(key);
        if (!v.is_array()) fail(ErrorKind::SchemaError, field(key) + ": expected an array");
        return v;
    }

    Obj child(const char* key) { return Obj(at(key), field(key)); }

    std::string field(const char* key) const { return path_ + "." + key; }
    const std::string& path() const { return path_; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) fail(ErrorKind::SchemaError, path_ + ": unknown field '" + it.key() + "'");
    }

private:
    const json& at(const char* key) {
        if (!j_.contains(key)) fail(ErrorKind::SchemaError, field(key) + ": missing");
        used_.insert(key);
        return j_.at(key);
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

// Series admittance from either "Y": [g, b] or "R"/"X" impedance.
Complex series_admittance(Obj& o) {
    if (o.has("Y")) return o.cplx("Y");
    double r = o.num("R", 0.0), x = o.num("X", 0.0);
    if (r == 0.0 && x == 0.0) fail(ErrorKind::SchemaError, o.path() + ": zero impedance");
    return 1.0 / Complex(r, x);
}

void read_tap(Obj& o, Branch& br) {
    if (o.has("md") || o.has("mq")) {
        Complex m(o.num("md"), o.num("mq"));
        br.m0 = std::abs(m);
        br.alpha0 = std::arg(m);
    } else {
        br.m0 = o.num("m0", 1.0);
        br.alpha0 = o.num("alpha0", 0.0);
    }
}

DAxisMode d_mode_from(const std::string& s, const std::string& where) {
    if (s == "v_dc") return DAxisMode::Vdc;
    if (s == "f_ac") return DAxisMode::Fac;
    if (s == "P") return DAxisMode::P;
    fail(ErrorKind::SchemaError, where + ": d_mode must be v_dc, f_ac or P");
}

QAxisMode q_mode_from(const std::string& s, const std::string& where) {
    if (s == "v_ac") return QAxisMode::Vac;
    if (s == "Q") return QAxisMode::Q;
    fail(ErrorKind::SchemaError, where + ": q_mode must be v_ac or Q");
}

LoadDynamics load_dynamics_from(const std::string& s, const std::string& where) {
    if (s == "impedance") return LoadDynamics::Impedance;
    if (s == "current") return LoadDynamics::Current;
    if (s == "power") return LoadDynamics::Power;
    fail(ErrorKind::SchemaError, where + ": dynamic_model must be impedance, current or power");
}

Bus read_bus(Obj o) {
    Bus b;
    b.id = o.str("id");
    std::string kind = o.str("kind", "AC");
    if (kind == "AC") b.kind = BusKind::AC;
    else if (kind == "DC") b.kind = BusKind::DC;
    else fail(ErrorKind::SchemaError, o.field("kind") + ": expected AC or DC");
    b.base_kv = o.num("base_kv");
    b.v0 = o.num("v0", 1.0);
    b.theta0 = o.num("theta0", 0.0);
    if (o.has("area")) {
        b.area = static_cast<int>(o.num("area"));
        b.area_given = true;
    }
    o.finish();
    return b;
}

Branch read_branch(Obj o, double w0) {
    Branch br;
    br.id = o.str("id");
    br.from = o.str("from");
    br.to = o.str("to", kGroundId);
    const std::string model = o.str("model");
    if (model == "ConstantY") {
        br.model = BranchModel::ConstantY;
        br.y = series_admittance(o);
    } else if (model == "SeriesRL") {
        br.model = BranchModel::SeriesRL;
        br.r = o.num("R", 0.0);
        br.l = o.has("L") ? o.num("L") : o.num("X") / w0;
    } else if (model == "ShuntGC") {
        br.model = BranchModel::ShuntGC;
        br.g = o.num("G", 0.0);
        br.c = o.has("C") ? o.num("C") : o.num("B") / w0;
    } else if (model == "PiLine") {
        br.model = BranchModel::PiLine;
        br.r = o.num("R", 0.0);
        br.l = o.has("L") ? o.num("L") : o.num("X") / w0;
        if (o.has("C_half")) br.c = o.num("C_half");
        else br.c = o.num("B", 0.0) / (2.0 * w0);
        br.dynamic = o.boolean("dynamic", false);
    } else if (model == "RegulatingTransformer") {
        br.model = BranchModel::RegulatingTransformer;
        br.y = series_admittance(o);
        read_tap(o, br);
        if (o.has("control")) {
            Obj c = o.child("control");
            std::string mode = c.str("mode", "fixed");
            if (mode == "fixed") br.transformer.mode = TransformerControl::Mode::Fixed;
            else if (mode == "P") br.transformer.mode = TransformerControl::Mode::ActivePower;
            else fail(ErrorKind::SchemaError, c.field("mode") + ": expected fixed or P");
            br.transformer.p_ref = c.num("p_ref", 0.0);
            br.transformer.k_alpha = c.num("k_alpha", 1.0);
            c.finish();
        }
    } else if (model == "AcDcConverter") {
        br.model = BranchModel::AcDcConverter;
        br.y = series_admittance(o);
        read_tap(o, br);
        br.m_min = o.num("m_min", 0.0);
        br.m_max = o.num("m_max", 10.0);
        Obj c = o.child("control");
        auto& cc = br.converter;
        cc.d_mode = d_mode_from(c.str("d_mode"), c.path());
        cc.q_mode = q_mode_from(c.str("q_mode"), c.path());
        cc.v_dc_ref = c.num("v_dc_ref", 1.0);
        cc.p_ref = c.num("p_ref", 0.0);
        cc.v_ac_ref = c.num("v_ac_ref", 1.0);
        cc.q_ref = c.num("q_ref", 0.0);
        cc.kp_d = c.num("kp_d", cc.kp_d);
        cc.ki_d = c.num("ki_d", cc.ki_d);
        cc.kp_q = c.num("kp_q", cc.kp_q);
        cc.ki_q = c.num("ki_q", cc.ki_q);
        cc.k_f = c.num("k_f", cc.k_f);
        cc.t_filter_d = c.num("t_filter_d", cc.t_filter_d);
        cc.t_filter_q = c.num("t_filter_q", cc.t_filter_q);
        cc.t_freq = c.num("t_freq", cc.t_freq);
        c.finish();
    } else {
        fail(ErrorKind::SchemaError, o.field("model") + ": unknown branch model '" + model + "'");
    }
    o.finish();
    return br;
}

Device read_device(Obj o) {
    Device d;
    d.id = o.str("id");
    d.bus = o.str("bus");
    const std::string model = o.str("model");
    if (model == "SynchronousMachine") {
        d.model = DeviceModel::SynchronousMachine;
        std::string role = o.str("role", "PV");
        if (role == "slack") d.role = MachineRole::Slack;
        else if (role == "PV") d.role = MachineRole::PV;
        else fail(ErrorKind::SchemaError, o.field("role") + ": expected slack or PV");
        d.p = o.num("P", 0.0);
        d.v_set = o.num("V", 1.0);
        auto& m = d.machine;
        m.H = o.num("H", m.H);
        m.D = o.num("D", m.D);
        m.Xd = o.num("Xd", m.Xd);
        m.Xdp = o.num("Xdp", m.Xdp);
        m.Xq = o.num("Xq", m.Xq);
        m.Xqp = o.num("Xqp", m.Xqp);
        m.Td0p = o.num("Td0p", m.Td0p);
        m.Tq0p = o.num("Tq0p", m.Tq0p);
        m.Ra = o.num("Ra", m.Ra);
        m.R_droop = o.num("R_droop", m.R_droop);
        m.Tg = o.num("Tg", m.Tg);
        m.KA = o.num("KA", m.KA);
        m.TA = o.num("TA", m.TA);
        m.agc_participation = o.num("agc_participation", m.agc_participation);
    } else if (model == "ConstantPowerLoad") {
        d.model = DeviceModel::ConstantPowerLoad;
        d.p = o.num("P");
        d.q = o.num("Q", 0.0);
        d.dynamics = load_dynamics_from(o.str("dynamic_model", "impedance"), o.path());
    } else if (model == "ConstantImpedanceLoad") {
        d.model = DeviceModel::ConstantImpedanceLoad;
        d.y = o.cplx("Y");
    } else if (model == "DcSource" || model == "DcLoad") {
        d.model = DeviceModel::DcPower;
        d.p = (model == "DcSource" ? 1.0 : -1.0) * o.num("P");
        d.dynamics = load_dynamics_from(o.str("dynamic_model", "current"), o.path());
    } else {
        fail(ErrorKind::SchemaError, o.field("model") + ": unknown device model '" + model + "'");
    }
    o.finish();
    return d;
}

Event read_event(Obj o) {
    Event e;
    e.t = o.num("t");
    std::string action = o.str("action");
    if (action == "disconnect_branch") e.action = EventAction::DisconnectBranch;
    else if (action == "disconnect_device") e.action = EventAction::DisconnectDevice;
    else fail(ErrorKind::SchemaError, o.field("action") + ": expected disconnect_branch or disconnect_device");
    e.target = o.str("target");
    o.finish();
    return e;
}

NetworkCase read_case(const json& root, const std::string& origin) {
    Obj o(root, origin);
    NetworkCase c;
    c.name = o.str("name", "");
    c.base_mva = o.num("base_mva");
    c.f_nom_hz = o.num("f_nom_hz");
    if (c.f_nom_hz <= 0.0) fail(ErrorKind::UnitError, "f_nom_hz must be positive");
    const double w0 = c.omega_nom();

    const json& buses = o.array("buses");
    for (std::size_t i = 0; i < buses.size(); ++i)
        c.buses.push_back(read_bus(Obj(buses[i], origin + ".buses[" + std::to_string(i) + "]")));
    if (o.has("branches")) {
        const json& arr = o.array("branches");
        for (std::size_t i = 0; i < arr.size(); ++i)
            c.branches.push_back(read_branch(Obj(arr[i], origin + ".branches[" + std::to_string(i) + "]"), w0));
    }
    if (o.has("devices")) {
        const json& arr = o.array("devices");
        for (std::size_t i = 0; i < arr.size(); ++i)
            c.devices.push_back(read_device(Obj(arr[i], origin + ".devices[" + std::to_string(i) + "]")));
    }
    if (o.has("events")) {
        const json& arr = o.array("events");
        for (std::size_t i = 0; i < arr.size(); ++i)
            c.events.push_back(read_event(Obj(arr[i], origin + ".events[" + std::to_string(i) + "]")));
    }
    if (o.has("agc")) {
        const json& arr = o.array("agc");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Obj a(arr[i], origin + ".agc[" + std::to_string(i) + "]");
            c.agc.push_back({static_cast<int>(a.num("area")), a.num("ki")});
            a.finish();
        }
    }
    o.finish();
    validate(c);
    return c;
}

}  // namespace

NetworkCase parse_case_string(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::SchemaError, origin + ": malformed JSON: " + e.what());
    }
    return read_case(root, origin);
}

NetworkCase parse_case(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoError, "cannot open case file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_case_string(ss.str(), path.filename().string());
}

}  // namespace cfgrid
