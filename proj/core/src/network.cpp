#include "cfgrid/network.hpp"

#include <map>
#include <numbers>
#include <numeric>
#include <set>

#include "cfgrid/error.hpp"

namespace cfgrid {

double NetworkCase::omega_nom() const { return 2.0 * std::numbers::pi * f_nom_hz; }

std::size_t NetworkCase::bus_index(const std::string& id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return i;
    fail(ErrorKind::SchemaError, "unknown bus '" + id + "'");
}

std::optional<std::size_t> NetworkCase::find_branch(const std::string& id) const {
    for (std::size_t i = 0; i < branches.size(); ++i)
        if (branches[i].id == id) return i;
    return std::nullopt;
}

std::optional<std::size_t> NetworkCase::find_device(const std::string& id) const {
    for (std::size_t i = 0; i < devices.size(); ++i)
        if (devices[i].id == id) return i;
    return std::nullopt;
}

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void join(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

std::vector<int> islands_of(const NetworkCase& c, BusKind kind) {
    const std::size_t n = c.buses.size();
    UnionFind uf(n);
    for (const auto& br : c.branches) {
        if (br.model == BranchModel::AcDcConverter || br.model == BranchModel::ShuntGC) continue;
        if (br.from_idx == kGround || br.to_idx == kGround) continue;
        if (c.buses[br.from_idx].kind != kind || c.buses[br.to_idx].kind != kind) continue;
        uf.join(br.from_idx, br.to_idx);
    }
    std::vector<int> out(n, -1);
    std::map<std::size_t, int> label;
    for (std::size_t i = 0; i < n; ++i) {
        if (c.buses[i].kind != kind) continue;
        auto root = uf.find(i);
        auto it = label.find(root);
        if (it == label.end()) it = label.emplace(root, static_cast<int>(label.size())).first;
        out[i] = it->second;
    }
    return out;
}

void require(bool ok, ErrorKind kind, const std::string& msg) {
    if (!ok) fail(kind, msg);
}

}  // namespace

std::vector<int> ac_islands(const NetworkCase& c) { return islands_of(c, BusKind::AC); }
std::vector<int> dc_islands(const NetworkCase& c) { return islands_of(c, BusKind::DC); }

void validate(NetworkCase& c) {
    using E = ErrorKind;
    require(!c.buses.empty(), E::SchemaError, "buses: list is empty");
    require(c.base_mva > 0.0, E::UnitError, "base_mva must be positive");
    require(c.f_nom_hz > 0.0, E::UnitError, "f_nom_hz must be positive");

    std::set<std::string> ids;
    for (auto& b : c.buses) {
        require(!b.id.empty(), E::SchemaError, "bus with empty id");
        require(b.id != kGroundId, E::SchemaError, "bus id 'ground' is reserved");
        require(ids.insert(b.id).second, E::SchemaError, "duplicate bus id '" + b.id + "'");
        require(b.base_kv > 0.0, E::UnitError, "bus '" + b.id + "': base_kv must be positive");
        require(b.v0 > 0.0, E::SchemaError, "bus '" + b.id + "': v0 must be positive");
        if (b.kind == BusKind::DC)
            require(b.theta0 == 0.0, E::SchemaError, "DC bus '" + b.id + "': theta0 must be 0");
        b.shunt_devices.clear();
    }

    auto resolve = [&](const std::string& id, const std::string& what) -> std::size_t {
        if (id == kGroundId) return kGround;
        for (std::size_t i = 0; i < c.buses.size(); ++i)
            if (c.buses[i].id == id) return i;
        fail(E::SchemaError, what + ": unknown bus '" + id + "'");
    };

    std::set<std::string> branch_ids;
    std::vector<int> degree(c.buses.size(), 0);
    for (auto& br : c.branches) {
        const std::string where = "branch '" + br.id + "'";
        require(!br.id.empty(), E::SchemaError, "branch with empty id");
        require(branch_ids.insert(br.id).second, E::SchemaError, "duplicate branch id '" + br.id + "'");
        br.from_idx = resolve(br.from, where);
        br.to_idx = resolve(br.to, where);
        require(br.from_idx != kGround, E::SchemaError, where + ": 'from' cannot be ground");
        require(br.from_idx != br.to_idx, E::SchemaError, where + ": self loop");
        const BusKind kf = c.buses[br.from_idx].kind;
        const bool to_ground = br.to_idx == kGround;
        const BusKind kt = to_ground ? kf : c.buses[br.to_idx].kind;
        switch (br.model) {
            case BranchModel::ConstantY:
                require(kf == kt, E::TopologyError, where + ": connects AC and DC buses");
                if (kf == BusKind::DC)
                    require(br.y.imag() == 0.0, E::SchemaError, where + ": DC admittance must be real");
                break;
            case BranchModel::SeriesRL:
                require(kf == kt, E::TopologyError, where + ": connects AC and DC buses");
                require(br.l > 0.0, E::SchemaError, where + ": SeriesRL requires L > 0");
                break;
            case BranchModel::ShuntGC:
                require(to_ground, E::SchemaError, where + ": ShuntGC must connect to ground");
                require(br.c > 0.0, E::SchemaError, where + ": ShuntGC requires C > 0");
                break;
            case BranchModel::PiLine:
                require(!to_ground, E::SchemaError, where + ": PiLine cannot connect to ground");
                require(kf == kt, E::TopologyError, where + ": connects AC and DC buses");
                require(br.l > 0.0, E::SchemaError, where + ": PiLine requires L > 0");
                require(br.c >= 0.0, E::SchemaError, where + ": PiLine requires C_half >= 0");
                break;
            case BranchModel::RegulatingTransformer:
                require(!to_ground, E::SchemaError, where + ": transformer cannot connect to ground");
                require(kf == BusKind::AC && kt == BusKind::AC, E::TopologyError,
                        where + ": transformer must join two AC buses");
                require(br.m0 > 0.0, E::SchemaError, where + ": m0 must be positive");
                require(std::abs(br.y) > 0.0, E::SchemaError, where + ": Y_T must be non-zero");
                break;
            case BranchModel::AcDcConverter: {
                require(!to_ground, E::SchemaError, where + ": converter cannot connect to ground");
                require(kf == BusKind::AC && kt == BusKind::DC, E::TopologyError,
                        where + ": converter must go from an AC bus to a DC bus");
                require(br.m0 > 0.0, E::SchemaError, where + ": m0 must be positive");
                require(br.m_min < br.m_max, E::SchemaError, where + ": m_min must be below m_max");
                require(std::abs(br.y) > 0.0, E::SchemaError, where + ": Y must be non-zero");
                const auto& cc = br.converter;
                require(cc.kp_d >= 0 && cc.ki_d >= 0 && cc.kp_q >= 0 && cc.ki_q >= 0 && cc.k_f >= 0,
                        E::SchemaError, where + ": control gains must be non-negative");
                require(cc.t_filter_d >= 0 && cc.t_filter_q > 0, E::SchemaError,
                        where + ": filter time constants must be positive");
                if (cc.d_mode != DAxisMode::Vdc)
                    require(cc.t_filter_d > 0, E::SchemaError, where + ": t_filter_d must be positive");
                require(cc.t_freq > 0, E::SchemaError, where + ": t_freq must be positive");
                break;
            }
        }
        ++degree[br.from_idx];
        if (!to_ground) ++degree[br.to_idx];
    }

    std::set<std::string> device_ids;
    std::vector<int> machines_at(c.buses.size(), 0);
    for (auto& d : c.devices) {
        const std::string where = "device '" + d.id + "'";
        require(!d.id.empty(), E::SchemaError, "device with empty id");
        require(device_ids.insert(d.id).second, E::SchemaError, "duplicate device id '" + d.id + "'");
        d.bus_idx = resolve(d.bus, where);
        require(d.bus_idx != kGround, E::SchemaError, where + ": must attach to a bus");
        const bool dc = c.buses[d.bus_idx].kind == BusKind::DC;
        if (d.model == DeviceModel::DcPower)
            require(dc, E::SchemaError, where + ": DC device on AC bus");
        else
            require(!dc, E::SchemaError, where + ": AC device on DC bus");
        if (d.model == DeviceModel::SynchronousMachine) {
            const auto& m = d.machine;
            require(m.H > 0 && m.Xdp > 0 && m.Xqp > 0 && m.Td0p > 0 && m.Tq0p > 0 && m.Tg > 0 &&
                        m.TA > 0 && m.R_droop >= 0 && m.KA >= 0 && m.Ra >= 0 && m.D >= 0,
                    E::SchemaError, where + ": machine parameters out of range");
            require(m.Xd >= m.Xdp && m.Xq >= m.Xqp, E::SchemaError,
                    where + ": transient reactances must not exceed synchronous ones");
            require(d.v_set > 0, E::SchemaError, where + ": V setpoint must be positive");
            require(++machines_at[d.bus_idx] <= 1, E::TopologyError,
                    "bus '" + d.bus + "' carries more than one machine");
        }
        c.buses[d.bus_idx].shunt_devices.push_back(d.id);
    }

    for (std::size_t i = 0; i < c.buses.size(); ++i)
        require(degree[i] > 0, E::TopologyError, "bus '" + c.buses[i].id + "' is not connected to any branch");

    // Islands: one slack per AC island, one v_dc converter per DC island.
    auto ac = ac_islands(c);
    auto dc = dc_islands(c);
    int n_ac = 0, n_dc = 0;
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
        n_ac = std::max(n_ac, ac[i] + 1);
        n_dc = std::max(n_dc, dc[i] + 1);
    }
    std::vector<int> slack(n_ac, 0), vdc(n_dc, 0);
    for (const auto& d : c.devices)
        if (d.model == DeviceModel::SynchronousMachine && d.role == MachineRole::Slack) ++slack[ac[d.bus_idx]];
    for (const auto& br : c.branches)
        if (br.model == BranchModel::AcDcConverter && br.converter.d_mode == DAxisMode::Vdc) ++vdc[dc[br.to_idx]];
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
        if (ac[i] >= 0)
            require(slack[ac[i]] == 1, E::TopologyError,
                    "AC island of bus '" + c.buses[i].id + "' has " + std::to_string(slack[ac[i]]) +
                        " slack machines, expected exactly one");
        if (dc[i] >= 0)
            require(vdc[dc[i]] == 1, E::TopologyError,
                    "DC island of bus '" + c.buses[i].id + "' has " + std::to_string(vdc[dc[i]]) +
                        " DC-voltage-controlling converters, expected exactly one");
    }
    for (const auto& br : c.branches)
        if (br.model == BranchModel::AcDcConverter && br.converter.t_filter_d == 0.0) {
            bool has_cap = false;
            for (const auto& other : c.branches)
                if ((other.model == BranchModel::ShuntGC && other.from_idx == br.to_idx) ||
                    (other.model == BranchModel::PiLine && other.dynamic && other.c > 0 &&
                     (other.from_idx == br.to_idx || other.to_idx == br.to_idx)))
                    has_cap = true;
            require(has_cap, E::SchemaError,
                    "branch '" + br.id + "': t_filter_d = 0 needs capacitance at the DC bus");
        }

    // Areas
    bool any_given = false, all_given = true;
    for (const auto& b : c.buses) {
        if (b.kind != BusKind::AC) continue;
        any_given = any_given || b.area_given;
        all_given = all_given && b.area_given;
    }
    require(!any_given || all_given, E::SchemaError, "either every AC bus or none carries an area");
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
        auto& b = c.buses[i];
        if (b.kind == BusKind::DC) b.area = 0;
        else if (!b.area_given) b.area = ac[i] + 1;
    }

    for (const auto& e : c.events) {
        require(e.t >= 0.0, E::SchemaError, "event at negative time");
        require(!e.target.empty(), E::SchemaError, "event without target");
    }
    for (const auto& a : c.agc) require(a.ki >= 0.0, E::SchemaError, "agc gain must be non-negative");
}

std::vector<Element> expand_elements(const NetworkCase& c) {
    std::vector<Element> out;
    const double w0 = c.omega_nom();
    for (std::size_t bi = 0; bi < c.branches.size(); ++bi) {
        const auto& br = c.branches[bi];
        const bool ac = c.buses[br.from_idx].kind == BusKind::AC;
        Element e;
        e.id = br.id;
        e.branch = bi;
        e.from = br.from_idx;
        e.to = br.to_idx;
        e.ac = ac;
        switch (br.model) {
            case BranchModel::ConstantY:
                e.kind = ElementKind::ConstantY;
                e.y = br.y;
                out.push_back(e);
                break;
            case BranchModel::SeriesRL:
                e.kind = ElementKind::SeriesRL;
                e.r = br.r;
                e.l = br.l;
                out.push_back(e);
                break;
            case BranchModel::ShuntGC:
                e.kind = ElementKind::ShuntGC;
                e.g = br.g;
                e.c = br.c;
                out.push_back(e);
                break;
            case BranchModel::PiLine: {
                if (br.dynamic) {
                    e.kind = ElementKind::SeriesRL;
                    e.r = br.r;
                    e.l = br.l;
                } else {
                    e.kind = ElementKind::ConstantY;
                    e.y = 1.0 / Complex(br.r, ac ? w0 * br.l : 0.0);
                }
                out.push_back(e);
                if (br.c > 0.0) {
                    for (int end = 0; end < 2; ++end) {
                        Element s = e;
                        s.id = br.id + (end == 0 ? "#from" : "#to");
                        s.from = end == 0 ? br.from_idx : br.to_idx;
                        s.to = kGround;
                        s.r = s.l = 0.0;
                        if (br.dynamic) {
                            s.kind = ElementKind::ShuntGC;
                            s.c = br.c;
                            s.g = 0.0;
                        } else {
                            s.kind = ElementKind::ConstantY;
                            s.y = Complex(0.0, ac ? w0 * br.c : 0.0);
                        }
                        if (s.kind == ElementKind::ShuntGC || s.y != Complex(0.0, 0.0)) out.push_back(s);
                    }
                }
                break;
            }
            case BranchModel::RegulatingTransformer:
                e.kind = ElementKind::Transformer;
                e.y = br.y;
                out.push_back(e);
                break;
            case BranchModel::AcDcConverter:
                e.kind = ElementKind::Converter;
                e.y = br.y;
                e.ac = true;
                out.push_back(e);
                break;
        }
    }
    return out;
}

}  // namespace cfgrid
