#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cfgrid/complex_frequency.hpp"

namespace cfgrid {

inline constexpr std::size_t kGround = std::numeric_limits<std::size_t>::max();
inline constexpr const char* kGroundId = "ground";

enum class BusKind { AC, DC };

struct Bus {
    std::string id;
    BusKind kind = BusKind::AC;
    double base_kv = 1.0;
    double v0 = 1.0;
    double theta0 = 0.0;
    // Filled by validation: explicit area or, if absent, the AC island number. 0 on DC buses.
    int area = 0;
    bool area_given = false;
    std::vector<std::string> shunt_devices;
};

enum class BranchModel { ConstantY, SeriesRL, ShuntGC, PiLine, RegulatingTransformer, AcDcConverter };

struct TransformerControl {
    enum class Mode { Fixed, ActivePower };
    Mode mode = Mode::Fixed;
    double p_ref = 0.0;    // active power from the `from` bus into the transformer
    double k_alpha = 1.0;  // rad/s per pu of power error
};

enum class DAxisMode { Vdc, Fac, P };
enum class QAxisMode { Vac, Q };

/// PI loops in I-P form. Power targets refer to power injected into the AC bus.
struct ConverterControl {
    DAxisMode d_mode = DAxisMode::P;
    QAxisMode q_mode = QAxisMode::Q;
    double v_dc_ref = 1.0;
    double p_ref = 0.0;
    double v_ac_ref = 1.0;
    double q_ref = 0.0;
    double kp_d = 0.0, ki_d = 1.0;
    double kp_q = 0.0, ki_q = 1.0;
    double k_f = 0.0;        // pu power per pu frequency, f_ac mode only
    double t_filter_d = 0.01;  // 0 allowed in v_dc mode when the DC bus has capacitance
    double t_filter_q = 0.01;
    double t_freq = 0.02;    // washout of the frequency measurement
};

struct Branch {
    std::string id;
    std::string from;
    std::string to;  // "ground" for shunt elements
    std::size_t from_idx = kGround;
    std::size_t to_idx = kGround;
    BranchModel model = BranchModel::ConstantY;

    Complex y{0.0, 0.0};  // ConstantY, transformer Y_T, converter series Y
    double r = 0.0, l = 0.0;  // SeriesRL, PiLine
    double g = 0.0, c = 0.0;  // ShuntGC; c is C_half per end on PiLine
    bool dynamic = false;     // PiLine: RL/GC states instead of constant admittances

    double m0 = 1.0, alpha0 = 0.0;
    double m_min = 0.0, m_max = 10.0;
    TransformerControl transformer;
    ConverterControl converter;
};

struct MachineParams {
    double H = 5.0;       // s, system base
    double D = 0.0;
    double Xd = 1.0, Xdp = 0.2;
    double Xq = 0.9, Xqp = 0.2;
    double Td0p = 6.0, Tq0p = 0.5;
    double Ra = 0.0;
    double R_droop = 0.0;  // 0 disables the governor
    double Tg = 0.5;
    double KA = 0.0;       // 0 disables the AVR
    double TA = 0.05;
    double agc_participation = 0.0;
};

enum class DeviceModel { SynchronousMachine, ConstantPowerLoad, ConstantImpedanceLoad, DcPower };
enum class MachineRole { Slack, PV };
enum class LoadDynamics { Impedance, Current, Power };

struct Device {
    std::string id;
    std::string bus;
    std::size_t bus_idx = kGround;
    DeviceModel model = DeviceModel::ConstantPowerLoad;

    MachineRole role = MachineRole::PV;
    double p = 0.0;  // machine: scheduled P; loads: consumed P; DcPower: injected P
    double q = 0.0;  // ConstantPowerLoad: consumed Q
    double v_set = 1.0;
    Complex y{0.0, 0.0};  // ConstantImpedanceLoad: consumed current = y * v
    MachineParams machine;
    LoadDynamics dynamics = LoadDynamics::Impedance;
};

enum class EventAction { DisconnectBranch, DisconnectDevice };

struct Event {
    double t = 0.0;
    EventAction action = EventAction::DisconnectBranch;
    std::string target;
};

struct AgcArea {
    int area = 0;
    double ki = 0.0;
};

struct NetworkCase {
    std::string name;
    double base_mva = 100.0;
    double f_nom_hz = 50.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Device> devices;
    std::vector<Event> events;
    std::vector<AgcArea> agc;

    double omega_nom() const;
    std::size_t bus_index(const std::string& id) const;  // throws SchemaError
    std::optional<std::size_t> find_branch(const std::string& id) const;
    std::optional<std::size_t> find_device(const std::string& id) const;
    bool is_ac(std::size_t bus) const { return buses[bus].kind == BusKind::AC; }
};

/// Resolves ids to indices, fills defaults and checks every invariant.
/// SchemaError, TopologyError, UnitError.
void validate(NetworkCase& c);

// ======================================================================
// Elements: the per-admittance view of the branch list. A static PiLine
// becomes one series ConstantY plus two shunt ConstantY; a dynamic PiLine
// becomes one SeriesRL plus two ShuntGC.
// ======================================================================

enum class ElementKind { ConstantY, SeriesRL, ShuntGC, Transformer, Converter };

struct Element {
    std::string id;
    std::size_t branch = 0;
    ElementKind kind = ElementKind::ConstantY;
    std::size_t from = kGround;
    std::size_t to = kGround;
    bool ac = true;
    Complex y{0.0, 0.0};
    double r = 0.0, l = 0.0, g = 0.0, c = 0.0;

    bool is_shunt() const { return to == kGround; }
    bool two_port_block() const { return kind == ElementKind::Transformer || kind == ElementKind::Converter; }
};

std::vector<Element> expand_elements(const NetworkCase& c);

/// AC islands through AC series elements. Entry is -1 for DC buses.
std::vector<int> ac_islands(const NetworkCase& c);
/// DC islands through DC series elements. Entry is -1 for AC buses.
std::vector<int> dc_islands(const NetworkCase& c);

}  // namespace cfgrid
