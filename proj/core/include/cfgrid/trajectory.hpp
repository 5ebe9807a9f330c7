#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace cfgrid {

struct EventRecord {
    double t = 0.0;
    std::size_t sample = 0;
    std::string target;
    double discontinuity = 0.0;  // max change of algebraic variables at the re-solve
};

/// Uniformly sampled named columns.
///
/// Column naming (bus, element and device ids after the colon):
///   v_mag, v_ang             voltage magnitude and rotating-frame angle
///   rho, omega               voltage CF; omega includes the nominal frequency on AC buses
///   inj_re, inj_im           net device current into the bus
///   dinj_re, dinj_im         its time derivative (rotating frame)
///   il_re, il_im, xi_re, xi_im   RL element current and its CF
///   m, alpha, dm, dalpha     converter and transformer modulation
///   p_ac, q_ac               converter power into the AC bus
///   omega_m, delta, pe       machine speed, angle and air-gap power
///   coi                      center-of-inertia speed per area
class Trajectory {
public:
    double dt = 0.0;
    std::vector<double> time;
    std::vector<EventRecord> events;

    std::size_t rows() const { return time.size(); }
    std::size_t cols() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    bool has(const std::string& name) const { return index_.count(name) != 0; }
    /// ColumnNotFound when absent.
    const std::vector<double>& column(const std::string& name) const;
    std::vector<double>& column(const std::string& name);
    const std::vector<double>& column(std::size_t k) const { return data_[k]; }
    std::vector<double>& column(std::size_t k) { return data_[k]; }

    std::size_t add_column(const std::string& name);
    void reserve(std::size_t n_rows);

    /// 12 significant digits.
    void write_csv(std::ostream& out) const;
    void write_csv(const std::filesystem::path& path) const;
    static Trajectory read_csv(std::istream& in, const std::string& origin = "<stream>");
    static Trajectory read_csv(const std::filesystem::path& path);

private:
    std::vector<std::string> names_;
    std::vector<std::vector<double>> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Shortest decimal with 12 significant digits, shared by every CSV writer.
std::string format_number(double value);

}  // namespace cfgrid
