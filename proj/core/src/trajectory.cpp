#include "cfgrid/trajectory.hpp"

#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <istream>
#include <sstream>

#include "cfgrid/error.hpp"

namespace cfgrid {

std::string format_number(double value) {
    if (value == 0.0) return "0";  // drops the sign of -0
    return fmt::format("{:.12g}", value);
}

const std::vector<double>& Trajectory::column(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) fail(ErrorKind::ColumnNotFound, "no column '" + name + "'");
    return data_[it->second];
}

std::vector<double>& Trajectory::column(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) fail(ErrorKind::ColumnNotFound, "no column '" + name + "'");
    return data_[it->second];
}

std::size_t Trajectory::add_column(const std::string& name) {
    if (name == "t") fail(ErrorKind::InvalidArgument, "column name 't' is reserved");
    auto [it, inserted] = index_.emplace(name, names_.size());
    if (!inserted) fail(ErrorKind::InvalidArgument, "duplicate column '" + name + "'");
    names_.push_back(name);
    data_.emplace_back();
    data_.back().reserve(time.capacity());
    return it->second;
}

void Trajectory::reserve(std::size_t n_rows) {
    time.reserve(n_rows);
    for (auto& c : data_) c.reserve(n_rows);
}

void Trajectory::write_csv(std::ostream& out) const {
    std::string line = "t";
    for (const auto& n : names_) {
        line += ',';
        line += n;
    }
    out << line << '\n';
    for (std::size_t r = 0; r < time.size(); ++r) {
        line = format_number(time[r]);
        for (const auto& c : data_) {
            line += ',';
            line += format_number(c[r]);
        }
        out << line << '\n';
    }
}

void Trajectory::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::IoError, "cannot write '" + path.string() + "'");
    write_csv(out);
    if (!out) fail(ErrorKind::IoError, "write failed for '" + path.string() + "'");
}

Trajectory Trajectory::read_csv(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::EmptyData, origin + ": empty file");
    Trajectory tr;
    {
        std::stringstream ss(line);
        std::string name;
        bool first = true;
        while (std::getline(ss, name, ',')) {
            if (!name.empty() && name.back() == '\r') name.pop_back();
            if (first) {
                if (name != "t") fail(ErrorKind::ColumnNotFound, origin + ": first column must be 't'");
                first = false;
            } else {
                tr.add_column(name);
            }
        }
    }
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const char* p = line.c_str();
        for (std::size_t c = 0; c <= tr.cols(); ++c) {
            char* end = nullptr;
            double v = std::strtod(p, &end);
            if (end == p) fail(ErrorKind::IoError, origin + ": bad number at row " + std::to_string(row));
            if (c == 0) tr.time.push_back(v);
            else tr.data_[c - 1].push_back(v);
            p = end;
            if (c < tr.cols()) {
                if (*p != ',') fail(ErrorKind::IoError, origin + ": short row " + std::to_string(row));
                ++p;
            }
        }
    }
    if (tr.time.empty()) fail(ErrorKind::EmptyData, origin + ": no data rows");
    if (tr.time.size() >= 2) {
        tr.dt = (tr.time.back() - tr.time.front()) / static_cast<double>(tr.time.size() - 1);
        if (!(tr.dt > 0.0)) fail(ErrorKind::IoError, origin + ": timestamps must increase");
        for (std::size_t k = 1; k < tr.time.size(); ++k) {
            double expect = tr.time[0] + static_cast<double>(k) * tr.dt;
            if (std::abs(tr.time[k] - expect) > 1e-6 * tr.dt + 1e-9 * std::abs(expect))
                fail(ErrorKind::IoError, origin + ": non-uniform time step at row " + std::to_string(k + 2));
        }
    }
    return tr;
}

Trajectory Trajectory::read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoError, "cannot open '" + path.string() + "'");
    return read_csv(in, path.filename().string());
}

}  // namespace cfgrid
