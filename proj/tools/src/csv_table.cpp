#include "cfgrid/cli/csv_table.hpp"

#include <fstream>
#include <sstream>

#include "cfgrid/error.hpp"

namespace cfgrid::cli {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::size_t CsvTable::index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    fail(ErrorKind::ColumnNotFound, "no column '" + name + "'");
}

CsvTable read_csv_table(std::istream& in, const std::string& origin) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line) || line.empty()) fail(ErrorKind::EmptyData, origin + ": missing header");
    t.header = split(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto row = split(line);
        if (row.size() != t.header.size())
            fail(ErrorKind::SchemaError, origin + ":" + std::to_string(lineno) + ": expected " +
                                             std::to_string(t.header.size()) + " cells, got " +
                                             std::to_string(row.size()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable read_csv_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
    return read_csv_table(in, path.string());
}

}  // namespace cfgrid::cli
