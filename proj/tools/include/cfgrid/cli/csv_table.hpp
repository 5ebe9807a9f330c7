#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace cfgrid::cli {

/// Plain string table, enough for long-format csv files that Trajectory
/// cannot hold (text columns such as bus or term kind).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// ColumnNotFound when absent.
    std::size_t index(const std::string& name) const;
};

CsvTable read_csv_table(std::istream& in, const std::string& origin = "<stream>");
CsvTable read_csv_table(const std::filesystem::path& path);

}  // namespace cfgrid::cli
