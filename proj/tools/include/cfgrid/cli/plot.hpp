#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cfgrid/cli/csv_table.hpp"

namespace cfgrid::cli {

struct PlotSpec {
    std::filesystem::path input;
    std::vector<std::string> columns;  // y columns, one polyline each
    std::string x = "t";
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::filesystem::path output;
    // Long-format tables: keep rows whose column equals the value, then
    // split every y column into one series per distinct `series_by` value.
    std::vector<std::pair<std::string, std::string>> where;
    std::string series_by;
    int width = 900;
    int height = 520;
};

struct Series {
    std::string label;
    std::vector<double> x, y;
};

/// ColumnNotFound for unknown columns, EmptyData when no row survives.
std::vector<Series> select_series(const PlotSpec& spec, const CsvTable& table);

std::string render_svg(const PlotSpec& spec, const std::vector<Series>& series);

/// Reads spec.input and writes spec.output.
void render_plot(const PlotSpec& spec);

}  // namespace cfgrid::cli
