#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace epair::io
{
// Shortest round-trippable decimal form, independent of the global locale.
std::string format_number(double value);
std::string format_number(long long value);

// Parse a full field as a number; throws ConfigError naming the field.
double parse_number(std::string_view field);

// Split one CSV line on commas (no quoting; fields are numeric or names).
std::vector<std::string_view> split_fields(std::string_view line);

// Whole-file text helpers; throw IoError.
std::string read_text(std::string const& path);
void write_text(std::string const& path, std::string_view text);

// Non-empty, non-comment lines of a CSV document, header included.
std::vector<std::string_view> csv_lines(std::string_view text);

//! Dense row-major 2D array of values indexed (x_idx, y_idx).
struct Map2D
{
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<double> values;

    Map2D() = default;
    Map2D(std::size_t nx_, std::size_t ny_, double fill = 0.0)
        : nx(nx_), ny(ny_), values(nx_ * ny_, fill)
    {
    }

    double& at(std::size_t ix, std::size_t iy) { return values[iy * nx + ix]; }
    double at(std::size_t ix, std::size_t iy) const { return values[iy * nx + ix]; }
    friend bool operator==(Map2D const&, Map2D const&) = default;
};

// Header "x_idx,y_idx,<name>", one row per cell in (y, x) order.
std::string export_map_csv(Map2D const& map, std::string_view value_name = "value");
Map2D import_map_csv(std::string_view text);
}  // namespace epair::io
