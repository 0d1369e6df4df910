#include "epair/io/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <utility>

#include "epair/error.hpp"

namespace epair::io
{
std::string format_number(double value)
{
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    char buf[32];
    auto const res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string format_number(long long value)
{
    char buf[24];
    auto const res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_number(std::string_view field)
{
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
        field.remove_prefix(1);
    while (!field.empty()
           && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
        field.remove_suffix(1);
    if (field == "nan")
        return std::nan("");
    if (field == "inf")
        return INFINITY;
    if (field == "-inf")
        return -INFINITY;
    double value = 0.0;
    auto const* first = field.data();
    if (!field.empty() && *first == '+')
        ++first;
    auto const res = std::from_chars(first, field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()
        || field.empty())
    {
        throw ConfigError("not a number: '" + std::string(field) + "'");
    }
    return value;
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true)
    {
        auto const comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

std::vector<std::string_view> csv_lines(std::string_view text)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size())
    {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        auto const first = line.find_first_not_of(" \t");
        if (first != std::string_view::npos && line[first] != '#')
            out.push_back(line);
        start = end + 1;
    }
    return out;
}

std::string export_map_csv(Map2D const& map, std::string_view value_name)
{
    std::string out = "x_idx,y_idx,";
    out += value_name;
    out += '\n';
    for (std::size_t iy = 0; iy < map.ny; ++iy)
    {
        for (std::size_t ix = 0; ix < map.nx; ++ix)
        {
            out += std::to_string(ix);
            out += ',';
            out += std::to_string(iy);
            out += ',';
            out += format_number(map.at(ix, iy));
            out += '\n';
        }
    }
    return out;
}

Map2D import_map_csv(std::string_view text)
{
    auto const lines = csv_lines(text);
    if (lines.empty())
        throw ConfigError("map CSV is empty");
    std::map<std::pair<std::size_t, std::size_t>, double> cells;
    std::size_t nx = 0;
    std::size_t ny = 0;
    for (std::size_t i = 1; i < lines.size(); ++i)
    {
        auto const f = split_fields(lines[i]);
        if (f.size() != 3)
            throw ConfigError("map CSV row " + std::to_string(i) + " needs 3 fields");
        double const fx = parse_number(f[0]);
        double const fy = parse_number(f[1]);
        if (!(fx >= 0.0) || !(fy >= 0.0) || fx != std::floor(fx) || fy != std::floor(fy))
            throw ConfigError("map CSV row " + std::to_string(i)
                              + " has a non-integer index");
        auto const ix = static_cast<std::size_t>(fx);
        auto const iy = static_cast<std::size_t>(fy);
        if (!cells.emplace(std::pair{ix, iy}, parse_number(f[2])).second)
            throw ConfigError("map CSV row " + std::to_string(i) + " repeats a cell");
        nx = std::max(nx, ix + 1);
        ny = std::max(ny, iy + 1);
    }
    if (cells.size() != nx * ny)
        throw ConfigError("map CSV does not cover a full grid");
    Map2D map(nx, ny);
    for (auto const& [key, v] : cells)
        map.at(key.first, key.second) = v;
    return map;
}

std::string read_text(std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("read failed: " + path);
    return text;
}

void write_text(std::string const& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out.write(text.data(), std::streamsize(text.size()));
    if (!out)
        throw IoError("write failed: " + path);
}
}  // namespace epair::io
