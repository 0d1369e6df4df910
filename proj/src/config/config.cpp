#include "epair/config/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include "epair/error.hpp"
#include "epair/io/csv.hpp"

namespace epair::config
{
namespace
{
namespace fs = std::filesystem;

std::string_view trim(std::string_view s)
{
    auto const ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && ws(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && ws(s.back()))
        s.remove_suffix(1);
    return s;
}

bool valid_key(std::string_view k)
{
    if (k.empty())
        return false;
    return std::all_of(k.begin(), k.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    });
}

// Drop a trailing comment, honoring double quotes.
std::string_view strip_comment(std::string_view line)
{
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i)
    {
        if (line[i] == '"')
            quoted = !quoted;
        else if (line[i] == '#' && !quoted)
            return line.substr(0, i);
    }
    return line;
}

// One scalar: a quoted string or a bare word without quotes or brackets.
std::string scalar(std::string_view s, std::string const& file, int line)
{
    s = trim(s);
    if (s.empty())
        throw SyntaxError(file, line, "empty value");
    if (s.front() == '"')
    {
        if (s.size() < 2 || s.back() != '"' || s.substr(1, s.size() - 2).find('"') != s.npos)
            throw SyntaxError(file, line, "unterminated or malformed string");
        return std::string(s.substr(1, s.size() - 2));
    }
    if (s.find_first_of("\"[]=") != s.npos)
        throw SyntaxError(file, line, "unexpected character in value '" + std::string(s) + "'");
    return std::string(s);
}

std::vector<std::string> list_items(std::string_view body, std::string const& file, int line)
{
    std::vector<std::string> out;
    body = trim(body);
    if (body.empty())
        return out;
    std::size_t start = 0;
    bool quoted = false;
    for (std::size_t i = 0; i <= body.size(); ++i)
    {
        if (i < body.size() && body[i] == '"')
            quoted = !quoted;
        if (i == body.size() || (body[i] == ',' && !quoted))
        {
            out.push_back(scalar(body.substr(start, i - start), file, line));
            start = i + 1;
        }
    }
    return out;
}

double to_number(std::string const& item, std::string const& key, Config::Origin const& at)
{
    try
    {
        return io::parse_number(item);
    }
    catch (ConfigError const&)
    {
        throw ConfigError(at.str() + ": key '" + key + "' expects a number, got '" + item + "'");
    }
}
}  // namespace

//---------------------------------------------------------------------------//
Config Config::load(fs::path const& path)
{
    Config c;
    c.name_ = path.string();
    std::vector<fs::path> stack{fs::weakly_canonical(path)};
    c.parse_into(io::read_text(path.string()), path.string(), path.parent_path(), stack);
    return c;
}

Config Config::parse(std::string const& text, std::string const& name)
{
    Config c;
    c.name_ = name;
    std::vector<fs::path> stack;
    c.parse_into(text, name, fs::current_path(), stack);
    return c;
}

void Config::parse_into(std::string const& text,
                        std::string const& name,
                        fs::path const& dir,
                        std::vector<fs::path>& stack)
{
    std::vector<std::string_view> lines;
    std::string_view rest = text;
    while (!rest.empty())
    {
        auto const nl = rest.find('\n');
        lines.push_back(rest.substr(0, nl));
        rest = nl == rest.npos ? std::string_view{} : rest.substr(nl + 1);
    }

    for (std::size_t i = 0; i < lines.size(); ++i)
    {
        int const lineno = int(i + 1);
        auto const line = trim(strip_comment(lines[i]));
        if (line.empty())
            continue;
        auto const eq = line.find('=');
        if (eq == line.npos)
            throw SyntaxError(name, lineno, "expected 'key = value'");
        std::string const key(trim(line.substr(0, eq)));
        if (!valid_key(key))
            throw SyntaxError(name, lineno, "invalid key '" + key + "'");
        std::string value(trim(line.substr(eq + 1)));

        Entry e;
        e.where = {name, lineno};
        e.dir = dir;
        if (!value.empty() && value.front() == '[')
        {
            while (value.find(']') == value.npos)
            {
                if (++i >= lines.size())
                    throw SyntaxError(name, lineno, "unterminated list for '" + key + "'");
                value += ' ';
                value += trim(strip_comment(lines[i]));
            }
            auto const close = value.find(']');
            if (!trim(std::string_view(value).substr(close + 1)).empty())
                throw SyntaxError(name, lineno, "text after list for '" + key + "'");
            e.items = list_items(std::string_view(value).substr(1, close - 1), name, lineno);
            e.list = true;
        }
        else
        {
            e.items = {scalar(value, name, lineno)};
        }
        e.raw = value;

        if (key == "include")
        {
            if (e.list)
                throw SyntaxError(name, lineno, "include takes a single path");
            fs::path target = e.items.front();
            if (target.is_relative())
                target = dir / target;
            auto const canon = fs::weakly_canonical(target);
            if (std::find(stack.begin(), stack.end(), canon) != stack.end())
                throw SyntaxError(name, lineno, "include cycle through " + target.string());
            std::string body;
            try
            {
                body = io::read_text(target.string());
            }
            catch (IoError const&)
            {
                throw IoError(e.where.str() + ": cannot open include " + target.string());
            }
            stack.push_back(canon);
            parse_into(body, target.string(), target.parent_path(), stack);
            stack.pop_back();
            continue;
        }
        e.order = next_order_++;
        entries_[key] = std::move(e);
    }
}

//---------------------------------------------------------------------------//
Config::Entry const* Config::find(std::string const& key) const
{
    auto it = entries_.find(key);
    if (it == entries_.end())
        return nullptr;
    it->second.used = true;
    return &it->second;
}

Config::Entry const& Config::get(std::string const& key) const
{
    if (auto const* e = find(key))
        return *e;
    throw ConfigError(name_ + ": missing required key '" + key + "'");
}

bool Config::has(std::string const& key) const
{
    return entries_.count(key) != 0;
}

Config::Origin Config::origin(std::string const& key) const
{
    return get(key).where;
}

double Config::number(std::string const& key) const
{
    auto const& e = get(key);
    if (e.list)
        throw ConfigError(e.where.str() + ": key '" + key + "' expects a single number");
    return to_number(e.items.front(), key, e.where);
}

double Config::number(std::string const& key, double fallback) const
{
    return has(key) ? number(key) : fallback;
}

std::vector<double> Config::numbers(std::string const& key) const
{
    auto const& e = get(key);
    std::vector<double> out;
    for (auto const& item : e.items)
        out.push_back(to_number(item, key, e.where));
    return out;
}

std::vector<double> Config::numbers(std::string const& key, std::vector<double> fallback) const
{
    return has(key) ? numbers(key) : fallback;
}

std::uint64_t Config::integer(std::string const& key, std::uint64_t fallback) const
{
    if (!has(key))
        return fallback;
    auto const& e = get(key);
    auto const bad = [&] {
        return ConfigError(e.where.str() + ": key '" + key
                           + "' expects a non-negative integer, got '" + e.raw + "'");
    };
    if (e.list)
        throw bad();
    auto const& s = e.items.front();
    std::uint64_t v = 0;
    auto const res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec == std::errc{} && res.ptr == s.data() + s.size())
        return v;
    double const d = to_number(s, key, e.where);
    if (!(d >= 0.0) || d != std::floor(d) || d > 9007199254740992.0)
        throw bad();
    return std::uint64_t(d);
}

std::string Config::text(std::string const& key) const
{
    auto const& e = get(key);
    if (e.list)
        throw ConfigError(e.where.str() + ": key '" + key + "' expects a single value");
    return e.items.front();
}

std::string Config::text(std::string const& key, std::string fallback) const
{
    return has(key) ? text(key) : fallback;
}

std::vector<std::string> Config::texts(std::string const& key) const
{
    return get(key).items;
}

bool Config::flag(std::string const& key, bool fallback) const
{
    if (!has(key))
        return fallback;
    auto const v = text(key);
    if (v == "true" || v == "yes" || v == "on" || v == "1")
        return true;
    if (v == "false" || v == "no" || v == "off" || v == "0")
        return false;
    throw ConfigError(origin(key).str() + ": key '" + key + "' expects true or false, got '"
                      + v + "'");
}

fs::path Config::path(std::string const& key) const
{
    auto const& e = get(key);
    fs::path p = text(key);
    return p.is_relative() ? e.dir / p : p;
}

void Config::set(std::string const& key, std::string const& value, std::string const& origin)
{
    auto c = parse(key + " = " + value, origin);
    for (auto& [k, e] : c.entries_)
    {
        e.order = next_order_++;
        entries_[k] = std::move(e);
    }
}

std::vector<std::string> Config::unused() const
{
    std::vector<std::pair<std::size_t, std::string>> left;
    for (auto const& [k, e] : entries_)
        if (!e.used)
            left.emplace_back(e.order, k);
    std::sort(left.begin(), left.end());
    std::vector<std::string> out;
    for (auto& [order, k] : left)
        out.push_back(std::move(k));
    return out;
}

void Config::require_all_used() const
{
    auto const left = unused();
    if (!left.empty())
        throw ConfigError(entries_.at(left.front()).where.str() + ": unknown key '"
                          + left.front() + "'");
}

std::map<std::string, std::string> Config::snapshot() const
{
    std::map<std::string, std::string> out;
    for (auto const& [k, e] : entries_)
        out[k] = e.raw;
    return out;
}

std::optional<fs::path> default_config_path()
{
    char const* v = std::getenv("EPAIR_CONFIG");
    if (v == nullptr || *v == '\0')
        return std::nullopt;
    return fs::path(v);
}
}  // namespace epair::config
