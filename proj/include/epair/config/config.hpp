#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace epair::config
{
//---------------------------------------------------------------------------//
/*!
 * Flat key/value configuration.
 *
 * One entry per line, "key = value", where a value is a number, a bare word,
 * a double-quoted string or a bracketed list of those; lists may span lines.
 * "#" starts a comment. "include = path" splices another file, resolved
 * relative to the including file. Later assignments override earlier ones.
 *
 * Every lookup marks its key as used so that leftover (misspelled) keys can
 * be reported with their file and line.
 */
class Config
{
  public:
    //! Where a value was assigned.
    struct Origin
    {
        std::string file;
        int line = 0;

        std::string str() const { return file + ":" + std::to_string(line); }
    };

    static Config load(std::filesystem::path const& path);
    static Config parse(std::string const& text, std::string const& name = "<string>");

    //! Name of the top-level file or string
    std::string const& name() const { return name_; }

    bool has(std::string const& key) const;
    Origin origin(std::string const& key) const;

    // Throw ConfigError naming the key when it is missing or mistyped.
    double number(std::string const& key) const;
    double number(std::string const& key, double fallback) const;
    std::vector<double> numbers(std::string const& key) const;
    std::vector<double> numbers(std::string const& key, std::vector<double> fallback) const;
    std::uint64_t integer(std::string const& key, std::uint64_t fallback) const;
    std::string text(std::string const& key) const;
    std::string text(std::string const& key, std::string fallback) const;
    std::vector<std::string> texts(std::string const& key) const;
    bool flag(std::string const& key, bool fallback) const;
    //! File path resolved against the directory of the assigning file
    std::filesystem::path path(std::string const& key) const;

    // Assign or replace a value as if it appeared in a file called origin.
    void set(std::string const& key, std::string const& value, std::string const& origin = "<override>");

    //! Keys never looked up, in file order
    std::vector<std::string> unused() const;
    // Throws ConfigError naming the first unused key and where it was set.
    void require_all_used() const;

    //! Every key with its raw value, sorted by key
    std::map<std::string, std::string> snapshot() const;

  private:
    struct Entry
    {
        std::vector<std::string> items;
        bool list = false;
        std::string raw;
        Origin where;
        std::filesystem::path dir;
        std::size_t order = 0;
        mutable bool used = false;
    };

    std::string name_;
    std::map<std::string, Entry> entries_;
    std::size_t next_order_ = 0;

    void parse_into(std::string const& text,
                    std::string const& name,
                    std::filesystem::path const& dir,
                    std::vector<std::filesystem::path>& stack);
    Entry const& get(std::string const& key) const;
    Entry const* find(std::string const& key) const;
};

// Value of the EPAIR_CONFIG environment variable, if set and non-empty.
std::optional<std::filesystem::path> default_config_path();
}  // namespace epair::config
