#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace epair::cli
{
// Lowercase hex SHA-256.
std::string sha256_hex(std::span<std::uint8_t const> bytes);
// Digest of a file's contents; throws IoError if it cannot be read.
std::string file_sha256(std::string const& path);

//! Record of one command invocation sufficient to repeat it.
class RunManifest
{
  public:
    explicit RunManifest(std::string command);

    void set_config(std::string file, std::map<std::string, std::string> snapshot);
    void set_seed(std::uint64_t seed)
    {
        seed_ = seed;
        has_seed_ = true;
    }
    void set_arguments(std::vector<std::string> args) { args_ = std::move(args); }
    void add_input(std::string const& path);
    void add_output(std::string const& path);
    void add_stage(std::string name, double seconds);
    void note(std::string const& key, nlohmann::json value) { notes_[key] = std::move(value); }

    // Time f() and record it as a stage.
    template<class F>
    decltype(auto) stage(std::string name, F&& f)
    {
        auto const t0 = std::chrono::steady_clock::now();
        struct Record
        {
            RunManifest* self;
            std::string name;
            std::chrono::steady_clock::time_point t0;
            ~Record()
            {
                self->add_stage(std::move(name),
                                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            }
        } record{this, std::move(name), t0};
        return f();
    }

    // Digests are taken here, from the files as they are on disk.
    nlohmann::json to_json() const;
    void write(std::string const& path) const;

  private:
    std::string command_;
    std::string config_file_;
    std::map<std::string, std::string> snapshot_;
    std::uint64_t seed_ = 0;
    bool has_seed_ = false;
    std::vector<std::string> args_;
    std::vector<std::string> inputs_;
    std::vector<std::string> outputs_;
    std::vector<std::pair<std::string, double>> stages_;
    nlohmann::json notes_ = nlohmann::json::object();
    std::chrono::system_clock::time_point started_;
    std::chrono::steady_clock::time_point clock0_;
};

//! Tool version recorded in manifests.
std::string tool_version();
}  // namespace epair::cli
