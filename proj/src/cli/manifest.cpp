#include "epair/cli/manifest.hpp"

#include <array>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "epair/error.hpp"
#include "epair/io/csv.hpp"

#ifndef EPAIR_VERSION
#    define EPAIR_VERSION "0.0.0"
#endif

namespace epair::cli
{
namespace
{
using DigestCtx = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

DigestCtx new_digest()
{
    DigestCtx ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 initialization failed");
    return ctx;
}

std::string finish(DigestCtx& ctx)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
        throw Error("SHA-256 finalization failed");
    static char const hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i)
    {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string utc(std::chrono::system_clock::time_point t)
{
    auto const tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}
}  // namespace

std::string sha256_hex(std::span<std::uint8_t const> bytes)
{
    auto ctx = new_digest();
    if (EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1)
        throw Error("SHA-256 update failed");
    return finish(ctx);
}

std::string file_sha256(std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    auto ctx = new_digest();
    std::array<char, 1 << 16> buf{};
    while (in)
    {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0 && EVP_DigestUpdate(ctx.get(), buf.data(), std::size_t(in.gcount())) != 1)
            throw Error("SHA-256 update failed");
    }
    if (in.bad())
        throw IoError("read failed: " + path);
    return finish(ctx);
}

std::string tool_version()
{
    return EPAIR_VERSION;
}

//---------------------------------------------------------------------------//
RunManifest::RunManifest(std::string command)
    : command_(std::move(command))
    , started_(std::chrono::system_clock::now())
    , clock0_(std::chrono::steady_clock::now())
{
}

void RunManifest::set_config(std::string file, std::map<std::string, std::string> snapshot)
{
    config_file_ = std::move(file);
    snapshot_ = std::move(snapshot);
}

void RunManifest::add_input(std::string const& path)
{
    inputs_.push_back(path);
}

void RunManifest::add_output(std::string const& path)
{
    outputs_.push_back(path);
}

void RunManifest::add_stage(std::string name, double seconds)
{
    stages_.emplace_back(std::move(name), seconds);
}

nlohmann::json RunManifest::to_json() const
{
    nlohmann::json j;
    j["tool"] = "epair";
    j["version"] = tool_version();
    j["command"] = command_;
    j["arguments"] = args_;
    j["config_file"] = config_file_;
    j["config"] = snapshot_;
    j["seed"] = has_seed_ ? nlohmann::json(seed_) : nlohmann::json(nullptr);
    auto digests = [](std::vector<std::string> const& paths) {
        auto arr = nlohmann::json::array();
        for (auto const& p : paths)
            arr.push_back({{"path", p}, {"sha256", file_sha256(p)}});
        return arr;
    };
    j["inputs"] = digests(inputs_);
    j["outputs"] = digests(outputs_);
    j["started_utc"] = utc(started_);
    j["wall_clock_s"]
        = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0_).count();
    auto st = nlohmann::json::array();
    for (auto const& [name, s] : stages_)
        st.push_back({{"stage", name}, {"seconds", s}});
    j["stages"] = st;
    if (!notes_.empty())
        j["notes"] = notes_;
    return j;
}

void RunManifest::write(std::string const& path) const
{
    io::write_text(path, to_json().dump(2) + "\n");
}
}  // namespace epair::cli
