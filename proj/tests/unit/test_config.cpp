#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <string>

#include "epair/config/config.hpp"
#include "epair/config/settings.hpp"
#include "epair/error.hpp"
#include "epair/io/csv.hpp"

using namespace epair;
using namespace epair::config;
namespace fs = std::filesystem;

namespace
{
std::string const minimal = "beam.electron_rate = 5e7\nbeam.impact_parameter = 160e-9\n";

struct TempDir
{
    fs::path path;
    TempDir()
    {
        path = fs::temp_directory_path() / ("epair_cfg_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(std::string const& name, std::string const& text) const
    {
        auto const p = path / name;
        io::write_text(p.string(), text);
        return p;
    }
};

std::string message_of(auto&& f)
{
    try
    {
        f();
    }
    catch (std::exception const& e)
    {
        return e.what();
    }
    return {};
}
}  // namespace

TEST_CASE("scalars, lists, strings and comments")
{
    auto const c = Config::parse(R"(# leading comment
a = 1.5e-9   # trailing
b = [1, 2,
     3]  # multi-line list
name = "has # hash"
word = ring
empty = []
flag = yes
n = 1e5
)",
                                 "test.cfg");
    CHECK(c.number("a") == 1.5e-9);
    CHECK(c.numbers("b") == std::vector<double>{1, 2, 3});
    CHECK(c.text("name") == "has # hash");
    CHECK(c.text("word") == "ring");
    CHECK(c.numbers("empty").empty());
    CHECK(c.flag("flag", false));
    CHECK(c.integer("n", 0) == 100000);
    CHECK(c.number("missing", 7.0) == 7.0);
    CHECK(c.origin("b").str() == "test.cfg:3");
    CHECK(c.unused().empty());
}

TEST_CASE("later assignments override earlier ones")
{
    auto c = Config::parse("x = 1\nx = 2\n");
    CHECK(c.number("x") == 2.0);
    c.set("x", "3");
    CHECK(c.number("x") == 3.0);
    c.set("y", "[4, 5]");
    CHECK(c.numbers("y").size() == 2);
}

TEST_CASE("syntax errors carry file and line")
{
    auto check = [](std::string const& text, int line) {
        try
        {
            Config::parse(text, "bad.cfg");
            FAIL("accepted: " << text);
        }
        catch (SyntaxError const& e)
        {
            CHECK(e.file() == "bad.cfg");
            CHECK(e.line() == line);
        }
    };
    check("a = 1\nnot a pair\n", 2);
    check("bad key = 1\n", 1);
    check("a =\n", 1);
    check("a = \"open\n", 1);
    check("a = 1\nb = [1, 2\n", 2);
    check("a = [1] 2\n", 1);
    check("a = [1, , 2]\n", 1);
}

TEST_CASE("type errors name the key and its line")
{
    auto const c = Config::parse("a = 1\nb = fast\nc = [1, 2]\nd = -3\n", "t.cfg");
    auto const m = message_of([&] { c.number("b"); });
    CHECK(m.find("'b'") != std::string::npos);
    CHECK(m.find("t.cfg:2") != std::string::npos);
    CHECK_THROWS_AS(c.number("c"), ConfigError);
    CHECK_THROWS_AS(c.integer("d", 0), ConfigError);
    CHECK_THROWS_AS(c.integer("c", 0), ConfigError);
    CHECK_THROWS_AS(c.flag("b", false), ConfigError);
    CHECK(message_of([&] { c.number("zz"); }).find("'zz'") != std::string::npos);
}

TEST_CASE("includes resolve relative to the including file")
{
    TempDir dir;
    fs::create_directories(dir.path / "sub");
    dir.write("sub/base.cfg", "a = 1\nb = 2\ncurve = \"s.csv\"\n");
    auto const top = dir.write("top.cfg", "include = \"sub/base.cfg\"\nb = 3\n");
    auto const c = Config::load(top);
    CHECK(c.number("a") == 1.0);
    CHECK(c.number("b") == 3.0);
    CHECK(c.path("curve") == dir.path / "sub" / "s.csv");
    CHECK(c.origin("a").line == 1);
    CHECK(c.origin("a").file.find("base.cfg") != std::string::npos);

    dir.write("loop_a.cfg", "include = loop_b.cfg\n");
    dir.write("loop_b.cfg", "include = loop_a.cfg\n");
    CHECK_THROWS_AS(Config::load(dir.path / "loop_a.cfg"), SyntaxError);
    dir.write("dangling.cfg", "include = nowhere.cfg\n");
    CHECK_THROWS_AS(Config::load(dir.path / "dangling.cfg"), IoError);
    CHECK_THROWS_AS(Config::load(dir.path / "absent.cfg"), IoError);
}

TEST_CASE("default path comes from the environment")
{
    ::setenv("EPAIR_CONFIG", "/some/where.cfg", 1);
    CHECK(default_config_path() == fs::path("/some/where.cfg"));
    ::setenv("EPAIR_CONFIG", "", 1);
    CHECK_FALSE(default_config_path());
    ::unsetenv("EPAIR_CONFIG");
    CHECK_FALSE(default_config_path());
}

TEST_CASE("settings map keys onto the simulation")
{
    auto const c = Config::parse(minimal + R"(
seed = 42
duration = 3
beam.lateral_offset = 1e-6
chain.stages = [forward, holder, fiber]
chain.transmissions = [0.5, 0.4, 0.2165]
detector.slit = [-1e9, 0.5]
spad.dark_rate = 200
sensitivity.wavelengths_nm = [1500, 1600]
sensitivity.efficiency = [1, 0.5]
scan.distance_range = [270e-9, 470e-9, 3]
scan.dwell = 0.1
analysis.energy_gate = [0.6, 1.1]
analysis.half_width = 3.5e-9
)");
    auto const s = load_settings(c);
    CHECK(s.sim.seed == 42);
    CHECK(s.sim.duration == 3.0);
    CHECK(s.sim.beam.electron_rate == 5e7);
    CHECK(s.sim.beam.lateral_offset == 1e-6);
    REQUIRE(s.sim.photon_chain.stages.size() == 3);
    CHECK(s.sim.photon_chain.total() == doctest::Approx(0.0433));
    REQUIRE(s.sim.electron.slit);
    CHECK(s.sim.electron.slit->hi_ev == 0.5);
    CHECK(s.sim.spad.dark_rate == 200.0);
    CHECK(s.sim.sensitivity(1550e-9) == doctest::Approx(0.75));
    CHECK(s.scan.distances == std::vector<double>{270e-9, 370e-9, 470e-9});
    CHECK(s.scan.dwell == 0.1);
    CHECK(s.analysis.energy_gate.lo_ev == 0.6);
    CHECK(s.analysis.time_gate.half_width == 3.5e-9);
    CHECK(s.analysis.efficiencies.photon_transmission == doctest::Approx(0.0433 * 0.17).epsilon(1e-3));
    CHECK(s.snapshot.at("seed") == "42");
}

TEST_CASE("settings reject missing, unknown and invalid keys")
{
    auto const missing = message_of([] {
        load_settings(Config::parse("beam.electron_rate = 1e7\n", "m.cfg"));
    });
    CHECK(missing.find("beam.impact_parameter") != std::string::npos);
    CHECK(missing.find("m.cfg") != std::string::npos);

    auto const unknown = message_of([] {
        load_settings(Config::parse(minimal + "spad.dark_rte = 100\n", "u.cfg"));
    });
    CHECK(unknown.find("spad.dark_rte") != std::string::npos);
    CHECK(unknown.find("u.cfg:3") != std::string::npos);

    CHECK_THROWS_AS(load_settings(Config::parse(minimal + "spad.efficiency = 2\n")), ConfigError);
    CHECK_THROWS_AS(load_settings(Config::parse(minimal + "chain.stages = [a]\n")), ConfigError);
    CHECK_THROWS_AS(load_settings(Config::parse(minimal + "chain.stages = [a]\nchain.transmissions = [1.5]\n")),
                    ConfigError);
    CHECK_THROWS_AS(load_settings(Config::parse(minimal + "geometry.type = torus\n")), ConfigError);
    CHECK_THROWS_AS(load_settings(Config::parse(minimal + "scan.dwell = 0\n")), ConfigError);
    CHECK_THROWS_AS(load_settings(Config::parse(minimal + "beam.current = 1e-9\n")), ConfigError);
    CHECK_THROWS_AS(load_settings(Config::parse(minimal + "scan.distance_range = [1, 2]\n")), ConfigError);
}

TEST_CASE("beam current converts to an electron rate")
{
    auto const s = load_settings(Config::parse("beam.current = 16e-12\nbeam.impact_parameter = 1e-7\n"));
    CHECK(s.sim.beam.electron_rate == doctest::Approx(16e-12 / 1.602176634e-19));
}

TEST_CASE("sensitivity CSV and filter sections")
{
    TempDir dir;
    dir.write("s.csv", "wavelength_nm,efficiency\n1520,0.2\n1620,0.2\n");
    auto const cfg = dir.write("c.cfg", minimal + R"(sensitivity.csv = s.csv
filter.center_wavelength = 1550e-9
filter.fwhm_hz = 50e9
)");
    auto const s = load_settings(Config::load(cfg));
    CHECK(s.sim.sensitivity(1550e-9) == doctest::Approx(0.2));
    CHECK(s.sim.sensitivity(1500e-9) == 0.0);
    REQUIRE(s.sim.photon_chain.filter);
    CHECK(s.sim.photon_chain.filter->fwhm_hz == 50e9);

    auto const off = dir.write("d.cfg", minimal + "filter.fwhm_hz = 50e9\nfilter.enabled = false\n");
    CHECK_FALSE(load_settings(Config::load(off)).sim.photon_chain.filter);
}
