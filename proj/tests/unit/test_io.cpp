#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "epair/error.hpp"
#include "epair/io/csv.hpp"
#include "epair/io/event_stream.hpp"

using namespace epair;
using namespace epair::io;

namespace
{
EventStream random_stream(std::mt19937_64& rng, std::size_t n)
{
    EventStream s;
    s.metadata = R"({"seed":7})";
    std::uniform_int_distribution<std::uint64_t> ticks;
    std::uniform_int_distribution<int> pix(0, pixel_grid_size - 1);
    std::bernoulli_distribution coin;
    s.packets.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        if (coin(rng))
            s.packets.push_back(Packet::hit(std::uint16_t(pix(rng)),
                                            std::uint16_t(pix(rng)),
                                            ticks(rng)));
        else
            s.packets.push_back(Packet::tdc(ticks(rng), coin(rng) ? 1 : 0));
    }
    return s;
}
}  // namespace

TEST_CASE("encoded sizes")
{
    EventStream s;
    CHECK(encode(s).size() == 42);
    s.packets.push_back(Packet::hit(1, 2, 3));
    CHECK(encode(s).size() == 42 + 13);
    s.packets.push_back(Packet::tdc(9, 1));
    CHECK(encode(s).size() == 42 + 13 + 10);
    s.metadata = "abc";
    CHECK(encode(s).size() == 42 + 3 + 23);
}

TEST_CASE("round trip of randomized packets")
{
    std::mt19937_64 rng(11);
    auto const s = random_stream(rng, 1'000'000);
    auto const bytes = encode(s);
    auto const back = decode(bytes);
    CHECK(back == s);
    CHECK(encode(back) == bytes);

    std::ostringstream os;
    encode(s, os);
    auto const str = os.str();
    CHECK(std::equal(str.begin(), str.end(), bytes.begin(), bytes.end(),
                     [](char a, std::uint8_t b) { return std::uint8_t(a) == b; }));
}

TEST_CASE("encoder rejects out-of-range fields")
{
    EventStream s;
    s.packets.push_back(Packet::hit(512, 0, 0));
    CHECK_THROWS_AS(encode(s), EncodeError);
    s.packets = {Packet::tdc(0, 2)};
    CHECK_THROWS_AS(encode(s), EncodeError);
    s.packets.clear();
    s.tdc_tick = {1, 0};
    CHECK_THROWS_AS(encode(s), EncodeError);
}

TEST_CASE("decoder errors carry offsets")
{
    EventStream s;
    s.packets = {Packet::hit(3, 4, 5), Packet::tdc(6, 0)};
    auto bytes = encode(s);

    auto bad = bytes;
    bad[0] ^= 0xff;
    try
    {
        decode(bad);
        FAIL("bad magic accepted");
    }
    catch (ParseError const& e)
    {
        CHECK(e.offset() == 0);
    }

    auto truncated = bytes;
    truncated.pop_back();
    try
    {
        decode(truncated);
        FAIL("truncated stream accepted");
    }
    catch (ParseError const& e)
    {
        CHECK(e.offset() == 42 + 13);
        CHECK(std::string(e.what()).find("expected 10 bytes") != std::string::npos);
    }

    auto unknown = bytes;
    unknown[42] = 7;
    CHECK_THROWS_AS(decode(unknown), ParseError);

    CHECK_THROWS_AS(decode(std::span<std::uint8_t const>{}), ParseError);
}

TEST_CASE("decoder is total on random input")
{
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> byte(0, 255);
    std::uniform_int_distribution<int> len(0, 200);
    auto const valid = encode(random_stream(rng, 8));
    std::size_t accepted = 0;
    for (int trial = 0; trial < 100'000; ++trial)
    {
        std::vector<std::uint8_t> buf;
        if (trial % 2 == 0)
        {
            // Mutate a valid stream so the header is usually intact.
            buf = valid;
            int const flips = 1 + trial % 5;
            for (int k = 0; k < flips; ++k)
                buf[std::size_t(byte(rng)) % buf.size()] = std::uint8_t(byte(rng));
            buf.resize(std::size_t(len(rng)) % (buf.size() + 1));
        }
        else
        {
            buf.resize(std::size_t(len(rng)));
            for (auto& b : buf)
                b = std::uint8_t(byte(rng));
        }
        try
        {
            auto const s = decode(buf);
            CHECK(encode(s) == buf);
            ++accepted;
        }
        catch (ParseError const&)
        {
        }
    }
    MESSAGE("accepted " << accepted << " of 100000 inputs");
}

TEST_CASE("stream files")
{
    std::mt19937_64 rng(3);
    auto const s = random_stream(rng, 100);
    auto const path = std::string("test_io_stream.bin");
    write_stream(s, path);
    CHECK(read_stream(path) == s);
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_stream("does/not/exist.bin"), IoError);
}

TEST_CASE("packet csv export")
{
    EventStream s;
    s.packets = {Packet::hit(1, 2, 3), Packet::tdc(40, 1)};
    auto const csv = export_csv(s);
    auto const lines = csv_lines(csv);
    REQUIRE(lines.size() == 3);
    CHECK(lines[1] == "hit,1,2,3,");
    CHECK(lines[2] == "tdc,,,40,1");
}

TEST_CASE("time order")
{
    auto const a = Packet::hit(0, 0, 1);  // 1 hit tick = 6 TDC ticks
    auto const b = Packet::tdc(5, 0);
    auto const c = Packet::tdc(6, 0);
    CHECK(a.tdc_time() == 6);
    CHECK(time_order(b, a));
    CHECK_FALSE(time_order(a, a));
    CHECK(time_order(a, c) != time_order(c, a));
}

TEST_CASE("numbers")
{
    for (double v : {0.0, -1.5, 1e-300, 6.02214076e23, 0.1 + 0.2})
        CHECK(parse_number(format_number(v)) == v);
    CHECK(format_number(42LL) == "42");
    CHECK(std::isnan(parse_number(format_number(std::nan("")))));
    CHECK_THROWS_AS(parse_number("1.5x"), ConfigError);
    CHECK_THROWS_AS(parse_number(""), ConfigError);
}

TEST_CASE("map csv")
{
    Map2D m(2, 2);
    m.at(0, 0) = 1;
    m.at(1, 0) = 2;
    m.at(0, 1) = 3;
    m.at(1, 1) = 0.25;
    auto const text = export_map_csv(m, "counts");
    auto const lines = csv_lines(text);
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "x_idx,y_idx,counts");
    CHECK(lines[2] == "1,0,2");
    CHECK(import_map_csv(text) == m);
    CHECK_THROWS_AS(import_map_csv("x_idx,y_idx,v\n0,0,1\n5,0,2\n"), ConfigError);
}
