#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace epair::io
{
enum class PacketType : std::uint8_t
{
    hit = 0,
    tdc = 1
};

//---------------------------------------------------------------------------//
/*!
 * One detector packet in memory.
 *
 * Hits carry pixel coordinates and a ToA in hit ticks; TDC tags carry a
 * timestamp in TDC ticks and a channel. Unused fields are zero.
 */
struct Packet
{
    std::uint64_t ticks = 0;
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    PacketType type = PacketType::hit;
    std::uint8_t channel = 0;

    static Packet hit(std::uint16_t x, std::uint16_t y, std::uint64_t toa)
    {
        return {toa, x, y, PacketType::hit, 0};
    }
    static Packet tdc(std::uint64_t timestamp, std::uint8_t channel)
    {
        return {timestamp, 0, 0, PacketType::tdc, channel};
    }

    bool is_hit() const { return type == PacketType::hit; }
    //! Time in TDC ticks; hit ticks are an exact multiple
    std::uint64_t tdc_time() const;

    friend bool operator==(Packet const&, Packet const&) = default;
};

// Strict ordering by time, then type, then remaining fields.
bool time_order(Packet const& a, Packet const& b);

//! Exact rational tick length in seconds.
struct TickRatio
{
    std::uint64_t num = 1;
    std::uint64_t den = 1;

    double seconds() const { return double(num) / double(den); }
    friend bool operator==(TickRatio const&, TickRatio const&) = default;
};

inline constexpr std::uint16_t format_version = 1;
inline constexpr std::uint16_t pixel_grid_size = 512;
inline constexpr TickRatio default_hit_tick{1, 640'000'000};
inline constexpr TickRatio default_tdc_tick{1, 3'840'000'000};

struct EventStream
{
    TickRatio hit_tick = default_hit_tick;
    TickRatio tdc_tick = default_tdc_tick;
    std::string metadata;
    std::vector<Packet> packets;

    friend bool operator==(EventStream const&, EventStream const&) = default;
};

//! Encoded size of an empty stream.
inline constexpr std::size_t header_size = 4 + 2 + 4 * 8 + 4;
inline constexpr std::size_t hit_record_size = 1 + 2 + 2 + 8;
inline constexpr std::size_t tdc_record_size = 1 + 8 + 1;

// Throws EncodeError when a packet or header field violates the format.
std::vector<std::uint8_t> encode(EventStream const& stream);
void encode(EventStream const& stream, std::ostream& out);

// Throws ParseError (with byte offset) on malformed input.
EventStream decode(std::span<std::uint8_t const> bytes);

EventStream read_stream(std::string const& path);
void write_stream(EventStream const& stream, std::string const& path);

// One row per packet: type,x,y,ticks,channel
std::string export_csv(EventStream const& stream);
}  // namespace epair::io
