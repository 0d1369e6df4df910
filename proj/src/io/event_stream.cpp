#include "epair/io/event_stream.hpp"

#include <type_traits>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <tuple>

#include "epair/constants.hpp"
#include "epair/error.hpp"

namespace epair::io
{
namespace
{
constexpr char magic[4] = {'E', 'P', 'E', 'V'};

template<class T>
void put(std::vector<std::uint8_t>& out, T value)
{
    static_assert(std::is_unsigned_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i)
    {
        out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
    }
}

class Reader
{
  public:
    explicit Reader(std::span<std::uint8_t const> bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }
    bool done() const { return pos_ == bytes_.size(); }

    template<class T>
    T get(char const* what)
    {
        need(sizeof(T), what);
        T value = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
        {
            value |= static_cast<T>(bytes_[pos_ + i]) << (8 * i);
        }
        pos_ += sizeof(T);
        return value;
    }

    std::string text(std::size_t n)
    {
        need(n, "metadata");
        std::string s(reinterpret_cast<char const*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    void need(std::size_t n, char const* what) const { need_from(pos_, n, what); }

    // Require n bytes counted from an earlier record start.
    void need_from(std::size_t start, std::size_t n, char const* what) const
    {
        std::size_t const avail = bytes_.size() - start;
        if (avail < n)
        {
            throw ParseError(start,
                             std::string("truncated ") + what + ": expected "
                                 + std::to_string(n) + " bytes, "
                                 + std::to_string(avail) + " available");
        }
    }

  private:
    std::span<std::uint8_t const> bytes_;
    std::size_t pos_ = 0;
};

void check_encodable(EventStream const& s)
{
    if (s.hit_tick.den == 0 || s.tdc_tick.den == 0 || s.hit_tick.num == 0
        || s.tdc_tick.num == 0)
    {
        throw EncodeError("tick ratios must be positive");
    }
    if (s.metadata.size() > UINT32_MAX)
    {
        throw EncodeError("metadata too long");
    }
}

void check_packet(Packet const& p, std::size_t index)
{
    if (p.is_hit())
    {
        if (p.x >= pixel_grid_size || p.y >= pixel_grid_size)
        {
            throw EncodeError("hit " + std::to_string(index) + " outside pixel grid");
        }
    }
    else if (p.type == PacketType::tdc)
    {
        if (p.channel > 1)
        {
            throw EncodeError("TDC packet " + std::to_string(index)
                              + " has channel outside {0,1}");
        }
    }
    else
    {
        throw EncodeError("unknown packet type");
    }
}
}  // namespace

std::uint64_t Packet::tdc_time() const
{
    return is_hit() ? ticks * constants::tdc_ticks_per_hit_tick : ticks;
}

bool time_order(Packet const& a, Packet const& b)
{
    return std::tuple(a.tdc_time(), a.type, a.channel, a.y, a.x, a.ticks)
           < std::tuple(b.tdc_time(), b.type, b.channel, b.y, b.x, b.ticks);
}

std::vector<std::uint8_t> encode(EventStream const& stream)
{
    check_encodable(stream);
    std::vector<std::uint8_t> out;
    out.reserve(header_size + stream.metadata.size()
                + stream.packets.size() * hit_record_size);
    out.insert(out.end(), std::begin(magic), std::end(magic));
    put(out, format_version);
    put(out, stream.hit_tick.num);
    put(out, stream.hit_tick.den);
    put(out, stream.tdc_tick.num);
    put(out, stream.tdc_tick.den);
    put(out, static_cast<std::uint32_t>(stream.metadata.size()));
    out.insert(out.end(), stream.metadata.begin(), stream.metadata.end());

    for (std::size_t i = 0; i < stream.packets.size(); ++i)
    {
        Packet const& p = stream.packets[i];
        check_packet(p, i);
        out.push_back(static_cast<std::uint8_t>(p.type));
        if (p.is_hit())
        {
            put(out, p.x);
            put(out, p.y);
            put(out, p.ticks);
        }
        else
        {
            put(out, p.ticks);
            out.push_back(p.channel);
        }
    }
    return out;
}

void encode(EventStream const& stream, std::ostream& out)
{
    auto const bytes = encode(stream);
    out.write(reinterpret_cast<char const*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

EventStream decode(std::span<std::uint8_t const> bytes)
{
    Reader r(bytes);
    r.need(4, "magic");
    for (char ch : magic)
    {
        if (r.get<std::uint8_t>("magic") != static_cast<std::uint8_t>(ch))
        {
            throw ParseError(0, "bad magic");
        }
    }
    std::size_t const version_at = r.offset();
    auto const version = r.get<std::uint16_t>("version");
    if (version != format_version)
    {
        throw ParseError(version_at,
                         "unsupported format version " + std::to_string(version));
    }
    EventStream s;
    std::size_t const ticks_at = r.offset();
    s.hit_tick.num = r.get<std::uint64_t>("tick ratio");
    s.hit_tick.den = r.get<std::uint64_t>("tick ratio");
    s.tdc_tick.num = r.get<std::uint64_t>("tick ratio");
    s.tdc_tick.den = r.get<std::uint64_t>("tick ratio");
    if (s.hit_tick.num == 0 || s.hit_tick.den == 0 || s.tdc_tick.num == 0
        || s.tdc_tick.den == 0)
    {
        throw ParseError(ticks_at, "tick ratio with zero term");
    }
    auto const meta_len = r.get<std::uint32_t>("metadata length");
    s.metadata = r.text(meta_len);

    // Hits are the larger record, so this bounds the packet count from above.
    std::size_t const remaining = bytes.size() - r.offset();
    s.packets.reserve(remaining / tdc_record_size);
    while (!r.done())
    {
        std::size_t const at = r.offset();
        auto const type = r.get<std::uint8_t>("packet type");
        if (type == static_cast<std::uint8_t>(PacketType::hit))
        {
            r.need_from(at, hit_record_size, "hit packet");
            Packet p;
            p.type = PacketType::hit;
            p.x = r.get<std::uint16_t>("hit packet");
            p.y = r.get<std::uint16_t>("hit packet");
            p.ticks = r.get<std::uint64_t>("hit packet");
            if (p.x >= pixel_grid_size || p.y >= pixel_grid_size)
            {
                throw ParseError(at, "hit outside pixel grid");
            }
            s.packets.push_back(p);
        }
        else if (type == static_cast<std::uint8_t>(PacketType::tdc))
        {
            r.need_from(at, tdc_record_size, "TDC packet");
            Packet p;
            p.type = PacketType::tdc;
            p.ticks = r.get<std::uint64_t>("TDC packet");
            p.channel = r.get<std::uint8_t>("TDC packet");
            if (p.channel > 1)
            {
                throw ParseError(at, "TDC channel outside {0,1}");
            }
            s.packets.push_back(p);
        }
        else
        {
            throw ParseError(at, "unknown packet type " + std::to_string(type));
        }
    }
    s.packets.shrink_to_fit();
    return s;
}

EventStream read_stream(std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw IoError("cannot open " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad())
    {
        throw IoError("read failed: " + path);
    }
    return decode(bytes);
}

void write_stream(EventStream const& stream, std::string const& path)
{
    auto const bytes = encode(stream);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw IoError("cannot open " + path + " for writing");
    }
    out.write(reinterpret_cast<char const*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
    {
        throw IoError("write failed: " + path);
    }
}

std::string export_csv(EventStream const& stream)
{
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out << "type,x,y,ticks,channel\n";
    for (auto const& p : stream.packets)
    {
        if (p.is_hit())
            out << "hit," << p.x << ',' << p.y << ',' << p.ticks << ",\n";
        else
            out << "tdc,,," << p.ticks << ',' << unsigned(p.channel) << '\n';
    }
    return out.str();
}
}  // namespace epair::io
