#include "epair/physics/optical_mode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "epair/constants.hpp"
#include "epair/error.hpp"

namespace epair::physics
{
namespace c = constants;

double OpticalMode::wavelength() const
{
    return c::two_pi * c::speed_of_light / angular_frequency;
}

double OpticalMode::frequency_hz() const
{
    return angular_frequency / c::two_pi;
}

double OpticalMode::photon_energy_ev() const
{
    return c::hbar_ev_s * angular_frequency;
}

double OpticalMode::quality_factor() const
{
    return angular_frequency / total_loss_rate();
}

void validate(OpticalMode const& mode)
{
    auto fail = [&](char const* what) {
        throw ConfigError("mode " + std::to_string(mode.index) + ": " + what);
    };
    if (!(mode.angular_frequency > 0.0))
        fail("angular frequency must be positive");
    if (!(mode.decay_length > 0.0))
        fail("decay length must be positive");
    if (!(mode.intrinsic_loss_rate >= 0.0))
        fail("intrinsic loss rate must be non-negative");
    if (!(mode.external_coupling_rate >= 0.0))
        fail("external coupling rate must be non-negative");
    if (!(mode.field_scale >= 0.0))
        fail("field scale must be non-negative");
    if (!std::isfinite(mode.effective_index) || mode.effective_index <= 0.0)
        fail("effective index must be positive");
}

ModeComb::ModeComb(std::vector<OpticalMode> modes, double fsr_hz)
    : modes_(std::move(modes)), fsr_hz_(fsr_hz)
{
    if (!(fsr_hz_ > 0.0))
    {
        throw ConfigError("free spectral range must be positive");
    }
    for (auto const& m : modes_)
    {
        validate(m);
    }
    for (std::size_t i = 1; i < modes_.size(); ++i)
    {
        double const df = modes_[i].frequency_hz() - modes_[i - 1].frequency_hz();
        if (std::abs(df - fsr_hz_) > 1e-6 * fsr_hz_)
        {
            throw ConfigError("mode spacing deviates from the free spectral "
                              "range at mode "
                              + std::to_string(modes_[i].index));
        }
        if (!(modes_[i].wavelength() < modes_[i - 1].wavelength()))
        {
            throw ConfigError("mode wavelengths must strictly decrease");
        }
    }
}

ModeComb ModeComb::generate(CombSpec const& spec)
{
    if (!(spec.anchor_wavelength > 0.0) || !(spec.free_spectral_range_hz > 0.0)
        || !(spec.min_wavelength > 0.0)
        || !(spec.max_wavelength >= spec.min_wavelength))
    {
        throw ConfigError("invalid comb wavelength range or spacing");
    }
    if (!(spec.quality_factor > 0.0))
    {
        throw ConfigError("quality factor must be positive");
    }
    double const f0 = c::speed_of_light / spec.anchor_wavelength;
    double const fsr = spec.free_spectral_range_hz;
    int const first = static_cast<int>(
        std::ceil((c::speed_of_light / spec.max_wavelength - f0) / fsr));
    int const last = static_cast<int>(
        std::floor((c::speed_of_light / spec.min_wavelength - f0) / fsr));

    std::vector<OpticalMode> modes;
    for (int mu = first; mu <= last; ++mu)
    {
        OpticalMode m;
        m.index = mu;
        m.angular_frequency = c::two_pi * (f0 + mu * fsr);
        double const wl = m.wavelength();
        m.effective_index = spec.dispersion.index_at(wl);
        m.decay_length = spec.decay_length;
        m.field_scale = spec.field_scale;
        double const kappa = m.angular_frequency / spec.quality_factor;
        double const eff = std::clamp(
            spec.coupling_efficiency
                + spec.coupling_efficiency_slope
                      * (wl - spec.anchor_wavelength),
            0.0,
            1.0);
        m.external_coupling_rate = eff * kappa;
        m.intrinsic_loss_rate = kappa - m.external_coupling_rate;
        modes.push_back(m);
    }
    return ModeComb(std::move(modes), fsr);
}

std::size_t ModeComb::nearest(double wavelength) const
{
    if (modes_.empty())
    {
        throw DomainError("empty mode comb");
    }
    std::size_t best = 0;
    double best_dist = std::abs(modes_[0].wavelength() - wavelength);
    for (std::size_t i = 1; i < modes_.size(); ++i)
    {
        double const dist = std::abs(modes_[i].wavelength() - wavelength);
        if (dist < best_dist)
        {
            best = i;
            best_dist = dist;
        }
    }
    return best;
}

double bus_coupling_efficiency(double intrinsic_loss_rate,
                               double external_coupling_rate)
{
    if (!(intrinsic_loss_rate >= 0.0) || !(external_coupling_rate >= 0.0))
    {
        throw DomainError("loss rates must be non-negative");
    }
    double const total = intrinsic_loss_rate + external_coupling_rate;
    if (!(total > 0.0))
    {
        throw DomainError("bus coupling undefined for a lossless cavity");
    }
    return external_coupling_rate / total;
}

double cavity_lifetime(double quality_factor, double angular_frequency)
{
    if (!(quality_factor > 0.0) || !(angular_frequency > 0.0))
    {
        throw DomainError("cavity lifetime needs positive Q and frequency");
    }
    return quality_factor / angular_frequency;
}
}  // namespace epair::physics
