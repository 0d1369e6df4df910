#include "epair/physics/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "epair/constants.hpp"
#include "epair/error.hpp"

namespace epair::physics
{
SensitivityCurve::SensitivityCurve(std::vector<std::pair<double, double>> points)
    : points_(std::move(points))
{
    if (points_.empty())
    {
        throw ConfigError("sensitivity curve needs at least one point");
    }
    std::sort(points_.begin(), points_.end());
    for (std::size_t i = 0; i < points_.size(); ++i)
    {
        auto [wl, eff] = points_[i];
        if (!(wl > 0.0) || !(eff >= 0.0 && eff <= 1.0))
        {
            throw ConfigError("sensitivity point out of range");
        }
        if (i > 0 && wl == points_[i - 1].first)
        {
            throw ConfigError("duplicate wavelength in sensitivity curve");
        }
    }
}

SensitivityCurve SensitivityCurve::flat(double value)
{
    if (!(value >= 0.0 && value <= 1.0))
    {
        throw ConfigError("flat sensitivity must be in [0,1]");
    }
    SensitivityCurve s;
    s.flat_ = value;
    return s;
}

SensitivityCurve SensitivityCurve::from_csv(std::string const& text)
{
    std::vector<std::pair<double, double>> pts;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        auto const first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        row.imbue(std::locale::classic());
        double wl_nm = 0.0;
        double eff = 0.0;
        if (!(row >> wl_nm >> eff))
        {
            if (pts.empty() && lineno == 1)
                continue;  // header
            throw ConfigError("sensitivity CSV: bad row at line "
                              + std::to_string(lineno));
        }
        pts.emplace_back(wl_nm * 1e-9, eff);
    }
    return SensitivityCurve(std::move(pts));
}

bool SensitivityCurve::covers(double wavelength) const
{
    if (flat_)
        return true;
    if (points_.empty())
        return false;
    return wavelength >= points_.front().first && wavelength <= points_.back().first;
}

double SensitivityCurve::operator()(double wavelength) const
{
    if (flat_)
        return *flat_;
    if (!covers(wavelength))
        return 0.0;
    auto hi = std::lower_bound(
        points_.begin(), points_.end(), wavelength, [](auto const& p, double w) {
            return p.first < w;
        });
    if (hi->first == wavelength || hi == points_.begin())
        return hi->second;
    auto lo = hi - 1;
    double const t = (wavelength - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

double SpectralFilter::transmission(double wavelength) const
{
    double const c0 = constants::speed_of_light;
    double const df = c0 / wavelength - c0 / center_wavelength;
    double const x = df / fwhm_hz;
    return peak_transmission * std::exp(-4.0 * std::log(2.0) * x * x);
}

double LossChain::total() const
{
    double t = 1.0;
    for (auto const& s : stages)
        t *= s.transmission;
    return t;
}

double LossChain::transmission(double wavelength) const
{
    double t = total();
    if (filter)
        t *= filter->transmission(wavelength);
    return t;
}

void LossChain::validate() const
{
    for (auto const& s : stages)
    {
        if (!(s.transmission >= 0.0 && s.transmission <= 1.0))
        {
            throw ConfigError("loss stage '" + s.name + "' outside [0,1]");
        }
    }
    if (filter
        && (!(filter->fwhm_hz > 0.0) || !(filter->center_wavelength > 0.0)
            || !(filter->peak_transmission >= 0.0 && filter->peak_transmission <= 1.0)))
    {
        throw ConfigError("invalid spectral filter");
    }
}

SpectralEnvelope emission_spectrum(ModeComb const& comb,
                                   CouplingResult const& coupling,
                                   LossChain const& chain,
                                   SensitivityCurve const& sensitivity)
{
    if (coupling.per_mode.size() != comb.size())
    {
        throw ContractError("coupling result does not match the comb");
    }
    chain.validate();
    SpectralEnvelope env;
    env.wavelength.resize(comb.size());
    env.coupling_probability.resize(comb.size());
    env.probability.resize(comb.size());
    for (std::size_t i = 0; i < comb.size(); ++i)
    {
        OpticalMode const& m = comb[i];
        double const wl = m.wavelength();
        double const g2 = std::norm(coupling.per_mode[i]);
        env.wavelength[i] = wl;
        env.coupling_probability[i] = g2;
        if (!sensitivity.covers(wl))
        {
            env.uncovered.push_back(i);
        }
        double const eta = m.total_loss_rate() > 0.0
                               ? bus_coupling_efficiency(m.intrinsic_loss_rate,
                                                         m.external_coupling_rate)
                               : 1.0;
        env.probability[i] = g2 * eta * sensitivity(wl) * chain.transmission(wl);
    }
    return env;
}

SpectralEnvelope emission_spectrum(ModeComb const& comb,
                                   Trajectory const& traj,
                                   LossChain const& chain,
                                   SensitivityCurve const& sensitivity,
                                   CouplingCalibration const& calibration)
{
    return emission_spectrum(comb,
                             total_scattering_probability(comb, traj, calibration),
                             chain,
                             sensitivity);
}
}  // namespace epair::physics
