#include "epair/physics/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <type_traits>

#include "epair/constants.hpp"
#include "epair/error.hpp"
#include "epair/physics/kinematics.hpp"

namespace epair::physics
{
namespace c = constants;

double Trajectory::velocity() const
{
    return electron_velocity(kinetic_energy_ev);
}

namespace
{
//---------------------------------------------------------------------------//
// Field amplitude is kept out to this many e-folds beyond its peak.
constexpr double kept_efolds = 30.0;

struct LocalPoint
{
    double distance;  // to the nearest waveguide surface point
    double arc;  // arc length of that point along the waveguide
};

LocalPoint local_point(Trajectory const& traj, double z)
{
    double const d = traj.impact_parameter;
    return std::visit(
        [&](auto const& g) -> LocalPoint {
            using G = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<G, StraightPass>)
            {
                return {d, z};
            }
            else
            {
                double const xc = g.radius - traj.lateral_offset;
                double const r = std::hypot(xc, z);
                double const lateral
                    = std::max(0.0, std::abs(r - g.radius) - 0.5 * g.waveguide_width);
                // Azimuth measured from the tangent point, continuous along
                // the whole line for either sign of xc.
                double const theta = 0.5 * c::pi - std::atan2(xc, z);
                return {std::hypot(d, lateral), g.radius * theta};
            }
        },
        traj.geometry);
}

double lateral_reach(OpticalMode const& mode, Trajectory const& traj)
{
    double const d = traj.impact_parameter;
    double const far = d + kept_efolds * mode.decay_length;
    return std::sqrt(far * far - d * d);
}

// Upper bound on |d(arg u)/dz| over the support and its sign behavior.
double integrand_rate_bound(OpticalMode const& mode, Trajectory const& traj)
{
    double const q = mode.angular_frequency / traj.velocity();
    double const k = mode.effective_index * mode.angular_frequency
                     / c::speed_of_light;
    return std::visit(
        [&](auto const& g) -> double {
            using G = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<G, StraightPass>)
            {
                return std::max(q, k);
            }
            else
            {
                double const reach
                    = 0.5 * g.waveguide_width + lateral_reach(mode, traj);
                double const r_min = std::max(g.radius - reach, 0.05 * g.radius);
                double const k_max = k * g.radius / r_min;
                double const xc = g.radius - traj.lateral_offset;
                return xc > 0.0 ? std::max(q, k_max) : q + k_max;
            }
        },
        traj.geometry);
}

// exp(i*theta) moments over [0,1]: E1 = int e^{i theta s}, E2 = int s e^{...}
std::pair<complex, complex> oscillatory_moments(double theta)
{
    complex const it{0.0, theta};
    if (std::abs(theta) < 0.5)
    {
        complex e1{0.0, 0.0};
        complex e2{0.0, 0.0};
        complex power{1.0, 0.0};  // (i theta)^n / n!
        for (int n = 0; n < 24; ++n)
        {
            e1 += power / static_cast<double>(n + 1);
            e2 += power / static_cast<double>(n + 2);
            power *= it / static_cast<double>(n + 1);
        }
        return {e1, e2};
    }
    complex const ex = std::exp(it);
    complex const e1 = (ex - 1.0) / it;
    complex const e2 = ex / it + (ex - 1.0) / (theta * theta);
    return {e1, e2};
}

double calibration_scale(Trajectory const& traj,
                         double decay_length,
                         CouplingCalibration const& calibration)
{
    double const v = traj.velocity();
    OpticalMode ref;
    ref.angular_frequency = c::two_pi * c::speed_of_light
                            / calibration.reference_wavelength;
    ref.effective_index = c::speed_of_light / v;
    ref.decay_length = decay_length;
    ref.field_scale = 1.0;

    Trajectory ref_traj = traj;
    ref_traj.impact_parameter = calibration.reference_distance;
    ref_traj.lateral_offset = 0.0;

    complex integral{};
    for (auto [z0, z1] : field_support(ref, ref_traj))
    {
        integral += phase_matching_integral(
            sample_field(ref, ref_traj, z0, z1), ref.angular_frequency, v);
    }
    double const mag = std::abs(integral);
    if (!(mag > 0.0))
    {
        throw DomainError("coupling calibration reference has no field");
    }
    return calibration.reference_coupling / mag;
}

complex raw_coupling(OpticalMode const& mode, Trajectory const& traj)
{
    double const v = traj.velocity();
    complex sum{};
    for (auto [z0, z1] : field_support(mode, traj))
    {
        sum += phase_matching_integral(
            sample_field(mode, traj, z0, z1), mode.angular_frequency, v);
    }
    return sum;
}

// Integrand phase q z - arg u(z) at a point, from the analytic model.
double integrand_phase(OpticalMode const& mode, Trajectory const& traj, double z)
{
    double const q = mode.angular_frequency / traj.velocity();
    double const k = mode.effective_index * mode.angular_frequency
                     / c::speed_of_light;
    return q * z - k * local_point(traj, z).arc;
}
}  // namespace

//---------------------------------------------------------------------------//
double phase_mismatch(OpticalMode const& mode, double velocity)
{
    if (!(velocity > 0.0))
    {
        throw DomainError("electron velocity must be positive");
    }
    return mode.angular_frequency / velocity
           - mode.effective_index * mode.angular_frequency / c::speed_of_light;
}

complex
phase_matching_integral(SampledField const& field, double omega, double velocity)
{
    if (!(velocity > 0.0))
    {
        throw DomainError("electron velocity must be positive");
    }
    auto const& u = field.values;
    if (u.size() < 2)
    {
        return {};
    }
    double const h = field.step;
    if (!(h > 0.0))
    {
        throw DomainError("sampling step must be positive");
    }
    double const q = omega / velocity;
    double const max_step_phase = c::two_pi / min_samples_per_period;

    complex sum{};
    for (std::size_t k = 0; k + 1 < u.size(); ++k)
    {
        double const a0 = std::abs(u[k]);
        double const a1 = std::abs(u[k + 1]);
        if (a0 == 0.0 && a1 == 0.0)
        {
            continue;
        }
        double const z = field.z_start + h * static_cast<double>(k);
        double dphi = q * h;
        if (a0 > 0.0 && a1 > 0.0)
        {
            dphi -= std::arg(u[k + 1] * std::conj(u[k]));
        }
        if (std::abs(dphi) > max_step_phase * (1.0 + 1e-9))
        {
            throw ResolutionError(
                "phase-matching integrand under-resolved: "
                + std::to_string(c::two_pi / std::abs(dphi))
                + " samples per period");
        }
        // Unit phasor of the integrand at the left node.
        complex start = std::polar(1.0, q * z);
        if (a0 > 0.0)
        {
            start *= std::conj(u[k]) / a0;
        }
        else
        {
            start *= std::conj(u[k + 1]) / a1 * std::polar(1.0, -q * h);
        }
        auto const [e1, e2] = oscillatory_moments(dphi);
        sum += h * start * (a0 * e1 + (a1 - a0) * e2);
    }
    return sum;
}

std::vector<double> CouplingResult::probabilities() const
{
    std::vector<double> p(per_mode.size());
    std::transform(per_mode.begin(), per_mode.end(), p.begin(), [](complex g) {
        return std::norm(g);
    });
    return p;
}

std::vector<std::pair<double, double>>
field_support(OpticalMode const& mode, Trajectory const& traj)
{
    if (traj.clips_chip())
    {
        return {};
    }
    return std::visit(
        [&](auto const& g) -> std::vector<std::pair<double, double>> {
            using G = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<G, StraightPass>)
            {
                return {{-0.5 * g.length, 0.5 * g.length}};
            }
            else
            {
                double const reach
                    = 0.5 * g.waveguide_width + lateral_reach(mode, traj);
                double const xc = g.radius - traj.lateral_offset;
                double const outer = g.radius + reach;
                double const hi_sq = outer * outer - xc * xc;
                if (hi_sq <= 0.0)
                {
                    return {};
                }
                double const hi = std::sqrt(hi_sq);
                double const inner = g.radius - reach;
                double const lo_sq = inner > 0.0 ? inner * inner - xc * xc : -1.0;
                if (lo_sq <= 0.0)
                {
                    return {{-hi, hi}};
                }
                double const lo = std::sqrt(lo_sq);
                return {{-hi, -lo}, {lo, hi}};
            }
        },
        traj.geometry);
}

SampledField sample_field(OpticalMode const& mode,
                          Trajectory const& traj,
                          double z0,
                          double z1)
{
    if (!(z1 > z0))
    {
        throw DomainError("sampling interval must have positive length");
    }
    double const rate = integrand_rate_bound(mode, traj);
    double const max_step = c::two_pi / (min_samples_per_period * rate) * 0.95;
    auto const n = static_cast<std::size_t>(std::ceil((z1 - z0) / max_step)) + 1;

    SampledField out;
    out.z_start = z0;
    out.step = (z1 - z0) / static_cast<double>(n - 1);
    out.values.resize(n);
    double const k = mode.effective_index * mode.angular_frequency
                     / c::speed_of_light;
    for (std::size_t i = 0; i < n; ++i)
    {
        double const z = z0 + out.step * static_cast<double>(i);
        LocalPoint const p = local_point(traj, z);
        double const amp = mode.field_scale * std::exp(-p.distance / mode.decay_length);
        out.values[i] = std::polar(amp, k * p.arc);
    }
    return out;
}

ModeCoupling coupling_strength(OpticalMode const& mode,
                               Trajectory const& traj,
                               CouplingCalibration const& calibration)
{
    if (traj.clips_chip())
    {
        return {{}, true};
    }
    if (traj.impact_parameter / mode.decay_length > 700.0)
    {
        return {{}, false};
    }
    double const scale = calibration_scale(traj, mode.decay_length, calibration);
    return {scale * raw_coupling(mode, traj), false};
}

CouplingResult total_scattering_probability(ModeComb const& comb,
                                            Trajectory const& traj,
                                            CouplingCalibration const& calibration)
{
    if (comb.empty())
    {
        throw DomainError("mode comb is empty");
    }
    CouplingResult result;
    result.per_mode.resize(comb.size());
    if (traj.clips_chip())
    {
        result.clipped = true;
        return result;
    }
    std::map<double, double> scales;
    for (std::size_t i = 0; i < comb.size(); ++i)
    {
        OpticalMode const& mode = comb[i];
        if (traj.impact_parameter / mode.decay_length > 700.0)
        {
            continue;
        }
        auto it = scales.find(mode.decay_length);
        if (it == scales.end())
        {
            it = scales
                     .emplace(mode.decay_length,
                              calibration_scale(traj, mode.decay_length, calibration))
                     .first;
        }
        result.per_mode[i] = it->second * raw_coupling(mode, traj);
    }
    for (complex g : result.per_mode)
    {
        result.total_probability += std::norm(g);
    }
    return result;
}

complex ramsey_coupling(complex g1, complex g2, double phase)
{
    return g1 + std::polar(1.0, phase) * g2;
}

ChordSegments chord_segments(OpticalMode const& mode,
                             Trajectory const& traj,
                             CouplingCalibration const& calibration)
{
    ChordSegments out;
    if (traj.clips_chip())
    {
        return out;
    }
    auto const support = field_support(mode, traj);
    if (support.empty())
    {
        return out;
    }
    double const v = traj.velocity();
    double const scale = calibration_scale(traj, mode.decay_length, calibration);
    auto segment = [&](std::pair<double, double> iv, double& phase) {
        double const center = 0.5 * (iv.first + iv.second);
        phase = integrand_phase(mode, traj, center);
        complex const g = scale
                          * phase_matching_integral(
                              sample_field(mode, traj, iv.first, iv.second),
                              mode.angular_frequency,
                              v);
        return g * std::polar(1.0, -phase);
    };
    double phase1 = 0.0;
    out.first = segment(support.front(), phase1);
    if (support.size() == 2)
    {
        double phase2 = 0.0;
        out.second = segment(support.back(), phase2);
        out.relative_phase = phase2 - phase1;
        out.separated = true;
    }
    return out;
}

double ChordSegments::interference_phase() const
{
    return relative_phase + std::arg(second) - std::arg(first);
}

double phase_matching_bandwidth(Trajectory const& traj,
                                Dispersion const& dispersion,
                                double decay_length,
                                double min_ev,
                                double max_ev,
                                CouplingCalibration const& calibration)
{
    if (!(max_ev > min_ev) || !(min_ev > 0.0))
    {
        throw DomainError("invalid photon energy scan range");
    }
    constexpr int points = 801;
    std::vector<double> energy(points);
    std::vector<double> response(points);
    for (int i = 0; i < points; ++i)
    {
        energy[i] = min_ev + (max_ev - min_ev) * i / (points - 1);
        OpticalMode m;
        m.angular_frequency = energy[i] / c::hbar_ev_s;
        m.effective_index = dispersion.index_at(m.wavelength());
        m.decay_length = decay_length;
        response[i] = std::norm(coupling_strength(m, traj, calibration).g);
    }
    auto const peak = static_cast<int>(
        std::max_element(response.begin(), response.end()) - response.begin());
    double const half = 0.5 * response[peak];
    auto crossing = [&](int step) {
        for (int i = peak; i + step >= 0 && i + step < points; i += step)
        {
            int const j = i + step;
            if (response[j] < half)
            {
                double const t = (response[i] - half) / (response[i] - response[j]);
                return energy[i] + t * (energy[j] - energy[i]);
            }
        }
        throw DomainError("phase-matching peak not contained in scan range");
    };
    return crossing(+1) - crossing(-1);
}
}  // namespace epair::physics
