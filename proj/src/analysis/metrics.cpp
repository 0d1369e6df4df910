#include "epair/analysis/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epair/error.hpp"

namespace epair::analysis
{
namespace
{
struct BinRange
{
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
    std::size_t size() const { return end > begin ? end - begin : 0; }
};

// Time bins whose centers lie in [lo, hi].
BinRange time_bins_within(HistogramAxes const& axes, double lo, double hi)
{
    BinRange r{axes.time_bins(), 0};
    for (std::size_t t = 0; t < axes.time_bins(); ++t)
    {
        double const c = axes.time_center(t);
        if (c >= lo && c <= hi)
        {
            r.begin = std::min(r.begin, t);
            r.end = std::max(r.end, t + 1);
        }
    }
    return r;
}

BinRange energy_bins_within(HistogramAxes const& axes, double lo, double hi)
{
    BinRange r{axes.energy_bins, 0};
    for (std::size_t e = 0; e < axes.energy_bins; ++e)
    {
        double const c = axes.energy_center(e);
        if (c >= lo && c <= hi)
        {
            r.begin = std::min(r.begin, e);
            r.end = std::max(r.end, e + 1);
        }
    }
    return r;
}

double gated_counts(CoincidenceHistogram const& h, BinRange t, BinRange e)
{
    double n = 0.0;
    for (std::size_t i = t.begin; i < t.end; ++i)
        for (std::size_t j = e.begin; j < e.end; ++j)
            n += double(h.at(i, j));
    return n;
}

double gated_background(BackgroundEstimate const& bg, BinRange t, BinRange e)
{
    double n = 0.0;
    for (std::size_t j = e.begin; j < e.end; ++j)
        n += bg.per_time_bin[j];
    return n * double(t.size());
}

double binomial_sigma(double k, double n)
{
    if (!(n > 0.0))
        return 0.0;
    double const p = k / n;
    if (p >= 0.0 && p <= 1.0)
        return std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / n);
    return std::sqrt(k) / n;
}
}  // namespace

BackgroundEstimate background_estimate(CoincidenceHistogram const& h, Sidebands const& sb)
{
    auto const& axes = h.axes;
    BackgroundEstimate bg;
    bg.per_time_bin.assign(axes.energy_bins, 0.0);
    for (std::size_t t = 0; t < axes.time_bins(); ++t)
    {
        double const c = std::abs(axes.time_center(t));
        if (c < sb.inner || c > sb.outer)
            continue;
        ++bg.sideband_bins;
        for (std::size_t e = 0; e < axes.energy_bins; ++e)
            bg.per_time_bin[e] += double(h.at(t, e));
    }
    if (bg.sideband_bins == 0)
        throw EstimationError("sidebands contain no histogram bins");
    for (auto& v : bg.per_time_bin)
        v /= double(bg.sideband_bins);
    return bg;
}

FractionMap true_fraction_map(CoincidenceHistogram const& h,
                              BackgroundEstimate const& bg,
                              double time_center,
                              double energy_center,
                              std::span<double const> half_widths,
                              std::span<double const> energy_widths,
                              double min_counts)
{
    FractionMap m;
    m.half_widths.assign(half_widths.begin(), half_widths.end());
    m.energy_widths.assign(energy_widths.begin(), energy_widths.end());
    m.fraction.assign(half_widths.size() * energy_widths.size(), 0.0);
    for (std::size_t i = 0; i < half_widths.size(); ++i)
    {
        auto const tr = time_bins_within(
            h.axes, time_center - half_widths[i], time_center + half_widths[i]);
        for (std::size_t j = 0; j < energy_widths.size(); ++j)
        {
            double const lo = energy_center - 0.5 * energy_widths[j];
            double const hi = energy_center + 0.5 * energy_widths[j];
            auto const er = energy_bins_within(h.axes, lo, hi);
            double const n = gated_counts(h, tr, er);
            double const acc = gated_background(bg, tr, er);
            double const f = n > 0.0 ? 1.0 - acc / n : 0.0;
            m.fraction[i * energy_widths.size() + j] = f;
            if (n >= min_counts && f > m.best)
            {
                m.best = f;
                m.best_half_width = half_widths[i];
                m.best_energy_lo = lo;
                m.best_energy_hi = hi;
            }
        }
    }
    return m;
}

CarValue car(double r_pe, double r_acc)
{
    if (!(r_pe >= 0.0) || !(r_acc >= 0.0))
        throw DomainError("rates must be non-negative");
    if (r_acc == 0.0)
        return {std::numeric_limits<double>::infinity(), true};
    return {(r_pe - r_acc) / r_acc, false};
}

KlyshkoPair klyshko(double r_pe, double r_e, double r_p)
{
    if (!(r_e > 0.0) || !(r_p > 0.0))
        throw DomainError("Klyshko efficiency needs positive single rates");
    if (!(r_pe >= 0.0))
        throw DomainError("coincidence rate must be non-negative");
    return {r_pe / r_e, r_pe / r_p};
}

IntrinsicValue intrinsic_heralding(double eta_k, double eta_d, double transmission)
{
    double const denom = eta_d * transmission;
    if (!(denom > 0.0))
        throw DomainError("detector efficiency and transmission must be positive");
    double const v = eta_k / denom;
    if (v > 1.0)
        return {1.0, true};
    return {v, false};
}

TimeProfile
time_profile(CoincidenceHistogram const& h, EnergyGate const& gate, BackgroundEstimate const* bg)
{
    auto const er = energy_bins_within(h.axes, gate.lo_ev, gate.hi_ev);
    TimeProfile p;
    p.bin_width = to_seconds(h.axes.time_bin());
    p.origin = h.axes.time_edge(0);
    p.counts.assign(h.axes.time_bins(), 0.0);
    double floor = 0.0;
    if (bg)
    {
        for (std::size_t e = er.begin; e < er.end; ++e)
            floor += bg->per_time_bin[e];
    }
    for (std::size_t t = 0; t < h.axes.time_bins(); ++t)
    {
        double n = 0.0;
        for (std::size_t e = er.begin; e < er.end; ++e)
            n += double(h.at(t, e));
        p.counts[t] = n - floor;
    }
    return p;
}

TimeProfile smooth(TimeProfile const& profile, std::size_t width)
{
    if (width % 2 == 0)
        throw DomainError("smoothing width must be odd");
    auto const n = std::ptrdiff_t(profile.counts.size());
    auto const h = std::ptrdiff_t(width / 2);
    TimeProfile out{std::vector<double>(profile.counts.size(), 0.0),
                    profile.bin_width,
                    profile.origin};
    for (std::ptrdiff_t i = 0; i < n; ++i)
    {
        double sum = 0.0;
        std::ptrdiff_t used = 0;
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - h);
             j <= std::min(n - 1, i + h);
             ++j, ++used)
            sum += profile.counts[std::size_t(j)];
        out.counts[std::size_t(i)] = sum / double(used);
    }
    return out;
}

double peak_fwhm(TimeProfile const& profile, double floor_sigma)
{
    auto const& c = profile.counts;
    if (c.size() < 3)
        throw DetectionError("profile too short for a peak");
    auto const peak = static_cast<std::size_t>(std::max_element(c.begin(), c.end())
                                               - c.begin());
    double const top = c[peak];
    if (!(top > 5.0 * std::max(floor_sigma, 1.0)))
        throw DetectionError("no coincidence peak above 5 sigma of the floor");
    double const half = 0.5 * top;

    auto crossing = [&](int dir) -> double {
        for (std::ptrdiff_t i = std::ptrdiff_t(peak);; i += dir)
        {
            std::ptrdiff_t const j = i + dir;
            if (j < 0 || j >= std::ptrdiff_t(c.size()))
                throw DetectionError("peak does not fall to half maximum in window");
            if (c[j] < half)
            {
                double const frac = (c[i] - half) / (c[i] - c[j]);
                return double(i) + dir * frac;
            }
        }
    };
    return (crossing(+1) - crossing(-1)) * profile.bin_width;
}

double peak_fwhm(CoincidenceHistogram const& h, EnergyGate const& gate)
{
    auto const bg = background_estimate(h);
    auto const profile = time_profile(h, gate, &bg);
    auto const er = energy_bins_within(h.axes, gate.lo_ev, gate.hi_ev);
    double floor = 0.0;
    for (std::size_t e = er.begin; e < er.end; ++e)
        floor += bg.per_time_bin[e];
    return peak_fwhm(smooth(profile, fwhm_smoothing_bins), std::sqrt(floor));
}

double decay_constant(TimeProfile const& profile, std::size_t start, std::size_t bins)
{
    if (start + bins > profile.counts.size() || bins < 3)
        throw DomainError("decay fit range outside the profile");
    double n = 0.0;
    double moment = 0.0;
    for (std::size_t k = 0; k < bins; ++k)
    {
        double const v = std::max(0.0, profile.counts[start + k]);
        n += v;
        moment += double(k) * v;
    }
    if (!(n > 0.0))
        throw DetectionError("empty decay tail");
    double const mean = moment / n;
    auto truncated_mean = [bins](double r) {
        double num = 0.0;
        double den = 0.0;
        double p = 1.0;
        for (std::size_t k = 0; k < bins; ++k)
        {
            num += double(k) * p;
            den += p;
            p *= r;
        }
        return num / den;
    };
    double lo = 1e-12;
    double hi = 1.0 - 1e-12;
    if (mean >= truncated_mean(hi))
        throw DetectionError("decay tail is not decreasing");
    for (int it = 0; it < 200; ++it)
    {
        double const mid = 0.5 * (lo + hi);
        (truncated_mean(mid) < mean ? lo : hi) = mid;
    }
    return -profile.bin_width / std::log(0.5 * (lo + hi));
}

HeraldingReport heralding_report(CoincidenceHistogram const& h,
                                 TimeGate const& tgate,
                                 EnergyGate const& egate,
                                 Efficiencies const& eff,
                                 Sidebands const& sb)
{
    if (!(h.duration > 0.0))
        throw DomainError("histogram has no duration");
    if (!(tgate.half_width > 0.0) || !(egate.hi_ev > egate.lo_ev))
        throw DomainError("invalid coincidence gates");
    auto const& axes = h.axes;
    auto const bg = background_estimate(h, sb);
    auto const er = energy_bins_within(axes, egate.lo_ev, egate.hi_ev);

    HeraldingReport r;
    r.duration = h.duration;
    r.energy_gate = egate;
    r.half_width = tgate.half_width;

    if (tgate.center)
    {
        r.time_center = *tgate.center;
    }
    else
    {
        // Center the gate where it collects the most excess counts.
        auto const prof = time_profile(h, egate, &bg);
        double const width = to_seconds(axes.time_bin());
        auto const span = static_cast<std::size_t>(
            std::max(1.0, std::round(2.0 * tgate.half_width / width)));
        double best = -std::numeric_limits<double>::infinity();
        double run = 0.0;
        for (std::size_t t = 0; t < prof.counts.size(); ++t)
        {
            run += prof.counts[t];
            if (t >= span)
                run -= prof.counts[t - span];
            if (t + 1 >= span && run > best)
            {
                best = run;
                r.time_center = 0.5 * (axes.time_edge(t + 1 - span) + axes.time_edge(t + 1));
            }
        }
    }
    auto const tr = time_bins_within(
        axes, r.time_center - tgate.half_width, r.time_center + tgate.half_width);

    double n_e = 0.0;
    for (std::size_t e = er.begin; e < er.end; ++e)
        n_e += double(h.electron_spectrum[e]);
    double const n_p = double(h.photons);
    double const n_pe = gated_counts(h, tr, er);
    double const n_acc = gated_background(bg, tr, er);
    double sideband_total = 0.0;
    for (std::size_t e = er.begin; e < er.end; ++e)
        sideband_total += bg.per_time_bin[e] * double(bg.sideband_bins);
    double const acc_sigma = sideband_total > 0.0
                                 ? n_acc / std::sqrt(sideband_total)
                                 : double(tr.size()) / double(bg.sideband_bins);

    double const T = h.duration;
    r.r_e = {n_e / T, std::sqrt(n_e) / T};
    r.r_p = {n_p / T, std::sqrt(n_p) / T};
    r.r_pe = {n_pe / T, std::sqrt(n_pe) / T};
    r.r_acc = {n_acc / T, acc_sigma / T};

    auto const cv = car(r.r_pe.value, r.r_acc.value);
    r.car_undefined = cv.undefined;
    r.car.value = cv.value;
    if (!cv.undefined && n_pe > 0.0)
    {
        double const rel = std::sqrt(1.0 / n_pe + std::pow(acc_sigma / n_acc, 2));
        r.car.sigma = (cv.value + 1.0) * rel;
    }

    if (n_e > 0.0 && n_p > 0.0)
    {
        auto const k = klyshko(r.r_pe.value, r.r_e.value, r.r_p.value);
        r.eta_k_photon = {k.photon, binomial_sigma(n_pe, n_e)};
        r.eta_k_electron = {k.electron, binomial_sigma(n_pe, n_p)};
        auto const ip = intrinsic_heralding(
            k.photon, eff.photon_detector, eff.photon_transmission);
        auto const ie = intrinsic_heralding(
            k.electron, eff.electron_detector, eff.electron_transmission);
        double const sp = eff.photon_detector * eff.photon_transmission;
        double const se = eff.electron_detector * eff.electron_transmission;
        r.eta_i_photon = {ip.value, r.eta_k_photon.sigma / sp};
        r.eta_i_electron = {ie.value, r.eta_k_electron.sigma / se};
        r.eta_i_clamped = ip.clamped || ie.clamped;
    }
    else
    {
        r.klyshko_undefined = true;
    }

    r.true_fraction = n_pe > 0.0 ? 1.0 - n_acc / n_pe : 0.0;
    {
        // Peak energy from the excess spectrum inside the time gate.
        double best = -std::numeric_limits<double>::infinity();
        double peak_energy = 0.5 * (egate.lo_ev + egate.hi_ev);
        for (std::size_t e = er.begin; e < er.end; ++e)
        {
            double const excess = gated_counts(h, tr, {e, e + 1})
                                  - bg.per_time_bin[e] * double(tr.size());
            if (excess > best)
            {
                best = excess;
                peak_energy = axes.energy_center(e);
            }
        }
        std::vector<double> widths_t;
        for (double w = 0.25e-9; w <= 6e-9; w += 0.25e-9)
            widths_t.push_back(w);
        std::vector<double> widths_e;
        double const span_e = egate.hi_ev - egate.lo_ev;
        for (double w = axes.energy_bin_ev; w <= span_e + 1e-12; w += axes.energy_bin_ev)
            widths_e.push_back(w);
        if (widths_e.empty())
            widths_e.push_back(span_e);
        auto const fm = true_fraction_map(
            h, bg, r.time_center, peak_energy, widths_t, widths_e);
        r.max_true_fraction = std::max(fm.best, r.true_fraction);
    }

    try
    {
        double floor = 0.0;
        for (std::size_t e = er.begin; e < er.end; ++e)
            floor += bg.per_time_bin[e];
        r.fwhm = peak_fwhm(smooth(time_profile(h, egate, &bg), fwhm_smoothing_bins),
                           std::sqrt(floor));
        r.peak_found = true;
    }
    catch (DetectionError const&)
    {
        r.peak_found = false;
    }
    return r;
}
}  // namespace epair::analysis
