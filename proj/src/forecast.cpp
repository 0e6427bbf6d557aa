#include "dstsr/forecast.hpp"

#include "dstsr/csv.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <ostream>
#include <stdexcept>

namespace dstsr {

ForecastResult integrate(const ModelSpec& spec, double dst0, const DerivedSeries& drivers,
                         std::size_t start, std::size_t horizon)
{
    if (!std::isfinite(dst0)) {
        throw std::invalid_argument("initial Dst must be finite");
    }
    if (start > drivers.size() || drivers.size() - start < std::max<std::size_t>(horizon, 1)) {
        throw std::invalid_argument("driver series does not cover the forecast horizon");
    }
    const auto time = drivers.time();
    for (std::size_t k = 1; k < horizon; ++k) {
        if (time[start + k] - time[start + k - 1] != Hours{1}) {
            throw std::invalid_argument("driver series is not hourly over the forecast horizon");
        }
    }

    ForecastResult result;
    result.model = spec.name();
    result.start = time[start];
    result.horizon = horizon;
    result.predicted.reserve(horizon + 1);
    result.predicted.push_back(dst0);

    const auto ey = drivers.ey();
    const auto pdyn = drivers.pdyn();
    const auto pb = drivers.pb();
    double dst = dst0;
    for (std::size_t k = 0; k < horizon; ++k) {
        const std::size_t i = start + k;
        const double r = rate(spec, dst, ey[i], pdyn[i], pb[i]);
        if (!std::isfinite(r)) {
            result.invalid_step = k;
            break;
        }
        dst += r; // dt = 1 h
        result.predicted.push_back(dst);
    }

    if (drivers.size() - start >= horizon + 1) {
        bool hourly = horizon == 0 || time[start + horizon] - time[start + horizon - 1] == Hours{1};
        if (hourly) {
            const auto d = drivers.dst();
            result.actual.emplace(d.begin() + static_cast<std::ptrdiff_t>(start),
                                  d.begin() + static_cast<std::ptrdiff_t>(start + horizon + 1));
        }
    }
    return result;
}

ForecastResult integrate(const ModelSpec& spec, double dst0, const DerivedSeries& drivers,
                         std::size_t horizon)
{
    return integrate(spec, dst0, drivers, 0, horizon);
}

WindowSample valid_windows(const DerivedSeries& series, std::size_t horizon, std::size_t count,
                           std::mt19937_64& rng)
{
    const std::size_t n = series.size();
    if (n <= horizon) {
        throw std::invalid_argument("series is shorter than the forecast horizon");
    }
    const auto time = series.time();
    const auto ey = series.ey();
    const auto pdyn = series.pdyn();
    const auto pb = series.pb();
    const auto dst = series.dst();

    // run[i]: length of the valid hourly run ending at row i.
    std::vector<std::size_t> run(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const bool ok = std::isfinite(ey[i]) && std::isfinite(pdyn[i]) && std::isfinite(pb[i]) &&
                        std::isfinite(dst[i]);
        if (!ok) continue;
        const bool contiguous = i > 0 && time[i] - time[i - 1] == Hours{1};
        run[i] = contiguous ? run[i - 1] + 1 : 1;
    }
    std::vector<std::size_t> candidates;
    for (std::size_t s = 0; s + horizon < n; ++s) {
        if (run[s + horizon] >= horizon + 1) {
            candidates.push_back(s);
        }
    }

    WindowSample out;
    out.shortfall = candidates.size() < count;
    std::sample(candidates.begin(), candidates.end(), std::back_inserter(out.starts), count, rng);
    return out;
}

void write_forecast_csv(std::ostream& out, const ForecastResult& result)
{
    out << "timestamp,predicted_dst,actual_dst\n";
    for (std::size_t k = 0; k <= result.horizon; ++k) {
        const double p = k < result.predicted.size() ? result.predicted[k] : std::nan("");
        const double a = result.actual ? (*result.actual)[k] : std::nan("");
        csv::write_row(out, {format_timestamp(result.start + Hours{static_cast<long>(k)}), csv::format_number(p),
                             csv::format_number(a)});
    }
}

} // namespace dstsr
