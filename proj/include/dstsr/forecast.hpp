#pragma once

#include "dstsr/dataset.hpp"
#include "dstsr/models.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dstsr {

struct ForecastResult {
    std::string model;
    Timestamp start{};
    std::size_t horizon = 0;
    /// predicted[k] is Dst at start + k hours; predicted[0] is the initial value.
    std::vector<double> predicted;
    /// Measured Dst on the same hours when the series covers them.
    std::optional<std::vector<double>> actual;
    /// Step whose rate was non-finite; integration stopped there.
    std::optional<std::size_t> invalid_step;

    [[nodiscard]] bool valid() const noexcept { return !invalid_step.has_value(); }
};

/// Explicit Euler with a 1 h step, drivers taken from the measured series at
/// each step: Dst[k+1] = Dst[k] + rate(Dst[k], Ey[start+k], Pdyn[start+k], PB[start+k]).
/// Throws std::invalid_argument when rows [start, start + horizon) are not
/// available or dst0 is not finite.
ForecastResult integrate(const ModelSpec& spec, double dst0, const DerivedSeries& drivers,
                         std::size_t start, std::size_t horizon);

/// Same, starting at the first row of `drivers`.
ForecastResult integrate(const ModelSpec& spec, double dst0, const DerivedSeries& drivers,
                         std::size_t horizon);

struct WindowSample {
    std::vector<std::size_t> starts; // ascending
    bool shortfall = false;          // fewer valid windows than requested
};

/// Distinct start indices whose rows [start, start + horizon] are consecutive
/// hours with finite Ey, Pdyn, PB and Dst, sampled without replacement.
/// Throws std::invalid_argument when the series has no more rows than horizon.
WindowSample valid_windows(const DerivedSeries& series, std::size_t horizon, std::size_t count,
                           std::mt19937_64& rng);

/// Columns: timestamp, predicted_dst, actual_dst.
void write_forecast_csv(std::ostream& out, const ForecastResult& result);

} // namespace dstsr
