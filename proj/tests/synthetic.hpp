#pragma once

#include "dstsr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace dstsr::testing {

// Hourly series with smooth random drivers. Dst follows the supplied rate by
// forward Euler so that dDst_dt is a known function of the row.
inline DerivedSeries synthetic_series(std::size_t n, std::uint64_t seed,
                                      const std::function<double(double dst, double ey, double pdyn)>& rate,
                                      Timestamp start = parse_timestamp("2010-01-01T00:00:00Z"))
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    double ey = 0.5, pdyn = 2.0, pb = 0.05, dst = -10.0;
    std::vector<DerivedRecord> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        ey = 0.9 * ey + 0.1 * 1.0 + 0.6 * noise(rng);
        pdyn = std::max(0.2, 0.9 * pdyn + 0.1 * 2.0 + 0.4 * noise(rng));
        pb = std::max(0.0, 0.9 * pb + 0.1 * 0.05 + 0.01 * noise(rng));
        rows[i] = {start + Hours{static_cast<long>(i)}, ey, pdyn, pb, dst, 0.0, 0.0};
        const double next = dst + rate(dst, ey, pdyn);
        dst = std::clamp(next, -600.0, 100.0);
    }
    DerivedSeries s;
    for (std::size_t i = 0; i < n; ++i) {
        auto r = rows[i];
        r.dst_prev = i ? rows[i - 1].dst : r.dst;
        r.ddst_dt = rate(r.dst, r.ey, r.pdyn);
        s.append(r);
    }
    return s;
}

} // namespace dstsr::testing
