#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace dstsr {

using Timestamp = std::chrono::sys_seconds;
using Hours = std::chrono::hours;

/// Accepts ISO-8601 ("2015-03-17T05:00:00Z", "2015-03-17 05:00", "2015-03-17")
/// and OMNI-style "YYYY DOY HR". Throws std::invalid_argument on bad input.
Timestamp parse_timestamp(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_timestamp(Timestamp t);

bool on_hour(Timestamp t);

/// Half-open [start, end).
class TimeRange {
public:
    TimeRange(Timestamp start, Timestamp end);

    static TimeRange parse(std::string_view start, std::string_view end);

    [[nodiscard]] Timestamp start() const noexcept { return start_; }
    [[nodiscard]] Timestamp end() const noexcept { return end_; }
    [[nodiscard]] bool contains(Timestamp t) const noexcept { return start_ <= t && t < end_; }
    [[nodiscard]] bool covers(const TimeRange& other) const noexcept
    {
        return start_ <= other.start_ && other.end_ <= end_;
    }
    [[nodiscard]] Hours duration() const
    {
        return std::chrono::duration_cast<Hours>(end_ - start_);
    }

    friend bool operator==(const TimeRange&, const TimeRange&) = default;

private:
    Timestamp start_;
    Timestamp end_;
};

} // namespace dstsr
