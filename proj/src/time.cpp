#include "dstsr/time.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace dstsr {

namespace {

using namespace std::chrono;

int to_int(std::string_view s, std::string_view whole)
{
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::invalid_argument("invalid timestamp '" + std::string(whole) + "'");
    }
    return v;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

Timestamp make(int y, unsigned mo, unsigned d, int h, int mi, int s, std::string_view whole)
{
    const year_month_day ymd{year{y}, month{mo}, day{d}};
    if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60) {
        throw std::invalid_argument("invalid timestamp '" + std::string(whole) + "'");
    }
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

} // namespace

Timestamp parse_timestamp(std::string_view text)
{
    const auto s = trim(text);
    const auto bad = [&] { return std::invalid_argument("invalid timestamp '" + std::string(text) + "'"); };

    if (s.size() >= 10 && s[4] == '-' && s[7] == '-') {
        const int y = to_int(s.substr(0, 4), text);
        const int mo = to_int(s.substr(5, 2), text);
        const int d = to_int(s.substr(8, 2), text);
        int h = 0, mi = 0, sec = 0;
        auto rest = s.substr(10);
        if (!rest.empty()) {
            if (rest.front() != 'T' && rest.front() != ' ') throw bad();
            rest.remove_prefix(1);
            if (!rest.empty() && (rest.back() == 'Z' || rest.back() == 'z')) rest.remove_suffix(1);
            if (rest.size() < 2) throw bad();
            h = to_int(rest.substr(0, 2), text);
            rest.remove_prefix(2);
            if (!rest.empty()) {
                if (rest.size() < 3 || rest.front() != ':') throw bad();
                mi = to_int(rest.substr(1, 2), text);
                rest.remove_prefix(3);
            }
            if (!rest.empty()) {
                if (rest.size() != 3 || rest.front() != ':') throw bad();
                sec = to_int(rest.substr(1, 2), text);
            }
        }
        return make(y, static_cast<unsigned>(mo), static_cast<unsigned>(d), h, mi, sec, text);
    }

    // "YYYY DOY HR"
    std::vector<std::string_view> parts;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        const std::size_t b = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i > b) parts.push_back(s.substr(b, i - b));
    }
    if (parts.size() != 3) throw bad();
    const int y = to_int(parts[0], text);
    const int doy = to_int(parts[1], text);
    const int h = to_int(parts[2], text);
    const bool leap = year{y}.is_leap();
    if (doy < 1 || doy > (leap ? 366 : 365) || h < 0 || h > 23) throw bad();
    return sys_days{year{y} / January / 1} + days{doy - 1} + hours{h};
}

std::string format_timestamp(Timestamp t)
{
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const hh_mm_ss hms{t - day_point};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

bool on_hour(Timestamp t) { return t == floor<hours>(t); }

TimeRange::TimeRange(Timestamp start, Timestamp end) : start_(start), end_(end)
{
    if (!(start < end)) {
        throw std::invalid_argument("time range start must precede end (" + format_timestamp(start) +
                                    " .. " + format_timestamp(end) + ")");
    }
}

TimeRange TimeRange::parse(std::string_view start, std::string_view end)
{
    return TimeRange(parse_timestamp(start), parse_timestamp(end));
}

} // namespace dstsr
