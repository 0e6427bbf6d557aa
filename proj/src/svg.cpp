#include "dstsr/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace dstsr::svg {

namespace {

constexpr double kWidth = 900, kHeight = 480;
constexpr double kLeft = 70, kRight = 180, kTop = 40, kBottom = 60;
constexpr const char* kPalette[] = {"#000000", "#d62728", "#1f77b4", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
                                    "#17becf", "#393b79", "#637939", "#8c6d31"};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

const char* color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

struct Axis {
    double lo, hi;
    [[nodiscard]] double map(double v, double px_lo, double px_hi) const
    {
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

Axis nice_range(double lo, double hi)
{
    if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
    if (lo == hi) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

void header(std::ostringstream& out, const std::string& title)
{
    out << R"(<?xml version="1.0" encoding="UTF-8"?>)" << '\n'
        << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << kWidth << R"(" height=")" << kHeight
        << R"(" viewBox="0 0 )" << kWidth << ' ' << kHeight << R"(" font-family="sans-serif" font-size="12">)"
        << '\n'
        << R"(<rect x="0" y="0" width=")" << kWidth << R"(" height=")" << kHeight << R"(" fill="white"/>)"
        << '\n'
        << R"(<text x=")" << num(kWidth / 2) << R"(" y="22" text-anchor="middle" font-size="15">)"
        << escape_xml(title) << "</text>\n";
}

void y_axis(std::ostringstream& out, const Axis& y, const std::string& label)
{
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    out << R"(<line x1=")" << num(x0) << R"(" y1=")" << num(y0) << R"(" x2=")" << num(x1) << R"(" y2=")"
        << num(y0) << R"(" stroke="black"/>)" << '\n';
    out << R"(<line x1=")" << num(x0) << R"(" y1=")" << num(y0) << R"(" x2=")" << num(x0) << R"(" y2=")"
        << num(y1) << R"(" stroke="black"/>)" << '\n';
    for (int i = 0; i <= 5; ++i) {
        const double v = y.lo + (y.hi - y.lo) * i / 5.0;
        const double py = y.map(v, y0, y1);
        out << R"(<line x1=")" << num(x0 - 4) << R"(" y1=")" << num(py) << R"(" x2=")" << num(x1)
            << R"(" y2=")" << num(py) << R"(" stroke="#dddddd"/>)" << '\n';
        out << R"(<text x=")" << num(x0 - 6) << R"(" y=")" << num(py + 4) << R"(" text-anchor="end">)"
            << tick(std::round(v * 100) / 100) << "</text>\n";
    }
    out << R"(<text x="18" y=")" << num((y0 + y1) / 2) << R"(" text-anchor="middle" transform="rotate(-90 18 )"
        << num((y0 + y1) / 2) << R"lit()">)lit" << escape_xml(label) << "</text>\n";
}

void legend(std::ostringstream& out, const std::vector<std::string>& labels, bool squares)
{
    const double x = kWidth - kRight + 15;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double y = kTop + 10 + 18.0 * static_cast<double>(i);
        if (squares) {
            out << R"(<rect x=")" << num(x) << R"(" y=")" << num(y - 9) << R"(" width="12" height="10" fill=")"
                << color(i + 1) << R"("/>)" << '\n';
        } else {
            out << R"(<line x1=")" << num(x) << R"(" y1=")" << num(y - 4) << R"(" x2=")" << num(x + 18)
                << R"(" y2=")" << num(y - 4) << R"(" stroke=")" << color(i) << R"(" stroke-width="2"/>)"
                << '\n';
        }
        out << R"(<text x=")" << num(x + 24) << R"(" y=")" << num(y) << R"(">)" << escape_xml(labels[i])
            << "</text>\n";
    }
}

} // namespace

std::string escape_xml(const std::string& text)
{
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Line>& lines)
{
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::size_t n = 0;
    for (const auto& l : lines) {
        n = std::max(n, l.values.size());
        for (double v : l.values) {
            if (std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    const Axis y = nice_range(lo, hi);
    const Axis x{0.0, std::max<double>(1.0, static_cast<double>(n) - 1.0)};
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;

    std::ostringstream out;
    header(out, title);
    y_axis(out, y, y_label);
    for (int i = 0; i <= 6; ++i) {
        const double v = x.lo + (x.hi - x.lo) * i / 6.0;
        out << R"(<text x=")" << num(x.map(v, x0, x1)) << R"(" y=")" << num(y0 + 16)
            << R"(" text-anchor="middle">)" << tick(std::round(v)) << "</text>\n";
    }
    out << R"(<text x=")" << num((x0 + x1) / 2) << R"(" y=")" << num(kHeight - 18)
        << R"(" text-anchor="middle">)" << escape_xml(x_label) << "</text>\n";

    std::vector<std::string> labels;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const auto& l = lines[li];
        labels.push_back(l.label);
        std::string points;
        auto flush = [&] {
            if (!points.empty()) {
                out << R"(<polyline fill="none" stroke=")" << color(li)
                    << R"(" stroke-width=")" << (li == 0 ? "2.5" : "1.5") << R"(" points=")" << points
                    << R"("/>)" << '\n';
                points.clear();
            }
        };
        for (std::size_t k = 0; k < l.values.size(); ++k) {
            if (!std::isfinite(l.values[k])) {
                flush();
                continue;
            }
            if (!points.empty()) points += ' ';
            points += num(x.map(static_cast<double>(k), x0, x1)) + "," + num(y.map(l.values[k], y0, y1));
        }
        flush();
    }
    legend(out, labels, false);
    out << "</svg>\n";
    return out.str();
}

std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<std::string>& categories, const std::vector<BarGroup>& groups)
{
    double hi = 0.0;
    for (const auto& g : groups) {
        for (double v : g.values) {
            if (std::isfinite(v)) hi = std::max(hi, v);
        }
    }
    const Axis y{0.0, hi > 0.0 ? hi * 1.1 : 1.0};
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;

    std::ostringstream out;
    header(out, title);
    y_axis(out, y, y_label);
    const double slot = (x1 - x0) / static_cast<double>(std::max<std::size_t>(categories.size(), 1));
    const double bar = slot * 0.8 / static_cast<double>(std::max<std::size_t>(groups.size(), 1));
    for (std::size_t c = 0; c < categories.size(); ++c) {
        const double cx = x0 + slot * static_cast<double>(c) + slot * 0.1;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const double v = c < groups[g].values.size() ? groups[g].values[c] : std::nan("");
            if (!std::isfinite(v)) continue;
            const double top = y.map(v, y0, y1);
            out << R"(<rect x=")" << num(cx + bar * static_cast<double>(g)) << R"(" y=")" << num(top)
                << R"(" width=")" << num(bar) << R"(" height=")" << num(y0 - top) << R"(" fill=")"
                << color(g + 1) << R"("><title>)" << escape_xml(groups[g].label + " " + categories[c] + ": " + tick(v))
                << "</title></rect>\n";
        }
        out << R"(<text x=")" << num(cx + slot * 0.4) << R"(" y=")" << num(y0 + 16)
            << R"(" text-anchor="middle">)" << escape_xml(categories[c]) << "</text>\n";
    }
    std::vector<std::string> labels;
    for (const auto& g : groups) labels.push_back(g.label);
    legend(out, labels, true);
    out << "</svg>\n";
    return out.str();
}

} // namespace dstsr::svg
