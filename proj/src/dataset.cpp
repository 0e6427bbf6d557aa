#include "dstsr/dataset.hpp"

#include "dstsr/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>

namespace dstsr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kProtonPressureFactor = 1.6726e-6; // m_p, cm^-3 and km/s to nPa
constexpr double kMu0 = 4.0 * std::numbers::pi * 1e-7;

constexpr std::array<RawField, kRawFieldCount> kRawFields{
    RawField::Vsw, RawField::Bz, RawField::Nsw, RawField::Bmag, RawField::Tsw, RawField::Dst};

std::size_t column_index(const std::vector<std::string>& header, const std::string& name)
{
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (csv::trim(header[i]) == name) {
            return i;
        }
    }
    throw DataError(1, "missing column '" + name + "'");
}

} // namespace

double& field(RawRecord& r, RawField f)
{
    switch (f) {
    case RawField::Vsw: return r.vsw;
    case RawField::Bz: return r.bz;
    case RawField::Nsw: return r.n_sw;
    case RawField::Bmag: return r.b_mag;
    case RawField::Tsw: return r.t_sw;
    case RawField::Dst: return r.dst;
    }
    return r.dst;
}

double field(const RawRecord& r, RawField f) { return field(const_cast<RawRecord&>(r), f); }

CsvSchema::CsvSchema() { sentinels.fill(kDefaultSentinels); }

DataError::DataError(std::size_t line, const std::string& message)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message)
    , line_(line)
{
}

std::vector<RawRecord> read_csv(std::istream& in, const CsvSchema& schema)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(1, "empty input: header row expected");
    }
    const auto header = csv::split_line(line);
    const std::size_t ts_col = column_index(header, schema.timestamp_column);
    std::array<std::size_t, kRawFieldCount> cols{};
    for (std::size_t f = 0; f < kRawFieldCount; ++f) {
        cols[f] = column_index(header, schema.columns[f]);
    }

    std::vector<RawRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) {
            continue;
        }
        std::vector<std::string> cells;
        try {
            cells = csv::split_line(line);
        } catch (const std::invalid_argument& e) {
            throw DataError(line_no, e.what());
        }
        if (cells.size() != header.size()) {
            throw DataError(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                         std::to_string(cells.size()));
        }
        RawRecord rec;
        try {
            rec.time = parse_timestamp(cells[ts_col]);
        } catch (const std::invalid_argument& e) {
            throw DataError(line_no, e.what());
        }
        if (!on_hour(rec.time)) {
            throw DataError(line_no, "timestamp " + format_timestamp(rec.time) +
                                         " is not on an hour boundary (hourly cadence required)");
        }
        if (!records.empty() && rec.time <= records.back().time) {
            throw DataError(line_no, "timestamps must be strictly increasing");
        }
        for (std::size_t f = 0; f < kRawFieldCount; ++f) {
            double v = kNaN;
            try {
                v = csv::parse_number(cells[cols[f]]);
            } catch (const std::invalid_argument&) {
                throw DataError(line_no, "malformed value '" + cells[cols[f]] + "' in column " +
                                             schema.columns[f]);
            }
            const auto& sentinels = schema.sentinels[f];
            if (std::find(sentinels.begin(), sentinels.end(), v) != sentinels.end()) {
                v = kNaN;
            }
            field(rec, kRawFields[f]) = v;
        }
        records.push_back(rec);
    }
    return records;
}

std::vector<RawRecord> load_csv(const std::filesystem::path& path, const CsvSchema& schema)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError(0, "cannot open " + path.string());
    }
    return read_csv(in, schema);
}

std::vector<RawRecord> repair_gaps(std::span<const RawRecord> records, RepairStats* stats)
{
    RepairStats local;
    std::vector<RawRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        if (!out.empty()) {
            if (r.time <= out.back().time) {
                throw DataError(0, "timestamps must be strictly increasing");
            }
            for (auto t = out.back().time + Hours{1}; t < r.time; t += Hours{1}) {
                RawRecord gap{t, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
                out.push_back(gap);
                ++local.inserted_rows;
            }
        }
        out.push_back(r);
    }

    for (std::size_t f = 0; f < kRawFieldCount; ++f) {
        const auto fid = kRawFields[f];
        std::vector<std::size_t> known;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (!std::isnan(field(out[i], fid))) {
                known.push_back(i);
            }
        }
        if (out.empty()) {
            break;
        }
        if (known.empty()) {
            throw DataError(0, "column " + CsvSchema{}.columns[f] + " has no valid values");
        }
        local.filled[f] = out.size() - known.size();
        for (std::size_t i = 0; i < known.front(); ++i) {
            field(out[i], fid) = field(out[known.front()], fid);
        }
        for (std::size_t i = known.back() + 1; i < out.size(); ++i) {
            field(out[i], fid) = field(out[known.back()], fid);
        }
        for (std::size_t k = 0; k + 1 < known.size(); ++k) {
            const std::size_t a = known[k];
            const std::size_t b = known[k + 1];
            const double va = field(out[a], fid);
            const double vb = field(out[b], fid);
            for (std::size_t i = a + 1; i < b; ++i) {
                const double w = static_cast<double>(i - a) / static_cast<double>(b - a);
                field(out[i], fid) = va + w * (vb - va);
            }
        }
    }
    if (stats) {
        *stats = local;
    }
    return out;
}

double convective_electric_field(double vsw_km_s, double bz_nt) { return -vsw_km_s * bz_nt * 1e-3; }

double dynamic_pressure(double n_cm3, double vsw_km_s)
{
    return kProtonPressureFactor * n_cm3 * vsw_km_s * vsw_km_s;
}

double magnetic_pressure(double b_nt)
{
    const double b_tesla = b_nt * 1e-9;
    return b_tesla * b_tesla / (2.0 * kMu0) * 1e9;
}

std::vector<double> central_diff_dst(std::span<const double> dst)
{
    const std::size_t n = dst.size();
    if (n < 2) {
        throw std::invalid_argument("central_diff_dst needs at least 2 rows");
    }
    std::vector<double> out(n);
    out[0] = dst[1] - dst[0];
    out[n - 1] = dst[n - 1] - dst[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        out[i] = (dst[i + 1] - dst[i - 1]) / 2.0;
    }
    return out;
}

void DerivedSeries::append(const DerivedRecord& r)
{
    time_.push_back(r.time);
    ey_.push_back(r.ey);
    pdyn_.push_back(r.pdyn);
    pb_.push_back(r.pb);
    dst_.push_back(r.dst);
    dst_prev_.push_back(r.dst_prev);
    ddst_dt_.push_back(r.ddst_dt);
}

void DerivedSeries::reserve(std::size_t n)
{
    time_.reserve(n);
    ey_.reserve(n);
    pdyn_.reserve(n);
    pb_.reserve(n);
    dst_.reserve(n);
    dst_prev_.reserve(n);
    ddst_dt_.reserve(n);
}

DerivedRecord DerivedSeries::row(std::size_t i) const
{
    return {time_.at(i), ey_[i], pdyn_[i], pb_[i], dst_[i], dst_prev_[i], ddst_dt_[i]};
}

FeatureTable DerivedSeries::features() const
{
    FeatureTable t;
    t.rows = size();
    t.columns[static_cast<std::size_t>(Variable::Dst)] = dst_;
    t.columns[static_cast<std::size_t>(Variable::Ey)] = ey_;
    t.columns[static_cast<std::size_t>(Variable::Pdyn)] = pdyn_;
    t.columns[static_cast<std::size_t>(Variable::PB)] = pb_;
    return t;
}

std::size_t DerivedSeries::find(Timestamp t) const
{
    const auto it = std::lower_bound(time_.begin(), time_.end(), t);
    return it != time_.end() && *it == t ? static_cast<std::size_t>(it - time_.begin()) : size();
}

DerivedSeries derive(std::span<const RawRecord> records)
{
    DerivedSeries out;
    out.reserve(records.size());
    std::vector<double> dst(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        dst[i] = records[i].dst;
    }
    std::vector<double> rate(records.size(), kNaN);
    if (records.size() >= 2) {
        rate = central_diff_dst(dst);
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        DerivedRecord d;
        d.time = r.time;
        d.ey = convective_electric_field(r.vsw, r.bz);
        d.pdyn = dynamic_pressure(std::max(r.n_sw, 0.0), r.vsw);
        d.pb = magnetic_pressure(r.b_mag);
        d.dst = r.dst;
        d.dst_prev = i == 0 ? r.dst : records[i - 1].dst;
        d.ddst_dt = rate[i];
        out.append(d);
    }
    return out;
}

std::vector<RawRecord> slice(std::span<const RawRecord> records, const TimeRange& range)
{
    std::vector<RawRecord> out;
    for (const auto& r : records) {
        if (range.contains(r.time)) {
            out.push_back(r);
        }
    }
    return out;
}

DerivedSeries slice(const DerivedSeries& series, const TimeRange& range)
{
    DerivedSeries out;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (range.contains(series.time()[i])) {
            out.append(series.row(i));
        }
    }
    return out;
}

void write_derived_csv(std::ostream& out, const DerivedSeries& series)
{
    out << "timestamp,Ey,Pdyn,PB,Dst,Dst_prev,dDst_dt\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto r = series.row(i);
        csv::write_row(out, {format_timestamp(r.time), csv::format_number(r.ey),
                             csv::format_number(r.pdyn), csv::format_number(r.pb),
                             csv::format_number(r.dst), csv::format_number(r.dst_prev),
                             csv::format_number(r.ddst_dt)});
    }
}

DerivedSeries read_derived_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(1, "empty input: header row expected");
    }
    const auto header = csv::split_line(line);
    const std::array<std::size_t, 7> cols{
        column_index(header, "timestamp"), column_index(header, "Ey"),
        column_index(header, "Pdyn"),      column_index(header, "PB"),
        column_index(header, "Dst"),       column_index(header, "Dst_prev"),
        column_index(header, "dDst_dt")};

    DerivedSeries series;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) {
            continue;
        }
        const auto cells = csv::split_line(line);
        if (cells.size() != header.size()) {
            throw DataError(line_no, "expected " + std::to_string(header.size()) + " fields");
        }
        DerivedRecord r;
        try {
            r.time = parse_timestamp(cells[cols[0]]);
            r.ey = csv::parse_number(cells[cols[1]]);
            r.pdyn = csv::parse_number(cells[cols[2]]);
            r.pb = csv::parse_number(cells[cols[3]]);
            r.dst = csv::parse_number(cells[cols[4]]);
            r.dst_prev = csv::parse_number(cells[cols[5]]);
            r.ddst_dt = csv::parse_number(cells[cols[6]]);
        } catch (const std::invalid_argument& e) {
            throw DataError(line_no, e.what());
        }
        if (!series.empty() && r.time <= series.time().back()) {
            throw DataError(line_no, "timestamps must be strictly increasing");
        }
        series.append(r);
    }
    return series;
}

DerivedSeries load_derived_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError(0, "cannot open " + path.string());
    }
    return read_derived_csv(in);
}

} // namespace dstsr
