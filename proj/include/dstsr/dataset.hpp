#pragma once

#include "dstsr/expr.hpp"
#include "dstsr/time.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dstsr {

/// One hourly solar-wind record. Missing values are NaN until repair_gaps.
/// Units: vsw km/s, bz nT (GSM), n_sw cm^-3, b_mag nT, t_sw K, dst nT.
struct RawRecord {
    Timestamp time{};
    double vsw = 0.0;
    double bz = 0.0;
    double n_sw = 0.0;
    double b_mag = 0.0;
    double t_sw = 0.0;
    double dst = 0.0;

    friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

enum class RawField : std::size_t { Vsw, Bz, Nsw, Bmag, Tsw, Dst };
inline constexpr std::size_t kRawFieldCount = 6;

double& field(RawRecord& r, RawField f);
double field(const RawRecord& r, RawField f);

/// Column binding and sentinel values for the raw CSV. Columns bind by header
/// name, so order in the file is free.
struct CsvSchema {
    std::string timestamp_column = "timestamp";
    std::array<std::string, kRawFieldCount> columns{"Vsw", "Bz_gsm", "n_sw", "B_mag", "T_sw", "Dst"};
    std::array<std::vector<double>, kRawFieldCount> sentinels;

    CsvSchema();
};

inline const std::vector<double> kDefaultSentinels{9999.9, 999.9, 99999.0, 9999999.0};

/// Ingestion / schema failures. `line` is 1-based, 0 when not line-specific.
class DataError : public std::runtime_error {
public:
    DataError(std::size_t line, const std::string& message);
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

std::vector<RawRecord> read_csv(std::istream& in, const CsvSchema& schema = {});
std::vector<RawRecord> load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

struct RepairStats {
    std::size_t inserted_rows = 0;
    std::array<std::size_t, kRawFieldCount> filled{};
};

/// Inserts rows for missing hours, then fills every column: interior runs by
/// linear interpolation, leading runs backward, trailing runs forward. Throws
/// DataError when a column has no value at all.
std::vector<RawRecord> repair_gaps(std::span<const RawRecord> records, RepairStats* stats = nullptr);

/// Ey = -Vsw Bz 1e-3  [mV/m]
double convective_electric_field(double vsw_km_s, double bz_nt);
/// Pdyn = 1.6726e-6 n V^2  [nPa]
double dynamic_pressure(double n_cm3, double vsw_km_s);
/// PB = B^2 / (2 mu0), B converted from nT to T, result in nPa.
double magnetic_pressure(double b_nt);

/// dDst/dt in nT/h at hourly cadence: central differences inside, one-sided at
/// both ends. Throws std::invalid_argument for fewer than 2 values.
std::vector<double> central_diff_dst(std::span<const double> dst);

struct DerivedRecord {
    Timestamp time{};
    double ey = 0.0;
    double pdyn = 0.0;
    double pb = 0.0;
    double dst = 0.0;
    double dst_prev = 0.0;
    double ddst_dt = 0.0;
};

/// Column store of derived drivers and the dDst/dt target.
class DerivedSeries {
public:
    void append(const DerivedRecord& r);
    void reserve(std::size_t n);

    [[nodiscard]] std::size_t size() const noexcept { return time_.size(); }
    [[nodiscard]] bool empty() const noexcept { return time_.empty(); }
    [[nodiscard]] DerivedRecord row(std::size_t i) const;

    [[nodiscard]] std::span<const Timestamp> time() const noexcept { return time_; }
    [[nodiscard]] std::span<const double> ey() const noexcept { return ey_; }
    [[nodiscard]] std::span<const double> pdyn() const noexcept { return pdyn_; }
    [[nodiscard]] std::span<const double> pb() const noexcept { return pb_; }
    [[nodiscard]] std::span<const double> dst() const noexcept { return dst_; }
    [[nodiscard]] std::span<const double> dst_prev() const noexcept { return dst_prev_; }
    [[nodiscard]] std::span<const double> ddst_dt() const noexcept { return ddst_dt_; }

    /// Model inputs; the Dst variable binds to the current-hour Dst column.
    [[nodiscard]] FeatureTable features() const;

    /// Index of the row stamped exactly `t`, or size() if absent.
    [[nodiscard]] std::size_t find(Timestamp t) const;

private:
    std::vector<Timestamp> time_;
    std::vector<double> ey_, pdyn_, pb_, dst_, dst_prev_, ddst_dt_;
};

/// Derived drivers plus Dst_prev and central-difference dDst/dt. Row count and
/// timestamps are preserved. Density below zero is treated as zero.
DerivedSeries derive(std::span<const RawRecord> records);

std::vector<RawRecord> slice(std::span<const RawRecord> records, const TimeRange& range);
DerivedSeries slice(const DerivedSeries& series, const TimeRange& range);

/// Columns: timestamp, Ey, Pdyn, PB, Dst, Dst_prev, dDst_dt.
void write_derived_csv(std::ostream& out, const DerivedSeries& series);
DerivedSeries read_derived_csv(std::istream& in);
DerivedSeries load_derived_csv(const std::filesystem::path& path);

} // namespace dstsr
