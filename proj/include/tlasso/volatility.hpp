#pragma once

#include <compare>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tlasso {

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;
  auto operator<=>(const Date&) const = default;
  std::string iso() const;  // YYYY-MM-DD
};

// Strict YYYY-MM-DD, calendar-checked. Throws DataError.
Date parse_date(const std::string& text);

struct OhlcRecord {
  Date date;
  std::string series;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
};

struct VolatilityPanel {
  std::vector<std::string> labels;
  std::vector<Date> dates;   // strictly increasing
  Eigen::MatrixXd log_vol;   // T x J, log of the floored range variance
  Eigen::VectorXd means;     // column means, kept for centering bookkeeping
};

// Daily range variance log(H/L)^2 / (4 log 2). Requires 0 < L <= O <= H.
double parkinson_variance(const OhlcRecord& record);

enum class Alignment {
  strict,   // every series present on every date, or error
  lenient,  // drop dates where any series is missing
};

// Range variances per (date, series), floored at `floor` before the log so
// zero-range days stay finite. Series order follows first appearance.
VolatilityPanel build_volatility_panel(const std::vector<OhlcRecord>& records,
                                       double floor = 1e-12,
                                       Alignment alignment = Alignment::strict);

enum class CsvSchema {
  long_format,  // date,series,open,high,low
  wide_format,  // date,<name>_open,<name>_high,<name>_low,...
};

// Parses and validates OHLC rows, rejects duplicate (date, series) pairs,
// and returns records sorted by date. Errors carry 1-based line numbers.
std::vector<OhlcRecord> ingest_csv(std::istream& in, CsvSchema schema);
std::vector<OhlcRecord> ingest_csv(const std::string& path, CsvSchema schema);

// Long-format serialization with full double precision.
void write_ohlc_csv(const std::vector<OhlcRecord>& records, std::ostream& out);
void write_ohlc_csv(const std::vector<OhlcRecord>& records, const std::string& path);

// date column plus one log-vol column per label, full double precision.
void write_panel_csv(const VolatilityPanel& panel, std::ostream& out);
void write_panel_csv(const VolatilityPanel& panel, const std::string& path);
VolatilityPanel read_panel_csv(std::istream& in);
VolatilityPanel read_panel_csv(const std::string& path);

}  // namespace tlasso
