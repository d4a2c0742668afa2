#include "tlasso/volatility.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "tlasso/errors.hpp"

namespace tlasso {

namespace {

constexpr double kFourLogTwo = 2.772588722239781;  // 4 log 2

int days_in_month(int year, int month) {
  static constexpr int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2) {
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return lengths[month - 1];
}

[[noreturn]] void fail_line(long line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

std::string lower(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return text;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

double parse_number(const std::string& cell, long line) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || cell.empty()) {
    fail_line(line, "cannot parse number '" + cell + "'");
  }
  return value;
}

Date parse_date_at(const std::string& cell, long line) {
  try {
    return parse_date(cell);
  } catch (const DataError& err) {
    fail_line(line, err.what());
  }
}

void check_prices(const OhlcRecord& record, long line) {
  if (!(record.open > 0.0) || !(record.high > 0.0) || !(record.low > 0.0)) {
    fail_line(line, "prices must be positive");
  }
  if (record.high < record.low) {
    fail_line(line, "high is below low");
  }
  if (record.open < record.low || record.open > record.high) {
    fail_line(line, "open lies outside the [low, high] range");
  }
}

struct DuplicateGuard {
  std::map<std::pair<std::string, Date>, long> seen;

  void insert(const OhlcRecord& record, long line) {
    const auto [it, fresh] = seen.try_emplace({record.series, record.date}, line);
    if (!fresh) {
      fail_line(line, "duplicate record for " + record.series + " on " +
                          record.date.iso() + " (first seen at line " +
                          std::to_string(it->second) + ")");
    }
  }
};

std::vector<OhlcRecord> ingest_long(std::istream& in, const std::string& header) {
  const std::vector<std::string> names = split_line(lower(header));
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < names.size(); ++i) {
    position.emplace(names[i], i);
  }
  std::size_t column[5];
  const char* required[5] = {"date", "series", "open", "high", "low"};
  for (int i = 0; i < 5; ++i) {
    const auto it = position.find(required[i]);
    if (it == position.end()) {
      fail_line(1, std::string("header is missing column '") + required[i] + "'");
    }
    column[i] = it->second;
  }

  std::vector<OhlcRecord> records;
  DuplicateGuard guard;
  std::string line;
  for (long number = 2; std::getline(in, line); ++number) {
    if (trim(line).empty()) {
      continue;
    }
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != names.size()) {
      fail_line(number, "expected " + std::to_string(names.size()) +
                            " fields, found " + std::to_string(cells.size()));
    }
    OhlcRecord record;
    record.date = parse_date_at(cells[column[0]], number);
    record.series = cells[column[1]];
    if (record.series.empty()) {
      fail_line(number, "series name is empty");
    }
    record.open = parse_number(cells[column[2]], number);
    record.high = parse_number(cells[column[3]], number);
    record.low = parse_number(cells[column[4]], number);
    check_prices(record, number);
    guard.insert(record, number);
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<OhlcRecord> ingest_wide(std::istream& in, const std::string& header) {
  const std::vector<std::string> names = split_line(header);
  if (names.empty() || lower(names[0]) != "date") {
    fail_line(1, "wide header must start with a 'date' column");
  }
  if (names.size() < 4 || (names.size() - 1) % 3 != 0) {
    fail_line(1, "wide header needs open/high/low triplets after the date");
  }
  const char* suffixes[3] = {"_open", "_high", "_low"};
  std::vector<std::string> series;
  for (std::size_t group = 1; group < names.size(); group += 3) {
    std::string prefix;
    for (int s = 0; s < 3; ++s) {
      const std::string name = names[group + s];
      const std::string suffix = suffixes[s];
      if (name.size() <= suffix.size() ||
          lower(name.substr(name.size() - suffix.size())) != suffix) {
        fail_line(1, "column '" + name + "' should end with '" + suffix + "'");
      }
      const std::string stem = name.substr(0, name.size() - suffix.size());
      if (s == 0) {
        prefix = stem;
      } else if (stem != prefix) {
        fail_line(1, "column '" + name + "' does not match series '" + prefix + "'");
      }
    }
    series.push_back(prefix);
  }

  std::vector<OhlcRecord> records;
  DuplicateGuard guard;
  std::string line;
  for (long number = 2; std::getline(in, line); ++number) {
    if (trim(line).empty()) {
      continue;
    }
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != names.size()) {
      fail_line(number, "expected " + std::to_string(names.size()) +
                            " fields, found " + std::to_string(cells.size()));
    }
    const Date date = parse_date_at(cells[0], number);
    for (std::size_t group = 0; group < series.size(); ++group) {
      OhlcRecord record;
      record.date = date;
      record.series = series[group];
      record.open = parse_number(cells[1 + 3 * group], number);
      record.high = parse_number(cells[2 + 3 * group], number);
      record.low = parse_number(cells[3 + 3 * group], number);
      check_prices(record, number);
      guard.insert(record, number);
      records.push_back(std::move(record));
    }
  }
  return records;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open '" + path + "' for reading");
  }
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot open '" + path + "' for writing");
  }
  return out;
}

std::string full_precision(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

}  // namespace

std::string Date::iso() const {
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "%04d-%02d-%02d", year, month, day);
  return buffer;
}

Date parse_date(const std::string& text) {
  const auto digits = [](const std::string& s, std::size_t from, std::size_t count) {
    int value = 0;
    const char* begin = s.data() + from;
    const auto [ptr, ec] = std::from_chars(begin, begin + count, value);
    if (ec != std::errc() || ptr != begin + count) {
      throw DataError("cannot parse date '" + s + "', expected YYYY-MM-DD");
    }
    return value;
  };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw DataError("cannot parse date '" + text + "', expected YYYY-MM-DD");
  }
  Date date;
  date.year = digits(text, 0, 4);
  date.month = digits(text, 5, 2);
  date.day = digits(text, 8, 2);
  if (date.month < 1 || date.month > 12 || date.day < 1 ||
      date.day > days_in_month(date.year, date.month)) {
    throw DataError("'" + text + "' is not a calendar date");
  }
  return date;
}

double parkinson_variance(const OhlcRecord& record) {
  if (!(record.open > 0.0) || !(record.high > 0.0) || !(record.low > 0.0)) {
    throw DataError("prices must be positive");
  }
  if (record.high < record.low || record.open < record.low ||
      record.open > record.high) {
    throw DataError("prices must satisfy low <= open <= high");
  }
  const double range = std::log(record.high) - std::log(record.low);
  return range * range / kFourLogTwo;
}

VolatilityPanel build_volatility_panel(const std::vector<OhlcRecord>& records,
                                       double floor, Alignment alignment) {
  if (!(floor > 0.0)) {
    throw ParameterError("variance floor must be positive");
  }
  if (records.empty()) {
    throw DataError("no records to build a panel from");
  }

  std::vector<std::string> labels;
  std::unordered_map<std::string, Eigen::Index> column_of;
  for (const OhlcRecord& record : records) {
    if (column_of.try_emplace(record.series, labels.size()).second) {
      labels.push_back(record.series);
    }
  }
  const auto j_dim = static_cast<Eigen::Index>(labels.size());

  std::map<Date, Eigen::RowVectorXd> rows;
  for (const OhlcRecord& record : records) {
    auto [it, fresh] = rows.try_emplace(
        record.date, Eigen::RowVectorXd::Constant(j_dim, -1.0));
    Eigen::RowVectorXd& row = it->second;
    const Eigen::Index column = column_of.at(record.series);
    if (row(column) >= 0.0) {
      throw DataError("duplicate record for " + record.series + " on " +
                      record.date.iso());
    }
    row(column) = parkinson_variance(record);
  }

  std::vector<std::string> misaligned;
  VolatilityPanel panel;
  panel.labels = std::move(labels);
  panel.log_vol.resize(static_cast<Eigen::Index>(rows.size()), j_dim);
  Eigen::Index t = 0;
  for (const auto& [date, row] : rows) {
    if ((row.array() < 0.0).any()) {
      if (alignment == Alignment::strict) {
        misaligned.push_back(date.iso());
      }
      continue;
    }
    panel.dates.push_back(date);
    panel.log_vol.row(t++) = row.cwiseMax(floor).array().log();
  }
  if (!misaligned.empty()) {
    std::string dates = misaligned.front();
    for (std::size_t i = 1; i < std::min<std::size_t>(misaligned.size(), 5); ++i) {
      dates += ", " + misaligned[i];
    }
    if (misaligned.size() > 5) {
      dates += ", ...";
    }
    throw DataError("missing series on " + std::to_string(misaligned.size()) +
                    " date(s): " + dates);
  }
  if (t == 0) {
    throw DataError("no date has a complete set of series");
  }
  panel.log_vol.conservativeResize(t, j_dim);
  panel.means = panel.log_vol.colwise().mean();
  return panel;
}

std::vector<OhlcRecord> ingest_csv(std::istream& in, CsvSchema schema) {
  std::string header;
  if (!std::getline(in, header) || trim(header).empty()) {
    fail_line(1, "missing header row");
  }
  std::vector<OhlcRecord> records = schema == CsvSchema::long_format
                                        ? ingest_long(in, header)
                                        : ingest_wide(in, header);
  std::stable_sort(records.begin(), records.end(),
                   [](const OhlcRecord& a, const OhlcRecord& b) {
                     return a.date < b.date;
                   });
  return records;
}

std::vector<OhlcRecord> ingest_csv(const std::string& path, CsvSchema schema) {
  std::ifstream in = open_input(path);
  return ingest_csv(in, schema);
}

void write_ohlc_csv(const std::vector<OhlcRecord>& records, std::ostream& out) {
  out << "date,series,open,high,low\n";
  for (const OhlcRecord& record : records) {
    out << record.date.iso() << ',' << record.series << ','
        << full_precision(record.open) << ',' << full_precision(record.high)
        << ',' << full_precision(record.low) << '\n';
  }
}

void write_ohlc_csv(const std::vector<OhlcRecord>& records, const std::string& path) {
  std::ofstream out = open_output(path);
  write_ohlc_csv(records, out);
}

void write_panel_csv(const VolatilityPanel& panel, std::ostream& out) {
  out << "date";
  for (const std::string& label : panel.labels) {
    out << ',' << label;
  }
  out << '\n';
  for (std::size_t t = 0; t < panel.dates.size(); ++t) {
    out << panel.dates[t].iso();
    for (Eigen::Index j = 0; j < panel.log_vol.cols(); ++j) {
      out << ',' << full_precision(panel.log_vol(static_cast<Eigen::Index>(t), j));
    }
    out << '\n';
  }
}

void write_panel_csv(const VolatilityPanel& panel, const std::string& path) {
  std::ofstream out = open_output(path);
  write_panel_csv(panel, out);
}

VolatilityPanel read_panel_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || trim(header).empty()) {
    fail_line(1, "missing header row");
  }
  const std::vector<std::string> names = split_line(header);
  if (names.size() < 2 || lower(names[0]) != "date") {
    fail_line(1, "panel header must be 'date' followed by series labels");
  }

  VolatilityPanel panel;
  panel.labels.assign(names.begin() + 1, names.end());
  const auto j_dim = static_cast<Eigen::Index>(panel.labels.size());
  std::vector<Eigen::RowVectorXd> values;
  std::string line;
  for (long number = 2; std::getline(in, line); ++number) {
    if (trim(line).empty()) {
      continue;
    }
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != names.size()) {
      fail_line(number, "expected " + std::to_string(names.size()) +
                            " fields, found " + std::to_string(cells.size()));
    }
    const Date date = parse_date_at(cells[0], number);
    if (!panel.dates.empty() && !(panel.dates.back() < date)) {
      fail_line(number, "dates must be strictly increasing");
    }
    panel.dates.push_back(date);
    Eigen::RowVectorXd row(j_dim);
    for (Eigen::Index j = 0; j < j_dim; ++j) {
      row(j) = parse_number(cells[static_cast<std::size_t>(j) + 1], number);
      if (!std::isfinite(row(j))) {
        fail_line(number, "log-volatility must be finite");
      }
    }
    values.push_back(std::move(row));
  }
  if (values.empty()) {
    throw DataError("panel has no data rows");
  }
  panel.log_vol.resize(static_cast<Eigen::Index>(values.size()), j_dim);
  for (std::size_t t = 0; t < values.size(); ++t) {
    panel.log_vol.row(static_cast<Eigen::Index>(t)) = values[t];
  }
  panel.means = panel.log_vol.colwise().mean();
  return panel;
}

VolatilityPanel read_panel_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_panel_csv(in);
}

}  // namespace tlasso
