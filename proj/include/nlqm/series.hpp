#pragma once

// CSV series files: header row, "t" first, one column per series, values
// printed with %.17g, LF line endings.

#include <filesystem>
#include <string>
#include <vector>

namespace nlqm {

struct SeriesTable {
  std::vector<std::string> columns;        ///< columns[0] == "t"
  std::vector<std::vector<double>> data;   ///< data[c][row]

  std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
  /// Appends a column; all columns must have equal length.
  void add(const std::string& name, std::vector<double> values);
};

SeriesTable make_table(const std::vector<double>& t);

std::string format_value(double v);
std::string to_csv(const SeriesTable& table);
void write_csv(const std::filesystem::path& path, const SeriesTable& table);
SeriesTable read_csv(const std::filesystem::path& path);

enum class SeriesNorm { linf, l2 };

/// Norm of the cellwise difference of all data columns. Columns are matched by
/// name when the two files have the same column set, by position when both have
/// the same number of data columns otherwise. Time grids must agree to 1e-12.
/// l2 is the square root of the sum of squared differences.
double compare_series(const SeriesTable& a, const SeriesTable& b, SeriesNorm norm);
double compare_series(const std::filesystem::path& a, const std::filesystem::path& b, SeriesNorm norm);

}  // namespace nlqm
