#include "nlqm/series.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "nlqm/errors.hpp"

namespace nlqm {

void SeriesTable::add(const std::string& name, std::vector<double> values) {
  if (!data.empty() && values.size() != rows())
    throw Error("series '" + name + "' has " + std::to_string(values.size()) + " rows, expected " +
                std::to_string(rows()));
  columns.push_back(name);
  data.push_back(std::move(values));
}

SeriesTable make_table(const std::vector<double>& t) {
  SeriesTable table;
  table.add("t", t);
  return table;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const SeriesTable& table) {
  if (table.columns.empty() || table.columns.front() != "t") throw Error("CSV tables must start with a 't' column");
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) out += (c ? "," : "") + table.columns[c];
  out += '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out += ',';
      out += format_value(table.data[c][r]);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const SeriesTable& table) {
  const std::string text = to_csv(table);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw Error("write failed for " + path.string());
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

SeriesTable read_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read " + path.string());
  std::string line;
  if (!std::getline(f, line)) throw Error(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  SeriesTable table;
  table.columns = split(line);
  if (table.columns.empty() || table.columns.front() != "t")
    throw Error(path.string() + ": first column must be 't'");
  table.data.assign(table.columns.size(), {});
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != table.columns.size())
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                  std::to_string(table.columns.size()) + " fields, found " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(cells[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cells[c].size())
        throw Error(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + cells[c] + "'");
      table.data[c].push_back(v);
    }
  }
  return table;
}

double compare_series(const SeriesTable& a, const SeriesTable& b, SeriesNorm norm) {
  if (a.rows() != b.rows())
    throw Error("time grids differ: " + std::to_string(a.rows()) + " vs " + std::to_string(b.rows()) + " rows");
  for (std::size_t r = 0; r < a.rows(); ++r)
    if (std::abs(a.data[0][r] - b.data[0][r]) > 1e-12)
      throw Error("time grids differ at row " + std::to_string(r + 1) + ": t = " + format_value(a.data[0][r]) +
                  " vs " + format_value(b.data[0][r]));

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::set<std::string> na(a.columns.begin() + 1, a.columns.end());
  const std::set<std::string> nb(b.columns.begin() + 1, b.columns.end());
  if (na == nb && na.size() == a.columns.size() - 1) {
    for (std::size_t i = 1; i < a.columns.size(); ++i)
      for (std::size_t j = 1; j < b.columns.size(); ++j)
        if (a.columns[i] == b.columns[j]) pairs.emplace_back(i, j);
  } else if (a.columns.size() == b.columns.size()) {
    for (std::size_t i = 1; i < a.columns.size(); ++i) pairs.emplace_back(i, i);
  } else {
    throw Error("column sets differ and cannot be matched by position");
  }
  if (pairs.empty()) throw Error("no data columns to compare");

  double acc = 0;
  for (const auto& [i, j] : pairs)
    for (std::size_t r = 0; r < a.rows(); ++r) {
      const double d = std::abs(a.data[i][r] - b.data[j][r]);
      acc = norm == SeriesNorm::linf ? std::max(acc, d) : acc + d * d;
    }
  return norm == SeriesNorm::linf ? acc : std::sqrt(acc);
}

double compare_series(const std::filesystem::path& a, const std::filesystem::path& b, SeriesNorm norm) {
  return compare_series(read_csv(a), read_csv(b), norm);
}

}  // namespace nlqm
