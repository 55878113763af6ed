#include "langdist/distance_matrix.hpp"

#include <cmath>
#include <limits>

#include "langdist/csv.hpp"
#include "langdist/error.hpp"
#include "langdist/io.hpp"

namespace langdist {

std::optional<std::size_t> DistanceMatrix::index_of(const std::string& code) const {
  for (std::size_t i = 0; i < languages.size(); ++i) {
    if (languages[i] == code) return i;
  }
  return std::nullopt;
}

double DistanceMatrix::at(const std::string& a, const std::string& b) const {
  const auto i = index_of(a);
  const auto j = index_of(b);
  if (!i || !j) throw DataError("no distance entry for (" + a + ", " + b + ")");
  return values(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(*j));
}

double DistanceMatrix::asymmetry() const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < values.cols(); ++j) {
      const double a = values(i, j), b = values(j, i);
      if (std::isnan(a) != std::isnan(b)) return std::numeric_limits<double>::infinity();
      if (!std::isnan(a)) worst = std::max(worst, std::abs(a - b));
    }
  }
  return worst;
}

std::string to_csv(const DistanceMatrix& m) {
  std::vector<std::string> header{"language"};
  header.insert(header.end(), m.languages.begin(), m.languages.end());
  std::string out = csv_row(header);
  for (std::size_t i = 0; i < m.languages.size(); ++i) {
    std::vector<std::string> row{m.languages[i]};
    for (std::size_t j = 0; j < m.languages.size(); ++j) {
      const double v = m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      row.push_back(std::isnan(v) ? "" : format_double(v));
    }
    out += csv_row(row);
  }
  return out;
}

DistanceMatrix distance_matrix_from_csv(const std::string& text) {
  const CsvTable t = parse_csv(text);
  if (t.header.size() < 2) throw FormatError("distance matrix CSV needs a header row");
  DistanceMatrix m;
  m.languages.assign(t.header.begin() + 1, t.header.end());
  const auto n = static_cast<Eigen::Index>(m.languages.size());
  if (t.rows.size() != m.languages.size()) {
    throw FormatError("distance matrix has " + std::to_string(t.rows.size()) +
                      " rows for " + std::to_string(n) + " columns");
  }
  m.values = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> seen(m.languages.size(), false);
  for (const auto& row : t.rows) {
    const auto i = m.index_of(row[0]);
    if (!i) throw FormatError("row language '" + row[0] + "' not in header");
    if (seen[*i]) throw FormatError("duplicate row for '" + row[0] + "'");
    seen[*i] = true;
    for (std::size_t j = 1; j < row.size(); ++j) {
      if (row[j].empty()) continue;
      m.values(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(j - 1)) =
          parse_double(row[j], "distance (" + row[0] + ", " + t.header[j] + ")");
    }
  }
  return m;
}

DistanceMatrix read_distance_matrix(const std::string& path) {
  try {
    return distance_matrix_from_csv(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace langdist
