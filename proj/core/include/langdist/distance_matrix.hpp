#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace langdist {

// Symmetric language x language table of one distance measure.
struct DistanceMatrix {
  std::vector<std::string> languages;
  Eigen::MatrixXd values;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  std::optional<std::size_t> index_of(const std::string& code) const;
  double at(const std::string& a, const std::string& b) const;
  // Max |d(i,j) - d(j,i)|.
  double asymmetry() const;
};

// CSV with a header row and a first column of language codes; the corner
// cell is "language". Empty cells read as NaN.
std::string to_csv(const DistanceMatrix& m);
DistanceMatrix distance_matrix_from_csv(const std::string& text);
DistanceMatrix read_distance_matrix(const std::string& path);

}  // namespace langdist
