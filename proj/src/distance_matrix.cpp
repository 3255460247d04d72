#include "atpm/distance_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "atpm/common.hpp"
#include "atpm/csv.hpp"

namespace atpm {

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<std::string> ids)
    : n_(n), ids_(std::move(ids)), data_(n * n, 0.0) {
  if (ids_.empty()) {
    for (std::size_t i = 0; i < n; ++i) ids_.push_back(std::to_string(i));
  }
  if (ids_.size() != n) throw InvalidArgument("DistanceMatrix: id count does not match size");
}

void DistanceMatrix::set(std::size_t i, std::size_t j, double value) {
  data_[i * n_ + j] = value;
  data_[j * n_ + i] = value;
}

double DistanceMatrix::max() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, v);
  return m;
}

void DistanceMatrix::validate(double tol) const {
  for (std::size_t i = 0; i < n_; ++i) {
    if ((*this)(i, i) != 0.0) throw InvalidArgument("distance matrix diagonal is not zero");
    for (std::size_t j = 0; j < n_; ++j) {
      const double v = (*this)(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw InvalidArgument("distance matrix has a negative or non-finite entry");
      }
      if (std::abs(v - (*this)(j, i)) > tol) {
        throw InvalidArgument("distance matrix is not symmetric");
      }
    }
  }
}

DistanceMatrix DistanceMatrix::from_rows(const std::vector<std::vector<double>>& rows,
                                         std::vector<std::string> ids) {
  DistanceMatrix m(rows.size(), std::move(ids));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw InvalidArgument("distance matrix is not square");
    for (std::size_t j = 0; j < rows.size(); ++j) m.data_[i * m.n_ + j] = rows[i][j];
  }
  return m;
}

std::string DistanceMatrix::to_csv() const {
  std::string out = "pid";
  for (const auto& id : ids_) out += ',' + csv::escape(id);
  out += '\n';
  for (std::size_t i = 0; i < n_; ++i) {
    out += csv::escape(ids_[i]);
    for (std::size_t j = 0; j < n_; ++j) out += ',' + csv::format_number((*this)(i, j));
    out += '\n';
  }
  return out;
}

}  // namespace atpm
