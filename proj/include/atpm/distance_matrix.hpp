#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace atpm {

/// Symmetric pairwise dissimilarities with a zero diagonal, keyed by pid order.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n, std::vector<std::string> ids = {});

  std::size_t size() const { return n_; }
  const std::vector<std::string>& ids() const { return ids_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  /// Sets both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double value);

  double max() const;
  const std::vector<double>& data() const { return data_; }

  /// Throws InvalidArgument unless symmetric within `tol`, zero diagonal and
  /// non-negative.
  void validate(double tol = 1e-12) const;

  static DistanceMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                  std::vector<std::string> ids = {});

  /// N x N CSV with a pid header row and a pid first column.
  std::string to_csv() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::string> ids_;
  std::vector<double> data_;
};

}  // namespace atpm
