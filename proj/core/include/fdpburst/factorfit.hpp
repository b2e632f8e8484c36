#pragma once

#include <cstddef>
#include <vector>

#include "fdpburst/model.hpp"

namespace fdpburst {

/// Dense row-major matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct FittedFactorModel {
  DenseMatrix l_tilde;        // m x k: right singular vectors times singular values
  double sigma_e = 0.0;       // population sd of the rank-k residual entries
  DenseMatrix loadings_std;   // m x k: rows of l_tilde / sqrt(sigma_e^2 + ||row||^2)
  double implied_s_l = 0.0;   // max squared row norm of loadings_std
  std::vector<double> singular_values;  // all singular values of the centered data
};

/// Rank-k homoskedastic factor fit of an n x m data matrix (rows are
/// subjects, columns are hypotheses). Columns are centered, a thin SVD is
/// taken, and each loading column is signed so that its largest-magnitude
/// entry is positive.
///
/// Throws ConfigError unless n >= 2 and 1 <= k <= min(n, m), and FitError if
/// the k-th singular value is below 1e-12 times the largest.
FittedFactorModel fit(const DenseMatrix& y, std::size_t k);

struct ReplicatedLoadings {
  LoadingGroups loadings;
  std::size_t m = 0;  // rows * replication
};

/// One loading group per distinct standardized row, weighted by its share of
/// rows and marked finite_m. Replicating every row `replication` times only
/// multiplies m. Throws ConfigError if replication == 0.
ReplicatedLoadings to_loading_groups(const FittedFactorModel& model, std::size_t replication);

}  // namespace fdpburst
