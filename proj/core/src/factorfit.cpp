#include "fdpburst/factorfit.hpp"

#include <Eigen/Core>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "fdpburst/error.hpp"

namespace fdpburst {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

FittedFactorModel fit(const DenseMatrix& y, std::size_t k) {
  const std::size_t n = y.rows;
  const std::size_t m = y.cols;
  if (y.data.size() != n * m) throw ConfigError("fit: matrix data does not match its shape");
  if (n < 2) throw ConfigError("fit: need at least two rows");
  if (k == 0 || k > std::min(n, m)) {
    std::ostringstream msg;
    msg << "fit: rank k=" << k << " must satisfy 1 <= k <= min(n, m) = " << std::min(n, m);
    throw ConfigError(msg.str());
  }

  RowMatrix yc = Eigen::Map<const RowMatrix>(y.data.data(), static_cast<Eigen::Index>(n),
                                             static_cast<Eigen::Index>(m));
  yc.rowwise() -= yc.colwise().mean();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(yc, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const auto K = static_cast<Eigen::Index>(k);
  if (!(s(0) > 0.0) || s(K - 1) < 1e-12 * s(0)) {
    std::ostringstream msg;
    msg << "fit: data matrix is rank deficient (singular value " << k << " is "
        << (s.size() >= K ? s(K - 1) : 0.0) << ", largest " << s(0) << ")";
    throw FitError(msg.str());
  }

  Eigen::MatrixXd U = svd.matrixU().leftCols(K);
  Eigen::MatrixXd V = svd.matrixV().leftCols(K);
  for (Eigen::Index c = 0; c < K; ++c) {
    Eigen::Index arg = 0;
    V.col(c).cwiseAbs().maxCoeff(&arg);
    if (V(arg, c) < 0.0) {
      V.col(c) = -V.col(c);
      U.col(c) = -U.col(c);
    }
  }
  const Eigen::MatrixXd L = V * s.head(K).asDiagonal();

  const Eigen::MatrixXd resid = yc - U * L.transpose();
  const double count = static_cast<double>(n * m);
  const double mean = resid.sum() / count;
  const double sigma_e = std::sqrt((resid.array() - mean).square().sum() / count);

  FittedFactorModel out;
  out.sigma_e = sigma_e;
  out.l_tilde = DenseMatrix(m, k);
  out.loadings_std = DenseMatrix(m, k);
  out.singular_values.assign(s.data(), s.data() + s.size());
  const double se2 = sigma_e * sigma_e;
  for (std::size_t i = 0; i < m; ++i) {
    double norm2 = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double v = L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      out.l_tilde(i, c) = v;
      norm2 += v * v;
    }
    const double denom = std::sqrt(se2 + norm2);
    double row_sq = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double v = denom > 0.0 ? out.l_tilde(i, c) / denom : 0.0;
      out.loadings_std(i, c) = v;
      row_sq += v * v;
    }
    out.implied_s_l = std::max(out.implied_s_l, row_sq);
  }
  return out;
}

ReplicatedLoadings to_loading_groups(const FittedFactorModel& model, std::size_t replication) {
  if (replication == 0) throw ConfigError("to_loading_groups: replication must be positive");
  const DenseMatrix& ls = model.loadings_std;
  const std::size_t rows = ls.rows;
  const std::size_t k = ls.cols;

  ReplicatedLoadings out;
  out.m = rows * replication;
  out.loadings.k = k;
  out.loadings.finite_m = true;
  std::map<std::vector<double>, std::size_t> index;
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> row(ls.data.begin() + static_cast<std::ptrdiff_t>(i * k),
                            ls.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * k));
    const auto [it, inserted] = index.emplace(row, out.loadings.groups.size());
    if (inserted) {
      out.loadings.groups.push_back({0.0, std::move(row)});
      counts.push_back(0);
    }
    ++counts[it->second];
  }
  for (std::size_t j = 0; j < counts.size(); ++j) {
    out.loadings.groups[j].weight = static_cast<double>(counts[j]) / static_cast<double>(rows);
  }
  return out;
}

}  // namespace fdpburst
