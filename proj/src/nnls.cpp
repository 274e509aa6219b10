#include "bottleneck/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace bottleneck {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Unconstrained least squares restricted to the columns in `passive`.
Eigen::VectorXd solve_passive(const Matrix& a, const Eigen::VectorXd& b,
                              const std::vector<char>& passive)
{
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    if (passive[static_cast<std::size_t>(j)])
      cols.push_back(j);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(a.cols());
  if (cols.empty())
    return z;
  Matrix sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    sub.col(static_cast<Eigen::Index>(c)) = a.col(cols[c]);
  const Eigen::VectorXd s = sub.colPivHouseholderQr().solve(b);
  for (std::size_t c = 0; c < cols.size(); ++c)
    z[cols[c]] = s[static_cast<Eigen::Index>(c)];
  return z;
}

}  // namespace

NnlsResult nnls(std::span<const double> a_data, std::size_t rows, std::size_t cols,
                std::span<const double> b_data)
{
  if (a_data.size() != rows * cols || b_data.size() != rows)
    throw std::invalid_argument("nnls: dimension mismatch");
  const Eigen::Map<const Matrix> a(a_data.data(), static_cast<Eigen::Index>(rows),
                                   static_cast<Eigen::Index>(cols));
  const Eigen::Map<const Eigen::VectorXd> b(b_data.data(), static_cast<Eigen::Index>(rows));
  const Matrix am = a;
  const Eigen::VectorXd bm = b;

  const double scale = std::max(1.0, am.cwiseAbs().maxCoeff()) * std::max(1.0, bm.norm());
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * scale
                     * static_cast<double>(std::max(rows, cols));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols));
  std::vector<char> passive(cols, 0);
  NnlsResult out;
  const std::size_t max_outer = 3 * cols + 10;

  for (std::size_t outer = 0; outer < max_outer; ++outer) {
    const Eigen::VectorXd grad = am.transpose() * (bm - am * x);
    Eigen::Index best = -1;
    double best_val = tol;
    for (Eigen::Index j = 0; j < grad.size(); ++j)
      if (!passive[static_cast<std::size_t>(j)] && grad[j] > best_val) {
        best_val = grad[j];
        best = j;
      }
    if (best < 0)
      break;
    passive[static_cast<std::size_t>(best)] = 1;

    for (std::size_t inner = 0; inner < 3 * cols + 10; ++inner) {
      Eigen::VectorXd z = solve_passive(am, bm, passive);
      bool feasible = true;
      for (std::size_t j = 0; j < cols; ++j)
        if (passive[j] && z[static_cast<Eigen::Index>(j)] <= 0.0)
          feasible = false;
      if (feasible) {
        x = z;
        break;
      }
      // Step toward z until the first passive variable hits zero.
      double alpha = 1.0;
      for (std::size_t j = 0; j < cols; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (passive[j] && z[jj] <= 0.0) {
          const double denom = x[jj] - z[jj];
          if (denom > 0.0)
            alpha = std::min(alpha, x[jj] / denom);
        }
      }
      x += alpha * (z - x);
      for (std::size_t j = 0; j < cols; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (passive[j] && x[jj] <= tol) {
          passive[j] = 0;
          x[jj] = 0.0;
        }
      }
      if (inner + 1 == 3 * cols + 10)
        out.converged = false;
    }
  }
  for (Eigen::Index j = 0; j < x.size(); ++j)
    x[j] = std::max(0.0, x[j]);
  out.x.assign(x.data(), x.data() + x.size());
  out.residual = (am * x - bm).norm();
  return out;
}

std::optional<std::vector<double>> barycentric_weights(std::span<const Distribution> atoms,
                                                       const Distribution& target,
                                                       double max_residual)
{
  if (atoms.empty())
    return std::nullopt;
  const std::size_t m = target.size();
  const std::size_t k = atoms.size();
  std::vector<double> a((m + 1) * k);
  std::vector<double> b(m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (atoms[j].size() != m)
        throw std::invalid_argument("barycentric_weights: alphabet mismatch");
      a[i * k + j] = atoms[j][i];
    }
    b[i] = target[i];
  }
  for (std::size_t j = 0; j < k; ++j)
    a[m * k + j] = 1.0;
  b[m] = 1.0;
  const NnlsResult r = nnls(a, m + 1, k, b);
  if (!r.converged || r.residual > max_residual)
    return std::nullopt;
  double total = 0.0;
  for (double w : r.x)
    total += w;
  std::vector<double> w = r.x;
  for (double& v : w)
    v /= total;
  return w;
}

}  // namespace bottleneck
