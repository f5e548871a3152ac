// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "lirlab/common.hpp"
#include "lirlab/embedding.hpp"

namespace lirlab {

/// Projects points onto their top-2 principal components. Components come
/// from the eigendecomposition of the centered Gram matrix (n x n, small n);
/// each axis is signed so its largest-magnitude coordinate is positive.
inline std::vector<std::array<double, 2>> pca_2d(const std::vector<Embedding>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  std::vector<std::array<double, 2>> out(points.size(), {0.0, 0.0});
  if (n == 0) return out;
  const auto dim = static_cast<Eigen::Index>(points.front().dim());
  Eigen::MatrixXd x(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(points[i].dim()) != dim) throw Error(ErrorCode::DimMismatch, "pca input dims differ");
    for (Eigen::Index j = 0; j < dim; ++j) x(i, j) = points[i].values[j];
  }
  x.rowwise() -= x.colwise().mean();
  Eigen::MatrixXd gram = x * x.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  // Eigenvalues ascend; scores along component c are u_c * sqrt(lambda_c).
  for (int c = 0; c < 2 && c < n; ++c) {
    Eigen::Index col = n - 1 - c;
    double lambda = std::max(0.0, solver.eigenvalues()(col));
    Eigen::VectorXd u = solver.eigenvectors().col(col);
    Eigen::Index arg = 0;
    u.cwiseAbs().maxCoeff(&arg);
    if (u(arg) < 0) u = -u;
    double s = std::sqrt(lambda);
    for (Eigen::Index i = 0; i < n; ++i) out[i][c] = u(i) * s;
  }
  return out;
}

}  // namespace lirlab
