#include "hmcf/symmetric_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hmcf/errors.hpp"

namespace hmcf {

namespace {

double offdiag_norm(const Eigen::MatrixXd& a) {
  double s = 0.0;
  for (int p = 0; p < a.rows(); ++p)
    for (int q = p + 1; q < a.cols(); ++q) s += a(p, q) * a(p, q);
  return std::sqrt(2.0 * s);
}

}  // namespace

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& s, double tol, int max_sweeps) {
  const int n = static_cast<int>(s.rows());
  if (s.cols() != n) throw dimension_error("matrix must be square");
  if (((s - s.transpose()).cwiseAbs().maxCoeff() >
       1e-12 * (1.0 + s.cwiseAbs().maxCoeff())) &&
      n > 1)
    throw dimension_error("matrix must be symmetric");

  Eigen::MatrixXd a = 0.5 * (s + s.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double stop = tol * (1.0 + a.norm());

  for (int sweep = 0; sweep < max_sweeps && offdiag_norm(a) > stop; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&a](int i, int j) { return a(i, i) < a(j, j); });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

double lambda_max(const Eigen::MatrixXd& s) {
  const SymmetricEigen e = symmetric_eigen(s);
  return e.values[e.values.size() - 1];
}

double lambda_min(const Eigen::MatrixXd& s) { return symmetric_eigen(s).values[0]; }

double spectral_norm_sq(const Eigen::MatrixXd& sigma) {
  return lambda_max(sigma * sigma.transpose());
}

}  // namespace hmcf
