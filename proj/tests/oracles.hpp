#pragma once

// Reference computations used only by the tests. They are deliberately
// brute force and share no code with the library.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct KktPoint {
  Vec x;
  double objective = 0.0;
};

// min 0.5 x'Qx + c'x  s.t.  C x <= d, E x = g by trying every subset of
// inequality rows as the active set and keeping the best KKT point.
inline std::optional<KktPoint> enumerate_qp(const Mat& Q, const Vec& c, const Mat& C, const Vec& d,
                                           const Mat& E, const Vec& g) {
  const int n = static_cast<int>(Q.rows());
  const int q = static_cast<int>(C.rows());
  const int s = static_cast<int>(E.rows());
  std::optional<KktPoint> best;
  for (std::uint32_t mask = 0; mask < (1u << q); ++mask) {
    std::vector<int> act;
    for (int j = 0; j < q; ++j) {
      if (mask & (1u << j)) act.push_back(j);
    }
    const int a = static_cast<int>(act.size()) + s;
    Mat K = Mat::Zero(n + a, n + a);
    Vec rhs(n + a);
    K.topLeftCorner(n, n) = Q;
    rhs.head(n) = -c;
    for (int i = 0; i < static_cast<int>(act.size()); ++i) {
      K.block(n + i, 0, 1, n) = C.row(act[i]);
      K.block(0, n + i, n, 1) = C.row(act[i]).transpose();
      rhs[n + i] = d[act[i]];
    }
    for (int i = 0; i < s; ++i) {
      const int r = n + static_cast<int>(act.size()) + i;
      K.block(r, 0, 1, n) = E.row(i);
      K.block(0, r, n, 1) = E.row(i).transpose();
      rhs[r] = g[i];
    }
    Eigen::FullPivLU<Mat> lu(K);
    const Vec sol = lu.solve(rhs);
    if ((K * sol - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) continue;
    const Vec x = sol.head(n);
    bool ok = true;
    for (int i = 0; i < static_cast<int>(act.size()); ++i) {
      if (sol[n + i] < -1e-10) ok = false;
    }
    for (int j = 0; j < q && ok; ++j) {
      if (C.row(j).dot(x) > d[j] + 1e-10) ok = false;
    }
    for (int i = 0; i < s && ok; ++i) {
      if (std::abs(E.row(i).dot(x) - g[i]) > 1e-10) ok = false;
    }
    if (!ok) continue;
    const double obj = 0.5 * x.dot(Q * x) + c.dot(x);
    if (!best || obj < best->objective - 1e-14) best = KktPoint{x, obj};
  }
  return best;
}

// Closed-form projection onto {x : a'x <= d}.
inline Vec halfspace_projection(const Vec& a, double d, const Vec& z) {
  const double viol = a.dot(z) - d;
  if (viol <= 0.0) return z;
  return z - (viol / a.squaredNorm()) * a;
}

// Weighted average sum_t w_t x_t / sum_t w_t with w_t = (gamma0/sqrt(1+t))^r,
// accumulated in long double.
inline Vec direct_average(const std::vector<Vec>& xs, double gamma0, double r) {
  long double total = 0.0L;
  std::vector<long double> acc(static_cast<std::size_t>(xs.front().size()), 0.0L);
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const long double w = std::pow(static_cast<long double>(gamma0) / std::sqrt(1.0L + t),
                                   static_cast<long double>(r));
    total += w;
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += w * xs[t][static_cast<Eigen::Index>(j)];
  }
  Vec out(xs.front().size());
  for (std::size_t j = 0; j < acc.size(); ++j) out[static_cast<Eigen::Index>(j)] = static_cast<double>(acc[j] / total);
  return out;
}

// sum_{k=0}^{N} (k+1)^(-alpha) in long double.
inline long double harmonic_sum(double alpha, std::int64_t N) {
  long double s = 0.0L;
  for (std::int64_t k = N; k >= 0; --k) s += std::pow(static_cast<long double>(k + 1), -static_cast<long double>(alpha));
  return s;
}

struct Moments {
  Vec mean;
  Vec stddev;
};

inline Moments sample_moments(const std::vector<Vec>& draws) {
  const double n = static_cast<double>(draws.size());
  Vec mean = Vec::Zero(draws.front().size());
  for (const auto& d : draws) mean += d;
  mean /= n;
  Vec var = Vec::Zero(mean.size());
  for (const auto& d : draws) var += (d - mean).cwiseAbs2();
  var /= (n - 1.0);
  return {mean, var.cwiseSqrt()};
}

}  // namespace oracle
