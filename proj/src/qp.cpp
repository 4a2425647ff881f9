#include "airig/qp.hpp"

#include "airig/json_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <utility>

namespace airig {
namespace {

std::atomic<std::uint64_t> g_qp_calls{0};

// Inequality rows first, equality rows after.
struct Stacked {
  RowMatrix A;
  Vector rhs;
  Index q = 0;
  double feas_scale = 1.0;  // 1 + ||d||_inf

  Index rows() const { return A.rows(); }
  bool is_eq(Index j) const { return j >= q; }
};

Stacked stack(const PolyhedralSet& s) {
  Stacked out;
  out.q = s.inequalities();
  out.A.resize(s.inequalities() + s.equalities(), s.dimension());
  out.A.topRows(s.inequalities()) = s.C;
  out.A.bottomRows(s.equalities()) = s.E;
  out.rhs.resize(out.A.rows());
  out.rhs.head(s.inequalities()) = s.d;
  out.rhs.tail(s.equalities()) = s.g;
  out.feas_scale = 1.0 + (s.d.size() ? s.d.cwiseAbs().maxCoeff() : 0.0);
  return out;
}

// x(y) = x_base - Gt^T y with Gt row j = (H^{-1} a_j)^T.
struct DualMetric {
  RowMatrix Gt;
  Vector W;  // a_j . H^{-1} a_j
};

struct KktParts {
  double primal = 0.0;
  double complementarity = 0.0;
  double dual_sign = 0.0;
  double stationarity = 0.0;
  double max() const { return std::max({primal, complementarity, dual_sign, stationarity}); }
};

KktParts kkt_parts(const Stacked& rows, const Vector& x, const Vector& y) {
  KktParts k;
  const Vector ax = rows.A * x;
  for (Index j = 0; j < rows.rows(); ++j) {
    const double slack = rows.rhs[j] - ax[j];
    if (rows.is_eq(j)) {
      k.primal = std::max(k.primal, std::abs(slack));
    } else {
      k.primal = std::max(k.primal, std::max(-slack, 0.0) / rows.feas_scale);
      k.complementarity = std::max(k.complementarity, std::abs(y[j] * slack));
      k.dual_sign = std::max(k.dual_sign, -y[j]);
    }
  }
  return k;
}

std::vector<char> support(const Stacked& rows, const Vector& y) {
  std::vector<char> s(static_cast<std::size_t>(rows.rows()));
  for (Index j = 0; j < rows.rows(); ++j) s[static_cast<std::size_t>(j)] = rows.is_eq(j) || y[j] > 0.0;
  return s;
}

std::vector<Index> positive_rows(const Stacked& rows, const Vector& y) {
  std::vector<Index> out;
  for (Index j = 0; j < rows.q; ++j) {
    if (y[j] > 0.0) out.push_back(j);
  }
  return out;
}

// Solves a symmetric system that may be singular; returns false when the
// least-squares solution leaves a residual.
bool solve_symmetric(const Matrix& S, const Vector& rhs, Vector& out) {
  if (S.rows() == 0) {
    out.resize(0);
    return true;
  }
  Eigen::LDLT<Matrix> ldlt(S);
  if (ldlt.info() == Eigen::Success) {
    const Vector dvec = ldlt.vectorD().cwiseAbs();
    if (dvec.minCoeff() > 1e-12 * std::max(1.0, dvec.maxCoeff())) {
      out = ldlt.solve(rhs);
      return true;
    }
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(S);
  out = cod.solve(rhs);
  return (S * out - rhs).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + rhs.cwiseAbs().maxCoeff());
}

// Farkas check on the support of a diverging multiplier vector: looks for
// v with A_P^T v = 0, v >= 0 on inequality rows and rhs_P^T v < 0.
bool farkas_certificate(const Stacked& rows, const Vector& y, double& residual) {
  const double scale = y.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return false;
  std::vector<Index> P;
  for (Index j = 0; j < rows.rows(); ++j) {
    if (std::abs(y[j]) > 1e-9 * scale) P.push_back(j);
  }
  const Index p = static_cast<Index>(P.size());
  Matrix AP(p, rows.A.cols());
  Vector rP(p), yP(p);
  for (Index i = 0; i < p; ++i) {
    AP.row(i) = rows.A.row(P[i]);
    rP[i] = rows.rhs[P[i]];
    yP[i] = y[P[i]];
  }
  Eigen::JacobiSVD<Matrix> svd(AP, Eigen::ComputeFullU);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() ? sv.maxCoeff() : 0.0;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > 1e-10 * std::max(1.0, smax)) ++rank;
  }
  if (rank >= p) return false;
  const Matrix N = svd.matrixU().rightCols(p - rank);

  std::vector<Vector> candidates;
  candidates.push_back(N * (N.transpose() * yP));
  for (Index c = 0; c < N.cols(); ++c) candidates.push_back(N.col(c));
  for (Vector v : candidates) {
    const double vn = v.cwiseAbs().maxCoeff();
    if (!(vn > 0.0)) continue;
    v /= vn;
    if (rP.dot(v) > 0.0) v = -v;
    const double gap = rP.dot(v);
    if (!(gap < -1e-9 * (1.0 + rP.cwiseAbs().maxCoeff()))) continue;
    bool signs_ok = true;
    for (Index i = 0; i < p; ++i) {
      if (!rows.is_eq(P[i]) && v[i] < -1e-10) signs_ok = false;
    }
    if (!signs_ok) continue;
    residual = (AP.transpose() * v).cwiseAbs().maxCoeff();
    if (residual <= 1e-8 * std::max(1.0, smax)) return true;
  }
  return false;
}

[[noreturn]] void throw_infeasible(double residual) {
  throw InfeasibleError("polyhedron is empty (Farkas certificate residual " +
                            std::to_string(residual) + ")",
                        residual);
}

void check_zero_rows(const Stacked& rows, const Vector& W) {
  for (Index j = 0; j < rows.rows(); ++j) {
    if (W[j] > 0.0) continue;
    const bool bad = rows.is_eq(j) ? std::abs(rows.rhs[j]) > 0.0 : rows.rhs[j] < 0.0;
    if (bad) throw_infeasible(0.0);
  }
}

// Dual coordinate ascent (one multiplier at a time, exact line search)
// followed by an active-set polish once the multiplier support settles.
class DualCoordinateSolver {
 public:
  DualCoordinateSolver(const Stacked& rows, const DualMetric& metric, double tol, std::int64_t cap)
      : rows_(rows), metric_(metric), tol_(tol), cap_(cap) {}

  /// Minimizes 0.5 ||x - x_base||_H^2 over the rows; `y` is the warm start
  /// on entry and the final multipliers on exit.
  Vector solve(const Vector& x_base, Vector& y, std::int64_t& sweeps) {
    const Index r = rows_.rows();
    if (y.size() != r) y = Vector::Zero(r);
    Vector x = x_base;
    if (r == 0) return x;
    x.noalias() -= metric_.Gt.transpose() * y;

    std::vector<char> previous, polished;
    Vector best_x = x;
    double best_res = std::numeric_limits<double>::infinity();
    double last_check_norm = y.cwiseAbs().maxCoeff();

    for (std::int64_t s = 1; s <= cap_; ++s) {
      ++sweeps;
      for (Index j = 0; j < r; ++j) {
        const double w = metric_.W[j];
        if (!(w > 0.0)) continue;
        const double resid = rows_.A.row(j).dot(x) - rows_.rhs[j];
        double next = y[j] + resid / w;
        if (!rows_.is_eq(j)) next = std::max(next, 0.0);
        const double delta = next - y[j];
        if (delta != 0.0) {
          x.noalias() -= delta * metric_.Gt.row(j).transpose();
          y[j] = next;
        }
      }
      const double res = kkt_parts(rows_, x, y).max();
      if (res < best_res) {
        best_res = res;
        best_x = x;
      }
      auto pattern = support(rows_, y);
      if ((res <= tol_ || pattern == previous) && pattern != polished) {
        polished = pattern;
        Vector xp, yp;
        if (polish(x_base, y, xp, yp)) {
          y = yp;
          return xp;
        }
      }
      if (res <= tol_) {
        x = x_base - metric_.Gt.transpose() * y;
        if (kkt_parts(rows_, x, y).max() <= tol_) return x;
      }
      previous = std::move(pattern);

      if (s % 50 == 0) {
        const double norm = y.cwiseAbs().maxCoeff();
        if (norm > 1e3 && norm > 2.0 * last_check_norm) {
          double cert = 0.0;
          if (farkas_certificate(rows_, y, cert)) throw_infeasible(cert);
        }
        last_check_norm = std::max(last_check_norm, norm);
      }
    }
    double cert = 0.0;
    if (farkas_certificate(rows_, y, cert)) throw_infeasible(cert);
    {
      Vector xa, ya;
      if (dual_active_set(x_base, y, xa, ya)) {
        y = ya;
        return xa;
      }
    }
    throw NonconvergenceError("dual coordinate ascent hit the iteration cap (" +
                                  std::to_string(cap_) + " sweeps), KKT residual " +
                                  std::to_string(best_res),
                              best_x, best_res);
  }

 private:
  // Equality-constrained solves on a guessed active set, dropping rows with
  // negative multipliers and adding violated ones.
  bool polish(const Vector& x_base, const Vector& y_guess, Vector& x_out, Vector& y_out) const {
    const Index r = rows_.rows();
    std::vector<Index> active;
    for (Index j = 0; j < r; ++j) {
      if (rows_.is_eq(j) || y_guess[j] > 0.0) active.push_back(j);
    }
    const Vector base_residual = rows_.A * x_base - rows_.rhs;
    const std::int64_t max_changes = 2 * r + 5;
    for (std::int64_t it = 0; it < max_changes; ++it) {
      const Index a = static_cast<Index>(active.size());
      Matrix S(a, a);
      Vector b(a);
      for (Index i = 0; i < a; ++i) {
        b[i] = base_residual[active[i]];
        for (Index k = i; k < a; ++k) {
          S(i, k) = rows_.A.row(active[i]).dot(metric_.Gt.row(active[k]));
          S(k, i) = S(i, k);
        }
      }
      Vector lambda;
      if (!solve_symmetric(S, b, lambda)) {
        // Dependent active rows: shed the inequality with the smallest
        // multiplier estimate and try again.
        Index weakest = -1;
        for (Index i = 0; i < a; ++i) {
          if (rows_.is_eq(active[i])) continue;
          if (weakest < 0 || y_guess[active[i]] < y_guess[active[weakest]]) weakest = i;
        }
        if (weakest < 0) return false;
        active.erase(active.begin() + weakest);
        continue;
      }
      Vector x = x_base;
      for (Index i = 0; i < a; ++i) x.noalias() -= lambda[i] * metric_.Gt.row(active[i]).transpose();

      const double lscale = 1.0 + (a ? lambda.cwiseAbs().maxCoeff() : 0.0);
      Index drop = -1;
      double most_negative = -1e-12 * lscale;
      for (Index i = 0; i < a; ++i) {
        if (!rows_.is_eq(active[i]) && lambda[i] < most_negative) {
          most_negative = lambda[i];
          drop = i;
        }
      }
      if (drop >= 0) {
        active.erase(active.begin() + drop);
        continue;
      }
      const Vector ax = rows_.A * x;
      Index add = -1;
      double worst = 0.1 * tol_ * rows_.feas_scale;
      for (Index j = 0; j < rows_.q; ++j) {
        const double viol = ax[j] - rows_.rhs[j];
        if (viol > worst && std::find(active.begin(), active.end(), j) == active.end()) {
          worst = viol;
          add = j;
        }
      }
      if (add >= 0) {
        active.insert(std::upper_bound(active.begin(), active.end(), add), add);
        continue;
      }
      Vector y = Vector::Zero(r);
      for (Index i = 0; i < a; ++i) y[active[i]] = rows_.is_eq(active[i]) ? lambda[i] : std::max(lambda[i], 0.0);
      if (kkt_parts(rows_, x, y).max() > tol_) return false;
      x_out = std::move(x);
      y_out = std::move(y);
      return true;
    }
    return false;
  }

  // Primal active-set method on the dual, min 0.5 y'Sy - b'y with y >= 0 on
  // inequality rows, started from y_start. Finite, and unaffected by the
  // degenerate multiplier drift that stalls coordinate ascent.
  bool dual_active_set(const Vector& x_base, const Vector& y_start, Vector& x_out, Vector& y_out) const {
    const Index r = rows_.rows();
    Matrix S(r, r);
    for (Index i = 0; i < r; ++i) {
      for (Index k = i; k < r; ++k) {
        S(i, k) = rows_.A.row(i).dot(metric_.Gt.row(k));
        S(k, i) = S(i, k);
      }
    }
    const Vector b = rows_.A * x_base - rows_.rhs;
    const double bscale = 1.0 + (r ? b.cwiseAbs().maxCoeff() : 0.0);
    Vector y = y_start;
    std::vector<char> fixed(static_cast<std::size_t>(r), 0);
    for (Index j = 0; j < rows_.q; ++j) {
      if (y[j] <= 0.0) {
        y[j] = 0.0;
        fixed[static_cast<std::size_t>(j)] = 1;
      }
    }
    const std::int64_t cap = 20 * (r + rows_.A.cols()) + 100;
    for (std::int64_t it = 0; it < cap; ++it) {
      const Vector grad = S * y - b;
      std::vector<Index> F;
      for (Index j = 0; j < r; ++j) {
        if (!fixed[static_cast<std::size_t>(j)]) F.push_back(j);
      }
      const Index f = static_cast<Index>(F.size());
      Matrix SF(f, f);
      Vector gF(f);
      for (Index i = 0; i < f; ++i) {
        gF[i] = grad[F[i]];
        for (Index k = 0; k < f; ++k) SF(i, k) = S(F[i], F[k]);
      }
      Vector p = Vector::Zero(f);
      bool full_step = true;
      if (f > 0) {
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(SF);
        p = cod.solve(-gF);
        if ((SF * p + gF).cwiseAbs().maxCoeff() > 1e-10 * bscale) {
          // -g has a component in the null space of S_FF: descend along it.
          p = -(gF - SF * cod.solve(gF));
          full_step = false;
        }
      }
      double alpha = full_step ? 1.0 : std::numeric_limits<double>::infinity();
      Index block = -1;
      for (Index i = 0; i < f; ++i) {
        if (rows_.is_eq(F[i]) || p[i] >= 0.0) continue;
        const double t = -y[F[i]] / p[i];
        if (t < alpha) {
          alpha = t;
          block = F[i];
        }
      }
      if (!std::isfinite(alpha)) return false;
      for (Index i = 0; i < f; ++i) y[F[i]] += alpha * p[i];
      if (block >= 0) {
        y[block] = 0.0;
        fixed[static_cast<std::size_t>(block)] = 1;
        continue;
      }
      if (!full_step) continue;
      const Vector g2 = S * y - b;
      Index release = -1;
      double most = -1e-12 * bscale;
      for (Index j = 0; j < rows_.q; ++j) {
        if (fixed[static_cast<std::size_t>(j)] && g2[j] < most) {
          most = g2[j];
          release = j;
        }
      }
      if (release < 0) {
        Vector x = x_base - metric_.Gt.transpose() * y;
        if (kkt_parts(rows_, x, y).max() > tol_) return false;
        x_out = std::move(x);
        y_out = std::move(y);
        return true;
      }
      fixed[static_cast<std::size_t>(release)] = 0;
    }
    return false;
  }

  const Stacked& rows_;
  const DualMetric& metric_;
  double tol_;
  std::int64_t cap_;
};

std::int64_t sweep_cap(const Stacked& rows) { return 50 * (rows.rows() + rows.A.cols()); }

QpSolution finish(const Stacked& rows, Vector x, Vector y, std::int64_t sweeps, double stationarity) {
  QpSolution sol;
  KktParts k = kkt_parts(rows, x, y);
  k.stationarity = stationarity;
  sol.kkt_residual = k.max();
  sol.active_set = positive_rows(rows, y);
  sol.x = std::move(x);
  sol.multipliers = std::move(y);
  sol.iterations = sweeps;
  return sol;
}

QpSolution project_stacked(const Stacked& rows, const DualMetric& metric, const Vector& z,
                           double tol, Vector& warm) {
  check_zero_rows(rows, metric.W);
  std::int64_t sweeps = 0;
  DualCoordinateSolver solver(rows, metric, tol, sweep_cap(rows));
  Vector x = solver.solve(z, warm, sweeps);
  const Vector stat = x - z + rows.A.transpose() * warm;
  const double st = stat.size() ? stat.cwiseAbs().maxCoeff() : 0.0;
  return finish(rows, std::move(x), warm, sweeps, st);
}

bool is_identity(const Matrix& Q) {
  return Q.rows() == Q.cols() && Q.isIdentity(0.0);
}

// Full KKT polish for a possibly singular Hessian.
bool polish_kkt(const Matrix& Q, const Vector& c, const Stacked& rows, const Vector& y_guess,
                double tol, Vector& x_out, Vector& y_out) {
  const Index n = Q.rows();
  const Index r = rows.rows();
  std::vector<Index> active;
  for (Index j = 0; j < r; ++j) {
    if (rows.is_eq(j) || y_guess[j] > 0.0) active.push_back(j);
  }
  for (std::int64_t it = 0; it < 2 * r + 5; ++it) {
    const Index a = static_cast<Index>(active.size());
    Matrix K = Matrix::Zero(n + a, n + a);
    Vector rhs(n + a);
    K.topLeftCorner(n, n) = Q;
    rhs.head(n) = -c;
    for (Index i = 0; i < a; ++i) {
      K.block(n + i, 0, 1, n) = rows.A.row(active[i]);
      K.block(0, n + i, n, 1) = rows.A.row(active[i]).transpose();
      rhs[n + i] = rows.rhs[active[i]];
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(K);
    const Vector sol = cod.solve(rhs);
    if ((K * sol - rhs).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + rhs.cwiseAbs().maxCoeff())) return false;
    Vector x = sol.head(n);
    const Vector lambda = sol.tail(a);

    const double lscale = 1.0 + (a ? lambda.cwiseAbs().maxCoeff() : 0.0);
    Index drop = -1;
    double most_negative = -1e-12 * lscale;
    for (Index i = 0; i < a; ++i) {
      if (!rows.is_eq(active[i]) && lambda[i] < most_negative) {
        most_negative = lambda[i];
        drop = i;
      }
    }
    if (drop >= 0) {
      active.erase(active.begin() + drop);
      continue;
    }
    const Vector ax = rows.A * x;
    Index add = -1;
    double worst = 0.1 * tol * rows.feas_scale;
    for (Index j = 0; j < rows.q; ++j) {
      const double viol = ax[j] - rows.rhs[j];
      if (viol > worst && std::find(active.begin(), active.end(), j) == active.end()) {
        worst = viol;
        add = j;
      }
    }
    if (add >= 0) {
      active.insert(std::upper_bound(active.begin(), active.end(), add), add);
      continue;
    }
    Vector y = Vector::Zero(r);
    for (Index i = 0; i < a; ++i) y[active[i]] = rows.is_eq(active[i]) ? lambda[i] : std::max(lambda[i], 0.0);
    KktParts k = kkt_parts(rows, x, y);
    const Vector stat = Q * x + c + rows.A.transpose() * y;
    k.stationarity = stat.cwiseAbs().maxCoeff();
    if (k.max() > tol) return false;
    x_out = std::move(x);
    y_out = std::move(y);
    return true;
  }
  return false;
}

// Proximal-point outer loop: each step is a strictly convex QP in the
// metric Q + rho I, solved by the dual coordinate method.
QpSolution solve_singular(const Matrix& Q, const Vector& c, const Stacked& rows, double tol) {
  const Index n = Q.rows();
  const double qmax = Q.diagonal().maxCoeff();
  const double rho = qmax > 0.0 ? qmax : 1.0;
  const Matrix H = Q + rho * Matrix::Identity(n, n);
  Eigen::LLT<Matrix> llt(H);
  require(llt.info() == Eigen::Success, "solve_qp: Q is not positive semidefinite");
  DualMetric metric;
  metric.Gt = llt.solve(rows.A.transpose()).transpose();
  metric.W = (rows.A.cwiseProduct(metric.Gt)).rowwise().sum();
  check_zero_rows(rows, metric.W);

  const std::int64_t outer_cap = sweep_cap(rows);
  DualCoordinateSolver inner(rows, metric, 0.1 * tol, sweep_cap(rows));
  Vector x = Vector::Zero(n);
  Vector y = Vector::Zero(rows.rows());
  Vector prev_step;
  std::vector<char> last_pattern;
  std::int64_t sweeps = 0;
  const double cnorm = 1.0 + (c.size() ? c.cwiseAbs().maxCoeff() : 0.0);

  for (std::int64_t t = 0; t < outer_cap; ++t) {
    const Vector base = llt.solve(rho * x - c);
    Vector next = inner.solve(base, y, sweeps);
    const Vector step = next - x;
    x = std::move(next);

    auto pattern = support(rows, y);
    if (pattern != last_pattern || t % 10 == 0) {
      Vector xp, yp;
      if (polish_kkt(Q, c, rows, y, tol, xp, yp)) {
        const Vector stat = Q * xp + c + rows.A.transpose() * yp;
        return finish(rows, std::move(xp), std::move(yp), sweeps, stat.cwiseAbs().maxCoeff());
      }
      last_pattern = std::move(pattern);
    }
    const double step_norm = step.cwiseAbs().maxCoeff();
    if (rho * step_norm <= tol) {
      KktParts k = kkt_parts(rows, x, y);
      const Vector stat = Q * x + c + rows.A.transpose() * y;
      k.stationarity = stat.cwiseAbs().maxCoeff();
      if (k.max() <= tol) return finish(rows, x, y, sweeps, k.stationarity);
    }
    // A constant step along a recession direction of decrease means the
    // objective is unbounded below.
    if (t >= 3 && step_norm > 0.0 && prev_step.size() == n &&
        (step - prev_step).cwiseAbs().maxCoeff() <= 1e-9 * step_norm) {
      const Vector dir = step / step_norm;
      const Vector ad = rows.A * dir;
      bool recession = (Q * dir).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, qmax) &&
                       c.dot(dir) < -1e-9 * cnorm;
      for (Index j = 0; j < rows.rows() && recession; ++j) {
        recession = rows.is_eq(j) ? std::abs(ad[j]) <= 1e-9 : ad[j] <= 1e-9;
      }
      if (recession) throw UnboundedError("objective is unbounded below on the polyhedron", dir);
    }
    prev_step = step;
  }
  KktParts k = kkt_parts(rows, x, y);
  throw NonconvergenceError("proximal outer loop hit the iteration cap", x, k.max());
}

}  // namespace

PolyhedralSet::PolyhedralSet(RowMatrix C_, Vector d_, RowMatrix E_, Vector g_)
    : C(std::move(C_)), d(std::move(d_)), E(std::move(E_)), g(std::move(g_)) {
  require(C.rows() == d.size(), "polyhedron: C and d row counts differ");
  require(E.rows() == g.size(), "polyhedron: E and g row counts differ");
  if (E.rows() == 0 && E.cols() != C.cols()) E.resize(0, C.cols());
  if (C.rows() == 0 && C.cols() != E.cols()) C.resize(0, E.cols());
  require(C.cols() == E.cols(), "polyhedron: C and E column counts differ");
}

bool PolyhedralSet::contains(const Vector& x, double tol) const {
  if (x.size() != dimension()) return false;
  const double scale = 1.0 + (d.size() ? d.cwiseAbs().maxCoeff() : 0.0);
  if (C.rows() && ((C * x - d).array() > tol * scale).any()) return false;
  if (E.rows() && (E * x - g).cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

nlohmann::json PolyhedralSet::to_json() const {
  return {{"n", dimension()},
          {"C", json_io::from_matrix(C)},
          {"d", json_io::from_vector(d)},
          {"E", json_io::from_matrix(E)},
          {"g", json_io::from_vector(g)}};
}

PolyhedralSet PolyhedralSet::from_json(const nlohmann::json& j) {
  try {
    const Index n = j.at("n").get<Index>();
    RowMatrix C = j.contains("C") ? RowMatrix(json_io::to_matrix(j.at("C"), n, "polyhedron.C")) : RowMatrix(0, n);
    Vector d = j.contains("d") ? json_io::to_vector(j.at("d"), "polyhedron.d") : Vector(0);
    RowMatrix E = j.contains("E") ? RowMatrix(json_io::to_matrix(j.at("E"), n, "polyhedron.E")) : RowMatrix(0, n);
    Vector g = j.contains("g") ? json_io::to_vector(j.at("g"), "polyhedron.g") : Vector(0);
    return PolyhedralSet(std::move(C), std::move(d), std::move(E), std::move(g));
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("polyhedron: ") + e.what());
  }
}

QpSolution project_polyhedron(const PolyhedralSet& set, const Vector& z, double tol) {
  PolyhedronProjector projector(set, tol);
  return projector.project(z);
}

PolyhedronProjector::PolyhedronProjector(PolyhedralSet set, double tol) : set_(std::move(set)), tol_(tol) {
  require(tol_ > 0.0, "projection tolerance must be positive");
}

void PolyhedronProjector::reset() { warm_.resize(0); }

QpSolution PolyhedronProjector::project(const Vector& z) {
  ++g_qp_calls;
  require_dim(z, set_.dimension(), "project_polyhedron");
  if (rows_.rows() != set_.inequalities() + set_.equalities() || rows_.cols() != set_.dimension()) {
    // Lazily stacked on first use.
    Stacked s = stack(set_);
    rows_ = std::move(s.A);
    rhs_ = std::move(s.rhs);
    row_norm2_ = rows_.rowwise().squaredNorm();
  }
  Stacked rows;
  rows.A = rows_;
  rows.rhs = rhs_;
  rows.q = set_.inequalities();
  rows.feas_scale = 1.0 + (set_.d.size() ? set_.d.cwiseAbs().maxCoeff() : 0.0);
  DualMetric metric;
  metric.Gt = rows_;
  metric.W = row_norm2_;
  return project_stacked(rows, metric, z, tol_, warm_);
}

QpSolution solve_qp(const Matrix& Q, const Vector& c, const PolyhedralSet& set, double tol) {
  require(tol > 0.0, "solve_qp: tol must be positive");
  const Index n = set.dimension();
  require(Q.rows() == n && Q.cols() == n && c.size() == n, "solve_qp: dimension mismatch");
  const double qscale = 1.0 + (n ? Q.cwiseAbs().maxCoeff() : 0.0);
  require((Q - Q.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * qscale, "solve_qp: Q must be symmetric");
  if (is_identity(Q)) return project_polyhedron(set, -c, tol);

  ++g_qp_calls;
  const Stacked rows = stack(set);
  Eigen::LLT<Matrix> llt(Q);
  bool definite = llt.info() == Eigen::Success;
  if (definite) {
    const Vector diag = Matrix(llt.matrixL()).diagonal();
    definite = diag.minCoeff() > 1e-7 * std::sqrt(qscale);
  }
  if (!definite) return solve_singular(Q, c, rows, tol);

  DualMetric metric;
  metric.Gt = llt.solve(rows.A.transpose()).transpose();
  metric.W = (rows.A.cwiseProduct(metric.Gt)).rowwise().sum();
  check_zero_rows(rows, metric.W);
  const Vector base = llt.solve(-c);
  Vector y;
  std::int64_t sweeps = 0;
  DualCoordinateSolver solver(rows, metric, tol, sweep_cap(rows));
  Vector x = solver.solve(base, y, sweeps);
  const Vector stat = Q * x + c + rows.A.transpose() * y;
  return finish(rows, std::move(x), std::move(y), sweeps, stat.cwiseAbs().maxCoeff());
}

std::uint64_t qp_call_count() { return g_qp_calls.load(); }
void reset_qp_call_count() { g_qp_calls.store(0); }

}  // namespace airig
