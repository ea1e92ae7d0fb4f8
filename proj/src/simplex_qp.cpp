#include "semicop/simplex_qp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "semicop/error.hpp"

namespace semicop {

namespace {

double objective(const Vector& a, const Matrix& B, const Vector& w) { return a.dot(w) + w.dot(B * w); }

// Solve the KKT system on the support S: 2 B_SS w_S + a_S = mu 1, 1'w_S = 1.
bool polish(const Vector& a, const Matrix& B, Vector& w) {
  std::vector<Index> S;
  for (Index i = 0; i < w.size(); ++i)
    if (w(i) > 1e-12) S.push_back(i);
  const Index s = static_cast<Index>(S.size());
  if (s == 0) return false;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(s + 1, s + 1);
  Eigen::VectorXd rhs(s + 1);
  for (Index i = 0; i < s; ++i) {
    for (Index j = 0; j < s; ++j) K(i, j) = 2.0 * B(S[i], S[j]);
    K(i, s) = 1.0;
    K(s, i) = 1.0;
    rhs(i) = -a(S[i]);
  }
  rhs(s) = 1.0;
  const Eigen::VectorXd sol = K.completeOrthogonalDecomposition().solve(rhs);
  Vector cand = Vector::Zero(w.size());
  for (Index i = 0; i < s; ++i) {
    if (!(sol(i) >= 0.0)) return false;
    cand(S[i]) = sol(i);
  }
  const double sum = cand.sum();
  if (!(std::abs(sum - 1.0) < 1e-9)) return false;
  cand /= sum;
  if (simplex_kkt_residual(a, B, cand) <= simplex_kkt_residual(a, B, w) &&
      objective(a, B, cand) <= objective(a, B, w) + 1e-15) {
    w = cand;
    return true;
  }
  return false;
}

}  // namespace

Vector project_simplex(const Vector& v) {
  const Index m = v.size();
  std::vector<double> s(v.data(), v.data() + m);
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, tau = 0.0;
  for (Index k = 0; k < m; ++k) {
    cum += s[static_cast<size_t>(k)];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (s[static_cast<size_t>(k)] - t > 0.0) tau = t;
  }
  Vector w = (v.array() - tau).max(0.0).matrix();
  const double sum = w.sum();
  return sum > 0 ? Vector(w / sum) : Vector::Constant(m, 1.0 / static_cast<double>(m));
}

double simplex_kkt_residual(const Vector& a, const Matrix& B, const Vector& w) {
  const Vector g = a + 2.0 * (B * w);
  return (w - project_simplex(w - g)).cwiseAbs().maxCoeff();
}

QPResult solve_simplex_qp(const Vector& a, const Matrix& Bin, double tolerance, int max_iterations) {
  const Index M = a.size();
  if (M == 0 || Bin.rows() != M || Bin.cols() != M) throw NumericalError("QP dimensions disagree");
  if (!a.allFinite() || !Bin.allFinite()) throw NumericalError("QP data is not finite");
  const Matrix B = 0.5 * (Bin + Bin.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(B), Eigen::EigenvaluesOnly);
  const double lmax = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmin < -1e-10 * std::max(1.0, lmax))
    throw NumericalError("criterion matrix is not positive semidefinite (min eigenvalue " +
                         std::to_string(lmin) + ")");

  QPResult res;
  Vector w = Vector::Constant(M, 1.0 / static_cast<double>(M));
  if (M == 1) {
    res.w = w;
    res.objective = objective(a, B, w);
    return res;
  }
  const double L = 2.0 * lmax;
  if (L <= 0.0) {
    // linear objective: best vertex, lowest index on ties
    Index best = 0;
    for (Index m = 1; m < M; ++m)
      if (a(m) < a(best)) best = m;
    w.setZero();
    w(best) = 1.0;
  } else {
    const double step = 1.0 / L;
    Vector y = w;
    double t = 1.0;
    double fprev = objective(a, B, w);
    for (int it = 0; it < max_iterations; ++it) {
      res.iterations = it + 1;
      const Vector g = a + 2.0 * (B * y);
      Vector next = project_simplex(y - step * g);
      const double fnext = objective(a, B, next);
      if (fnext > fprev && t > 1.0) {
        // adaptive restart
        t = 1.0;
        y = w;
        continue;
      }
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = next + ((t - 1.0) / tn) * (next - w);
      t = tn;
      w = next;
      fprev = fnext;
      if (simplex_kkt_residual(a, B, w) < tolerance) break;
    }
  }
  polish(a, B, w);
  res.w = w;
  res.objective = objective(a, B, w);
  res.kkt_residual = simplex_kkt_residual(a, B, w);
  return res;
}

}  // namespace semicop
