#ifndef DIAGHOM_LINALG_HPP
#define DIAGHOM_LINALG_HPP

#include "diaghom/core.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace diaghom {

/// Orthonormal basis of the right null space of M.  Columns c satisfy
/// ||M*c|| <= rank_tol*||M|| and c^H*c = I.  A zero (or empty) matrix yields
/// the full identity-like basis.
inline CMatrix null_space_basis(const CMatrix& M, double rank_tol = 1e-10) {
  const Eigen::Index n = M.cols();
  if (n < 1) throw NumericalError("null_space_basis: empty matrix");
  if (M.rows() == 0) return CMatrix::Identity(n, n);
  Eigen::JacobiSVD<CMatrix> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rank_tol * smax) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

inline Eigen::Index numerical_rank(const CMatrix& M, double rank_tol = 1e-10) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(M);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rank_tol * smax) ++rank;
  return rank;
}

/// Rows of M orthonormalized (Gram basis of the row space).  Requires full
/// row rank; used to condition random slice coefficients.
inline CMatrix orthonormalize_rows(const CMatrix& M) {
  Eigen::HouseholderQR<CMatrix> qr(M.adjoint());
  CMatrix q = qr.householderQ() * CMatrix::Identity(M.cols(), M.rows());
  return q.adjoint();
}

struct EpsilonResult {
  CVector epsilon;
  bool degenerate = false;
};

/// Unique solution of [[I_k, -I_k]; C] w = [0; -d]: the point satisfying
/// both the diagonal condition u = v and C w + d = 0.  Generic C makes the
/// stacked matrix invertible; a singular draw (or d = 0, which forces
/// epsilon = 0) is reported as degenerate so the caller can re-randomize.
inline EpsilonResult particular_solution_epsilon(const CMatrix& C,
                                                 const CVector& d) {
  const Eigen::Index k = d.size();
  if (C.rows() != k || C.cols() != 2 * k)
    throw NumericalError("particular_solution_epsilon: C must be k x 2k");
  CMatrix S = CMatrix::Zero(2 * k, 2 * k);
  S.block(0, 0, k, k) = CMatrix::Identity(k, k);
  S.block(0, k, k, k) = -CMatrix::Identity(k, k);
  S.bottomRows(k) = C;
  Eigen::FullPivLU<CMatrix> lu(S);
  if (!lu.isInvertible()) return {CVector::Zero(2 * k), true};
  CVector rhs = CVector::Zero(2 * k);
  rhs.tail(k) = -d;
  CVector eps = lu.solve(rhs);
  return {eps, d.norm() == 0.0};
}

struct PlaneBases {
  CMatrix E;  // 2k x (m - (i-j)), shared null directions of Y_i and Y_j
  CMatrix F;  // 2k x (i-j), completes E to a basis of Null Y_i
  CMatrix G;  // 2k x (i-j), completes E to a basis of Null Y_j
};

namespace detail {

// Completes the orthonormal basis E to a basis of span(N) by projecting E
// out of N and keeping the `want` dominant directions.
inline CMatrix complete_basis(const CMatrix& E, const CMatrix& N,
                              Eigen::Index want) {
  CMatrix P = N;
  if (E.cols() > 0) P -= E * (E.adjoint() * N);
  Eigen::JacobiSVD<CMatrix> svd(P, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  if (sv.size() < want || sv(want - 1) < 1e-10 * std::max(1.0, sv(0)))
    throw DegenerateDataError("basis completion rank-deficient");
  return svd.matrixU().leftCols(want);
}

}  // namespace detail

/// Bases E, F, G for the pencil of planes between Null Y_i and Null Y_j:
///   [E F] spans Null Y_i, [E G] spans Null Y_j, and rows j+1..i of C*F and
///   C*G both equal the (i-j) identity.
/// E, F-hat, G-hat are orthonormalized before the normalizing small solve.
inline PlaneBases basis_EFG(const CMatrix& Yi, const CMatrix& Yj,
                            const CMatrix& C, int j, int i) {
  if (!(j < i)) throw NumericalError("basis_EFG: requires j < i");
  const Eigen::Index n2k = Yi.cols();
  const Eigen::Index ab = Yi.rows();
  const Eigen::Index m = n2k - ab;
  const Eigen::Index d = i - j;
  if (d > m) throw NumericalError("basis_EFG: i - j exceeds m");

  CMatrix stacked(2 * ab, n2k);
  stacked.topRows(ab) = Yi;
  stacked.bottomRows(ab) = Yj;
  CMatrix E = null_space_basis(stacked);
  if (E.cols() != m - d)
    throw DegenerateDataError("basis_EFG: shared null space has wrong dimension");

  const CMatrix Ni = null_space_basis(Yi);
  const CMatrix Nj = null_space_basis(Yj);
  if (Ni.cols() != m || Nj.cols() != m)
    throw DegenerateDataError("basis_EFG: Y_i or Y_j not full row rank");

  const CMatrix Fhat = detail::complete_basis(E, Ni, d);
  const CMatrix Ghat = detail::complete_basis(E, Nj, d);

  // Q = rows j+1..i of C * F-hat; F = F-hat * Q^{-1} (exact small solve).
  const CMatrix Qf = (C * Fhat).middleRows(j, d);
  const CMatrix Qg = (C * Ghat).middleRows(j, d);
  Eigen::FullPivLU<CMatrix> luF(Qf), luG(Qg);
  if (!luF.isInvertible() || !luG.isInvertible())
    throw DegenerateDataError("basis_EFG: normalization block Q singular");
  PlaneBases out;
  out.E = std::move(E);
  out.F = Fhat * luF.inverse();
  out.G = Ghat * luG.inverse();
  return out;
}

struct OffPlaneError : NumericalError {
  explicit OffPlaneError(double dist)
      : NumericalError("point off the plane by " + std::to_string(dist)),
        distance(dist) {}
  double distance;
};

/// Affine plane offset + basis*y with full-column-rank basis.
struct AffinePlane {
  CVector offset;
  CMatrix basis;

  Eigen::Index ambient_dim() const { return offset.size(); }
  Eigen::Index dim() const { return basis.cols(); }

  CVector embed(const CVector& y) const {
    if (y.size() != basis.cols())
      throw NumericalError("embed: coordinate dimension mismatch");
    return offset + basis * y;
  }

  /// Least-squares coordinates of a point expected to lie on the plane.
  CVector project(const CVector& point, double tol = 1e-8) const {
    if (point.size() != offset.size())
      throw NumericalError("project: ambient dimension mismatch");
    CVector y = basis.completeOrthogonalDecomposition().solve(point - offset);
    const double dist = (embed(y) - point).norm();
    if (dist > tol * (1.0 + point.norm())) throw OffPlaneError(dist);
    return y;
  }
};

/// Aberth-Ehrlich simultaneous root finding.  Coefficients ascending,
/// c[0] + c[1] z + ... + c[d] z^d.  Near-zero leading coefficients are
/// stripped (degree reduction); returns all roots with multiplicity.
inline std::vector<Complex> univariate_roots(std::vector<Complex> coeffs) {
  double maxc = 0.0;
  for (const Complex& c : coeffs) maxc = std::max(maxc, std::abs(c));
  if (maxc == 0.0) return {};
  while (coeffs.size() > 1 && std::abs(coeffs.back()) <= 1e-12 * maxc)
    coeffs.pop_back();
  const int d = static_cast<int>(coeffs.size()) - 1;
  if (d <= 0) return {};

  const Complex lead = coeffs.back();
  double cauchy = 0.0;
  for (int i = 0; i < d; ++i)
    cauchy = std::max(cauchy, std::abs(coeffs[i] / lead));
  const double radius = 1.0 + cauchy;

  // Initial guesses on a circle, fixed deterministic rotation offset.
  std::vector<Complex> z(d);
  for (int s = 0; s < d; ++s)
    z[s] = std::polar(radius, 2.0 * kPi * (s + 0.25) / d + 0.42);

  auto horner = [&](Complex x, Complex& p, Complex& dp) {
    p = coeffs[d];
    dp = Complex(0.0);
    for (int s = d - 1; s >= 0; --s) {
      dp = dp * x + p;
      p = p * x + coeffs[s];
    }
  };

  for (int iter = 0; iter < 200; ++iter) {
    double max_update = 0.0;
    for (int s = 0; s < d; ++s) {
      Complex p, dp;
      horner(z[s], p, dp);
      if (p == Complex(0.0)) continue;
      if (dp == Complex(0.0)) dp = Complex(1e-300);
      const Complex w = p / dp;
      Complex sum(0.0);
      for (int l = 0; l < d; ++l)
        if (l != s) sum += Complex(1.0) / (z[s] - z[l]);
      const Complex denom = Complex(1.0) - w * sum;
      const Complex corr = denom == Complex(0.0) ? w : w / denom;
      z[s] -= corr;
      max_update = std::max(max_update, std::abs(corr) / (1.0 + std::abs(z[s])));
    }
    if (max_update < 1e-12) break;
  }
  return z;
}

struct NewtonResult {
  CVector point;
  double residual = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Newton iteration on a square system given by eval/jacobian callables.
/// Declared non-convergent on a near-singular Jacobian instead of diverging.
template <class EvalFn, class JacFn>
NewtonResult newton_refine(EvalFn&& eval, JacFn&& jac, CVector y,
                           double tol = 1e-11, int max_iters = 20) {
  NewtonResult res;
  CVector r = eval(y);
  res.residual = r.norm();
  for (int it = 0; it < max_iters; ++it) {
    if (res.residual <= tol * (1.0 + y.norm())) {
      res.converged = true;
      break;
    }
    CMatrix J = jac(y);
    Eigen::PartialPivLU<CMatrix> lu(J);
    if (!(lu.rcond() > 1e-14)) break;  // singular (or NaN) Jacobian
    CVector step = lu.solve(r);
    if (!step.allFinite()) break;
    y -= step;
    r = eval(y);
    res.residual = r.norm();
    res.iterations = it + 1;
    if (!std::isfinite(res.residual)) break;
  }
  if (res.residual <= tol * (1.0 + y.norm())) res.converged = true;
  res.point = std::move(y);
  return res;
}

/// Gauss-Newton least-squares refinement for (possibly) overdetermined
/// systems; used to harden ambiguous slack classifications.
template <class EvalFn, class JacFn>
NewtonResult gauss_newton_refine(EvalFn&& eval, JacFn&& jac, CVector y,
                                 double tol = 1e-11, int max_iters = 15) {
  NewtonResult res;
  CVector r = eval(y);
  res.residual = r.norm();
  for (int it = 0; it < max_iters; ++it) {
    if (res.residual <= tol * (1.0 + y.norm())) {
      res.converged = true;
      break;
    }
    CMatrix J = jac(y);
    CVector step = J.completeOrthogonalDecomposition().solve(r);
    if (!step.allFinite()) break;
    y -= step;
    r = eval(y);
    const double nr = r.norm();
    res.iterations = it + 1;
    if (!std::isfinite(nr) || nr > 10.0 * res.residual + 1.0) break;
    res.residual = nr;
  }
  if (res.residual <= tol * (1.0 + y.norm())) res.converged = true;
  res.point = std::move(y);
  return res;
}

}  // namespace diaghom

#endif  // DIAGHOM_LINALG_HPP
