#include "diaghom/linalg.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace diaghom;

namespace {

// Y_h = [Abb | -Abb] + B * P_h * C, the plane pencil's defining matrices.
CMatrix make_Yh(const CMatrix& Abb, const CMatrix& B, const CMatrix& C,
                int h) {
  CMatrix A(Abb.rows(), 2 * Abb.cols());
  A << Abb, -Abb;
  CMatrix PhC = C;
  PhC.bottomRows(C.rows() - h).setZero();
  return A + B * PhC;
}

}  // namespace

TEST_CASE("null space basis is orthonormal and annihilated") {
  Rng rng(11);
  for (int s = 0; s < 20; ++s) {
    const int n = 3 + s % 5;
    const int r = 1 + s % (n - 1);
    // Exact rank-r matrix as a product of full-rank factors.
    const CMatrix M = rng.disk_matrix(n, r) * rng.disk_matrix(r, n);
    const CMatrix K = null_space_basis(M);
    REQUIRE(K.cols() == n - r);
    CHECK((M * K).norm() <= 1e-9 * (1.0 + M.norm()));
    CHECK((K.adjoint() * K - CMatrix::Identity(n - r, n - r)).norm() <= 1e-12);
    CHECK(numerical_rank(M) == r);
  }
}

TEST_CASE("null space of a wide zero-row-count matrix is the full space") {
  CMatrix M(0, 4);
  CHECK(null_space_basis(M).cols() == 4);
}

TEST_CASE("orthonormalize_rows spans the same row space") {
  Rng rng(12);
  const CMatrix M = rng.disk_matrix(3, 7);
  const CMatrix Q = orthonormalize_rows(M);
  REQUIRE(Q.rows() == 3);
  CHECK((Q * Q.adjoint() - CMatrix::Identity(3, 3)).norm() <= 1e-12);
  // Every row of M is a combination of Q's rows.
  const CMatrix proj = M - (M * Q.adjoint()) * Q;
  CHECK(proj.norm() <= 1e-10 * (1.0 + M.norm()));
}

TEST_CASE("particular solution satisfies both defining conditions") {
  SECTION("hand-checkable example: C = [I | 0], d = (1,2)") {
    CMatrix C = CMatrix::Zero(2, 4);
    C(0, 0) = 1.0;
    C(1, 1) = 1.0;
    CVector d(2);
    d << Complex(1.0), Complex(2.0);
    const EpsilonResult r = particular_solution_epsilon(C, d);
    REQUIRE_FALSE(r.degenerate);
    CVector expect(4);
    expect << Complex(-1.0), Complex(-2.0), Complex(-1.0), Complex(-2.0);
    CHECK((r.epsilon - expect).norm() <= 1e-12);
  }
  SECTION("random property") {
    Rng rng(13);
    for (int s = 0; s < 20; ++s) {
      const int k = 2 + s % 5;
      const CMatrix C = rng.disk_matrix(k, 2 * k);
      const CVector d = rng.disk_vector(k);
      const EpsilonResult r = particular_solution_epsilon(C, d);
      REQUIRE_FALSE(r.degenerate);
      CHECK((r.epsilon.head(k) - r.epsilon.tail(k)).norm() <= 1e-10);
      CHECK((C * r.epsilon + d).norm() <= 1e-10 * (1.0 + r.epsilon.norm()));
    }
  }
  SECTION("zero right-hand side is flagged degenerate") {
    Rng rng(14);
    const CMatrix C = rng.disk_matrix(2, 4);
    CHECK(particular_solution_epsilon(C, CVector::Zero(2)).degenerate);
  }
}

TEST_CASE("plane pencil bases satisfy the three conditions") {
  Rng rng(15);
  int done = 0;
  for (int s = 0; done < 100; ++s) {
    const int k = 2 + s % 7;  // 2..8
    const int a = 1 + s % k;
    const int b = 1 + (s / 7) % (a < k ? a : k);
    if (a + b >= 2 * k) continue;
    const int m = 2 * k - a - b;
    const int h0 = std::max(a + b - k, 0);
    if (b < h0 + 1) continue;
    const int i = h0 + 1 + s % (b - h0);
    const int j = h0 + s % (i - h0);
    if (!(0 <= j && j < i && i <= b)) continue;

    const CMatrix Abb = rng.disk_matrix(a + b, k);
    const CMatrix B = rng.disk_matrix(a + b, k);
    const CMatrix C = rng.disk_matrix(k, 2 * k);
    const CMatrix Yi = make_Yh(Abb, B, C, i);
    const CMatrix Yj = make_Yh(Abb, B, C, j);
    const PlaneBases pb = basis_EFG(Yi, Yj, C, j, i);
    ++done;

    const int d = i - j;
    REQUIRE(pb.E.cols() == m - d);
    REQUIRE(pb.F.cols() == d);
    REQUIRE(pb.G.cols() == d);

    // Condition 1: [E F] spans Null Y_i.
    CHECK((Yi * pb.E).norm() <= 1e-10 * (1.0 + Yi.norm()));
    CHECK((Yi * pb.F).norm() <= 1e-10 * (1.0 + Yi.norm()) * pb.F.norm());
    // Condition 2: [E G] spans Null Y_j.
    CHECK((Yj * pb.E).norm() <= 1e-10 * (1.0 + Yj.norm()));
    CHECK((Yj * pb.G).norm() <= 1e-10 * (1.0 + Yj.norm()) * pb.G.norm());
    // Condition 3: rows j+1..i of C*F and C*G are the identity.
    const CMatrix CF = (C * pb.F).middleRows(j, d);
    const CMatrix CG = (C * pb.G).middleRows(j, d);
    CHECK((CF - CMatrix::Identity(d, d)).norm() <= 1e-10 * (1.0 + C.norm()));
    CHECK((CG - CMatrix::Identity(d, d)).norm() <= 1e-10 * (1.0 + C.norm()));
  }
}

TEST_CASE("affine plane embed/project round trip") {
  Rng rng(16);
  AffinePlane plane;
  plane.offset = rng.disk_vector(6);
  plane.basis = rng.disk_matrix(6, 2);
  const CVector y = rng.disk_vector(2);
  const CVector w = plane.embed(y);
  CHECK((plane.project(w) - y).norm() <= 1e-10);
  CHECK_THROWS_AS(plane.project(w + CVector::Ones(6)), OffPlaneError);
}

TEST_CASE("univariate roots") {
  SECTION("z^2 - 1") {
    auto roots = univariate_roots({Complex(-1.0), Complex(0.0), Complex(1.0)});
    REQUIRE(roots.size() == 2);
    std::sort(roots.begin(), roots.end(),
              [](Complex a, Complex b) { return a.real() < b.real(); });
    CHECK(std::abs(roots[0] - Complex(-1.0)) < 1e-10);
    CHECK(std::abs(roots[1] - Complex(1.0)) < 1e-10);
  }
  SECTION("z^2 + 1") {
    auto roots = univariate_roots({Complex(1.0), Complex(0.0), Complex(1.0)});
    REQUIRE(roots.size() == 2);
    std::sort(roots.begin(), roots.end(),
              [](Complex a, Complex b) { return a.imag() < b.imag(); });
    CHECK(std::abs(roots[0] - Complex(0.0, -1.0)) < 1e-10);
    CHECK(std::abs(roots[1] - Complex(0.0, 1.0)) < 1e-10);
  }
  SECTION("degree 7 built from known roots") {
    Rng rng(17);
    std::vector<Complex> known;
    for (int r = 0; r < 7; ++r) known.push_back(rng.disk() * 3.0);
    // Expand prod (z - known_r) by convolution.
    std::vector<Complex> coeffs = {Complex(1.0)};
    for (const Complex& r : known) {
      std::vector<Complex> next(coeffs.size() + 1, Complex(0.0));
      for (size_t t = 0; t < coeffs.size(); ++t) {
        next[t + 1] += coeffs[t];
        next[t] -= r * coeffs[t];
      }
      coeffs = std::move(next);
    }
    const std::vector<Complex> roots = univariate_roots(coeffs);
    REQUIRE(roots.size() == 7);
    for (const Complex& k : known) {
      double best = 1e300;
      for (const Complex& r : roots) best = std::min(best, std::abs(r - k));
      CHECK(best < 1e-8);
    }
  }
  SECTION("tiny leading coefficient reduces the degree") {
    auto roots = univariate_roots(
        {Complex(-2.0), Complex(1.0), Complex(1e-300)});
    REQUIRE(roots.size() == 1);
    CHECK(std::abs(roots[0] - Complex(2.0)) < 1e-10);
  }
  SECTION("zero polynomial") {
    CHECK(univariate_roots({Complex(0.0), Complex(0.0)}).empty());
  }
}

TEST_CASE("newton refinement") {
  auto eval = [](const CVector& y) {
    CVector r(1);
    r(0) = y(0) * y(0) - 2.0;
    return r;
  };
  auto jac = [](const CVector& y) {
    CMatrix J(1, 1);
    J(0, 0) = 2.0 * y(0);
    return J;
  };
  CVector y0(1);
  y0 << Complex(1.0);
  const NewtonResult r = newton_refine(eval, jac, y0);
  REQUIRE(r.converged);
  CHECK(std::abs(r.point(0) - std::sqrt(Complex(2.0))) < 1e-10);

  // Singular Jacobian at the start: declared non-convergent, not NaN.
  CVector bad(1);
  bad << Complex(0.0);
  const NewtonResult rb = newton_refine(eval, jac, bad);
  CHECK_FALSE(rb.converged);
  CHECK(rb.point.allFinite());
}

TEST_CASE("gauss-newton on an overdetermined consistent system") {
  // Line through two points expressed as 3 consistent equations in 2 vars.
  auto eval = [](const CVector& y) {
    CVector r(3);
    r(0) = y(0) + y(1) - 3.0;
    r(1) = y(0) - y(1) - 1.0;
    r(2) = 2.0 * y(0) - 4.0;
    return r;
  };
  auto jac = [](const CVector&) {
    CMatrix J(3, 2);
    J << Complex(1), Complex(1), Complex(1), Complex(-1), Complex(2),
        Complex(0);
    return J;
  };
  CVector y0(2);
  y0 << Complex(10.0, 3.0), Complex(-4.0);
  const NewtonResult r = gauss_newton_refine(eval, jac, y0);
  REQUIRE(r.converged);
  CHECK(std::abs(r.point(0) - Complex(2.0)) < 1e-10);
  CHECK(std::abs(r.point(1) - Complex(1.0)) < 1e-10);
}
