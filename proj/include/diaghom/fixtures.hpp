#ifndef DIAGHOM_FIXTURES_HPP
#define DIAGHOM_FIXTURES_HPP

#include "diaghom/diagonal.hpp"
#include "diaghom/witness.hpp"

#include <string>
#include <vector>

namespace diaghom {

/// Dense random polynomial: every monomial of total degree <= degree gets a
/// coefficient from the unit disk.  Monomial order is the deterministic
/// lexicographic enumeration below.
inline Poly random_dense_poly(int num_vars, int degree, Rng& rng) {
  Poly p;
  std::vector<int> exps(num_vars, 0);
  auto rec = [&](auto&& self, int var, int remaining) -> void {
    if (var == num_vars) {
      p.terms.push_back({rng.disk(), exps});
      return;
    }
    for (int e = 0; e <= remaining; ++e) {
      exps[var] = e;
      self(self, var + 1, remaining - e);
    }
    exps[var] = 0;
  };
  rec(rec, 0, degree);
  return p;
}

/// Cylinder and sphere in C^3: two quadric surfaces whose intersection is a
/// single irreducible curve of degree 4.
inline DiagonalProblem make_example1(std::uint64_t seed) {
  const PolySystem cylinder = parse_system("vars: x y z;\nx^2 + y^2 - 1;\n");
  const PolySystem sphere =
      parse_system("vars: x y z;\n(x + 0.5)^2 + y^2 + z^2 - 1;\n");
  Rng rng(seed ^ 0xf1e1u);
  WitnessSet wA = witness_hypersurface(cylinder, rng);
  WitnessSet wB = witness_hypersurface(sphere, rng);
  return make_problem(std::move(wA), std::move(wB), seed);
}

/// Two 2-planes in C^4 meeting only at the origin: A = {x=y=0} and
/// B = {z=w=0}, both components of xz = xw = yz = yw = 0.
inline DiagonalProblem make_example2(std::uint64_t seed) {
  const PolySystem f =
      parse_system("vars: x y z w;\nx*z;\nx*w;\ny*z;\ny*w;\n");
  const PolySystem eqs_A = parse_system("vars: x y z w;\nx;\ny;\n");
  const PolySystem eqs_B = parse_system("vars: x y z w;\nz;\nw;\n");
  Rng rng(seed ^ 0xf1e2u);
  WitnessSet wA = witness_linear(eqs_A, f, rng);
  WitnessSet wB = witness_linear(eqs_B, f, rng);
  return make_problem(std::move(wA), std::move(wB), seed);
}

/// Two random dense hypersurfaces in C^5, degrees 2 and 3: a generic
/// complete intersection of dimension 3 and degree 6.
inline DiagonalProblem make_synthetic3(std::uint64_t seed) {
  Rng rng(seed ^ 0xf1e3u);
  const std::vector<std::string> vars = {"x1", "x2", "x3", "x4", "x5"};
  PolySystem fA(vars, {random_dense_poly(5, 2, rng)});
  PolySystem fB(vars, {random_dense_poly(5, 3, rng)});
  WitnessSet wA = witness_hypersurface(fA, rng);
  WitnessSet wB = witness_hypersurface(fB, rng);
  return make_problem(std::move(wA), std::move(wB), seed);
}

inline DiagonalProblem make_fixture(const std::string& name,
                                    std::uint64_t seed) {
  if (name == "1") return make_example1(seed);
  if (name == "2") return make_example2(seed);
  if (name == "synthetic3") return make_synthetic3(seed);
  throw NumericalError("unknown example fixture: " + name);
}

/// Two parallel lines x = 0 and x = 1 in C^2: an empty intersection used to
/// exercise the cascade's negative outcome.
inline DiagonalProblem make_disjoint_lines(std::uint64_t seed) {
  const PolySystem fA = parse_system("vars: x y;\nx;\n");
  const PolySystem fB = parse_system("vars: x y;\nx - 1;\n");
  Rng rng(seed ^ 0xf1e4u);
  WitnessSet wA = witness_hypersurface(fA, rng);
  WitnessSet wB = witness_hypersurface(fB, rng);
  return make_problem(std::move(wA), std::move(wB), seed);
}

/// Witness set for the unit circle {x^2 + y^2 = 1, z = 0} in C^3, a
/// codimension-2 curve used to exercise containment (it lies inside the
/// cylinder of make_example1).  Points are computed from the slice by
/// eliminating z and solving the resulting univariate quadratic.
inline WitnessSet make_circle_witness(std::uint64_t seed) {
  const PolySystem f = parse_system("vars: x y z;\nx^2 + y^2 - 1;\nz;\n");
  Rng rng(seed ^ 0xf1e5u);
  for (int attempt = 0; attempt < 5; ++attempt) {
    SliceSystem slice = detail::random_slice(1, 3, rng);
    const Complex c1 = slice.coeff(0, 0), c2 = slice.coeff(0, 1),
                  c0 = slice.offset(0);
    if (std::abs(c2) < 1e-3) continue;
    // On z = 0 the slice gives y = -(c0 + c1 x)/c2; substituting into the
    // circle yields (c1^2 + c2^2) x^2 + 2 c0 c1 x + c0^2 - c2^2 = 0.
    const std::vector<Complex> roots = univariate_roots(
        {c0 * c0 - c2 * c2, 2.0 * c0 * c1, c1 * c1 + c2 * c2});
    if (roots.size() != 2) continue;

    WitnessSet ws;
    ws.ambient_dim = 3;
    ws.dim = 1;
    ws.degree = 2;
    ws.system = f;
    ws.slice = slice;
    for (const Complex& r : roots) {
      CVector p(3);
      p << r, -(c0 + c1 * r) / c2, Complex(0.0);
      ws.points.push_back(detail::polish_on_slice(f, slice, p).point);
    }
    ws.validate(1e-8);
    return ws;
  }
  throw WitnessError("make_circle_witness: degenerate slices");
}

}  // namespace diaghom

#endif  // DIAGHOM_FIXTURES_HPP
