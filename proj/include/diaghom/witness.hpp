#ifndef DIAGHOM_WITNESS_HPP
#define DIAGHOM_WITNESS_HPP

#include "diaghom/linalg.hpp"
#include "diaghom/polysys.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace diaghom {

/// c generic linear equations coeff*x + offset = 0 slicing a component of
/// codimension-complementary dimension.
struct SliceSystem {
  CMatrix coeff;
  CVector offset;

  Eigen::Index rows() const { return coeff.rows(); }
  CVector evaluate(const CVector& x) const { return coeff * x + offset; }
};

struct WitnessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical representation of an irreducible component: its dimension,
/// degree, defining system, a generic slice with dim equations, and the
/// degree-many slice intersection points.
struct WitnessSet {
  int ambient_dim = 0;
  int dim = 0;
  int degree = 0;
  PolySystem system;
  SliceSystem slice;
  std::vector<CVector> points;

  void validate(double tol = 1e-8) const {
    if (static_cast<int>(points.size()) != degree)
      throw WitnessError("witness set: point count " +
                         std::to_string(points.size()) +
                         " does not match degree " + std::to_string(degree));
    if (slice.rows() != dim)
      throw WitnessError("witness set: slice must have dim equations");
    if (system.num_vars() != ambient_dim)
      throw WitnessError("witness set: system ambient dimension mismatch");
    for (size_t i = 0; i < points.size(); ++i) {
      const double rs = system.evaluate(points[i]).norm();
      const double rl = slice.evaluate(points[i]).norm();
      const double scale = 1.0 + points[i].norm();
      if (rs > tol * scale || rl > tol * scale)
        throw WitnessError("witness point " + std::to_string(i) +
                           " residual " + std::to_string(std::max(rs, rl)) +
                           " exceeds tolerance");
    }
  }
};

namespace detail {

// Generic slice with orthonormalized rows for conditioning.
inline SliceSystem random_slice(int rows, int ambient, Rng& rng) {
  SliceSystem s;
  s.coeff = rows > 0 ? orthonormalize_rows(rng.disk_matrix(rows, ambient))
                     : CMatrix(0, ambient);
  s.offset = rng.disk_vector(rows);
  return s;
}

inline NewtonResult polish_on_slice(const PolySystem& f, const SliceSystem& s,
                                    const CVector& x0) {
  auto eval = [&](const CVector& x) {
    CVector out(f.num_polys() + s.rows());
    out.head(f.num_polys()) = f.evaluate(x);
    out.tail(s.rows()) = s.evaluate(x);
    return out;
  };
  auto jac = [&](const CVector& x) {
    CMatrix J(f.num_polys() + s.rows(), x.size());
    J.topRows(f.num_polys()) = f.jacobian(x);
    J.bottomRows(s.rows()) = s.coeff;
    return J;
  };
  return newton_refine(eval, jac, x0, 1e-13, 20);
}

}  // namespace detail

/// Witness set for the hypersurface f = 0 in C^k: the slice is k-1 generic
/// hyperplanes meeting in a generic line, and the points are f's roots along
/// that line (univariate interpolation + simultaneous root finding).
inline WitnessSet witness_hypersurface(const PolySystem& f, Rng& rng) {
  if (f.num_polys() != 1)
    throw WitnessError("witness_hypersurface: expected a single polynomial");
  const int k = f.num_vars();
  const int d = f.total_degree(0);
  if (d < 1) throw WitnessError("witness_hypersurface: constant polynomial");

  for (int attempt = 0; attempt < 5; ++attempt) {
    const CVector p = rng.disk_vector(k);
    CVector v = rng.disk_vector(k);
    if (v.norm() < 1e-3) continue;

    // Line x(s) = p + s v as the common zero of k-1 hyperplanes.
    CMatrix vrow(1, k);
    vrow.row(0) = v.transpose();  // unconjugated: rows r satisfy r . v = 0
    SliceSystem slice;
    slice.coeff = null_space_basis(vrow).transpose();
    slice.offset = -(slice.coeff * p);

    // Interpolate g(s) = f(p + s v) at d+1 roots of unity.
    CMatrix vand(d + 1, d + 1);
    CVector vals(d + 1);
    for (int r = 0; r <= d; ++r) {
      const Complex s = std::polar(1.0, 2.0 * kPi * r / (d + 1));
      Complex pw(1.0);
      for (int c = 0; c <= d; ++c) {
        vand(r, c) = pw;
        pw *= s;
      }
      vals(r) = f.evaluate(p + s * v)(0);
    }
    const CVector g = vand.partialPivLu().solve(vals);
    std::vector<Complex> coeffs(g.data(), g.data() + d + 1);
    double gmax = 0.0;
    for (const Complex& c : coeffs) gmax = std::max(gmax, std::abs(c));
    if (std::abs(coeffs.back()) <= 1e-10 * gmax) continue;  // leading collapse

    const std::vector<Complex> roots = univariate_roots(coeffs);
    if (static_cast<int>(roots.size()) != d) continue;

    WitnessSet ws;
    ws.ambient_dim = k;
    ws.dim = k - 1;
    ws.degree = d;
    ws.system = f;
    ws.slice = slice;
    bool ok = true;
    for (const Complex& r : roots) {
      NewtonResult nr = detail::polish_on_slice(f, slice, p + r * v);
      if (!nr.converged && nr.residual > 1e-8 * (1.0 + nr.point.norm())) {
        ok = false;
        break;
      }
      ws.points.push_back(nr.point);
    }
    if (!ok) continue;
    ws.validate(1e-8);
    return ws;
  }
  throw WitnessError("witness_hypersurface: failed after 5 line draws");
}

/// Witness set (degree 1) for a linear component given by c independent
/// linear equations that solve full_system.
inline WitnessSet witness_linear(const PolySystem& component_eqs,
                                 const PolySystem& full_system, Rng& rng) {
  const int k = component_eqs.num_vars();
  if (full_system.num_vars() != k)
    throw WitnessError("witness_linear: ambient dimensions differ");
  const int c = component_eqs.num_polys();
  if (c > k) throw WitnessError("witness_linear: more equations than variables");

  CMatrix comp = CMatrix::Zero(c, k);
  CVector comp_off = CVector::Zero(c);
  for (int p = 0; p < c; ++p) {
    if (component_eqs.total_degree(p) > 1)
      throw WitnessError("witness_linear: component equations must be linear");
    for (const Monomial& m : component_eqs.polynomials()[p].terms) {
      int tot = 0, var = -1;
      for (int vi = 0; vi < k; ++vi) {
        tot += m.exps[vi];
        if (m.exps[vi] == 1) var = vi;
      }
      if (tot == 0)
        comp_off(p) += m.coeff;
      else
        comp(p, var) += m.coeff;
    }
  }
  if (numerical_rank(comp) != c)
    throw WitnessError("witness_linear: component equations rank-deficient");

  const int dim = k - c;
  SliceSystem slice = detail::random_slice(dim, k, rng);

  CMatrix full(k, k);
  full.topRows(c) = comp;
  full.bottomRows(dim) = slice.coeff;
  CVector rhs(k);
  rhs.head(c) = -comp_off;
  rhs.tail(dim) = -slice.offset;
  Eigen::FullPivLU<CMatrix> lu(full);
  if (!lu.isInvertible())
    throw WitnessError("witness_linear: combined linear system singular");
  const CVector point = lu.solve(rhs);
  const double resid = full_system.evaluate(point).norm();
  if (resid > 1e-10 * (1.0 + point.norm()))
    throw WitnessError("witness_linear: component does not solve the system "
                       "(residual " + std::to_string(resid) + ")");

  WitnessSet ws;
  ws.ambient_dim = k;
  ws.dim = dim;
  ws.degree = 1;
  ws.system = full_system;
  ws.slice = slice;
  ws.points = {point};
  ws.validate(1e-8);
  return ws;
}

// --- file persistence -------------------------------------------------

namespace detail {

inline void write_complex_row(std::ostream& os, const CVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) os << ' ';
    os << format_double(v(i).real()) << ' ' << format_double(v(i).imag());
  }
  os << '\n';
}

inline CVector parse_complex_row(const std::string& line, Eigen::Index n) {
  std::istringstream is(line);
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double re, im;
    if (!(is >> re >> im))
      throw WitnessError("witness file: malformed numeric row: " + line);
    v(i) = Complex(re, im);
  }
  return v;
}

}  // namespace detail

inline void write_witness(const WitnessSet& ws, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw WitnessError("cannot open for writing: " + path);
  os << "diaghom witness 1\n";
  os << "ambient_dim: " << ws.ambient_dim << '\n';
  os << "dim: " << ws.dim << '\n';
  os << "degree: " << ws.degree << '\n';
  os << "system:\n" << ws.system.to_text() << "end system\n";
  os << "slice:\n";
  for (Eigen::Index r = 0; r < ws.slice.rows(); ++r) {
    CVector row(ws.ambient_dim + 1);
    row.head(ws.ambient_dim) = ws.slice.coeff.row(r).transpose();
    row(ws.ambient_dim) = ws.slice.offset(r);
    detail::write_complex_row(os, row);
  }
  os << "end slice\n";
  os << "points:\n";
  for (const CVector& p : ws.points) detail::write_complex_row(os, p);
  os << "end points\n";
}

/// Loads a witness file and re-checks the residual invariants (tolerance
/// 1e-6, looser than construction, to admit externally computed sets).
inline WitnessSet read_witness(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw WitnessError("cannot open witness file: " + path);
  std::string line;
  auto next_line = [&]() {
    if (!std::getline(is, line))
      throw WitnessError("witness file truncated: " + path);
    return line;
  };
  if (next_line() != "diaghom witness 1")
    throw WitnessError("not a diaghom witness file: " + path);

  auto parse_int_field = [&](const std::string& key) {
    next_line();
    if (line.rfind(key + ":", 0) != 0)
      throw WitnessError("expected '" + key + ":' in " + path);
    return std::stoi(line.substr(key.size() + 1));
  };
  WitnessSet ws;
  ws.ambient_dim = parse_int_field("ambient_dim");
  ws.dim = parse_int_field("dim");
  ws.degree = parse_int_field("degree");
  if (ws.dim < 0 || ws.dim > ws.ambient_dim || ws.degree < 1)
    throw WitnessError("witness file: invalid dimensions");

  if (next_line() != "system:")
    throw WitnessError("expected 'system:' in " + path);
  std::string sys_text;
  while (next_line() != "end system") sys_text += line + "\n";
  ws.system = parse_system(sys_text);

  if (next_line() != "slice:") throw WitnessError("expected 'slice:' in " + path);
  ws.slice.coeff = CMatrix(ws.dim, ws.ambient_dim);
  ws.slice.offset = CVector(ws.dim);
  for (int r = 0; r < ws.dim; ++r) {
    CVector row = detail::parse_complex_row(next_line(), ws.ambient_dim + 1);
    ws.slice.coeff.row(r) = row.head(ws.ambient_dim).transpose();
    ws.slice.offset(r) = row(ws.ambient_dim);
  }
  if (next_line() != "end slice")
    throw WitnessError("expected 'end slice' in " + path);

  if (next_line() != "points:")
    throw WitnessError("expected 'points:' in " + path);
  while (next_line() != "end points")
    ws.points.push_back(detail::parse_complex_row(line, ws.ambient_dim));

  ws.validate(1e-6);
  return ws;
}

}  // namespace diaghom

#endif  // DIAGHOM_WITNESS_HPP
