#ifndef DIAGHOM_DIAGONAL_HPP
#define DIAGHOM_DIAGONAL_HPP

#include "diaghom/membership.hpp"
#include "diaghom/polysys.hpp"
#include "diaghom/tracker.hpp"
#include "diaghom/witness.hpp"

#include <chrono>
#include <limits>
#include <map>
#include <utility>
#include <vector>

namespace diaghom {

struct CascadeFailure : NumericalError {
  using NumericalError::NumericalError;
};

/// Inputs for intersecting components A (dim a) and B (dim b), a >= b,
/// in C^k, with dimension bounds b >= hmax > dim(A cap B) and
/// h0 <= min dim of any intersection component.
struct DiagonalProblem {
  int k = 0, a = 0, b = 0;
  PolySystem f_A, f_B;
  WitnessSet wA, wB;
  int hmax = 0, h0 = 0;
  std::uint64_t seed = 0;

  int m() const { return 2 * k - a - b; }
  int extrinsic_vars() const { return 3 * k; }

  void validate() const {
    if (a < b) throw NumericalError("diagonal problem requires a >= b");
    if (wA.ambient_dim != k || wB.ambient_dim != k)
      throw NumericalError("witness ambient dimensions must equal k");
    if (wA.dim != a || wB.dim != b)
      throw NumericalError("witness dimensions must match a, b");
    if (!(hmax <= b && hmax > -1))
      throw NumericalError("hmax out of bounds (need b >= hmax > -1)");
    if (h0 < std::max(a + b - k, 0))
      throw NumericalError("h0 below max(a+b-k, 0)");
    if (hmax < h0 + 1)
      throw NumericalError("hmax must exceed h0");
  }
};

/// Builds a problem from two witness sets, swapping so that dim(A) >= dim(B).
/// hmax/h0 of -1 select the defaults b and max(a+b-k, 0).
inline DiagonalProblem make_problem(WitnessSet wA, WitnessSet wB,
                                    std::uint64_t seed, int hmax = -1,
                                    int h0 = -1) {
  if (wA.dim < wB.dim) std::swap(wA, wB);
  DiagonalProblem p;
  p.k = wA.ambient_dim;
  p.a = wA.dim;
  p.b = wB.dim;
  p.f_A = wA.system;
  p.f_B = wB.system;
  p.wA = std::move(wA);
  p.wB = std::move(wB);
  p.hmax = hmax < 0 ? p.b : hmax;
  p.h0 = h0 < 0 ? std::max(p.a + p.b - p.k, 0) : h0;
  p.seed = seed;
  p.validate();
  return p;
}

/// The run's generic constants: randomizers M, N, the diagonal matrix
/// A = [Abb | -Abb], slack matrices B, C, d, the constant particular
/// solution epsilon, and the gamma draws for the two homotopy families.
struct RandomData {
  CMatrix M, N;    // (k-a) x #(f_A), (k-b) x #(f_B)
  CMatrix Abb;     // (a+b) x k
  CMatrix A;       // (a+b) x 2k = [Abb | -Abb]
  CMatrix B;       // (a+b) x k
  CMatrix C;       // k x 2k
  CVector d;       // k
  CVector epsilon; // 2k, solves A*eps = 0 and C*eps + d = 0
  Complex gamma_start, gamma_cascade;
};

/// Y_h = A + B P_h C, the homogeneous linear system whose null space carries
/// the level-h cascade plane.  P_h keeps the first h rows of C.
inline CMatrix Y_h(const RandomData& rd, int h) {
  CMatrix PhC = rd.C;
  PhC.bottomRows(PhC.rows() - h).setZero();
  return rd.A + rd.B * PhC;
}

inline RandomData initialize(const DiagonalProblem& p, Rng& rng) {
  const int k = p.k;
  for (int attempt = 0; attempt < 5; ++attempt) {
    RandomData rd;
    rd.M = rng.disk_matrix(k - p.a, p.f_A.num_polys());
    rd.N = rng.disk_matrix(k - p.b, p.f_B.num_polys());
    rd.Abb = rng.disk_matrix(p.a + p.b, k);
    rd.A = CMatrix(p.a + p.b, 2 * k);
    rd.A << rd.Abb, -rd.Abb;
    rd.B = rng.disk_matrix(p.a + p.b, k);
    rd.C = rng.disk_matrix(k, 2 * k);
    rd.d = rng.disk_vector(k);
    rd.gamma_start = rng.unit_modulus();
    rd.gamma_cascade = rng.unit_modulus();

    EpsilonResult eps = particular_solution_epsilon(rd.C, rd.d);
    if (eps.degenerate) continue;
    rd.epsilon = eps.epsilon;
    if ((rd.A * rd.epsilon).norm() > 1e-10 * (1.0 + rd.epsilon.norm()))
      continue;
    if ((rd.C * rd.epsilon + rd.d).norm() > 1e-10 * (1.0 + rd.epsilon.norm()))
      continue;
    bool full_rank = true;
    for (int h = p.h0; h <= p.hmax && full_rank; ++h)
      full_rank = numerical_rank(Y_h(rd, h)) == p.a + p.b;
    if (!full_rank) continue;
    return rd;
  }
  throw DegenerateDataError("initialize: degenerate random data after 5 draws");
}

/// Moving plane between Null Y_i and Null Y_j:
///   W_{i,j}(t, y) = epsilon + [E | t F + gamma (1-t) G] y.
struct CascadePlane {
  int i = 0, j = 0;
  CMatrix E, F, G;
  CVector epsilon;
  Complex gamma;

  CMatrix basis_at(double t) const {
    CMatrix b(E.rows(), E.cols() + F.cols());
    b.leftCols(E.cols()) = E;
    b.rightCols(F.cols()) = t * F + gamma * (1.0 - t) * G;
    return b;
  }

  AffinePlane plane_at(double t) const { return {epsilon, basis_at(t)}; }
};

inline CascadePlane cascade_plane(const RandomData& rd, int i, int j) {
  PlaneBases bases = basis_EFG(Y_h(rd, i), Y_h(rd, j), rd.C, j, i);
  CascadePlane cp;
  cp.i = i;
  cp.j = j;
  cp.E = std::move(bases.E);
  cp.F = std::move(bases.F);
  cp.G = std::move(bases.G);
  cp.epsilon = rd.epsilon;
  cp.gamma = rd.gamma_cascade;
  return cp;
}

/// Affine plane in C^{2k} carrying the product of the two witness slices:
/// offset solves [L_A(u); L_B(v)] = 0 and the basis spans the homogeneous
/// null space (m columns, orthonormal).
inline AffinePlane start_plane(const SliceSystem& L_A, const SliceSystem& L_B) {
  const Eigen::Index k = L_A.coeff.cols();
  if (L_B.coeff.cols() != k)
    throw NumericalError("start_plane: slice ambient dimensions differ");
  const Eigen::Index rows = L_A.rows() + L_B.rows();
  CMatrix stacked = CMatrix::Zero(rows, 2 * k);
  stacked.topLeftCorner(L_A.rows(), k) = L_A.coeff;
  stacked.bottomRightCorner(L_B.rows(), k) = L_B.coeff;
  CVector rhs(rows);
  rhs.head(L_A.rows()) = -L_A.offset;
  rhs.tail(L_B.rows()) = -L_B.offset;

  AffinePlane plane;
  plane.basis = null_space_basis(stacked);
  if (plane.basis.cols() != 2 * k - rows)
    throw DegenerateDataError("start_plane: rank-deficient slices");
  plane.offset = stacked.completeOrthogonalDecomposition().solve(rhs);
  return plane;
}

// --- homotopies --------------------------------------------------------

namespace detail {

inline Complex sigma_of(Complex gamma, double t) {
  return gamma * t / (gamma * t + (1.0 - t));
}

inline Complex sigma_dt(Complex gamma, double t) {
  const Complex D = gamma * t + (1.0 - t);
  return gamma / (D * D);
}

}  // namespace detail

/// Intrinsic start homotopy: SF( sigma(t)[w1 + W1 y] + (1-sigma(t))[w2 + W2 y] )
/// with sigma = gamma t / (gamma t + (1-t)), so t=1 selects the start plane
/// and t=0 the target cascade plane.
class IntrinsicStartHomotopy : public HomotopyFunction {
 public:
  IntrinsicStartHomotopy(const PolySystem& SF, AffinePlane start,
                         AffinePlane target, Complex gamma)
      : SF_(&SF), start_(std::move(start)), target_(std::move(target)),
        gamma_(gamma) {}

  int dim() const override { return static_cast<int>(start_.basis.cols()); }

  CVector point_at(const CVector& y, double t) const {
    const Complex s = detail::sigma_of(gamma_, t);
    return s * start_.embed(y) + (Complex(1.0) - s) * target_.embed(y);
  }

  CVector eval(const CVector& y, double t) const override {
    return SF_->evaluate(point_at(y, t));
  }

  CMatrix jac_y(const CVector& y, double t) const override {
    const Complex s = detail::sigma_of(gamma_, t);
    const CMatrix basis = s * start_.basis + (Complex(1.0) - s) * target_.basis;
    return SF_->jacobian(point_at(y, t)) * basis;
  }

  CVector dt(const CVector& y, double t) const override {
    const Complex ds = detail::sigma_dt(gamma_, t);
    const CVector dw = ds * (start_.embed(y) - target_.embed(y));
    return SF_->jacobian(point_at(y, t)) * dw;
  }

 private:
  const PolySystem* SF_;
  AffinePlane start_, target_;
  Complex gamma_;
};

/// Cascade homotopy H_{i,j}(t,y) = SF( W_{i,j}(t,y) ), tracked from the
/// level-i plane at t=1 to the level-j plane at t=0.
class IntrinsicCascadeHomotopy : public HomotopyFunction {
 public:
  IntrinsicCascadeHomotopy(const PolySystem& SF, CascadePlane plane)
      : SF_(&SF), plane_(std::move(plane)) {}

  int dim() const override {
    return static_cast<int>(plane_.E.cols() + plane_.F.cols());
  }

  CVector point_at(const CVector& y, double t) const {
    return plane_.epsilon + plane_.basis_at(t) * y;
  }

  CVector eval(const CVector& y, double t) const override {
    return SF_->evaluate(point_at(y, t));
  }

  CMatrix jac_y(const CVector& y, double t) const override {
    return SF_->jacobian(point_at(y, t)) * plane_.basis_at(t);
  }

  CVector dt(const CVector& y, double t) const override {
    const CVector tail = y.tail(plane_.F.cols());
    const CVector dw = (plane_.F - plane_.gamma * plane_.G) * tail;
    return SF_->jacobian(point_at(y, t)) * dw;
  }

 private:
  const PolySystem* SF_;
  CascadePlane plane_;
};

/// Extrinsic start homotopy in x = (w, z): SF rows stay fixed while the
/// linear block deforms from gamma*[L_A; L_B; z] at t=1 to the level-h
/// slack equations at t=0.
class ExtrinsicStartHomotopy : public HomotopyFunction {
 public:
  ExtrinsicStartHomotopy(const PolySystem& SF, const RandomData& rd, int k,
                         int h, const SliceSystem& L_A, const SliceSystem& L_B)
      : SF_(&SF), k_(k), m_(SF.num_polys()), gamma_(rd.gamma_start) {
    const Eigen::Index ab = rd.A.rows();
    const Eigen::Index lin = ab + k;
    target_mat_ = CMatrix::Zero(lin, 3 * k);
    target_vec_ = CVector::Zero(lin);
    CMatrix BPh = rd.B;
    BPh.rightCols(k - h).setZero();
    target_mat_.block(0, 0, ab, 2 * k) = rd.A;
    target_mat_.block(0, 2 * k, ab, k) = BPh;
    CMatrix PhC = rd.C;
    PhC.bottomRows(k - h).setZero();
    target_mat_.block(ab, 0, k, 2 * k) = -PhC;
    target_mat_.block(ab, 2 * k, k, k) = CMatrix::Identity(k, k);
    CVector Phd = rd.d;
    Phd.tail(k - h).setZero();
    target_vec_.tail(k) = -Phd;

    start_mat_ = CMatrix::Zero(lin, 3 * k);
    start_vec_ = CVector::Zero(lin);
    start_mat_.block(0, 0, L_A.rows(), k) = L_A.coeff;
    start_mat_.block(L_A.rows(), k, L_B.rows(), k) = L_B.coeff;
    start_mat_.block(ab, 2 * k, k, k) = CMatrix::Identity(k, k);
    start_vec_.head(L_A.rows()) = L_A.offset;
    start_vec_.segment(L_A.rows(), L_B.rows()) = L_B.offset;
  }

  int dim() const override { return 3 * k_; }

  CVector eval(const CVector& x, double t) const override {
    CVector out(3 * k_);
    out.head(m_) = SF_->evaluate(x.head(2 * k_));
    const CVector target = target_mat_ * x + target_vec_;
    const CVector start = start_mat_ * x + start_vec_;
    out.tail(out.size() - m_) = (1.0 - t) * target + t * gamma_ * start;
    return out;
  }

  CMatrix jac_y(const CVector& x, double t) const override {
    CMatrix J = CMatrix::Zero(3 * k_, 3 * k_);
    J.block(0, 0, m_, 2 * k_) = SF_->jacobian(x.head(2 * k_));
    J.bottomRows(3 * k_ - m_) = (1.0 - t) * target_mat_ + t * gamma_ * start_mat_;
    return J;
  }

  CVector dt(const CVector& x, double) const override {
    CVector out = CVector::Zero(3 * k_);
    const CVector target = target_mat_ * x + target_vec_;
    const CVector start = start_mat_ * x + start_vec_;
    out.tail(out.size() - m_) = -target + gamma_ * start;
    return out;
  }

 private:
  const PolySystem* SF_;
  int k_, m_;
  Complex gamma_;
  CMatrix target_mat_, start_mat_;
  CVector target_vec_, start_vec_;
};

/// Extrinsic cascade homotopy in x = (w, z):
///   [SF(w); A w + B P_i z; z - (P_j + tau P_{ji})(C w + d)]
/// with tau = t / (t + gamma (1-t)).
class ExtrinsicCascadeHomotopy : public HomotopyFunction {
 public:
  ExtrinsicCascadeHomotopy(const PolySystem& SF, const RandomData& rd, int k,
                           int i, int j)
      : SF_(&SF), k_(k), m_(SF.num_polys()), gamma_(rd.gamma_cascade),
        A_(rd.A) {
    BPi_ = rd.B;
    BPi_.rightCols(k - i).setZero();
    PjC_ = rd.C;
    PjC_.bottomRows(k - j).setZero();
    Pjd_ = rd.d;
    Pjd_.tail(k - j).setZero();
    PjiC_ = rd.C;
    PjiC_.topRows(j).setZero();
    PjiC_.bottomRows(k - i).setZero();
    Pjid_ = CVector::Zero(k);
    Pjid_.segment(j, i - j) = rd.d.segment(j, i - j);
  }

  int dim() const override { return 3 * k_; }

  CVector eval(const CVector& x, double t) const override {
    const Complex tau = this->tau(t);
    const CVector w = x.head(2 * k_);
    const CVector z = x.tail(k_);
    CVector out(3 * k_);
    out.head(m_) = SF_->evaluate(w);
    out.segment(m_, A_.rows()) = A_ * w + BPi_ * z;
    out.tail(k_) = z - (PjC_ * w + Pjd_) - tau * (PjiC_ * w + Pjid_);
    return out;
  }

  CMatrix jac_y(const CVector& x, double t) const override {
    const Complex tau = this->tau(t);
    CMatrix J = CMatrix::Zero(3 * k_, 3 * k_);
    J.block(0, 0, m_, 2 * k_) = SF_->jacobian(x.head(2 * k_));
    J.block(m_, 0, A_.rows(), 2 * k_) = A_;
    J.block(m_, 2 * k_, A_.rows(), k_) = BPi_;
    J.block(m_ + A_.rows(), 0, k_, 2 * k_) = -(PjC_ + tau * PjiC_);
    J.block(m_ + A_.rows(), 2 * k_, k_, k_) = CMatrix::Identity(k_, k_);
    return J;
  }

  CVector dt(const CVector& x, double t) const override {
    const Complex D = t + gamma_ * (1.0 - t);
    const Complex dtau = gamma_ / (D * D);
    CVector out = CVector::Zero(3 * k_);
    out.tail(k_) = -dtau * (PjiC_ * x.head(2 * k_) + Pjid_);
    return out;
  }

 private:
  Complex tau(double t) const { return t / (t + gamma_ * (1.0 - t)); }

  const PolySystem* SF_;
  int k_, m_;
  Complex gamma_;
  CMatrix A_, BPi_, PjC_, PjiC_;
  CVector Pjd_, Pjid_;
};

// --- classification and bookkeeping ------------------------------------

struct RunOptions {
  int threads = 1;
  double classify_tol = 1e-6;
  TrackSettings track;
  bool do_filter = true;
};

struct StageRecord {
  int level_from = 0;  // -1 denotes the witness start plane
  int level_to = 0;
  int paths = 0;
  int converged = 0;
  int diverged = 0;
  int failed = 0;  // step collapse / max steps
  double seconds = 0.0;
};

struct WitnessSuperset {
  std::map<int, std::vector<CVector>> candidates;  // per-dim, collapsed to C^k
  std::map<int, std::vector<CVector>> candidate_pairs;  // pre-collapse, C^{2k}
  std::map<int, int> junk_counts;                  // filter removals per dim
  std::map<int, int> suspect_counts;
  std::map<int, int> offdiagonal_counts;           // dropped before collapse
  std::map<int, int> nonsolution_counts;
  std::map<int, SliceSystem> level_slices;         // per-dim slice in C^k
  std::map<int, WitnessSet> witness_sets;          // built from kept points
  std::vector<StageRecord> stages;
  int variable_count = 0;  // m (intrinsic) or 3k (extrinsic)
  int prefix_vs_last_mismatches = 0;
  int slack_formula_mismatches = 0;  // extrinsic z vs P_j(Cw+d) cross-check

  int total_paths() const {
    int n = 0;
    for (const StageRecord& s : stages) n += s.paths;
    return n;
  }
};

/// Slack value z = P_j(C w + d): infinity norm of the first j entries.
inline double slack_prefix_norm(const RandomData& rd, const CVector& w, int j) {
  if (j == 0) return 0.0;
  return (rd.C * w + rd.d).head(j).lpNorm<Eigen::Infinity>();
}

inline double slack_last_entry(const RandomData& rd, const CVector& w, int j) {
  if (j == 0) return 0.0;
  return std::abs((rd.C.row(j - 1) * w)(0) + rd.d(j - 1));
}

/// Level-j slice in C^k: rows of P_j(C w + d) restricted to the diagonal
/// w = (x, x), i.e. (C_u + C_v) x + d over the first j rows.
inline SliceSystem level_slice(const RandomData& rd, int k, int j) {
  SliceSystem s;
  s.coeff = rd.C.leftCols(k).topRows(j) + rd.C.rightCols(k).topRows(j);
  s.offset = rd.d.head(j);
  return s;
}

/// Greedy multiset matching distance: repeatedly pairs the globally closest
/// points; infinity when the multisets have different sizes.
inline double multiset_match_distance(std::vector<CVector> lhs,
                                      std::vector<CVector> rhs) {
  if (lhs.size() != rhs.size())
    return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  while (!lhs.empty()) {
    size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < lhs.size(); ++i)
      for (size_t j = 0; j < rhs.size(); ++j) {
        const double d = (lhs[i] - rhs[j]).norm();
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    worst = std::max(worst, best);
    lhs.erase(lhs.begin() + bi);
    rhs.erase(rhs.begin() + bj);
  }
  return worst;
}

namespace detail {

struct ClassifiedLevel {
  std::vector<CVector> candidate_w;  // in C^{2k}
  std::vector<int> nonsolution_indices;
};

// Full-prefix slack test, hardened by Gauss-Newton refinement onto the
// slice-augmented system for points in the ambiguous band, plus the
// cross-check against the z_j-only test.
template <class RefineFn>
ClassifiedLevel classify_level(const RandomData& rd,
                               const std::vector<CVector>& ws, int j,
                               double tol, RefineFn&& refine_w,
                               int* mismatches) {
  ClassifiedLevel out;
  for (size_t idx = 0; idx < ws.size(); ++idx) {
    CVector w = ws[idx];
    double scale = 1.0 + w.norm();
    double zfull = slack_prefix_norm(rd, w, j);
    if (zfull > tol * scale && zfull <= 1e-4 * scale) {
      w = refine_w(w);
      scale = 1.0 + w.norm();
      zfull = slack_prefix_norm(rd, w, j);
    }
    const bool cand_full = zfull <= tol * scale;
    const bool cand_last = slack_last_entry(rd, w, j) <= tol * scale;
    if (cand_full != cand_last && mismatches) ++*mismatches;
    if (cand_full)
      out.candidate_w.push_back(w);
    else
      out.nonsolution_indices.push_back(static_cast<int>(idx));
  }
  return out;
}

struct CollapseResult {
  std::vector<CVector> points;  // (u+v)/2 in C^k
  int dropped = 0;
};

// Diagonal collapse: candidates must lie on A x B near the diagonal.
inline CollapseResult collapse_candidates(const DiagonalProblem& p,
                                          const std::vector<CVector>& ws,
                                          double tol = 1e-6) {
  CollapseResult out;
  for (const CVector& w : ws) {
    const CVector u = w.head(p.k);
    const CVector v = w.tail(p.k);
    const double scale = 1.0 + w.norm();
    if ((u - v).norm() > tol * scale ||
        p.f_A.evaluate(u).norm() > 1e-6 * scale ||
        p.f_B.evaluate(v).norm() > 1e-6 * scale) {
      ++out.dropped;
      continue;
    }
    out.points.push_back(0.5 * (u + v));
  }
  return out;
}

inline StageRecord summarize_stage(const std::vector<PathResult>& results,
                                   int from, int to, double seconds) {
  StageRecord rec;
  rec.level_from = from;
  rec.level_to = to;
  rec.paths = static_cast<int>(results.size());
  for (const PathResult& r : results) {
    if (r.status == PathStatus::Converged)
      ++rec.converged;
    else if (r.status == PathStatus::Diverged)
      ++rec.diverged;
    else
      ++rec.failed;
  }
  rec.seconds = seconds;
  return rec;
}

// Filter + witness-set assembly shared by the two cascade drivers.
inline void absorb_level(const DiagonalProblem& p, const RandomData& rd,
                         const RunOptions& opt, int j,
                         const std::vector<CVector>& candidate_w,
                         int nonsolutions, WitnessSuperset& out) {
  CollapseResult col = collapse_candidates(p, candidate_w);
  out.candidate_pairs[j] = candidate_w;
  out.offdiagonal_counts[j] = col.dropped;
  out.nonsolution_counts[j] = nonsolutions;
  out.level_slices[j] = level_slice(rd, p.k, j);

  std::vector<const WitnessSet*> higher;
  for (auto& [dim, ws] : out.witness_sets)
    if (dim > j) higher.push_back(&ws);

  FilterOutcome f;
  if (opt.do_filter && !higher.empty()) {
    f = filter(col.points, higher, opt.classify_tol,
               p.seed ^ 0xd1a60u ^ static_cast<std::uint64_t>(j), opt.track,
               opt.threads);
  } else {
    f.kept = col.points;
    f.suspect.assign(f.kept.size(), false);
  }
  out.candidates[j] = f.kept;
  out.junk_counts[j] = static_cast<int>(f.removed.size());
  out.suspect_counts[j] = 0;
  for (bool s : f.suspect)
    if (s) ++out.suspect_counts[j];

  if (!f.kept.empty()) {
    WitnessSet ws;
    ws.ambient_dim = p.k;
    ws.dim = j;
    ws.degree = static_cast<int>(f.kept.size());
    ws.system = stack_systems(p.f_A, p.f_B);
    ws.slice = out.level_slices[j];
    ws.points = f.kept;
    out.witness_sets[j] = std::move(ws);
  }
}

inline double seconds_since(
    const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace detail

/// Product of the two witness point sets, stacked into C^{2k}.
inline std::vector<CVector> product_points(const DiagonalProblem& p) {
  std::vector<CVector> pts;
  pts.reserve(p.wA.points.size() * p.wB.points.size());
  for (const CVector& alpha : p.wA.points)
    for (const CVector& beta : p.wB.points) {
      CVector w(2 * p.k);
      w.head(p.k) = alpha;
      w.tail(p.k) = beta;
      pts.push_back(w);
    }
  return pts;
}

/// Intrinsic diagonal cascade.  Stages: the start homotopy from the witness
/// product plane onto the level-hmax plane, then one cascade homotopy per
/// level from hmax down to h0, with classification and filtering at each
/// level.  One full restart with fresh random data on path failure.
inline WitnessSuperset run_cascade(const DiagonalProblem& p,
                                   const RunOptions& opt = {}) {
  p.validate();
  Rng rng(p.seed);

  for (int attempt = 0; attempt < 2; ++attempt) {
    const RandomData rd = initialize(p, rng);
    const PolySystem SF = combine(p.f_A, p.f_B, rd.M, rd.N);
    if (SF.num_polys() != p.m())
      throw NumericalError("combined system is not square in y");

    WitnessSuperset out;
    out.variable_count = p.m();
    bool any_failed = false;

    // Start homotopy: witness product plane -> level-hmax plane.  The
    // target basis [E F] is shared with the first cascade stage so no
    // coordinate transform is needed in between.
    const AffinePlane S = start_plane(p.wA.slice, p.wB.slice);
    CascadePlane plane = cascade_plane(rd, p.hmax, p.hmax - 1);
    const AffinePlane target{rd.epsilon, plane.basis_at(1.0)};

    std::vector<CVector> start_y;
    for (const CVector& w : product_points(p)) start_y.push_back(S.project(w, 1e-6));

    auto t0 = std::chrono::steady_clock::now();
    IntrinsicStartHomotopy H0(SF, S, target, rd.gamma_start);
    std::vector<PathResult> results =
        track_all(H0, start_y, opt.track, opt.threads);
    out.stages.push_back(detail::summarize_stage(results, -1, p.hmax,
                                                 detail::seconds_since(t0)));
    for (const PathResult& r : results)
      any_failed |= r.status == PathStatus::StepSizeCollapse ||
                    r.status == PathStatus::MaxSteps;

    // Endpoints solve E_hmax; classify there (witness points above hmax
    // cannot exist, so candidates at this level are recorded as junk) and
    // recycle the nonsolutions down the cascade.
    AffinePlane level_plane = target;
    auto refine_noop = [](const CVector& w) { return w; };
    std::vector<CVector> endpoint_w;
    std::vector<CVector> endpoint_y;
    for (const PathResult& r : results)
      if (r.status == PathStatus::Converged) {
        endpoint_y.push_back(r.endpoint);
        endpoint_w.push_back(level_plane.embed(r.endpoint));
      }
    detail::ClassifiedLevel top = detail::classify_level(
        rd, endpoint_w, p.hmax, opt.classify_tol, refine_noop,
        &out.prefix_vs_last_mismatches);
    out.junk_counts[p.hmax] = static_cast<int>(top.candidate_w.size());
    out.nonsolution_counts[p.hmax] =
        static_cast<int>(top.nonsolution_indices.size());

    std::vector<CVector> z_y;
    for (int idx : top.nonsolution_indices) z_y.push_back(endpoint_y[idx]);

    bool stage_dead = false;
    for (int j = p.hmax - 1; j >= p.h0 && !z_y.empty(); --j) {
      const int i = j + 1;
      if (i != plane.i || j != plane.j) {
        CascadePlane next = cascade_plane(rd, i, j);
        // Transform: previous t=0 basis [E | gamma G] and the new t=1 basis
        // [E F] span the same plane epsilon + Null Y_i.
        const AffinePlane old_plane = level_plane;
        const AffinePlane new_plane{rd.epsilon, next.basis_at(1.0)};
        for (CVector& y : z_y) {
          const CVector w = old_plane.embed(y);
          y = new_plane.project(w, 1e-8);
          if ((new_plane.embed(y) - w).norm() > 1e-10 * (1.0 + w.norm()))
            throw NumericalError("transform: basis inconsistency");
        }
        plane = std::move(next);
      }

      auto ts = std::chrono::steady_clock::now();
      IntrinsicCascadeHomotopy Hij(SF, plane);
      results = track_all(Hij, z_y, opt.track, opt.threads);
      out.stages.push_back(detail::summarize_stage(results, i, j,
                                                   detail::seconds_since(ts)));
      int live = 0;
      for (const PathResult& r : results) {
        any_failed |= r.status == PathStatus::StepSizeCollapse ||
                      r.status == PathStatus::MaxSteps;
        if (r.status != PathStatus::StepSizeCollapse &&
            r.status != PathStatus::MaxSteps)
          ++live;
      }
      if (live == 0 && !results.empty()) stage_dead = true;

      level_plane = plane.plane_at(0.0);
      endpoint_w.clear();
      endpoint_y.clear();
      for (const PathResult& r : results)
        if (r.status == PathStatus::Converged) {
          endpoint_y.push_back(r.endpoint);
          endpoint_w.push_back(level_plane.embed(r.endpoint));
        }

      // Ambiguous slack values are re-tested after Gauss-Newton onto the
      // slice-augmented system restricted to the t=0 plane.
      auto refine_on_slice = [&](const CVector& w) {
        CVector y = level_plane.project(w, 1e-6);
        auto eval = [&](const CVector& yy) {
          const CVector ww = level_plane.embed(yy);
          CVector r(SF.num_polys() + j);
          r.head(SF.num_polys()) = SF.evaluate(ww);
          r.tail(j) = (rd.C * ww + rd.d).head(j);
          return r;
        };
        auto jac = [&](const CVector& yy) {
          const CVector ww = level_plane.embed(yy);
          CMatrix J(SF.num_polys() + j, yy.size());
          J.topRows(SF.num_polys()) = SF.jacobian(ww) * level_plane.basis;
          J.bottomRows(j) = (rd.C * level_plane.basis).topRows(j);
          return J;
        };
        return level_plane.embed(gauss_newton_refine(eval, jac, y).point);
      };

      detail::ClassifiedLevel cl = detail::classify_level(
          rd, endpoint_w, j, opt.classify_tol, refine_on_slice,
          &out.prefix_vs_last_mismatches);
      detail::absorb_level(p, rd, opt, j, cl.candidate_w,
                           static_cast<int>(cl.nonsolution_indices.size()),
                           out);
      z_y.clear();
      for (int idx : cl.nonsolution_indices) z_y.push_back(endpoint_y[idx]);
    }

    if (stage_dead && attempt == 0) continue;  // restart with fresh gamma
    if (stage_dead)
      throw CascadeFailure("cascade stage lost all paths after restart");
    if (any_failed && attempt == 0) continue;
    return out;
  }
  throw CascadeFailure("unreachable");
}

/// Extrinsic baseline: the same cascade tracked in (w, z) with explicit
/// slack equations; classification reads z directly and cross-checks the
/// slack formula.
inline WitnessSuperset run_cascade_extrinsic(const DiagonalProblem& p,
                                             const RunOptions& opt = {}) {
  p.validate();
  Rng rng(p.seed);
  const int k = p.k;

  for (int attempt = 0; attempt < 2; ++attempt) {
    const RandomData rd = initialize(p, rng);
    const PolySystem SF = combine(p.f_A, p.f_B, rd.M, rd.N);

    WitnessSuperset out;
    out.variable_count = 3 * k;
    bool any_failed = false;

    std::vector<CVector> starts;
    for (const CVector& w : product_points(p)) {
      CVector x = CVector::Zero(3 * k);
      x.head(2 * k) = w;
      starts.push_back(x);
    }

    auto t0 = std::chrono::steady_clock::now();
    ExtrinsicStartHomotopy H0(SF, rd, k, p.hmax, p.wA.slice, p.wB.slice);
    std::vector<PathResult> results =
        track_all(H0, starts, opt.track, opt.threads);
    out.stages.push_back(detail::summarize_stage(results, -1, p.hmax,
                                                 detail::seconds_since(t0)));
    for (const PathResult& r : results)
      any_failed |= r.status == PathStatus::StepSizeCollapse ||
                    r.status == PathStatus::MaxSteps;

    auto classify_x = [&](const std::vector<PathResult>& rs, int i, int j,
                          std::vector<CVector>& cand_w,
                          std::vector<CVector>& nonsol_x) {
      // The endpoints solve the t=0 fiber of the current stage's homotopy
      // (the level-j system); refinement stays on that square system.
      ExtrinsicCascadeHomotopy Ej(SF, rd, k, i, j);
      auto refine_ej = [&](CVector x) {
        auto eval = [&](const CVector& xx) { return Ej.eval(xx, 0.0); };
        auto jac = [&](const CVector& xx) { return Ej.jac_y(xx, 0.0); };
        return newton_refine(eval, jac, std::move(x)).point;
      };
      for (const PathResult& r : rs) {
        if (r.status != PathStatus::Converged) continue;
        CVector x = r.endpoint;
        double scale = 1.0 + x.head(2 * k).norm();
        double zn =
            j == 0 ? 0.0 : x.tail(k).head(j).lpNorm<Eigen::Infinity>();
        if (zn > opt.classify_tol * scale && zn <= 1e-4 * scale) {
          x = refine_ej(x);
          scale = 1.0 + x.head(2 * k).norm();
          zn = j == 0 ? 0.0 : x.tail(k).head(j).lpNorm<Eigen::Infinity>();
        }
        const bool cand = zn <= opt.classify_tol * scale;
        const bool cand_last =
            j == 0 || std::abs(x(2 * k + j - 1)) <= opt.classify_tol * scale;
        if (cand != cand_last) ++out.prefix_vs_last_mismatches;
        // Cross-check the slack coordinates against the formula
        // z = P_j(C w + d) they are constrained to at t=0.
        const double formula = slack_prefix_norm(rd, x.head(2 * k), j);
        if (std::abs(formula - zn) > 1e-6 * scale)
          ++out.slack_formula_mismatches;
        if (cand)
          cand_w.push_back(x.head(2 * k));
        else
          nonsol_x.push_back(x);
      }
    };

    std::vector<CVector> cand_w, z_x;
    classify_x(results, p.hmax, p.hmax, cand_w, z_x);
    out.junk_counts[p.hmax] = static_cast<int>(cand_w.size());
    out.nonsolution_counts[p.hmax] = static_cast<int>(z_x.size());

    bool stage_dead = false;
    for (int j = p.hmax - 1; j >= p.h0 && !z_x.empty(); --j) {
      const int i = j + 1;
      auto ts = std::chrono::steady_clock::now();
      ExtrinsicCascadeHomotopy Hij(SF, rd, k, i, j);
      results = track_all(Hij, z_x, opt.track, opt.threads);
      out.stages.push_back(detail::summarize_stage(results, i, j,
                                                   detail::seconds_since(ts)));
      int live = 0;
      for (const PathResult& r : results) {
        any_failed |= r.status == PathStatus::StepSizeCollapse ||
                      r.status == PathStatus::MaxSteps;
        if (r.status != PathStatus::StepSizeCollapse &&
            r.status != PathStatus::MaxSteps)
          ++live;
      }
      if (live == 0 && !results.empty()) stage_dead = true;

      cand_w.clear();
      z_x.clear();
      classify_x(results, i, j, cand_w, z_x);
      detail::absorb_level(p, rd, opt, j, cand_w,
                           static_cast<int>(z_x.size()), out);
    }

    if (stage_dead && attempt == 0) continue;
    if (stage_dead)
      throw CascadeFailure("extrinsic cascade lost all paths after restart");
    if (any_failed && attempt == 0) continue;
    return out;
  }
  throw CascadeFailure("unreachable");
}

enum class PrecheckResult { Proceed, BContainedInA };

/// Homotopy membership test of a generic point of B against A: when it
/// passes, A cap B = B and the cascade is skipped.
inline PrecheckResult containment_precheck(const DiagonalProblem& p,
                                           const RunOptions& opt = {}) {
  Rng rng(p.seed ^ 0xc0417a17u);
  if (p.wB.points.empty()) throw NumericalError("empty witness set for B");
  const bool inside =
      member(p.wA, p.wB.points.front(), opt.classify_tol, rng, opt.track,
             opt.threads);
  return inside ? PrecheckResult::BContainedInA : PrecheckResult::Proceed;
}

}  // namespace diaghom

#endif  // DIAGHOM_DIAGONAL_HPP
