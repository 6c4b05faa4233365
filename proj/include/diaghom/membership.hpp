#ifndef DIAGHOM_MEMBERSHIP_HPP
#define DIAGHOM_MEMBERSHIP_HPP

#include "diaghom/tracker.hpp"
#include "diaghom/witness.hpp"

#include <limits>
#include <memory>
#include <vector>

namespace diaghom {

struct MembershipInconclusive : NumericalError {
  using NumericalError::NumericalError;
};

/// Homotopy moving a component's slice: [R*f(x); sigma(t)*L1(x) +
/// (1-sigma(t))*L2(x)] with sigma = gamma*t / (gamma*t + (1-t)).  The slice
/// block is linear in sigma, so the path parameter enters through one
/// rational reparameterization only.
class SliceMoveHomotopy : public HomotopyFunction {
 public:
  SliceMoveHomotopy(const PolySystem& f, CMatrix R, SliceSystem from,
                    SliceSystem to, Complex gamma)
      : f_(&f), R_(std::move(R)), from_(std::move(from)), to_(std::move(to)),
        gamma_(gamma), k_(f.num_vars()) {}

  int dim() const override { return k_; }

  CVector eval(const CVector& x, double t) const override {
    const Complex s = sigma(t);
    CVector out(k_);
    out.head(R_.rows()) = R_ * f_->evaluate(x);
    out.tail(from_.rows()) =
        s * from_.evaluate(x) + (Complex(1.0) - s) * to_.evaluate(x);
    return out;
  }

  CMatrix jac_y(const CVector& x, double t) const override {
    const Complex s = sigma(t);
    CMatrix J(k_, k_);
    J.topRows(R_.rows()) = R_ * f_->jacobian(x);
    J.bottomRows(from_.rows()) =
        s * from_.coeff + (Complex(1.0) - s) * to_.coeff;
    return J;
  }

  CVector dt(const CVector& x, double t) const override {
    const Complex D = gamma_ * t + (1.0 - t);
    const Complex ds = gamma_ / (D * D);
    CVector out = CVector::Zero(k_);
    out.tail(from_.rows()) = ds * (from_.evaluate(x) - to_.evaluate(x));
    return out;
  }

 private:
  Complex sigma(double t) const {
    return gamma_ * t / (gamma_ * t + (1.0 - t));
  }

  const PolySystem* f_;
  CMatrix R_;
  SliceSystem from_, to_;
  Complex gamma_;
  int k_;
};

/// Homotopy membership test: move the target set's slice to a fresh generic
/// slice through the query point and check whether some witness point lands
/// on the query.  Deterministic given the rng state.
inline bool member(const WitnessSet& target, const CVector& point,
                   double tol, Rng& rng, const TrackSettings& ts = {},
                   int threads = 1, double* distance_out = nullptr) {
  if (distance_out) *distance_out = std::numeric_limits<double>::infinity();
  if (point.size() != target.ambient_dim)
    throw NumericalError("member: point dimension mismatch");
  // Fast rejection: a point that does not solve the system is not on the
  // component.
  if (target.system.evaluate(point).norm() > 1e-4) return false;
  if (target.dim == 0) {
    for (const CVector& w : target.points) {
      const double d = (w - point).norm();
      if (distance_out) *distance_out = std::min(*distance_out, d);
      if (d <= tol) return true;
    }
    return false;
  }

  const int k = target.ambient_dim;
  const int codim = k - target.dim;

  for (int attempt = 0; attempt < 2; ++attempt) {
    const CMatrix R = rng.disk_matrix(codim, target.system.num_polys());
    SliceSystem through;
    through.coeff = orthonormalize_rows(rng.disk_matrix(target.dim, k));
    through.offset = -(through.coeff * point);
    const Complex gamma = rng.unit_modulus();

    SliceMoveHomotopy H(target.system, R, target.slice, through, gamma);
    const std::vector<CVector> starts(target.points.begin(),
                                      target.points.end());
    const std::vector<PathResult> results = track_all(H, starts, ts, threads);

    bool any_failed = false;
    double best = std::numeric_limits<double>::infinity();
    for (const PathResult& r : results) {
      if (r.status == PathStatus::Converged)
        best = std::min(best, (r.endpoint - point).norm());
      else if (r.status != PathStatus::Diverged)
        any_failed = true;
    }
    if (distance_out) *distance_out = best;
    if (best <= tol) return true;
    if (!any_failed) return false;
    // retry once with a fresh slice before giving up
  }
  throw MembershipInconclusive(
      "membership test paths failed after slice retry");
}

struct FilterOutcome {
  std::vector<CVector> kept;
  std::vector<bool> suspect;  // aligned with kept
  std::vector<CVector> removed;
};

/// Filter stage: a candidate is kept iff it is a member of none of the
/// higher-dimensional witness sets.  Inconclusive memberships keep the point
/// flagged Suspect rather than silently deciding.
inline FilterOutcome filter(const std::vector<CVector>& candidates,
                            const std::vector<const WitnessSet*>& higher,
                            double tol, std::uint64_t seed,
                            const TrackSettings& ts = {}, int threads = 1) {
  FilterOutcome out;
  for (size_t i = 0; i < candidates.size(); ++i) {
    bool junk = false;
    bool suspect = false;
    for (size_t h = 0; h < higher.size() && !junk; ++h) {
      Rng rng(seed + 0x9e3779b97f4a7c15ull * (i + 1) + h);
      try {
        junk = member(*higher[h], candidates[i], tol, rng, ts, threads);
      } catch (const MembershipInconclusive&) {
        suspect = true;
      }
    }
    if (junk) {
      out.removed.push_back(candidates[i]);
    } else {
      out.kept.push_back(candidates[i]);
      out.suspect.push_back(suspect);
    }
  }
  return out;
}

}  // namespace diaghom

#endif  // DIAGHOM_MEMBERSHIP_HPP
