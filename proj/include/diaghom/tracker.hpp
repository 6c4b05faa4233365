#ifndef DIAGHOM_TRACKER_HPP
#define DIAGHOM_TRACKER_HPP

#include "diaghom/linalg.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace diaghom {

/// Square homotopy H(y,t) = 0 tracked from t=1 to t=0.  Implementations are
/// immutable and safely shareable across tracking workers.
class HomotopyFunction {
 public:
  virtual ~HomotopyFunction() = default;
  virtual int dim() const = 0;
  virtual CVector eval(const CVector& y, double t) const = 0;
  virtual CMatrix jac_y(const CVector& y, double t) const = 0;
  virtual CVector dt(const CVector& y, double t) const = 0;
};

struct TrackSettings {
  double newton_tol = 1e-9;
  double refine_tol = 1e-11;
  double min_step = 1e-8;
  double max_step = 0.1;
  double initial_step = 0.05;
  int max_newton_iters = 3;
  double divergence_norm = 1e8;
  int max_steps = 10000;
};

enum class PathStatus { Converged, Diverged, StepSizeCollapse, MaxSteps };

inline const char* to_string(PathStatus s) {
  switch (s) {
    case PathStatus::Converged: return "Converged";
    case PathStatus::Diverged: return "Diverged";
    case PathStatus::StepSizeCollapse: return "StepSizeCollapse";
    case PathStatus::MaxSteps: return "MaxSteps";
  }
  return "?";
}

struct PathResult {
  PathStatus status = PathStatus::StepSizeCollapse;
  CVector endpoint;
  double residual = 0.0;
  int steps_taken = 0;
  int start_index = 0;
};

namespace detail {

// Newton correction at fixed t; returns false when the iteration fails to
// reach tol (relative) within max_iters.
inline bool newton_at_t(const HomotopyFunction& H, double t, CVector& y,
                        double tol, int max_iters) {
  for (int it = 0; it < max_iters; ++it) {
    CVector r = H.eval(y, t);
    if (!r.allFinite()) return false;
    if (r.norm() <= tol * (1.0 + y.norm())) return true;
    Eigen::PartialPivLU<CMatrix> lu(H.jac_y(y, t));
    if (!(lu.rcond() > 1e-15)) return false;
    CVector step = lu.solve(r);
    if (!step.allFinite()) return false;
    y -= step;
  }
  return H.eval(y, t).norm() <= tol * (1.0 + y.norm());
}

// Newton at fixed t run to a step-size stopping rule.  Near a singular
// endpoint the residual scales like the square of the position error, so a
// residual test leaves the position orders of magnitude less accurate than
// the regular fiber allows; iterating until the correction itself is at
// machine scale recovers full position accuracy.
inline bool newton_position_at_t(const HomotopyFunction& H, double t,
                                 CVector& y, int max_iters) {
  for (int it = 0; it < max_iters; ++it) {
    CVector r = H.eval(y, t);
    if (!r.allFinite()) return false;
    Eigen::PartialPivLU<CMatrix> lu(H.jac_y(y, t));
    if (!(lu.rcond() > 1e-15)) return false;
    CVector step = lu.solve(r);
    if (!step.allFinite()) return false;
    y -= step;
    if (step.norm() <= 1e-14 * (1.0 + y.norm()))
      return H.eval(y, t).norm() <= 1e-8 * (1.0 + y.norm());
  }
  return false;
}

// A path limit can sit where the t=0 fiber is singular (e.g. a point of a
// higher-dimensional solution set): plain Newton at t=0 then slides along
// that set.  The fibers at t > 0 are regular, so sample the path at
// geometrically shrinking t and sum the geometric tail of the differences.
inline bool endgame_extrapolate(const HomotopyFunction& H, CVector y,
                                double t_start, double /*tol*/, CVector* out) {
  double ts = (t_start > 1e-13 && t_start < 1e-4) ? t_start : 1e-4;
  std::vector<CVector> samples;
  for (; ts >= 1e-13; ts *= 0.1) {
    if (!newton_position_at_t(H, ts, y, 60)) break;
    samples.push_back(y);
  }
  const size_t n = samples.size();
  if (n < 3) return false;
  const CVector d1 = samples[n - 2] - samples[n - 3];
  const CVector d2 = samples[n - 1] - samples[n - 2];
  const double n1 = d1.norm(), n2 = d2.norm();
  CVector y_star = samples[n - 1];
  if (n1 > 0.0 && n2 / n1 < 0.95)
    y_star += d2 * ((n2 / n1) / (1.0 - n2 / n1));
  *out = y_star;
  return true;
}

// Shared tail of track_path: refine at t=0, fall back to the extrapolation
// endgame when the endpoint fiber is near-singular, and classify the result.
inline void finish_path(const HomotopyFunction& H, const CVector& y, double t,
                        const TrackSettings& s, PathResult& res) {
  CVector y_end = y;
  const bool refined = newton_at_t(H, 0.0, y_end, s.refine_tol, 20);
  if (!refined) y_end = y;
  double resid = H.eval(y_end, 0.0).norm();

  Eigen::PartialPivLU<CMatrix> lu(H.jac_y(y_end, 0.0));
  if (!(lu.rcond() > 1e-8)) {
    CVector y_eg;
    if (endgame_extrapolate(H, y, t, s.refine_tol, &y_eg)) {
      const double r_eg = H.eval(y_eg, 0.0).norm();
      if (r_eg <= s.refine_tol * (1.0 + y_eg.norm())) {
        y_end = y_eg;
        resid = r_eg;
      }
    }
  }

  res.endpoint = y_end;
  res.residual = resid;
  if (y_end.norm() > s.divergence_norm) {
    res.status = PathStatus::Diverged;
  } else if (resid <= s.refine_tol * (1.0 + y_end.norm())) {
    res.status = PathStatus::Converged;
  } else {
    // Reached the end of the path but Newton did not certify the endpoint;
    // flagged rather than silently accepted.
    res.status = PathStatus::StepSizeCollapse;
  }
}

}  // namespace detail

/// First-order (Euler) predictor + Newton corrector with adaptive step.
/// t decreases monotonically from 1 to 0; the final endpoint is polished by
/// a full Newton run at t=0.
inline PathResult track_path(const HomotopyFunction& H, CVector y,
                             const TrackSettings& s = {}) {
  PathResult res;
  res.endpoint = y;

  // Start solutions are expected on the t=1 fiber; correct them first so
  // slightly loose witness residuals do not derail the first steps.
  if (!detail::newton_at_t(H, 1.0, y, s.newton_tol, 10)) {
    res.status = PathStatus::StepSizeCollapse;
    res.endpoint = y;
    res.residual = H.eval(y, 1.0).norm();
    return res;
  }

  double t = 1.0;
  double h = s.initial_step;
  int streak = 0;

  while (t > 0.0) {
    if (res.steps_taken >= s.max_steps) {
      res.status = PathStatus::MaxSteps;
      res.endpoint = y;
      res.residual = H.eval(y, t).norm();
      return res;
    }
    ++res.steps_taken;
    h = std::min(h, t);
    double t_next = t - h;
    if (t_next < 1e-14) t_next = 0.0;

    // Tangent predictor: jac_y * y' = -dt.
    CVector y_pred = y;
    {
      Eigen::PartialPivLU<CMatrix> lu(H.jac_y(y, t));
      if (lu.rcond() > 1e-15) {
        CVector yd = lu.solve(-H.dt(y, t));
        if (yd.allFinite()) y_pred = y - h * yd;
      }
    }

    CVector y_corr = y_pred;
    const bool ok = detail::newton_at_t(H, t_next, y_corr, s.newton_tol,
                                        s.max_newton_iters);
    if (ok && y_corr.norm() <= s.divergence_norm) {
      y = y_corr;
      t = t_next;
      if (++streak >= 5) {
        h = std::min(h * 1.5, s.max_step);
        streak = 0;
      }
      continue;
    }
    if (y_pred.norm() > s.divergence_norm || y.norm() > s.divergence_norm) {
      res.status = PathStatus::Diverged;
      res.endpoint = y;
      res.residual = H.eval(y, t).norm();
      return res;
    }
    streak = 0;
    h *= 0.5;
    if (h < s.min_step) {
      // Step size collapsed near the end of the path: hand over to the
      // finishing phase (direct Newton at t=0, or the extrapolation
      // endgame for near-singular endpoints).
      detail::finish_path(H, y, t, s, res);
      return res;
    }
  }

  detail::finish_path(H, y, t, s, res);
  return res;
}

/// Tracks every start point; results are positionally aligned with the
/// starts and independent of worker count.
inline std::vector<PathResult> track_all(const HomotopyFunction& H,
                                         const std::vector<CVector>& starts,
                                         const TrackSettings& s = {},
                                         int threads = 1) {
  std::vector<PathResult> out(starts.size());
  auto work = [&](size_t i) {
    out[i] = track_path(H, starts[i], s);
    out[i].start_index = static_cast<int>(i);
  };
  if (threads <= 1 || starts.size() <= 1) {
    for (size_t i = 0; i < starts.size(); ++i) work(i);
    return out;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  const int n = std::min<int>(threads, static_cast<int>(starts.size()));
  pool.reserve(n);
  for (int w = 0; w < n; ++w)
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < starts.size();
           i = next.fetch_add(1))
        work(i);
    });
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace diaghom

#endif  // DIAGHOM_TRACKER_HPP
