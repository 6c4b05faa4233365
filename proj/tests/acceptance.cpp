// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure.  Criteria cover the two worked examples, the intrinsic/extrinsic
// agreement, the plane-pencil lemma suites, variable counts, timing
// direction, numerics invariants and degenerate inputs.

#include "diaghom/fixtures.hpp"
#include "diaghom/report.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

using namespace diaghom;

namespace {

int failures = 0;

void criterion(int n, const std::string& what, bool ok,
               const std::string& detail = "") {
  std::printf("criterion %d: %s — %s%s%s\n", n, ok ? "PASS" : "FAIL",
              what.c_str(), detail.empty() ? "" : ": ",
              detail.c_str());
  if (!ok) ++failures;
}

double seconds(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// ---- criteria 1, 2: cylinder/sphere ------------------------------------

void criteria_example1() {
  const DiagonalProblem p = make_example1(7);
  const auto t0 = std::chrono::steady_clock::now();
  const WitnessSuperset ws = run_cascade(p);
  const double elapsed = seconds(t0);

  bool ok1 = ws.candidates.count(1) && ws.candidates.at(1).size() == 4;
  double max_resid = 0.0, max_uv = 0.0;
  if (ok1) {
    const SliceSystem& slice = ws.level_slices.at(1);
    for (const CVector& x : ws.candidates.at(1)) {
      max_resid = std::max(max_resid, p.f_A.evaluate(x).norm());
      max_resid = std::max(max_resid, p.f_B.evaluate(x).norm());
      max_resid = std::max(max_resid, slice.evaluate(x).norm());
    }
    for (const CVector& w : ws.candidate_pairs.at(1))
      max_uv = std::max(max_uv, (w.head(3) - w.tail(3)).norm());
    ok1 = max_resid <= 1e-8 && max_uv <= 1e-6 && elapsed < 5.0;
  }
  criterion(1, "cylinder/sphere: 4 degree-curve witness candidates", ok1,
            "residual " + fmt(max_resid) + ", |u-v| " + fmt(max_uv) + ", " +
                fmt(elapsed) + "s");

  bool ok2 = ws.stages.size() == 2;
  for (const StageRecord& s : ws.stages)
    ok2 = ok2 && s.paths == 4 && s.converged == 4;
  criterion(2, "cylinder/sphere: 2 stages, 4 paths each, all converged", ok2,
            std::to_string(ws.stages.size()) + " stages");
}

// ---- criterion 3: two planes through the origin -------------------------

void criterion_example2() {
  const DiagonalProblem p = make_example2(7);
  const auto t0 = std::chrono::steady_clock::now();
  const WitnessSuperset ws = run_cascade(p);
  const double elapsed = seconds(t0);

  const bool dim1_empty =
      ws.candidates.count(1) == 0 || ws.candidates.at(1).empty();
  const bool dim0_origin = ws.candidates.count(0) &&
                           ws.candidates.at(0).size() == 1 &&
                           ws.candidates.at(0)[0].norm() <= 1e-6;
  const bool ok = ws.stages.size() == 3 && dim1_empty && dim0_origin &&
                  elapsed < 5.0;
  criterion(3, "plane pair: 3 stages, empty dim 1, origin at dim 0", ok,
            std::to_string(ws.stages.size()) + " stages, " + fmt(elapsed) +
                "s");
}

// ---- criterion 4: intrinsic/extrinsic agreement --------------------------

void criterion_equivalence() {
  double worst = 0.0;
  bool ok = true;
  for (int example : {1, 2}) {
    const DiagonalProblem p =
        example == 1 ? make_example1(7) : make_example2(7);
    const WitnessSuperset in = run_cascade(p);
    const WitnessSuperset ex = run_cascade_extrinsic(p);
    const int dim = example == 1 ? 1 : 0;
    if (!in.candidates.count(dim) || !ex.candidates.count(dim)) {
      ok = false;
      continue;
    }
    worst = std::max(worst, multiset_match_distance(in.candidates.at(dim),
                                                    ex.candidates.at(dim)));
  }
  ok = ok && worst <= 1e-6;
  criterion(4, "intrinsic/extrinsic endpoint match on both examples", ok,
            "match distance " + fmt(worst));
}

// ---- criterion 5: plane-pencil lemma suites ------------------------------

void criterion_lemmas() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(500);
  double worst22 = 0.0, worst23 = 0.0, worst24 = 0.0;
  int done = 0;
  bool ok = true;
  for (int s = 0; done < 100; ++s) {
    const int k = 2 + s % 7;  // 2..8
    const int a = 1 + s % k;
    const int b = 1 + (s / 7) % k;
    if (a + b >= 2 * k) continue;
    const int h0 = std::max(a + b - k, 0);
    if (b < h0 + 1) continue;
    const int i = h0 + 1 + s % (b - h0);
    const int j = h0 + s % (i - h0);

    const CMatrix Abb = rng.disk_matrix(a + b, k);
    CMatrix A(a + b, 2 * k);
    A << Abb, -Abb;
    const CMatrix B = rng.disk_matrix(a + b, k);
    const CMatrix C = rng.disk_matrix(k, 2 * k);
    const CVector d = rng.disk_vector(k);

    // Constant particular solution: on the diagonal and on Cw + d = 0.
    const EpsilonResult eps = particular_solution_epsilon(C, d);
    if (eps.degenerate) continue;
    worst22 = std::max(worst22, (A * eps.epsilon).norm());
    worst22 = std::max(worst22, (C * eps.epsilon + d).norm());

    auto Yof = [&](int h) {
      CMatrix PhC = C;
      PhC.bottomRows(k - h).setZero();
      return CMatrix(A + B * PhC);
    };
    const CMatrix Yi = Yof(i), Yj = Yof(j);
    PlaneBases pb;
    try {
      pb = basis_EFG(Yi, Yj, C, j, i);
    } catch (const DegenerateDataError&) {
      continue;
    }
    ++done;

    const int df = i - j;
    worst23 = std::max(worst23, (Yi * pb.E).norm());
    worst23 = std::max(worst23, (Yi * pb.F).norm() / (1.0 + pb.F.norm()));
    worst23 = std::max(worst23, (Yj * pb.E).norm());
    worst23 = std::max(worst23, (Yj * pb.G).norm() / (1.0 + pb.G.norm()));
    worst23 = std::max(
        worst23,
        ((C * pb.F).middleRows(j, df) - CMatrix::Identity(df, df)).norm());
    worst23 = std::max(
        worst23,
        ((C * pb.G).middleRows(j, df) - CMatrix::Identity(df, df)).norm());

    // Pencil equivalence: the t-combination equals the scaled
    // tau-convex-combination of the same plane bases.
    const Complex gamma = rng.unit_modulus();
    const int m = 2 * k - a - b;
    for (int q = 0; q < 10; ++q) {
      const double t = rng.uniform();
      const CVector y = rng.disk_vector(m);
      const Complex D = t + gamma * (1.0 - t);
      const Complex tau = t / D;
      CMatrix bt(2 * k, m);
      bt.leftCols(m - df) = pb.E;
      bt.rightCols(df) = t * pb.F + gamma * (1.0 - t) * pb.G;
      CMatrix bu(2 * k, m);
      bu.leftCols(m - df) = pb.E;
      bu.rightCols(df) = D * (tau * pb.F + (1.0 - tau) * pb.G);
      const CVector w1 = eps.epsilon + bt * y;
      const CVector w2 = eps.epsilon + bu * y;
      worst24 = std::max(worst24, (w1 - w2).norm() / (1.0 + w1.norm()));
    }
  }
  const double elapsed = seconds(t0);
  ok = ok && worst22 <= 1e-10 && worst23 <= 1e-10 && worst24 <= 1e-8 &&
       elapsed < 60.0;
  criterion(5, "plane-pencil lemma suites over 100 random configurations",
            ok,
            "residuals " + fmt(worst22) + " / " + fmt(worst23) + " / " +
                fmt(worst24) + ", " + fmt(elapsed) + "s");
}

// ---- criterion 6: variable counts ----------------------------------------

void criterion_variable_counts() {
  const DiagonalProblem e1 = make_example1(7);
  const DiagonalProblem e2 = make_example2(7);
  const DiagonalProblem e3 = make_synthetic3(7);
  const bool ok = e1.m() == 2 && e2.m() == 4 && e3.m() == 2 &&
                  e3.k == 5 && e3.a == 4 && e3.b == 4;
  criterion(6, "intrinsic variable counts m = 2, 4, 2", ok,
            std::to_string(e1.m()) + ", " + std::to_string(e2.m()) + ", " +
                std::to_string(e3.m()));
}

// ---- criterion 7: timing direction ----------------------------------------

void criterion_timing() {
  const DiagonalProblem p = make_synthetic3(7);
  std::vector<double> in_totals, ex_totals;
  int paths_in = 0, paths_ex = 0;
  for (int r = 0; r < 5; ++r) {
    const WitnessSuperset in = run_cascade(p);
    const WitnessSuperset ex = run_cascade_extrinsic(p);
    paths_in = in.total_paths();
    paths_ex = ex.total_paths();
    double ti = 0.0, te = 0.0;
    for (const StageRecord& s : in.stages) ti += s.seconds;
    for (const StageRecord& s : ex.stages) te += s.seconds;
    in_totals.push_back(ti);
    ex_totals.push_back(te);
  }
  const double mi = median(in_totals), me = median(ex_totals);
  const bool ok = paths_in == paths_ex && mi <= me;
  criterion(7, "median intrinsic total time <= extrinsic (5 repeats)", ok,
            "intrinsic " + fmt(mi) + "s, extrinsic " + fmt(me) +
                "s, ratio " + fmt(mi > 0 ? me / mi : 0.0) + ", paths " +
                std::to_string(paths_in) + "/" + std::to_string(paths_ex));
}

// ---- criterion 8: numerics invariants -------------------------------------

void criterion_numerics() {
  // Analytic Jacobians against central differences over 50 random systems.
  Rng rng(800);
  double worst_jac = 0.0;
  for (int s = 0; s < 50; ++s) {
    const int nv = 2 + s % 4;
    std::vector<std::string> vars;
    for (int v = 0; v < nv; ++v) vars.push_back("x" + std::to_string(v));
    std::vector<Poly> polys;
    const int np = 1 + s % 3;
    for (int q = 0; q < np; ++q)
      polys.push_back(random_dense_poly(nv, 1 + s % 3, rng));
    const PolySystem f(vars, std::move(polys));
    const CVector x = rng.disk_vector(nv);
    const CMatrix J = f.jacobian(x);
    const double h = 1e-6;
    for (int v = 0; v < nv; ++v) {
      CVector xp = x, xm = x;
      xp(v) += h;
      xm(v) -= h;
      const CVector col = (f.evaluate(xp) - f.evaluate(xm)) / (2.0 * h);
      worst_jac = std::max(
          worst_jac, (J.col(v) - col).norm() / (1.0 + J.col(v).norm()));
    }
  }

  // Step-halving stability of a full cascade run.
  const DiagonalProblem p = make_example1(7);
  RunOptions coarse, fine;
  fine.track.initial_step = coarse.track.initial_step / 2.0;
  fine.track.max_step = coarse.track.max_step / 2.0;
  const WitnessSuperset wa = run_cascade(p, coarse);
  const WitnessSuperset wb = run_cascade(p, fine);
  const double halving =
      multiset_match_distance(wa.candidates.at(1), wb.candidates.at(1));

  // Same-seed determinism.
  const WitnessSuperset r1 = run_cascade(p);
  const WitnessSuperset r2 = run_cascade(p);
  double determinism = 0.0;
  bool counts_equal = r1.candidates.at(1).size() == r2.candidates.at(1).size();
  if (counts_equal)
    for (size_t i = 0; i < r1.candidates.at(1).size(); ++i)
      determinism = std::max(
          determinism,
          (r1.candidates.at(1)[i] - r2.candidates.at(1)[i]).norm());

  const bool ok = worst_jac <= 1e-6 && halving <= 1e-8 && counts_equal &&
                  determinism <= 1e-14;
  criterion(8, "jacobian FD, step-halving stability, determinism", ok,
            "jac " + fmt(worst_jac) + ", halving " + fmt(halving) +
                ", determinism " + fmt(determinism));
}

// ---- criterion 9: degenerate inputs ---------------------------------------

void criterion_degenerate() {
  const DiagonalProblem lines = make_disjoint_lines(7);
  const WitnessSuperset ws = run_cascade(lines);
  bool empty = true;
  for (const auto& [dim, pts] : ws.candidates) empty = empty && pts.empty();
  const StageRecord& last = ws.stages.back();
  // The level-1 stage meets the off-diagonal linear span, so its paths
  // converge to a nonsolution; only on the diagonal itself (the final
  // level) do all paths escape.
  const bool diverged = last.level_to == lines.h0 &&
                        last.diverged == last.paths && last.paths > 0;

  const PolySystem cyl_sys = parse_system("vars: x y z;\nx^2 + y^2 - 1;\n");
  Rng rng(900);
  const DiagonalProblem contained =
      make_problem(witness_hypersurface(cyl_sys, rng),
                   make_circle_witness(901), 7);
  const bool containment =
      containment_precheck(contained) == PrecheckResult::BContainedInA;

  criterion(9, "disjoint lines empty + diverged; containment short-circuit",
            empty && diverged && containment,
            std::string("final stage ") + std::to_string(last.diverged) +
                "/" + std::to_string(last.paths) + " diverged");
}

}  // namespace

int main() {
  criteria_example1();
  criterion_example2();
  criterion_equivalence();
  criterion_lemmas();
  criterion_variable_counts();
  criterion_timing();
  criterion_numerics();
  criterion_degenerate();
  if (failures) {
    std::printf("%d criterion(s) FAILED\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
