#include "diaghom/fixtures.hpp"
#include "diaghom/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace diaghom;

constexpr int kExitOk = 0;
constexpr int kExitNotMember = 1;
constexpr int kExitUsage = 2;
constexpr int kExitContainment = 3;
constexpr int kExitNumerical = 4;

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// --seed flag wins over the DHOM_SEED environment variable; default 0.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("DHOM_SEED")) return std::stoull(env);
  return 0;
}

// Comma-separated coordinates, each "re" or "re+imi" / "re-imi".
CVector parse_point(const std::string& text) {
  std::vector<Complex> vals;
  std::stringstream ss(text);
  std::string entry;
  while (std::getline(ss, entry, ',')) {
    std::erase_if(entry, [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    if (entry.empty()) throw std::runtime_error("empty point coordinate");
    size_t used = 0;
    const double re = std::stod(entry, &used);
    double im = 0.0;
    if (used < entry.size()) {
      std::string rest = entry.substr(used);
      if (rest == "i") {
        im = re;
        vals.push_back(Complex(0.0, im));
        continue;
      }
      size_t used2 = 0;
      im = std::stod(rest, &used2);
      if (rest.substr(used2) != "i")
        throw std::runtime_error("malformed coordinate: " + entry);
    }
    vals.push_back(Complex(re, im));
  }
  CVector p(static_cast<Eigen::Index>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) p(static_cast<Eigen::Index>(i)) = vals[i];
  return p;
}

int cmd_witness(const std::string& hypersurface, const std::string& linear,
                const std::string& system, std::uint64_t seed,
                const std::string& out) {
  Rng rng(seed);
  WitnessSet ws;
  if (!hypersurface.empty()) {
    ws = witness_hypersurface(parse_system(read_file(hypersurface)), rng);
  } else {
    ws = witness_linear(parse_system(read_file(linear)),
                        parse_system(read_file(system)), rng);
  }
  write_witness(ws, out);
  std::cout << "dim " << ws.dim << " degree " << ws.degree << " -> " << out
            << "\n";
  return kExitOk;
}

struct IntersectResult {
  RunReport report;
  std::map<std::string, WitnessSuperset> runs;  // keyed by mode
};

IntersectResult run_intersect(const DiagonalProblem& problem,
                              const std::string& mode, const RunOptions& opt) {
  IntersectResult res;
  res.report.seed = problem.seed;
  res.report.k = problem.k;
  res.report.a = problem.a;
  res.report.b = problem.b;
  res.report.m = problem.m();
  res.report.tolerance = opt.classify_tol;

  if (mode == "intrinsic" || mode == "both")
    res.runs["intrinsic"] = run_cascade(problem, opt);
  if (mode == "extrinsic" || mode == "both")
    res.runs["extrinsic"] = run_cascade_extrinsic(problem, opt);
  for (const auto& [name, ws] : res.runs)
    res.report.modes.push_back(mode_report(name, ws));

  if (mode == "both") {
    const WitnessSuperset& in = res.runs.at("intrinsic");
    const WitnessSuperset& ex = res.runs.at("extrinsic");
    double worst = 0.0;
    std::map<int, bool> dims;
    for (const auto& [d, pts] : in.candidates) dims[d] = true;
    for (const auto& [d, pts] : ex.candidates) dims[d] = true;
    for (const auto& [d, unused] : dims) {
      static const std::vector<CVector> empty;
      const auto& lhs = in.candidates.count(d) ? in.candidates.at(d) : empty;
      const auto& rhs = ex.candidates.count(d) ? ex.candidates.at(d) : empty;
      worst = std::max(worst, multiset_match_distance(lhs, rhs));
    }
    res.report.match_distance = worst;
  }
  return res;
}

int cmd_intersect(const std::string& wa_path, const std::string& wb_path,
                  const std::string& example, const std::string& mode,
                  std::uint64_t seed, const std::string& out, int hmax,
                  int h0, int threads, double tol) {
  DiagonalProblem problem =
      example.empty()
          ? make_problem(read_witness(wa_path), read_witness(wb_path), seed,
                         hmax, h0)
          : make_fixture(example, seed);
  if (!example.empty() && (hmax >= 0 || h0 >= 0)) {
    if (hmax >= 0) problem.hmax = hmax;
    if (h0 >= 0) problem.h0 = h0;
    problem.validate();
  }

  RunOptions opt;
  opt.threads = threads;
  opt.classify_tol = tol;

  if (containment_precheck(problem, opt) == PrecheckResult::BContainedInA) {
    std::cout << "A∩B = B\n";
    return kExitContainment;
  }

  IntersectResult res;
  try {
    res = run_intersect(problem, mode, opt);
  } catch (const CascadeFailure& e) {
    std::cerr << "cascade failure: " << e.what() << "\n";
    return kExitNumerical;
  }

  std::cout << report_table(res.report);
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    const std::filesystem::path dir(out);
    std::ofstream rf(dir / "report.txt");
    rf << report_to_text(res.report);
    for (const auto& [name, ws] : res.runs)
      for (const auto& [dim, wset] : ws.witness_sets)
        write_witness(wset, (dir / ("w_dim" + std::to_string(dim) + "_" +
                                    name + ".wit"))
                                .string());
    std::cout << "wrote " << (dir / "report.txt").string() << "\n";
  }
  return kExitOk;
}

int cmd_member(const std::string& witness_path, const std::string& point_text,
               std::uint64_t seed, int threads, double tol) {
  const WitnessSet ws = read_witness(witness_path);
  const CVector point = parse_point(point_text);
  Rng rng(seed);
  double distance = 0.0;
  bool inside;
  try {
    inside = member(ws, point, tol, rng, TrackSettings{}, threads, &distance);
  } catch (const MembershipInconclusive& e) {
    std::cerr << "inconclusive: " << e.what() << "\n";
    return kExitUsage;
  }
  std::cout << (inside ? "member" : "not a member") << " (distance "
            << detail::format_double(distance) << ")\n";
  return inside ? kExitOk : kExitNotMember;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_bench(std::uint64_t seed, int repeats, int threads) {
  struct Row {
    std::string name;
    int k = 0, a = 0, b = 0, m = 0, extrinsic = 0;
    int paths_in = 0, paths_ex = 0;
    std::vector<double> stage_in, stage_ex;  // medians per stage
    double total_in = 0.0, total_ex = 0.0;
    bool ok = false;
    std::string error;
  };
  std::vector<Row> rows;

  for (const std::string& name : {"1", "2", "synthetic3"}) {
    Row row;
    row.name = name;
    try {
      const DiagonalProblem problem = make_fixture(name, seed);
      row.k = problem.k;
      row.a = problem.a;
      row.b = problem.b;
      row.m = problem.m();
      row.extrinsic = problem.extrinsic_vars();
      RunOptions opt;
      opt.threads = threads;

      std::vector<std::vector<double>> in_times, ex_times;
      for (int r = 0; r < repeats; ++r) {
        const WitnessSuperset in = run_cascade(problem, opt);
        const WitnessSuperset ex = run_cascade_extrinsic(problem, opt);
        row.paths_in = in.total_paths();
        row.paths_ex = ex.total_paths();
        in_times.resize(in.stages.size());
        ex_times.resize(ex.stages.size());
        for (size_t s = 0; s < in.stages.size(); ++s)
          in_times[s].push_back(in.stages[s].seconds);
        for (size_t s = 0; s < ex.stages.size(); ++s)
          ex_times[s].push_back(ex.stages[s].seconds);
      }
      for (const auto& t : in_times) {
        row.stage_in.push_back(median(t));
        row.total_in += row.stage_in.back();
      }
      for (const auto& t : ex_times) {
        row.stage_ex.push_back(median(t));
        row.total_ex += row.stage_ex.back();
      }
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }

  std::cout << "variable counts (intrinsic m vs extrinsic)\n";
  std::cout << "  example      k  dim(A)  dim(B)    m  extrinsic  paths\n";
  for (const Row& r : rows) {
    if (!r.ok) {
      std::cout << "  " << r.name << ": failed: " << r.error << "\n";
      continue;
    }
    std::printf("  %-10s %3d %7d %7d %4d %10d %6d\n", r.name.c_str(), r.k,
                r.a, r.b, r.m, r.extrinsic, r.paths_in);
  }

  std::cout << "\ntimings, median of " << repeats
            << " repeat(s), wall seconds\n";
  std::cout << "  example      mode       stages                     total\n";
  auto print_times = [](const std::string& name, const char* mode,
                        const std::vector<double>& stages, double total) {
    std::string st;
    for (double s : stages) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f ", s);
      st += buf;
    }
    std::printf("  %-10s %-10s %-26s %.4f\n", name.c_str(), mode, st.c_str(),
                total);
  };
  bool any_failed = false;
  for (const Row& r : rows) {
    if (!r.ok) {
      any_failed = true;
      continue;
    }
    print_times(r.name, "intrinsic", r.stage_in, r.total_in);
    print_times(r.name, "extrinsic", r.stage_ex, r.total_ex);
    if (r.total_in > 0.0)
      std::printf("  %-10s ratio extrinsic/intrinsic: %.2f\n", r.name.c_str(),
                  r.total_ex / r.total_in);
  }
  return any_failed ? kExitNumerical : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"witness superset computation for intersections of "
               "irreducible solution components via the diagonal cascade"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed_flag;
  std::string hypersurface, linear, system, out;
  std::string wa, wb, example, mode = "intrinsic", witness_path, point_text;
  int hmax = -1, h0 = -1;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  double tol = 1e-6;
  int repeats = 5;

  CLI::App* w = app.add_subcommand("witness", "generate a witness set file");
  w->add_option("--hypersurface", hypersurface,
                "system file with a single polynomial");
  w->add_option("--linear", linear, "system file of linear component equations");
  w->add_option("--system", system, "full system the component solves");
  w->add_option("--seed", seed_flag, "random seed (env DHOM_SEED, default 0)");
  w->add_option("--out", out, "output witness file")->required();

  CLI::App* x = app.add_subcommand("intersect", "run the diagonal cascade");
  x->add_option("--wa", wa, "witness file for component A");
  x->add_option("--wb", wb, "witness file for component B");
  x->add_option("--example", example, "built-in fixture: 1, 2 or synthetic3")
      ->check(CLI::IsMember({"1", "2", "synthetic3"}));
  x->add_option("--mode", mode, "intrinsic, extrinsic or both")
      ->check(CLI::IsMember({"intrinsic", "extrinsic", "both"}));
  x->add_option("--seed", seed_flag, "random seed (env DHOM_SEED, default 0)");
  x->add_option("--out", out, "output directory for report and witness files");
  x->add_option("--hmax", hmax, "top cascade level override");
  x->add_option("--h0", h0, "bottom cascade level override");
  x->add_option("--threads", threads, "tracking worker count");
  x->add_option("--tol", tol, "classification tolerance");

  CLI::App* m = app.add_subcommand("member", "membership query against a witness set");
  m->add_option("--witness", witness_path, "witness file")->required();
  m->add_option("--point", point_text, "comma-separated coordinates")->required();
  m->add_option("--seed", seed_flag, "random seed (env DHOM_SEED, default 0)");
  m->add_option("--threads", threads, "tracking worker count");
  m->add_option("--tol", tol, "membership tolerance");

  CLI::App* b = app.add_subcommand("bench", "timing and variable-count tables");
  b->add_option("--seed", seed_flag, "random seed (env DHOM_SEED, default 0)");
  b->add_option("--repeats", repeats, "repeats per example (median reported)");
  b->add_option("--threads", threads, "tracking worker count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::uint64_t seed = resolve_seed(seed_flag);
  try {
    if (w->parsed()) {
      if (hypersurface.empty() == linear.empty()) {
        std::cerr << "witness: exactly one of --hypersurface / --linear\n";
        return kExitUsage;
      }
      if (!linear.empty() && system.empty()) {
        std::cerr << "witness: --linear requires --system\n";
        return kExitUsage;
      }
      return cmd_witness(hypersurface, linear, system, seed, out);
    }
    if (x->parsed()) {
      if (example.empty() && (wa.empty() || wb.empty())) {
        std::cerr << "intersect: need --wa and --wb, or --example\n";
        return kExitUsage;
      }
      return cmd_intersect(wa, wb, example, mode, seed, out, hmax, h0,
                           threads, tol);
    }
    if (m->parsed()) return cmd_member(witness_path, point_text, seed, threads, tol);
    if (b->parsed()) return cmd_bench(seed, repeats, threads);
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const CascadeFailure& e) {
    std::cerr << "cascade failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
