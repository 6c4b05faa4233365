#ifndef DIAGHOM_REPORT_HPP
#define DIAGHOM_REPORT_HPP

#include "diaghom/diagonal.hpp"

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace diaghom {

struct ModeReport {
  std::string mode;  // "intrinsic" or "extrinsic"
  int variable_count = 0;
  std::vector<StageRecord> stages;
  std::map<int, int> witness_counts;
  std::map<int, int> nonsolution_counts;
  std::map<int, int> junk_counts;
  std::map<int, int> suspect_counts;
};

/// Run summary: problem shape, per-mode stage statistics and per-dimension
/// counts, and (for mode=both) the endpoint multiset match distance.
/// Serialized as structured text; everything except the stage times is
/// reproducible bit-for-bit from the seed.
struct RunReport {
  std::uint64_t seed = 0;
  int k = 0, a = 0, b = 0, m = 0;
  double tolerance = 0.0;
  std::vector<ModeReport> modes;
  double match_distance = -1.0;  // negative when not computed
};

inline ModeReport mode_report(const std::string& mode,
                              const WitnessSuperset& ws) {
  ModeReport r;
  r.mode = mode;
  r.variable_count = ws.variable_count;
  r.stages = ws.stages;
  for (const auto& [dim, pts] : ws.candidates)
    r.witness_counts[dim] = static_cast<int>(pts.size());
  r.nonsolution_counts = ws.nonsolution_counts;
  r.junk_counts = ws.junk_counts;
  r.suspect_counts = ws.suspect_counts;
  return r;
}

inline std::string report_to_text(const RunReport& r) {
  std::ostringstream os;
  os << "diaghom report 1\n";
  os << "seed: " << r.seed << '\n';
  os << "k: " << r.k << '\n';
  os << "a: " << r.a << '\n';
  os << "b: " << r.b << '\n';
  os << "m: " << r.m << '\n';
  os << "tolerance: " << detail::format_double(r.tolerance) << '\n';
  for (const ModeReport& mr : r.modes) {
    os << "mode: " << mr.mode << '\n';
    os << "variables: " << mr.variable_count << '\n';
    for (const StageRecord& s : mr.stages)
      os << "stage: " << s.level_from << ' ' << s.level_to << ' ' << s.paths
         << ' ' << s.converged << ' ' << s.diverged << ' ' << s.failed << ' '
         << detail::format_double(s.seconds) << '\n';
    auto emit = [&](const char* key, const std::map<int, int>& counts) {
      for (const auto& [dim, n] : counts)
        os << key << ": " << dim << ' ' << n << '\n';
    };
    emit("witness", mr.witness_counts);
    emit("nonsolutions", mr.nonsolution_counts);
    emit("junk", mr.junk_counts);
    emit("suspect", mr.suspect_counts);
    os << "end mode\n";
  }
  if (r.match_distance >= 0.0)
    os << "match_distance: " << detail::format_double(r.match_distance)
       << '\n';
  os << "end report\n";
  return os.str();
}

inline RunReport parse_report(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  auto next = [&]() {
    if (!std::getline(is, line))
      throw NumericalError("report truncated");
    return line;
  };
  if (next() != "diaghom report 1")
    throw NumericalError("not a diaghom report");

  RunReport r;
  auto value_of = [&](const std::string& l) {
    const size_t pos = l.find(": ");
    if (pos == std::string::npos)
      throw NumericalError("malformed report line: " + l);
    return l.substr(pos + 2);
  };

  r.seed = std::stoull(value_of(next()));
  r.k = std::stoi(value_of(next()));
  r.a = std::stoi(value_of(next()));
  r.b = std::stoi(value_of(next()));
  r.m = std::stoi(value_of(next()));
  r.tolerance = std::stod(value_of(next()));

  while (next() != "end report") {
    if (line.rfind("match_distance: ", 0) == 0) {
      r.match_distance = std::stod(value_of(line));
      continue;
    }
    if (line.rfind("mode: ", 0) != 0)
      throw NumericalError("malformed report line: " + line);
    ModeReport mr;
    mr.mode = value_of(line);
    mr.variable_count = std::stoi(value_of(next()));
    while (next() != "end mode") {
      std::istringstream ls(line);
      std::string key;
      ls >> key;
      if (key == "stage:") {
        StageRecord s;
        ls >> s.level_from >> s.level_to >> s.paths >> s.converged >>
            s.diverged >> s.failed >> s.seconds;
        mr.stages.push_back(s);
      } else {
        int dim = 0, n = 0;
        ls >> dim >> n;
        if (!ls) throw NumericalError("malformed report line: " + line);
        if (key == "witness:") mr.witness_counts[dim] = n;
        else if (key == "nonsolutions:") mr.nonsolution_counts[dim] = n;
        else if (key == "junk:") mr.junk_counts[dim] = n;
        else if (key == "suspect:") mr.suspect_counts[dim] = n;
        else throw NumericalError("unknown report key: " + key);
      }
    }
    r.modes.push_back(std::move(mr));
  }
  return r;
}

/// Aligned human-readable rendering of the same data.
inline std::string report_table(const RunReport& r) {
  std::ostringstream os;
  os << "problem: k=" << r.k << " dim(A)=" << r.a << " dim(B)=" << r.b
     << " m=" << r.m << " seed=" << r.seed << "\n\n";
  for (const ModeReport& mr : r.modes) {
    os << mr.mode << " (" << mr.variable_count << " variables)\n";
    os << "  stage   level   paths  conv  div  fail   seconds\n";
    double total = 0.0;
    for (size_t i = 0; i < mr.stages.size(); ++i) {
      const StageRecord& s = mr.stages[i];
      std::string lvl = (s.level_from < 0 ? std::string("S")
                                          : std::to_string(s.level_from)) +
                        "->" + std::to_string(s.level_to);
      os << "  " << std::setw(5) << i << "   " << std::setw(5) << lvl << "   "
         << std::setw(5) << s.paths << " " << std::setw(5) << s.converged
         << " " << std::setw(4) << s.diverged << " " << std::setw(4)
         << s.failed << "   " << std::fixed << std::setprecision(4)
         << s.seconds << '\n';
      os.unsetf(std::ios::fixed);
      total += s.seconds;
    }
    os << "  total time: " << std::fixed << std::setprecision(4) << total
       << "s\n";
    os.unsetf(std::ios::fixed);
    for (const auto& [dim, n] : mr.witness_counts) {
      os << "  dim " << dim << ": " << n << " witness candidate"
         << (n == 1 ? "" : "s") << " (junk removed "
         << (mr.junk_counts.count(dim) ? mr.junk_counts.at(dim) : 0)
         << ", nonsolutions "
         << (mr.nonsolution_counts.count(dim)
                 ? mr.nonsolution_counts.at(dim)
                 : 0)
         << ")\n";
    }
    os << '\n';
  }
  if (r.match_distance >= 0.0)
    os << "intrinsic/extrinsic match distance: "
       << detail::format_double(r.match_distance) << '\n';
  return os.str();
}

}  // namespace diaghom

#endif  // DIAGHOM_REPORT_HPP
