// Copyright 2026 The cluster-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite: one PASS/FAIL line per criterion (sub-criteria get their
// own line). Usage: acceptance [--criterion K] [--csv-dir DIR]

#include "cluster_forge/bounds.hpp"
#include "cluster_forge/exact.hpp"
#include "cluster_forge/lemmas.hpp"
#include "cluster_forge/montecarlo.hpp"
#include "cluster_forge/weave.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace cf = cluster_forge;
using cf::Configuration;
using cf::Rational;

namespace {

const Rational kHalf(1, 2);

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Report {
  int failures = 0;

  void line(const std::string& id, bool pass, const std::string& text) {
    if (!pass) ++failures;
    std::cout << (pass ? "PASS " : "FAIL ") << id << "  " << text << std::endl;
  }
  void info(const std::string& id, const std::string& text) {
    std::cout << "INFO " << id << "  " << text << std::endl;
  }
};

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string list(const std::vector<cf::Count>& v) {
  if (v.empty()) return "none";
  std::string s;
  for (auto x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

/// Exact Q(N) for N <= max from a bottom-up table, plus its build time.
struct OptimalCurve {
  std::vector<Rational> q;
  double seconds = 0;
  std::size_t entries = 0;
};

OptimalCurve optimal_curve(cf::Length max) {
  Stopwatch sw;
  const auto table = cf::build_quality_table(max, kHalf);
  OptimalCurve c;
  c.seconds = sw.seconds();
  c.entries = table.size();
  for (cf::Length n = 0; n <= max; ++n) c.q.push_back(table.at(Configuration::epr_pairs(n)).quality);
  return c;
}

// ---------------------------------------------------------------------------

void criterion1(Report& r) {
  Stopwatch sw;
  const Rational q4 = cf::optimal_quality(Configuration::epr_pairs(4), kHalf);
  const Rational q8 = cf::optimal_quality(Configuration::epr_pairs(8), kHalf);
  const double t = sw.seconds();
  r.line("1", q4 == Rational(13, 8) && q8 == Rational(649, 256) && t < 1.0,
         "Q(4)=" + cf::format_exact(q4) + " Q(8)=" + cf::format_exact(q8) + " in " + fmt(t, 3) +
             " s (want 13/8, 649/256, < 1 s)");
}

void modesty_gap(Report& r, const std::string& id, const OptimalCurve& opt,
                 const std::vector<Rational>& modesty, cf::Length max, double limit) {
  std::vector<cf::Count> bad;
  double worst = 0;
  cf::Count worst_n = 0;
  for (cf::Length n = 1; n <= max; ++n) {
    const double gap = cf::to_double((opt.q[n] - modesty[n]) / opt.q[n]);
    if (gap > worst) worst = gap, worst_n = n;
    if (!(gap < limit)) bad.push_back(n);
  }
  r.line(id, bad.empty(),
         "relative gap (Q-QM)/Q < 1.1e-3 for N <= " + std::to_string(max) + ": max " + fmt(worst) +
             " at N=" + std::to_string(worst_n) + "; violations at N=" + list(bad) + "; table " +
             std::to_string(opt.entries) + " entries in " + fmt(opt.seconds, 3) + " s");
}

void criterion2(Report& r) {
  const auto modesty = cf::modesty_yields(46);
  const auto opt30 = optimal_curve(30);
  std::vector<cf::Count> unequal;
  for (cf::Length n = 1; n <= 10; ++n) {
    if (modesty[n] != opt30.q[n]) unequal.push_back(n);
  }
  r.line("2a", unequal.empty(), "QM(N) = Q(N) exactly for N <= 10; mismatches at N=" + list(unequal));
  modesty_gap(r, "2b", opt30, modesty, 30, 1.1e-3);
  if (opt30.seconds >= 600) r.line("2b-time", false, "N=30 table took " + fmt(opt30.seconds) + " s");
  const auto opt46 = optimal_curve(46);
  modesty_gap(r, "2c", opt46, modesty, 46, 1.1e-3);

  double worst_even = 0;
  cf::Count at = 0;
  for (cf::Length n = 2; n <= 46; n += 2) {
    const double gap = cf::to_double((opt46.q[n] - modesty[n]) / opt46.q[n]);
    if (gap > worst_even) worst_even = gap, at = n;
  }
  r.info("2-even", "largest even-N gap " + fmt(worst_even) + " at N=" + std::to_string(at) +
                       "; first inequality at N=11");
}

void criterion3(Report& r) {
  int bad = 0;
  for (cf::Length a = 1; a <= 8; ++a) {
    for (cf::Length b = 1; b <= 8; ++b) {
      const Rational expected = Rational(a + b) - 2 + Rational(1, 1u << (std::min(a, b) - 1));
      if (cf::optimal_quality(Configuration::from_lengths({a, b}), kHalf) != expected) ++bad;
    }
  }
  r.line("3", bad == 0, "Q(e_a + e_b) = a+b-2+2^(1-min(a,b)) for 1 <= a,b <= 8; " +
                            std::to_string(bad) + " mismatches of 64");
}

void criterion4(Report& r) {
  const cf::Greed greed;
  int bad = 0;
  for (cf::Count n = 1; n <= 14; ++n) {
    const auto tree = cf::event_tree_oracle(greed, cf::IdentityConfiguration::epr_pairs(n), kHalf);
    if (tree.mean_length != cf::greed_closed_form_exact(n)) ++bad;
  }
  r.line("4a", bad == 0, "Greed closed form equals event-tree oracle for N <= 14; " +
                             std::to_string(bad) + " mismatches");

  cf::detail::StatelessEvaluator<Rational> eval(greed, kHalf);
  std::vector<cf::Count> even_bad, odd_bad;
  for (cf::Count n = 1; n <= 20; ++n) {
    const bool equal = eval(Configuration::epr_pairs(n)).length ==
                       eval(Configuration::epr_pairs(n + 1)).length;
    if (!equal) (n % 2 == 0 ? even_bad : odd_bad).push_back(n);
  }
  r.line("4b", even_bad.empty(),
         "QG(N) = QG(N+1) at even N <= 20; unequal at N=" + list(even_bad) +
             " (e.g. QG(2)=" + cf::format_exact(eval(Configuration::epr_pairs(2)).length) +
             ", QG(3)=" + cf::format_exact(eval(Configuration::epr_pairs(3)).length) + ")");
  r.info("4b-odd", "QG(N) = QG(N+1) at odd N <= 19; unequal at N=" + list(odd_bad));

  const double ratio = cf::greed_closed_form(10000) / cf::greed_asymptotic(10000);
  r.line("4c", std::abs(ratio - 1) <= 0.02,
         "closedForm(1e4)/sqrt(2e4/pi) = " + fmt(ratio, 8) + " (want within 2%)");
}

void criterion5(Report& r) {
  Stopwatch sw;
  const auto checks = cf::check_monotonicity_lemmas(12);
  const double t = sw.seconds();
  bool ok = t < 300;
  std::string text;
  for (const auto& c : checks) {
    ok = ok && c.holds();
    text += c.name + " " + std::to_string(c.violations) + "/" + std::to_string(c.checked) + ", ";
  }
  r.line("5", ok, "violations over C^(12) at p=1/2: " + text + "in " + fmt(t, 3) + " s (< 300 s)");
}

void criterion6(Report& r) {
  std::string failure;
  for (cf::Count n = 1; n <= 200 && failure.empty(); ++n) {
    try {
      const auto cert = cf::certify_attempts_bound(n);
      Rational expected = n == 1 ? Rational(0)
                          : n <= 5 ? Rational(n - 1, 2)
                                   : Rational(4 * (static_cast<int>(n) - 1) - 6, 5);
      if (cert.objective != expected) failure = "N=" + std::to_string(n) + " objective mismatch";
    } catch (const cf::CertificateError& e) {
      failure = e.what();
    }
  }
  r.line("6a", failure.empty(),
         "simplex optimum equals closed form with dual certificate, N=1..200" +
             (failure.empty() ? std::string() : ": " + failure));

  const auto opt = optimal_curve(30);
  std::vector<cf::Count> bad;
  for (cf::Count n = 6; n <= 30; ++n) {
    if (opt.q[n] > cf::analytic_upper_bound(n)) bad.push_back(n);
  }
  r.line("6b", bad.empty(), "Q(N) <= N/5 + 2 for 6 <= N <= 30; violations at N=" + list(bad));
}

void criterion7(Report& r) {
  const auto yields = cf::modesty_yields(30);
  const auto opt = optimal_curve(30);
  cf::RazorModel razor(2);
  std::vector<cf::Count> bad;
  for (cf::Count n = 8; n <= 30; ++n) {
    const Rational lower = cf::modesty_lower_bound(n, 8, yields);
    const Rational upper = Rational(n) - razor.solve(Configuration::epr_pairs(n)).attempts;
    if (!(lower <= opt.q[n] && opt.q[n] <= upper)) bad.push_back(n);
  }
  r.line("7", bad.empty(),
         "modestyLowerBound(N, 8) <= Q(N) <= razorUpperBound(N, 2) for 8 <= N <= 30; violations at N=" +
             list(bad));
}

void criterion8(Report& r) {
  const Rational q30 = cf::optimal_quality(Configuration::epr_pairs(30), kHalf);
  std::vector<Rational> upper;
  std::string text;
  for (cf::Length cap = 2; cap <= 6; ++cap) {
    upper.push_back(cf::razor_upper_bound(30, cap));
    text += "R=" + std::to_string(cap) + ":" + fmt(cf::to_double(upper.back())) + " ";
  }
  bool monotone = true;
  for (std::size_t i = 1; i < upper.size(); ++i) monotone = monotone && upper[i] <= upper[i - 1];
  const double gap = cf::to_double((upper.back() - q30) / q30);
  r.line("8", monotone && gap <= 0.05 && upper.back() >= q30,
         "razorUpperBound(30, R) " + text + "non-increasing=" + (monotone ? "yes" : "no") +
             "; Q(30)=" + fmt(cf::to_double(q30)) + ", gap at R=6 " + fmt(gap) + " (<= 5%)");
}

void criterion9(Report& r) {
  std::string text;
  bool ok = true;
  std::uint64_t seed = 900;
  for (const char* name : {"greed", "modesty", "static"}) {
    const auto s = cf::make_builtin_strategy(name);
    for (double p : {0.3, 0.5, 0.8}) {
      const auto c = Configuration::epr_pairs(12);
      const double exact = cf::strategy_quality(*s, c, p);
      const auto rep = cf::estimate_quality(*s, c, p, 100000, seed++);
      const double z = (rep.mean - exact) / rep.std_error;
      ok = ok && std::abs(z) < 3;
      text += std::string(name) + "@" + fmt(p, 2) + " z=" + fmt(z, 3) + " ";
    }
  }
  r.line("9a", ok, "N=12, 1e5 trials, |mean - exact| < 3 sigma: " + text);

  std::string meta;
  bool meta_ok = true;
  for (const char* name : {"greed", "modesty", "static"}) {
    const auto s = cf::make_builtin_strategy(name);
    const auto c = Configuration::epr_pairs(8);
    const double exact = cf::strategy_quality(*s, c, 0.5);
    int misses = 0;
    for (int rep = 0; rep < 100; ++rep) {
      const auto est = cf::estimate_quality(*s, c, 0.5, 10000, 5000 + rep);
      if (!(std::abs(est.mean - exact) < 3 * est.std_error)) ++misses;
    }
    meta_ok = meta_ok && misses <= 1;
    meta += std::string(name) + " " + std::to_string(misses) + "/100 ";
  }
  r.line("9b", meta_ok, "meta-test at N=8, 100 experiments of 1e4 trials, 3-sigma misses: " + meta +
                            "(<= 1%)");
}

void criterion10(Report& r) {
  bool ok = true;
  std::string text;
  std::uint64_t seed = 1000;
  for (double a : {1.5, 2.0, 3.0}) {
    for (double p : {0.3, 0.5, 0.8}) {
      const cf::WeaveParameters w{20, a, p};
      const double exact = cf::overall_success_probability(w);
      const auto sim = cf::simulate_weave(w, 10000, seed++);
      const double sigma = std::sqrt(exact * (1 - exact) / 1e4);
      const double diff = std::abs(sim.fraction - exact);
      const bool within = diff <= 3 * sigma;
      ok = ok && within;
      text += "(" + fmt(a, 2) + "," + fmt(p, 2) + ") " + fmt(sim.fraction, 4) + " vs " +
              fmt(exact, 4) + (within ? "" : " MISS") + "; ";
    }
  }
  r.line("10a", ok, "simulateWeave within 3 sigma of pi_s^n at n=20, 1e4 trials: " + text);

  int checked = 0, bad = 0;
  for (double a : {1.5, 2.0, 2.5, 3.0, 4.0}) {
    for (double p : {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
      if (!(a * p > 1)) continue;
      for (std::uint64_t n = 1; n <= 200; ++n) {
        const cf::WeaveParameters w{n, a, p};
        ++checked;
        if (cf::hoeffding_bound(w) > cf::single_chain_weave_probability(w)) ++bad;
      }
    }
  }
  r.line("10b", bad == 0, "Hoeffding <= pi_s on " + std::to_string(checked) +
                              " points with a p_s > 1; " + std::to_string(bad) + " violations");

  std::vector<std::uint64_t> sides;
  for (std::uint64_t n = 50; n <= 500; n += 50) sides.push_back(n);
  std::vector<double> up, down;
  for (auto n : sides) {
    up.push_back(cf::log_overall_success_probability({n, 3, 0.5}));
    down.push_back(cf::log_overall_success_probability({n, 1.5, 0.5}));
  }
  const auto tu = cf::classify_trend(up), td = cf::classify_trend(down);
  r.line("10c", tu == cf::Trend::increasing && td == cf::Trend::decreasing,
         "P_s over n=50..500: (a=3, p=0.5) " + cf::to_string(tu) + ", (a=1.5, p=0.5) " +
             cf::to_string(td));

  std::vector<std::uint64_t> grid;
  for (std::uint64_t n = 10; n <= 1000; n += 10) grid.push_back(n);
  const double slope = cf::resource_scaling_exponent(3, grid);
  r.line("10d", slope >= 1.99 && slope <= 2.01,
         "resourceCount log-log slope over n=10..1000 at a=3: " + fmt(slope, 6));
}

void write_csv(const std::filesystem::path& path, const std::string& command,
               const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  out << "# cluster-forge v" << CLUSTER_FORGE_VERSION << ' ' << command << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

void criterion11(Report& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto opt = optimal_curve(46);
  const auto modesty = cf::modesty_yields(46);
  const auto st = cf::make_static_strategy();
  const cf::Greed greed;
  cf::detail::StatelessEvaluator<Rational> greed_eval(greed, kHalf);

  std::vector<std::vector<std::string>> fig5, fig6;
  std::vector<cf::Count> order_bad, static_bad;
  const auto lower = cf::block_lower_bound(8, modesty);
  cf::RazorModel razor(2);
  for (cf::Count n = 1; n <= 46; ++n) {
    const auto c = Configuration::epr_pairs(n);
    const Rational s = cf::strategy_quality(*st, c, kHalf);
    const Rational g = greed_eval(c).length;
    if (!(opt.q[n] >= modesty[n] && modesty[n] >= s && s >= g)) order_bad.push_back(n);
    if (n >= 8 && (n & (n - 1)) == 0 && s < cf::static_lower_bound(n)) static_bad.push_back(n);
    fig5.push_back({std::to_string(n), cf::format_exact(opt.q[n]), cf::format_exact(modesty[n]),
                    cf::format_exact(s), cf::format_exact(g), fmt(cf::greed_asymptotic(n), 10)});
    if (n <= 30) {
      const Rational up = Rational(n) - razor.solve(c).attempts;
      fig6.push_back({std::to_string(n), n >= 8 ? cf::format_exact(lower(n)) : "",
                      cf::format_exact(opt.q[n]), cf::format_exact(modesty[n]), cf::format_exact(up),
                      n >= 6 ? cf::format_exact(cf::analytic_upper_bound(n)) : ""});
    }
  }
  std::vector<std::vector<std::string>> fig5_desk(fig5.begin(), fig5.begin() + 30);
  write_csv(dir / "quality_N30.csv", "quality",
            {"N", "optimal", "modesty", "static", "greed", "greed_asymptotic"}, fig5_desk);
  write_csv(dir / "quality_N46.csv", "quality",
            {"N", "optimal", "modesty", "static", "greed", "greed_asymptotic"}, fig5);
  write_csv(dir / "bounds_N30.csv", "bounds",
            {"N", "lower", "optimal", "modesty", "razor_upper", "analytic_upper"}, fig6);

  const double g46 = cf::greed_closed_form(46) / cf::greed_asymptotic(46);
  const double g1e4 = cf::greed_closed_form(10000) / cf::greed_asymptotic(10000);
  r.line("11", order_bad.empty() && static_bad.empty() && std::abs(g1e4 - 1) < std::abs(g46 - 1) + 1e-12,
         "wrote quality_N30.csv, quality_N46.csv, bounds_N30.csv to " + dir.string() +
             "; optimal >= Modesty >= Static >= Greed for N <= 46 (violations at N=" + list(order_bad) +
             "); Static >= (137/2048)N+2 at N=8,16,32 (violations at N=" + list(static_bad) +
             "); Greed/asymptote " + fmt(g46, 5) + " at N=46 -> " + fmt(g1e4, 6) + " at N=1e4");
}

}  // namespace

int main(int argc, char** argv) {
  std::optional<int> only;
  std::filesystem::path csv_dir = "figures";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::stoi(argv[++i]);
    } else if (arg == "--csv-dir" && i + 1 < argc) {
      csv_dir = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--criterion K] [--csv-dir DIR]\n";
      return 2;
    }
  }
  Report report;
  const std::map<int, std::function<void()>> criteria{
      {1, [&] { criterion1(report); }},   {2, [&] { criterion2(report); }},
      {3, [&] { criterion3(report); }},   {4, [&] { criterion4(report); }},
      {5, [&] { criterion5(report); }},   {6, [&] { criterion6(report); }},
      {7, [&] { criterion7(report); }},   {8, [&] { criterion8(report); }},
      {9, [&] { criterion9(report); }},   {10, [&] { criterion10(report); }},
      {11, [&] { criterion11(report, csv_dir); }},
  };
  for (const auto& [k, run] : criteria) {
    if (only && *only != k) continue;
    run();
  }
  if (only && !criteria.count(*only)) {
    std::cerr << "no criterion " << *only << '\n';
    return 2;
  }
  return report.failures == 0 ? 0 : 1;
}
