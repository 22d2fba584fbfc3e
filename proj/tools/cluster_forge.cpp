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

#include "cluster_forge/bounds.hpp"
#include "cluster_forge/configuration.hpp"
#include "cluster_forge/exact.hpp"
#include "cluster_forge/lemmas.hpp"
#include "cluster_forge/montecarlo.hpp"
#include "cluster_forge/rational.hpp"
#include "cluster_forge/strategies.hpp"
#include "cluster_forge/weave.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace cf = cluster_forge;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = CLUSTER_FORGE_VERSION;

enum class Exit { ok = 0, bad_flags = 1, budget = 2, certificate = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json number(double v) {
  if (std::isnan(v) || std::isinf(v)) return nullptr;
  return v;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

enum class Format { csv, json };

/// Tabular output; cells are strings, numbers or null (empty in CSV).
struct Table {
  std::string command;
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  std::vector<std::string> notes;
  json summary = json::object();

  void add(std::vector<json> row) { rows.push_back(std::move(row)); }
};

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

void write_table(const Table& t, Format f, std::ostream& out) {
  if (f == Format::csv) {
    out << "# cluster-forge v" << kVersion << ' ' << t.command << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
      out << '\n';
    }
    for (const auto& note : t.notes) out << "# " << note << '\n';
    return;
  }
  json doc;
  doc["schema"] = "cluster-forge/" + t.command + "/v1";
  doc["version"] = kVersion;
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = row[i];
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  if (!t.summary.empty()) doc["summary"] = t.summary;
  if (!t.notes.empty()) doc["notes"] = t.notes;
  out << doc.dump(2) << '\n';
}

struct Output {
  std::string format = "csv";
  std::string path;

  Format parsed() const { return format == "json" ? Format::json : Format::csv; }

  template <class Fn>
  void with_stream(Fn&& fn) const {
    if (path.empty()) {
      fn(std::cout);
      return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw UsageError("cannot open output file '" + path + "'");
    fn(file);
  }

  void emit(const Table& t) const {
    with_stream([&](std::ostream& out) { write_table(t, parsed(), out); });
  }
};

void add_output_flags(CLI::App* cmd, Output& out) {
  cmd->add_option("--format", out.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("-o,--out", out.path, "Write to this file instead of stdout");
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

cf::Probability probability_flag(const std::string& text) {
  try {
    return cf::parse_probability(text);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--ps: ") + e.what());
  }
}

json exact_cell(const cf::Rational& v) { return cf::format_exact(v); }

std::shared_ptr<const cf::StatelessStrategy> stateless_by_name(const std::string& name) {
  if (name == "greed") return std::make_shared<cf::Greed>();
  if (name == "modesty") return std::make_shared<cf::Modesty>();
  throw UsageError("inner strategy must be greed or modesty, got '" + name + "'");
}

std::string table_file_name(cf::Length n, const cf::Rational& p) {
  return "optimal-N" + std::to_string(n) + "-ps" + numerator(p).str() + "_" +
         denominator(p).str() + ".tsv";
}

std::optional<std::filesystem::path> table_dir() {
  const char* dir = std::getenv("CLUSTER_FORGE_TABLE_DIR");
  if (!dir || !*dir) return std::nullopt;
  return std::filesystem::path(dir);
}

/// Cached table covering total length n at probability p, if one exists.
std::optional<cf::QualityTable> find_cached_table(cf::Length n, const cf::Rational& p) {
  const auto dir = table_dir();
  if (!dir || !std::filesystem::is_directory(*dir)) return std::nullopt;
  std::optional<std::filesystem::path> best;
  cf::Length best_n = 0;
  const std::string suffix = "-ps" + numerator(p).str() + "_" + denominator(p).str() + ".tsv";
  for (const auto& entry : std::filesystem::directory_iterator(*dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("optimal-N", 0) != 0 || name.size() <= suffix.size() ||
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
      continue;
    }
    const std::string digits = name.substr(9, name.size() - 9 - suffix.size());
    cf::Length m = 0;
    const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), m);
    if (res.ec != std::errc() || res.ptr != digits.data() + digits.size()) continue;
    if (m >= n && (!best || m < best_n)) {
      best = entry.path();
      best_n = m;
    }
  }
  if (!best) return std::nullopt;
  std::ifstream in(*best);
  auto t = cf::QualityTable::read(in);
  if (t.probability() != p) return std::nullopt;
  return t;
}

// ---------------------------------------------------------------------------
// quality
// ---------------------------------------------------------------------------

struct QualityArgs {
  std::string strategy = "all";
  unsigned n_min = 1, n_max = 20;
  std::string ps = "1/2";
  Output out;
};

template <class Scalar>
void quality_rows(const std::vector<std::string>& names, const QualityArgs& a, const Scalar& p,
                  const cf::Rational* exact_p, Table& t) {
  auto cell = [&](const Scalar& v) -> std::pair<json, json> {
    if constexpr (std::is_same_v<Scalar, cf::Rational>) {
      return {exact_cell(v), cf::to_double(v)};
    } else {
      return {format_double(v), v};
    }
  };
  for (const auto& name : names) {
    std::vector<Scalar> values;
    if (name == "greed" || name == "modesty") {
      auto s = stateless_by_name(name);
      cf::detail::StatelessEvaluator<Scalar> eval(*s, p);
      for (unsigned n = a.n_min; n <= a.n_max; ++n) {
        values.push_back(eval(cf::Configuration::epr_pairs(n)).length);
      }
    } else if (name == "static") {
      const auto s = cf::make_static_strategy();
      for (unsigned n = a.n_min; n <= a.n_max; ++n) {
        values.push_back(cf::strategy_quality(*s, cf::Configuration::epr_pairs(n), p));
      }
    } else {
      std::optional<cf::QualityTable> cached;
      if constexpr (std::is_same_v<Scalar, cf::Rational>) {
        cached = find_cached_table(a.n_max, *exact_p);
      }
      cf::OptimalSolver<Scalar> solver(p);
      for (unsigned n = a.n_min; n <= a.n_max; ++n) {
        const auto c = cf::Configuration::epr_pairs(n);
        if constexpr (std::is_same_v<Scalar, cf::Rational>) {
          if (cached) {
            values.push_back(cached->at(c).quality);
            continue;
          }
        }
        values.push_back(solver.solve(c).quality);
      }
    }
    for (unsigned n = a.n_min; n <= a.n_max; ++n) {
      auto [v, f] = cell(values[n - a.n_min]);
      t.add({n, name, v, f});
    }
  }
}

int run_quality(const QualityArgs& a) {
  if (a.n_min > a.n_max) throw UsageError("--n-min exceeds --n-max");
  std::vector<std::string> names;
  if (a.strategy == "all") {
    names = {"optimal", "modesty", "static", "greed"};
  } else {
    names = {a.strategy};
  }
  const auto p = probability_flag(a.ps);
  Table t{"quality", {"N", "strategy", "quality", "quality_float"}, {}, {}, {}};
  t.summary["ps"] = a.ps;
  t.summary["exact"] = p.is_exact;
  if (p.is_exact) {
    quality_rows<cf::Rational>(names, a, p.exact, &p.exact, t);
  } else {
    quality_rows<double>(names, a, p.as_double(), nullptr, t);
  }
  a.out.emit(t);
  return 0;
}

// ---------------------------------------------------------------------------
// optimal-table
// ---------------------------------------------------------------------------

struct TableArgs {
  unsigned n = 12;
  std::string ps = "1/2";
  std::string out;
  std::size_t max_entries = 0;
};

int run_optimal_table(const TableArgs& a) {
  const auto p = probability_flag(a.ps);
  std::string path = a.out;
  if (path.empty()) {
    if (const auto dir = table_dir()) {
      std::filesystem::create_directories(*dir);
      path = (*dir / table_file_name(a.n, p.exact)).string();
    }
  }
  const auto table = cf::build_quality_table(a.n, p.exact, a.max_entries);
  if (path.empty()) {
    table.write(std::cout);
  } else {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw UsageError("cannot open output file '" + path + "'");
    table.write(file);
    std::cerr << "wrote " << table.size() << " entries to " << path << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

struct BoundsArgs {
  std::optional<unsigned> n;
  unsigned n_min = 1, n_max = 30;
  unsigned n0 = 8;
  std::string parity = "all";
  Output out;
};

int run_bounds(BoundsArgs a) {
  if (a.n) a.n_min = a.n_max = *a.n;
  if (a.n_min < 1 || a.n_min > a.n_max) throw UsageError("need 1 <= --n-min <= --n-max");
  if (a.n0 < 1) throw UsageError("--n0 must be positive");
  const auto parity = a.parity == "even" ? cf::BlockParity::even : cf::BlockParity::all;
  const auto yields = cf::modesty_yields(std::max(a.n_max, 2 * a.n0));
  const auto lower = cf::block_lower_bound(a.n0, yields, parity);
  cf::OptimalSolver<cf::Rational> solver(cf::Rational(1, 2));
  cf::RazorModel razor(2);

  Table t{"bounds",
          {"N", "lower", "optimal", "modesty", "razor_upper", "analytic_upper", "lower_float",
           "optimal_float", "modesty_float", "razor_upper_float", "analytic_upper_float"},
          {}, {}, {}};
  t.summary["n0"] = a.n0;
  t.summary["parity"] = a.parity;
  t.summary["slope"] = cf::format_exact(lower.slope);
  for (unsigned n = a.n_min; n <= a.n_max; ++n) {
    const auto c = cf::Configuration::epr_pairs(n);
    cf::certify_attempts_bound(n);
    std::optional<cf::Rational> lo;
    if (n >= a.n0 && (parity == cf::BlockParity::all || n % 2 == 0)) lo = lower(n);
    const cf::Rational q = solver.solve(c).quality;
    const cf::Rational up = cf::Rational(n) - razor.solve(c).attempts;
    std::optional<cf::Rational> analytic;
    if (n >= 6) analytic = cf::analytic_upper_bound(n);
    if ((lo && *lo > q) || q > up || (analytic && q > *analytic)) {
      throw cf::CertificateError("bound sandwich violated at N=" + std::to_string(n));
    }
    auto opt = [](const std::optional<cf::Rational>& v) -> json {
      return v ? exact_cell(*v) : json(nullptr);
    };
    auto optf = [](const std::optional<cf::Rational>& v) -> json {
      return v ? json(cf::to_double(*v)) : json(nullptr);
    };
    t.add({n, opt(lo), exact_cell(q), exact_cell(yields[n]), exact_cell(up), opt(analytic), optf(lo),
           cf::to_double(q), cf::to_double(yields[n]), cf::to_double(up), optf(analytic)});
  }
  a.out.emit(t);
  return 0;
}

// ---------------------------------------------------------------------------
// razor
// ---------------------------------------------------------------------------

struct RazorArgs {
  unsigned n = 30;
  std::optional<unsigned> n_max;
  unsigned r_min = 2, r_max = 6;
  bool exact = false;
  Output out;
};

int run_razor(const RazorArgs& a) {
  if (a.r_min < 2 || a.r_min > a.r_max) throw UsageError("need 2 <= --r-min <= --r-max");
  const unsigned lo = a.n_max ? 1 : a.n;
  const unsigned hi = a.n_max ? *a.n_max : a.n;
  std::vector<std::string> cols{"N", "R", "quality", "attempts", "upper", "upper_float"};
  if (a.exact) cols.insert(cols.end(), {"optimal", "relative_gap"});
  Table t{"razor", cols, {}, {}, {}};
  std::optional<cf::OptimalSolver<cf::Rational>> solver;
  if (a.exact) solver.emplace(cf::Rational(1, 2));
  for (unsigned r = a.r_min; r <= a.r_max; ++r) {
    cf::RazorModel model(r);
    for (unsigned n = lo; n <= hi; ++n) {
      const auto c = cf::Configuration::epr_pairs(n);
      const auto res = model.solve(c);
      const cf::Rational up = cf::Rational(n) - res.attempts;
      std::vector<json> row{n, r, exact_cell(res.quality), exact_cell(res.attempts), exact_cell(up),
                            cf::to_double(up)};
      if (solver) {
        const cf::Rational q = solver->solve(c).quality;
        row.push_back(exact_cell(q));
        row.push_back(q == 0 ? json(nullptr) : json(cf::to_double((up - q) / q)));
      }
      t.add(std::move(row));
    }
  }
  a.out.emit(t);
  return 0;
}

// ---------------------------------------------------------------------------
// mc, threshold
// ---------------------------------------------------------------------------

struct McArgs {
  std::string strategy = "modesty";
  unsigned n = 12;
  std::string ps = "1/2";
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  std::size_t block = 8;
  std::string inner = "modesty";
  bool compare = false;
  std::string out;
};

std::shared_ptr<const cf::Strategy> simulation_strategy(const std::string& name, unsigned n,
                                                        double p, std::size_t block,
                                                        const std::string& inner) {
  if (name == "two-stage") return cf::two_stage_strategy(block, stateless_by_name(inner));
  if (name == "optimal") {
    cf::OptimalSolver<double> solver(p);
    solver.solve(cf::Configuration::epr_pairs(n));
    return std::make_shared<cf::LookupStrategy>(solver.policy());
  }
  return cf::make_builtin_strategy(name);
}

int run_mc(const McArgs& a, unsigned threads) {
  const auto p = probability_flag(a.ps);
  const auto s = simulation_strategy(a.strategy, a.n, p.as_double(), a.block, a.inner);
  const auto c = cf::Configuration::epr_pairs(a.n);
  const auto rep = cf::estimate_quality(*s, c, p.as_double(), a.trials, a.seed, threads);
  json doc;
  doc["schema"] = "cluster-forge/simulation-report/v1";
  doc["version"] = kVersion;
  doc["strategy"] = s->name();
  doc["N"] = a.n;
  doc["ps"] = a.ps;
  doc["trials"] = rep.trials;
  doc["seed"] = rep.seed;
  doc["mean"] = number(rep.mean);
  doc["std_error"] = number(rep.std_error);
  doc["mean_attempts"] = number(rep.mean_attempts);
  if (a.compare) {
    if (p.is_exact) {
      const auto q = cf::strategy_quality(*s, c, p.exact);
      doc["exact"] = cf::format_exact(q);
      doc["exact_float"] = cf::to_double(q);
    } else {
      doc["exact_float"] = cf::strategy_quality(*s, c, p.as_double());
    }
    if (rep.has_std_error() && rep.std_error > 0) {
      doc["z"] = (rep.mean - doc["exact_float"].get<double>()) / rep.std_error;
    }
  }
  Output o{"json", a.out};
  o.with_stream([&](std::ostream& out) { out << doc.dump(2) << '\n'; });
  return 0;
}

struct ThresholdArgs {
  std::vector<std::uint64_t> targets{50, 100, 200};
  std::optional<double> alpha;
  double epsilon = 0.5;
  std::size_t block = 8;
  std::string inner = "modesty";
  std::string ps = "1/2";
  std::uint64_t trials = 2000;
  std::uint64_t seed = 1;
  bool insufficient = false;
  Output out;
};

int run_threshold(const ThresholdArgs& a, unsigned threads) {
  const auto p = probability_flag(a.ps);
  const auto inner = stateless_by_name(a.inner);
  const auto s = cf::two_stage_strategy(a.block, inner);
  double alpha = 0;
  if (a.alpha) {
    alpha = *a.alpha;
  } else if (a.insufficient) {
    alpha = 0.2;
  } else {
    alpha = cf::to_double(cf::block_rate(*inner, a.block, p.exact));
  }
  Table t{"threshold",
          {"L", "N", "alpha", "epsilon", "block", "below_block_range", "trials", "successes",
           "fraction", "ci_low", "ci_high", "mean_length", "std_error", "markov_cap"},
          {}, {}, {}};
  t.summary["direction"] = a.insufficient ? "insufficient" : "sufficient";
  t.summary["strategy"] = s->name();
  for (std::uint64_t target : a.targets) {
    const auto r = cf::threshold_experiment(*s, target, alpha, a.epsilon, p.as_double(), a.trials,
                                            a.seed, !a.insufficient, threads);
    json cap = nullptr;
    if (r.pairs >= 6 && p.exact == cf::Rational(1, 2)) {
      cap = std::min(1.0, cf::to_double(cf::analytic_upper_bound(static_cast<cf::Count>(r.pairs))) /
                              static_cast<double>(target));
    }
    t.add({target, r.pairs, alpha, a.epsilon, r.block_size, r.below_block_range, r.trials,
           r.successes, r.fraction, r.interval.low, r.interval.high, number(r.mean_length),
           number(r.std_error), cap});
  }
  a.out.emit(t);
  return 0;
}

// ---------------------------------------------------------------------------
// weave, percolation-scan
// ---------------------------------------------------------------------------

struct WeaveArgs {
  std::vector<std::uint64_t> n{20};
  double a = 3;
  std::string ps = "0.5";
  std::uint64_t trials = 0;
  std::uint64_t seed = 1;
  Output out;
};

int run_weave(const WeaveArgs& a, unsigned threads) {
  const double p = probability_flag(a.ps).as_double();
  Table t{"weave",
          {"n", "pi_s", "P_s", "hoeffding", "mc_estimate", "mc_ci_low", "mc_ci_high", "m",
           "resources", "redundant_encoding"},
          {}, {}, {}};
  for (std::uint64_t n : a.n) {
    const cf::WeaveParameters w{n, a.a, p};
    w.validate();
    json hoeff = nullptr;
    if (w.a * w.p > 1) hoeff = cf::hoeffding_bound(w);
    json est = nullptr, lo = nullptr, hi = nullptr;
    if (a.trials > 0) {
      const auto sim = cf::simulate_weave(w, a.trials, a.seed, threads);
      est = sim.fraction;
      lo = sim.interval.low;
      hi = sim.interval.high;
    }
    const auto res = cf::weave_resources(w);
    t.add({n, cf::single_chain_weave_probability(w), cf::overall_success_probability(w), hoeff, est,
           lo, hi, w.attempts(), res.total, res.redundant_encoding});
  }
  a.out.emit(t);
  return 0;
}

struct ScanArgs {
  std::optional<double> a;
  std::optional<std::string> ps;
  std::vector<double> ps_grid, a_grid;
  std::vector<std::uint64_t> n{50, 100, 200, 400};
  Output out;
};

int run_percolation(const ScanArgs& s) {
  cf::PercolationScan scan;
  if (s.a && !s.ps) {
    std::vector<double> grid = s.ps_grid;
    if (grid.empty()) {
      for (int i = 1; i <= 19; ++i) grid.push_back(i / 20.0);
    }
    scan = cf::percolation_scan(cf::ScanAxis::success_probability, *s.a, grid, s.n);
  } else if (s.ps && !s.a) {
    std::vector<double> grid = s.a_grid;
    if (grid.empty()) {
      for (int i = 0; i <= 16; ++i) grid.push_back(1.25 + 0.25 * i);
    }
    scan = cf::percolation_scan(cf::ScanAxis::overhead, probability_flag(*s.ps).as_double(), grid,
                                s.n);
  } else {
    throw UsageError("give exactly one of --a (scan p_s) or --ps (scan a)");
  }
  Table t{"percolation-scan", {"a", "ps", "n", "log_P_s", "P_s", "trend"}, {}, {}, {}};
  for (const auto& pt : scan.points) {
    for (std::size_t i = 0; i < scan.sides.size(); ++i) {
      t.add({pt.a, pt.p, scan.sides[i], number(pt.log_success[i]), std::exp(pt.log_success[i]),
             cf::to_string(pt.trend)});
    }
  }
  const std::string axis = scan.axis == cf::ScanAxis::success_probability ? "ps" : "a";
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  t.summary["axis"] = axis;
  t.summary["threshold"] = scan.threshold;
  t.summary["last_decreasing"] = opt(scan.last_decreasing);
  t.summary["first_increasing"] = opt(scan.first_increasing);
  t.summary["contains_threshold"] = scan.bracket_contains_threshold();
  t.notes.push_back("axis=" + axis + " threshold=" + format_double(scan.threshold) +
                    " last_decreasing=" +
                    (scan.last_decreasing ? format_double(*scan.last_decreasing) : "none") +
                    " first_increasing=" +
                    (scan.first_increasing ? format_double(*scan.first_increasing) : "none") +
                    " contains_threshold=" + (scan.bracket_contains_threshold() ? "yes" : "no"));
  s.out.emit(t);
  return 0;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct ValidateArgs {
  unsigned n = 12;
  unsigned lp_max = 200;
};

int run_validate(const ValidateArgs& a) {
  bool all_ok = true;
  auto report = [&](bool ok, const std::string& name, const std::string& detail) {
    all_ok = all_ok && ok;
    std::cout << (ok ? "PASS " : "FAIL ") << name << (detail.empty() ? "" : " (" + detail + ")")
              << '\n';
  };

  for (const auto& check : cf::check_monotonicity_lemmas(a.n)) {
    report(check.holds(), "lemma " + check.name,
           std::to_string(check.checked) + " checks" +
               (check.holds() ? "" : ", first failure " + check.first_counterexample));
  }

  for (const char* name : {"greed", "modesty", "static"}) {
    const auto s = cf::make_builtin_strategy(name);
    std::string failure;
    for (unsigned n = 1; n <= a.n && failure.empty(); ++n) {
      if (const auto v = cf::validate_strategy(*s, cf::Configuration::epr_pairs(n), a.n)) {
        failure = "N=" + std::to_string(n) + ": " + v->message;
      }
    }
    report(failure.empty(), std::string("valid strategy ") + name, failure);
  }

  {
    std::string failure;
    try {
      for (unsigned n = 1; n <= a.lp_max; ++n) cf::certify_attempts_bound(n);
    } catch (const cf::CertificateError& e) {
      failure = e.what();
    }
    report(failure.empty(), "LP duality certificates", "N=1.." + std::to_string(a.lp_max) +
                                                           (failure.empty() ? "" : ": " + failure));
  }

  {
    unsigned bad = 0;
    for (cf::Length x = 1; x <= 8; ++x) {
      for (cf::Length y = 1; y <= 8; ++y) {
        const auto c = cf::Configuration::from_lengths(std::vector<cf::Length>{x, y});
        if (cf::optimal_quality(c, cf::Rational(1, 2)) != cf::two_chain_quality(x, y)) ++bad;
      }
    }
    report(bad == 0, "two-chain closed form", std::to_string(bad) + " mismatches");
  }

  {
    const cf::Greed greed;
    unsigned bad = 0;
    const unsigned top = std::min(a.n, 14u);
    for (unsigned n = 1; n <= top; ++n) {
      const auto tree = cf::event_tree_oracle(greed, cf::IdentityConfiguration::epr_pairs(n),
                                              cf::Rational(1, 2));
      if (tree.mean_length != cf::greed_closed_form_exact(n) || tree.total_probability() != 1) ++bad;
    }
    report(bad == 0, "greed closed form vs event tree", "N=1.." + std::to_string(top));
  }

  {
    cf::OptimalSolver<cf::Rational> solver(cf::Rational(1, 2));
    unsigned bad = 0;
    for (unsigned n = 6; n <= a.n; ++n) {
      if (solver.solve(cf::Configuration::epr_pairs(n)).quality > cf::analytic_upper_bound(n)) ++bad;
    }
    report(bad == 0, "Q(N) <= N/5 + 2", "N=6.." + std::to_string(a.n));
  }

  return all_ok ? 0 : static_cast<int>(Exit::certificate);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and stochastic analysis of linear cluster state construction by fusion"};
  app.set_version_flag("--version", std::string("cluster-forge ") + kVersion);
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads for simulations (0 = all cores)");

  QualityArgs qa;
  auto* quality = app.add_subcommand("quality", "Expected final length per strategy over N");
  quality->add_option("--strategy", qa.strategy)
      ->check(CLI::IsMember({"greed", "modesty", "static", "optimal", "all"}))
      ->capture_default_str();
  quality->add_option("--n-min", qa.n_min)->check(CLI::Range(1u, 64u))->capture_default_str();
  quality->add_option("--n-max", qa.n_max)->check(CLI::Range(1u, 64u))->capture_default_str();
  quality->add_option("--ps", qa.ps, "Success probability, a/b (exact) or decimal (float)")
      ->capture_default_str();
  add_output_flags(quality, qa.out);

  TableArgs ta;
  auto* table = app.add_subcommand("optimal-table", "Build and persist the optimal policy table");
  table->add_option("--n", ta.n, "Maximal total length")->check(CLI::Range(1u, 80u))->capture_default_str();
  table->add_option("--ps", ta.ps, "Success probability; decimals are read exactly")->capture_default_str();
  table->add_option("-o,--out", ta.out, "Table file (default: $CLUSTER_FORGE_TABLE_DIR or stdout)");
  table->add_option("--max-entries", ta.max_entries, "Entry budget, 0 = unlimited")->capture_default_str();

  BoundsArgs ba;
  auto* bounds = app.add_subcommand("bounds", "Lower bound, optimum, Modesty and upper bounds");
  bounds->add_option("--n", ba.n, "Single N")->check(CLI::Range(1u, 60u));
  bounds->add_option("--n-min", ba.n_min)->check(CLI::Range(1u, 60u))->capture_default_str();
  bounds->add_option("--n-max", ba.n_max)->check(CLI::Range(1u, 60u))->capture_default_str();
  bounds->add_option("--n0", ba.n0, "Block size of the lower bound")->check(CLI::Range(1u, 200u))->capture_default_str();
  bounds->add_option("--parity", ba.parity, "Block sizes checked for the lower bound")
      ->check(CLI::IsMember({"all", "even"}))
      ->capture_default_str();
  add_output_flags(bounds, ba.out);

  RazorArgs ra;
  auto* razor = app.add_subcommand("razor", "Razor model quality, attempts and upper bound");
  razor->add_option("--n", ra.n)->check(CLI::Range(1u, 200u))->capture_default_str();
  razor->add_option("--n-max", ra.n_max, "Sweep N = 1..n-max instead of a single N")->check(CLI::Range(1u, 200u));
  razor->add_option("--r-min", ra.r_min)->capture_default_str();
  razor->add_option("--r-max", ra.r_max)->capture_default_str();
  razor->add_flag("--exact", ra.exact, "Add the optimal quality and the relative gap");
  add_output_flags(razor, ra.out);

  McArgs ma;
  auto* mc = app.add_subcommand("mc", "Monte Carlo estimate of a strategy's expected length");
  mc->add_option("--strategy", ma.strategy)
      ->check(CLI::IsMember({"greed", "modesty", "static", "optimal", "two-stage"}))
      ->capture_default_str();
  mc->add_option("--n", ma.n)->check(CLI::Range(1u, 100000u))->capture_default_str();
  mc->add_option("--ps", ma.ps)->capture_default_str();
  mc->add_option("--trials", ma.trials)->check(CLI::PositiveNumber)->capture_default_str();
  mc->add_option("--seed", ma.seed)->capture_default_str();
  mc->add_option("--block", ma.block, "Block size for two-stage")->check(CLI::Range(2u, 100000u))->capture_default_str();
  mc->add_option("--inner", ma.inner, "Inner strategy for two-stage")
      ->check(CLI::IsMember({"greed", "modesty"}))
      ->capture_default_str();
  mc->add_flag("--compare", ma.compare, "Also evaluate the exact expectation");
  mc->add_option("-o,--out", ma.out);

  ThresholdArgs tha;
  auto* threshold = app.add_subcommand("threshold", "Probability that N = (1/alpha +- eps) L pairs yield a chain >= L");
  threshold->add_option("--target", tha.targets, "Target lengths L")->delimiter(',')->capture_default_str();
  threshold->add_option("--alpha", tha.alpha, "Yield rate (default: block rate of the inner strategy, or 1/5 with --insufficient)");
  threshold->add_option("--epsilon", tha.epsilon)->check(CLI::PositiveNumber)->capture_default_str();
  threshold->add_option("--block", tha.block)->check(CLI::Range(2u, 100000u))->capture_default_str();
  threshold->add_option("--inner", tha.inner)->check(CLI::IsMember({"greed", "modesty"}))->capture_default_str();
  threshold->add_option("--ps", tha.ps)->capture_default_str();
  threshold->add_option("--trials", tha.trials)->check(CLI::PositiveNumber)->capture_default_str();
  threshold->add_option("--seed", tha.seed)->capture_default_str();
  threshold->add_flag("--insufficient", tha.insufficient, "Use N = (1/alpha - eps) L");
  add_output_flags(threshold, tha.out);

  WeaveArgs wa;
  auto* weave = app.add_subcommand("weave", "Success probabilities of the woven n x n cluster");
  weave->add_option("--n", wa.n, "Cluster sides")->delimiter(',')->capture_default_str();
  weave->add_option("--a", wa.a, "Overhead factor, m = round(a n)")->capture_default_str();
  weave->add_option("--ps", wa.ps)->capture_default_str();
  weave->add_option("--trials", wa.trials, "Monte Carlo trials, 0 = none")->capture_default_str();
  weave->add_option("--seed", wa.seed)->capture_default_str();
  add_output_flags(weave, wa.out);

  ScanArgs sa;
  auto* scan = app.add_subcommand("percolation-scan", "P_s(n) over a p_s grid (fixed a) or an a grid (fixed p_s)");
  scan->add_option("--a", sa.a, "Fixed overhead factor; scans p_s");
  scan->add_option("--ps", sa.ps, "Fixed success probability; scans a");
  scan->add_option("--ps-grid", sa.ps_grid)->delimiter(',');
  scan->add_option("--a-grid", sa.a_grid)->delimiter(',');
  scan->add_option("--n", sa.n, "Cluster sides")->delimiter(',')->capture_default_str();
  add_output_flags(scan, sa.out);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Run the invariant suite");
  validate->add_option("--n", va.n, "Largest total length checked")->check(CLI::Range(1u, 20u))->capture_default_str();
  validate->add_option("--lp-max", va.lp_max)->check(CLI::Range(1u, 100000u))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(Exit::bad_flags);
  }

  try {
    if (*quality) return run_quality(qa);
    if (*table) return run_optimal_table(ta);
    if (*bounds) return run_bounds(ba);
    if (*razor) return run_razor(ra);
    if (*mc) return run_mc(ma, threads);
    if (*threshold) return run_threshold(tha, threads);
    if (*weave) return run_weave(wa, threads);
    if (*scan) return run_percolation(sa);
    if (*validate) return run_validate(va);
  } catch (const cf::BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(Exit::budget);
  } catch (const cf::CertificateError& e) {
    std::cerr << "certificate failure: " << e.what() << '\n';
    return static_cast<int>(Exit::certificate);
  } catch (const cf::HypothesisViolation& e) {
    std::cerr << "certificate failure: " << e.what() << '\n';
    return static_cast<int>(Exit::certificate);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(Exit::bad_flags);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(Exit::bad_flags);
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(Exit::bad_flags);
  }
  return static_cast<int>(Exit::bad_flags);
}
