#include "weightlab/cli.hpp"

#include <algorithm>
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

#include <CLI11.hpp>
#include <json.hpp>

#include "weightlab/criteria.hpp"
#include "weightlab/error.hpp"
#include "weightlab/exponent.hpp"
#include "weightlab/format.hpp"
#include "weightlab/summation.hpp"
#include "weightlab/transform.hpp"
#include "weightlab/zero_table.hpp"

namespace weightlab::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kAlphaTolerance = 0.05;
constexpr double kSlopeThreshold = 0.05;
constexpr double kContraction = 0.8;
constexpr double kConverged = 1e-3;
constexpr int kFitPoints = 13;

const std::map<std::string, Command> kCommands = {
    {"zeros", Command::Zeros},     {"masses", Command::Masses},
    {"ap", Command::Ap},           {"testing", Command::Testing},
    {"quadap", Command::Quadap},   {"selfsim", Command::Selfsim},
    {"report", Command::Report},
};

const char* variant_name(SigmaVariant v) {
  return v == SigmaVariant::Centered ? "centered" : "zeroed";
}

SigmaVariant parse_variant(const std::string& s, const std::string& flag) {
  if (s == "centered") return SigmaVariant::Centered;
  if (s == "zeroed") return SigmaVariant::Zeroed;
  throw ConfigError(flag, "expected centered or zeroed, got '" + s + "'");
}

Command parse_command(const std::string& s, const std::string& flag) {
  auto it = kCommands.find(s);
  if (it == kCommands.end()) throw ConfigError(flag, "unknown command '" + s + "'");
  return it->second;
}

template <typename T>
void json_get(const json& j, const char* key, const std::string& flag, T& out) {
  std::string alt = key;
  std::replace(alt.begin(), alt.end(), '_', '-');
  const json* node = nullptr;
  if (j.contains(key)) {
    node = &j.at(key);
  } else if (j.contains(alt)) {
    node = &j.at(alt);
  }
  if (!node) return;
  try {
    out = node->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(flag, "wrong type in config file");
  }
}

void apply_json(const std::string& path, RunConfig& rc) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("--config", "top level must be an object");
  std::string command;
  json_get(j, "command", "command", command);
  if (!command.empty()) rc.command = parse_command(command, "command");
  json_get(j, "p", "--p", rc.p);
  json_get(j, "delta", "--delta", rc.delta);
  json_get(j, "depth_omega", "--depth-omega", rc.depth_omega);
  json_get(j, "depth_sigma", "--depth-sigma", rc.depth_sigma);
  json_get(j, "family_n", "--family-n", rc.family_n);
  json_get(j, "max_k", "--max-k", rc.max_k);
  json_get(j, "nmax", "--nmax", rc.nmax);
  json_get(j, "tol", "--tol", rc.tol);
  std::string variant;
  json_get(j, "variant", "--variant", variant);
  if (!variant.empty()) rc.variant = parse_variant(variant, "--variant");
  json_get(j, "dual", "--dual", rc.dual);
  json_get(j, "zeros_file", "--zeros-file", rc.zeros_file);
  json_get(j, "out", "--out", rc.out);
  json_get(j, "svg", "--svg", rc.svg);
  json_get(j, "scan_k", "--scan-k", rc.scan_k);
  json_get(j, "depth_zeros", "--depth-zeros", rc.depth_zeros);
  json_get(j, "timings", "--timings", rc.timings);
}

void check_range(bool ok, const std::string& flag, const std::string& what) {
  if (!ok) throw ConfigError(flag, what);
}

int zero_limit(const RunConfig& rc) {
  return rc.variant == SigmaVariant::Zeroed ? kMaxZeroGeneration
                                            : kMaxSigmaDepth;
}

// sigma depth of the testing scan; omega nodes must stay off the atoms
int testing_sigma_depth(const RunConfig& rc) {
  return std::max(0, std::min(rc.depth_sigma, rc.depth_omega - 2));
}

int quad_sigma_depth(const RunConfig& rc) {
  return std::min(rc.family_n + 6, zero_limit(rc));
}

int selfsim_sigma_depth(const RunConfig& rc) {
  return std::max(0, std::min(rc.depth_sigma, rc.depth_omega - 4));
}

// Refinement ladder ending at (n, l), stepping both depths down by 2.
std::vector<std::pair<int, int>> ladder(int n, int l) {
  std::vector<std::pair<int, int>> out;
  for (int i = 2; i >= 0; --i) {
    if (n - 2 * i >= 0 && l - 2 * i >= 0) out.emplace_back(n - 2 * i, l - 2 * i);
  }
  return out;
}

// "bounded" when the last increment is negligible or contracts against the
// previous one; linear growth keeps the increments flat.
std::string convergence_verdict(const std::vector<double>& v) {
  if (v.size() < 3) return "undetermined";
  const std::size_t n = v.size();
  const double d1 = v[n - 2] - v[n - 3];
  const double d2 = v[n - 1] - v[n - 2];
  if (!std::isfinite(v[n - 1])) return "unbounded";
  if (std::fabs(d2) <= kConverged * std::fabs(v[n - 1])) return "bounded";
  if (std::fabs(d2) <= kContraction * std::fabs(d1)) return "bounded";
  return "unbounded";
}

// Row-wise convergence across a refinement ladder of identically shaped
// scans; the supremum of finitely many convergent rows is finite.
struct LadderVerdict {
  std::size_t rows_unbounded = 0;
  std::string verdict;
};

LadderVerdict ladder_verdict(const std::vector<ScanResult>& scans,
                             const std::function<bool(const ScanRow&)>& pred) {
  LadderVerdict out;
  if (scans.size() < 3) {
    out.verdict = "undetermined";
    return out;
  }
  for (std::size_t i = 0; i < scans.back().rows.size(); ++i) {
    if (!pred(scans.back().rows[i])) continue;
    std::vector<double> v;
    for (const ScanResult& s : scans) v.push_back(s.rows[i].value);
    if (convergence_verdict(v) != "bounded") ++out.rows_unbounded;
  }
  out.verdict = out.rows_unbounded == 0 ? "bounded" : "unbounded";
  return out;
}

double rel_drift(const std::vector<double>& v) {
  if (v.size() < 2 || v[v.size() - 2] == 0.0) return 0.0;
  return v.back() / v[v.size() - 2] - 1.0;
}

class Context {
 public:
  explicit Context(const RunConfig& rc) : rc_(rc), dir_(rc.out) {
    cfg_ = make_config(rc.p, rc.delta);
    if (rc.dual) cfg_ = dual_swap(cfg_);
  }

  const RunConfig& rc() const { return rc_; }
  const ExponentConfig& cfg() const { return cfg_; }
  json& results() { return results_; }
  std::vector<std::string>& manifest() { return manifest_; }
  std::vector<StageReport>& stages() { return stages_; }

  const ZeroTable* zeros_for(SigmaVariant v) {
    return v == SigmaVariant::Zeroed ? &zeros(needed_generation_) : nullptr;
  }

  void need_generation(int g) { needed_generation_ = std::max(needed_generation_, g); }

  const ZeroTable& zeros(int generation) {
    generation = std::max(generation, needed_generation_);
    if (zeros_ && zeros_->complete_to(generation)) return *zeros_;
    if (!rc_.zeros_file.empty() && fs::exists(rc_.zeros_file)) {
      std::ifstream in(rc_.zeros_file);
      ZeroTable t = ZeroTable::read_csv(in);
      if (!t.complete_to(generation)) {
        fail(ErrorKind::Dependency,
             "--zeros-file covers generations <= " +
                 std::to_string(t.max_generation()) + ", need " +
                 std::to_string(generation));
      }
      zeros_ = std::move(t);
      return *zeros_;
    }
    zeros_ = zero_table(generation, rc_.tol, rc_.depth_zeros);
    if (!rc_.zeros_file.empty()) {
      std::ofstream out(rc_.zeros_file);
      zeros_->write_csv(out);
      if (!out) fail(ErrorKind::Config, "cannot write --zeros-file");
      std::cerr << "[weightlab] cached zero table to " << rc_.zeros_file << '\n';
    }
    return *zeros_;
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    out.close();
    if (!out) fail(ErrorKind::Config, "cannot write " + path.string());
    manifest_.push_back(name);
  }

 private:
  const RunConfig& rc_;
  ExponentConfig cfg_;
  fs::path dir_;
  std::optional<ZeroTable> zeros_;
  int needed_generation_ = 0;
  json results_ = json::object();
  std::vector<std::string> manifest_;
  std::vector<StageReport> stages_;
};

json to_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

json depths_json(const std::vector<std::pair<int, int>>& d) {
  json a = json::array();
  for (auto [n, l] : d) a.push_back(json::array({n, l}));
  return a;
}

// --- stages ----------------------------------------------------------------

void stage_zeros(Context& ctx) {
  const int k = ctx.rc().max_k;
  const ZeroTable& full = ctx.zeros(k);
  ZeroTable table(k);
  double max_residual = 0.0;
  for (int g = 0; g <= k; ++g) {
    for (std::int64_t j = 1; j <= (std::int64_t{1} << g); ++j) {
      const ZeroEntry& e = full.at({g, j});
      table.set({g, j}, e);
      max_residual = std::max(max_residual, e.residual);
    }
  }
  std::ostringstream csv;
  table.write_csv(csv);
  ctx.write("zeros.csv", csv.str());
  json r;
  r["max_generation"] = k;
  r["entries"] = table.size();
  r["max_residual"] = max_residual;
  r["edge_distance_ratio"] = to_json(edge_distance_ratios(table));
  ctx.results()["zeros"] = r;
  std::cout << "zeros: " << table.size() << " entries, max residual "
            << format_double(max_residual) << '\n';
}

void stage_masses(Context& ctx) {
  const ExponentConfig& cfg = ctx.cfg();
  const int l = ctx.rc().depth_sigma;
  const SigmaVariant var = ctx.rc().variant;
  const AtomicMeasure sigma = sigma_truncated(cfg, l, var, ctx.zeros_for(var));
  std::vector<CompensatedSum> per_gen(static_cast<std::size_t>(l) + 1);
  for (const Atom& a : sigma.atoms()) {
    per_gen[static_cast<std::size_t>(a.generation)].add(a.mass);
  }
  std::ostringstream csv;
  csv << "k,weight,precursor,atoms,generation_mass,cumulative_mass,"
         "cumulative_closed_form,omega_mass\n";
  CompensatedSum running;
  double max_precursor = 0.0;
  for (int k = 0; k <= l; ++k) {
    running.merge(per_gen[static_cast<std::size_t>(k)]);
    const double pre = precursor_ratio(cfg, k);
    max_precursor = std::max(max_precursor, std::fabs(pre - 1.0));
    csv << k << ',' << format_double(sigma_weight(cfg, k)) << ','
        << format_double(pre) << ',' << (std::int64_t{1} << k) << ','
        << format_double(per_gen[static_cast<std::size_t>(k)].value()) << ','
        << format_double(running.value()) << ','
        << format_double(sigma_total_mass_closed_form(cfg, k)) << ','
        << format_double(omega_mass(k)) << '\n';
  }
  ctx.write("masses.csv", csv.str());
  const double closed = sigma_total_mass_closed_form(cfg, l);
  json r;
  r["sigma_depth"] = l;
  r["variant"] = variant_name(var);
  r["total_mass"] = sigma.total_mass();
  r["closed_form"] = closed;
  r["relative_defect"] = std::fabs(sigma.total_mass() / closed - 1.0);
  r["max_precursor_defect"] = max_precursor;
  ctx.results()["masses"] = r;
  std::cout << "masses: total " << format_double(sigma.total_mass())
            << ", closed form " << format_double(closed) << '\n';
}

void stage_ap(Context& ctx) {
  const ExponentConfig& cfg = ctx.cfg();
  const RunConfig& rc = ctx.rc();
  const auto family = ap_family(rc.scan_k);
  const auto depths = ladder(rc.depth_omega, rc.depth_sigma);
  const ZeroTable* zeros = ctx.zeros_for(rc.variant);
  std::vector<double> sups;
  std::vector<ScanResult> scans;
  for (auto [n, l] : depths) {
    scans.push_back(ap_constant(cfg, family, n, l, rc.variant, zeros));
    sups.push_back(scans.back().summary());
  }
  const ScanResult& finest = scans.back();
  const LadderVerdict lv = ladder_verdict(scans, [](const ScanRow&) { return true; });
  std::ostringstream csv;
  finest.write_csv(csv);
  ctx.write("ap.csv", csv.str());
  double max_err = 0.0;
  for (const ScanRow& row : finest.rows) max_err = std::max(max_err, *row.error_bound);
  json r;
  r["depths"] = depths_json(depths);
  r["sup"] = to_json(sups);
  r["sup_cylinders"] = finest.sup_where(
      [](const ScanRow& row) { return row.params[0] == "cylinder"; });
  r["sup_gaps"] = finest.sup_where(
      [](const ScanRow& row) { return row.params[0] == "gap"; });
  r["max_error_bound"] = max_err;
  r["drift"] = rel_drift(sups);
  r["rows_unbounded"] = lv.rows_unbounded;
  r["verdict"] = lv.verdict;
  ctx.results()["ap"] = r;
  std::cout << "ap: sup " << format_double(sups.back()) << " ("
            << r["verdict"].get<std::string>() << ")\n";
}

void stage_testing(Context& ctx) {
  const ExponentConfig& cfg = ctx.cfg();
  const RunConfig& rc = ctx.rc();
  const auto depths = ladder(rc.depth_omega, testing_sigma_depth(rc));
  const ZeroTable* zeros = ctx.zeros_for(rc.variant);
  const std::string fwd = to_string(Direction::Forward, cfg.roles_swapped);
  const std::string bwd = to_string(Direction::Backward, cfg.roles_swapped);
  const auto is_fwd = [&](const ScanRow& row) { return row.params[2] == fwd; };
  const auto is_bwd = [&](const ScanRow& row) { return row.params[2] == bwd; };
  std::vector<double> sup_f;
  std::vector<double> sup_b;
  std::vector<ScanResult> scans;
  for (auto [n, l] : depths) {
    TestingEngine engine(cfg, cantor_quadrature(n),
                         sigma_truncated(cfg, l, rc.variant, zeros));
    scans.push_back(testing_scan(cfg, rc.scan_k, engine));
    sup_f.push_back(scans.back().sup_where(is_fwd));
    sup_b.push_back(scans.back().sup_where(is_bwd));
  }
  const ScanResult& finest = scans.back();
  std::ostringstream csv;
  finest.write_csv(csv);
  ctx.write("testing.csv", csv.str());
  auto direction = [&](const std::vector<double>& v,
                       const std::function<bool(const ScanRow&)>& pred) {
    const LadderVerdict lv = ladder_verdict(scans, pred);
    json d;
    d["sup"] = to_json(v);
    d["drift"] = rel_drift(v);
    d["rows_unbounded"] = lv.rows_unbounded;
    d["verdict"] = lv.verdict;
    return d;
  };
  json r;
  r["depths"] = depths_json(depths);
  r[fwd] = direction(sup_f, is_fwd);
  r[bwd] = direction(sup_b, is_bwd);
  const bool ok = r[fwd]["verdict"] == "bounded" && r[bwd]["verdict"] == "bounded";
  const bool undetermined = depths.size() < 3;
  r["verdict"] = undetermined ? "undetermined" : (ok ? "bounded" : "unbounded");
  ctx.results()["testing"] = r;
  std::cout << "testing: " << fwd << " sup " << format_double(sup_f.back())
            << ", " << bwd << " sup " << format_double(sup_b.back()) << " ("
            << r["verdict"].get<std::string>() << ")\n";
}

void stage_quadap(Context& ctx) {
  const ExponentConfig& cfg = ctx.cfg();
  const RunConfig& rc = ctx.rc();
  const std::vector<long long> grid =
      geometric_grid(3.0, std::log10(static_cast<double>(rc.nmax)), kFitPoints);
  const std::vector<double> rhs = quad_rhs_closed_series(cfg, grid);
  const std::vector<double> lhs = quad_lhs_closed_series(cfg, grid);
  std::vector<GrowthPoint> rhs_pts;
  std::vector<GrowthPoint> lhs_pts;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rhs_pts.push_back({static_cast<double>(grid[i]), rhs[i]});
    lhs_pts.push_back({static_cast<double>(grid[i]), lhs[i]});
  }
  const GrowthFit fit = fit_growth(cfg, rhs_pts);
  const double rhs_slope = loglog_slope(rhs_pts);
  const double lhs_slope = loglog_slope(lhs_pts);

  // direct evaluation on sigma
  const int l = quad_sigma_depth(rc);
  const AtomicMeasure sigma =
      sigma_truncated(cfg, l, rc.variant, ctx.zeros_for(rc.variant));
  const std::vector<double> rhs_direct =
      quad_rhs_direct_series(cfg, rc.family_n, sigma);

  ScanResult table;
  table.param_names = {"series", "n"};
  auto add = [&](const char* series, long long n, double value, int dn, int dl) {
    ScanRow row;
    row.params = {series, std::to_string(n)};
    row.value = value;
    row.depth_omega = dn;
    row.depth_sigma = dl;
    table.rows.push_back(std::move(row));
  };
  double lhs_lo = INFINITY, lhs_hi = 0.0, rhs_lo = INFINITY, rhs_hi = 0.0;
  for (int n = 1; n <= rc.family_n; ++n) {
    const double ld = quad_lhs_direct(cfg, n, sigma);
    const double lc = quad_lhs_closed(cfg, n);
    const double rd = rhs_direct[static_cast<std::size_t>(n - 1)];
    const double rcl = quad_rhs_closed(cfg, n);
    add("lhs_direct", n, ld, 0, l);
    add("lhs_closed", n, lc, 0, 0);
    add("rhs_direct", n, rd, n, l);
    add("rhs_closed", n, rcl, 0, 0);
    if (n >= 4 && n <= 10) {
      lhs_lo = std::min(lhs_lo, ld / lc);
      lhs_hi = std::max(lhs_hi, ld / lc);
    }
    if (n >= 6) {
      rhs_lo = std::min(rhs_lo, rd / rcl);
      rhs_hi = std::max(rhs_hi, rd / rcl);
    }
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    add("lhs_closed", grid[i], lhs[i], 0, 0);
    add("rhs_closed", grid[i], rhs[i], 0, 0);
  }
  std::ostringstream csv;
  table.write_csv(csv);
  ctx.write("quadap.csv", csv.str());

  json fj;
  fj["alpha"] = fit.alpha;
  fj["intercept"] = fit.intercept;
  fj["max_residual"] = fit.max_residual;
  fj["target"] = fit.target;
  fj["tolerance"] = kAlphaTolerance;
  fj["n"] = json::array();
  for (long long n : grid) fj["n"].push_back(n);
  fj["residuals"] = to_json(fit.residuals);
  ctx.write("fit.json", fj.dump(2) + "\n");

  if (rc.svg) {
    ctx.write("quadap.svg", svg_loglog(rhs_pts, fit.target));
  }

  const double bound = quad_lhs_series_bound(cfg);
  json r;
  r["alpha"] = fit.alpha;
  r["target"] = fit.target;
  r["tolerance"] = kAlphaTolerance;
  r["alpha_within_tolerance"] = std::fabs(fit.alpha - fit.target) <= kAlphaTolerance;
  r["rhs_loglog_slope"] = rhs_slope;
  r["lhs_loglog_slope"] = lhs_slope;
  r["lhs_partial_sum"] = lhs.back();
  r["lhs_series_bound"] = bound;
  json d;
  d["sigma_depth"] = l;
  d["family_n"] = rc.family_n;
  if (rc.family_n >= 4) {
    d["lhs_ratio_min"] = lhs_lo;
    d["lhs_ratio_max"] = lhs_hi;
  }
  if (rc.family_n >= 6) {
    d["rhs_ratio_min"] = rhs_lo;
    d["rhs_ratio_max"] = rhs_hi;
  }
  r["direct"] = d;
  r["lhs_verdict"] =
      (lhs.back() <= bound && lhs_slope < kSlopeThreshold) ? "bounded" : "divergent";
  r["rhs_verdict"] = rhs_slope > kSlopeThreshold ? "divergent" : "bounded";
  ctx.results()["quadap"] = r;
  std::cout << "quadap: alpha " << format_double(fit.alpha) << " (target "
            << format_double(fit.target) << "), lhs "
            << r["lhs_verdict"].get<std::string>() << ", rhs "
            << r["rhs_verdict"].get<std::string>() << '\n';
}

void stage_selfsim(Context& ctx) {
  const ExponentConfig& cfg = ctx.cfg();
  const int ls = selfsim_sigma_depth(ctx.rc());
  std::vector<std::pair<int, int>> pairs;
  for (int k = std::max(0, ls - 4); k <= ls; k += 2) pairs.emplace_back(k, k + 4);
  ScanResult table;
  table.param_names = {"K", "N"};
  std::vector<double> values;
  for (auto [k, n] : pairs) {
    const double v = selfsim_energy(cfg, k, n);
    values.push_back(v);
    ScanRow row;
    row.params = {std::to_string(k), std::to_string(n)};
    row.value = v;
    row.depth_omega = n;
    row.depth_sigma = k;
    table.rows.push_back(std::move(row));
  }
  std::ostringstream csv;
  table.write_csv(csv);
  ctx.write("selfsim.csv", csv.str());
  json r;
  r["pairs"] = depths_json(pairs);
  r["energy"] = to_json(values);
  r["drift"] = rel_drift(values);
  r["verdict"] = convergence_verdict(values);
  ctx.results()["selfsim"] = r;
  std::cout << "selfsim: energy " << format_double(values.back()) << " ("
            << r["verdict"].get<std::string>() << ")\n";
}

using StageFn = void (*)(Context&);

std::vector<std::pair<std::string, StageFn>> stages_for(Command cmd) {
  switch (cmd) {
    case Command::Zeros: return {{"zeros", stage_zeros}};
    case Command::Masses: return {{"masses", stage_masses}};
    case Command::Ap: return {{"ap", stage_ap}};
    case Command::Testing: return {{"testing", stage_testing}};
    case Command::Quadap: return {{"quadap", stage_quadap}};
    case Command::Selfsim: return {{"selfsim", stage_selfsim}};
    case Command::Report:
      return {{"zeros", stage_zeros},     {"masses", stage_masses},
              {"ap", stage_ap},           {"testing", stage_testing},
              {"quadap", stage_quadap},   {"selfsim", stage_selfsim}};
  }
  return {};
}

int needed_generation(const RunConfig& rc) {
  const bool zeroed = rc.variant == SigmaVariant::Zeroed;
  int g = 0;
  auto want = [&](Command c) {
    return rc.command == c || rc.command == Command::Report;
  };
  if (want(Command::Zeros)) g = std::max(g, rc.max_k);
  if (!zeroed) return g;
  if (want(Command::Masses) || want(Command::Ap)) g = std::max(g, rc.depth_sigma);
  if (want(Command::Testing)) g = std::max(g, testing_sigma_depth(rc));
  if (want(Command::Quadap)) g = std::max(g, quad_sigma_depth(rc));
  return g;
}

json config_json(const RunConfig& rc, const ExponentConfig& cfg) {
  json c;
  c["p"] = rc.p;
  c["p_effective"] = cfg.p;
  c["p_prime"] = cfg.p_prime;
  c["delta"] = cfg.delta;
  c["dual"] = rc.dual;
  c["roles_swapped"] = cfg.roles_swapped;
  c["variant"] = variant_name(rc.variant);
  c["depth_omega"] = rc.depth_omega;
  c["depth_sigma"] = rc.depth_sigma;
  c["family_n"] = rc.family_n;
  c["max_k"] = rc.max_k;
  c["nmax"] = rc.nmax;
  c["tol"] = rc.tol;
  c["scan_k"] = rc.scan_k;
  c["depth_zeros"] = rc.depth_zeros;
  return c;
}

}  // namespace

const char* to_string(Command cmd) noexcept {
  for (const auto& [name, c] : kCommands) {
    if (c == cmd) return name.c_str();
  }
  return "?";
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Numerical experiments on two-weight inequalities for the "
               "Hilbert transform over the Cantor measure",
               "weightlab"};
  RunConfig f;
  std::string command;
  std::string variant;
  std::string config;
  app.add_option("command", command,
                 "zeros | masses | ap | testing | quadap | selfsim | report");
  app.add_option("--config", config, "JSON file with default values");
  app.add_option("--p", f.p, "exponent p in [1.05, 20]");
  app.add_option("--delta", f.delta, "logarithmic decay of the test family");
  app.add_option("--depth-omega", f.depth_omega, "omega quadrature depth N");
  app.add_option("--depth-sigma", f.depth_sigma, "sigma truncation depth L");
  app.add_option("--family-n", f.family_n, "family cutoff for direct sums");
  app.add_option("--max-k", f.max_k, "zero-table generation");
  app.add_option("--nmax", f.nmax, "largest cutoff of the closed-form fit");
  app.add_option("--tol", f.tol, "zero position tolerance (relative)");
  app.add_option("--variant", variant, "centered | zeroed");
  app.add_flag("--dual", f.dual, "swap (p, sigma, omega) for (p', omega, sigma)");
  app.add_option("--zeros-file", f.zeros_file, "zero-table CSV cache");
  app.add_option("--out", f.out, "output directory");
  app.add_flag("--svg", f.svg, "also write quadap.svg");
  app.add_option("--scan-k", f.scan_k, "largest generation in A_p/testing scans");
  app.add_option("--depth-zeros", f.depth_zeros, "quadrature depth for zeros");
  app.add_flag("--timings", f.timings, "record stage timings in summary.json");

  std::vector<const char*> argv{"weightlab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw ConfigError("arguments", e.what());
  }

  RunConfig rc;
  if (!config.empty()) apply_json(config, rc);
  auto given = [&](const char* flag) { return app.count(flag) > 0; };
  if (!command.empty()) rc.command = parse_command(command, "command");
  else if (config.empty()) throw ConfigError("command", "missing command");
  if (given("--p")) rc.p = f.p;
  if (given("--delta")) rc.delta = f.delta;
  if (given("--depth-omega")) rc.depth_omega = f.depth_omega;
  if (given("--depth-sigma")) rc.depth_sigma = f.depth_sigma;
  if (given("--family-n")) rc.family_n = f.family_n;
  if (given("--max-k")) rc.max_k = f.max_k;
  if (given("--nmax")) rc.nmax = f.nmax;
  if (given("--tol")) rc.tol = f.tol;
  if (given("--variant")) rc.variant = parse_variant(variant, "--variant");
  if (given("--dual")) rc.dual = f.dual;
  if (given("--zeros-file")) rc.zeros_file = f.zeros_file;
  if (given("--out")) rc.out = f.out;
  if (given("--svg")) rc.svg = f.svg;
  if (given("--scan-k")) rc.scan_k = f.scan_k;
  if (given("--depth-zeros")) rc.depth_zeros = f.depth_zeros;
  if (given("--timings")) rc.timings = f.timings;
  validate(rc);
  return rc;
}

void validate(const RunConfig& rc) {
  check_range(std::isfinite(rc.p) && rc.p >= kMinExponent && rc.p <= kMaxExponent,
              "--p", "must lie in [1.05, 20]");
  check_range(std::isfinite(rc.delta) && rc.delta > 0.0, "--delta",
              "must be positive");
  check_range(rc.depth_omega >= 0 && rc.depth_omega <= kMaxQuadratureDepth,
              "--depth-omega", "must lie in [0, 24]");
  check_range(rc.depth_sigma >= 0 && rc.depth_sigma <= zero_limit(rc),
              "--depth-sigma",
              "must lie in [0, " + std::to_string(zero_limit(rc)) + "]");
  check_range(rc.family_n >= 1 && rc.family_n <= zero_limit(rc), "--family-n",
              "must lie in [1, " + std::to_string(zero_limit(rc)) + "]");
  check_range(rc.max_k >= 0 && rc.max_k <= kMaxZeroGeneration, "--max-k",
              "must lie in [0, 20]");
  check_range(rc.nmax >= 10000 && rc.nmax <= 100000000, "--nmax",
              "must lie in [1e4, 1e8]");
  check_range(rc.tol > 0.0 && rc.tol <= 1e-3, "--tol", "must lie in (0, 1e-3]");
  check_range(rc.scan_k >= 0 && rc.scan_k <= kMaxTestingScanK, "--scan-k",
              "must lie in [0, 8]");
  check_range(rc.depth_zeros > needed_generation(rc) &&
                  rc.depth_zeros <= OmegaTransform::kMaxDepth,
              "--depth-zeros",
              "must exceed the zero-table generation " +
                  std::to_string(needed_generation(rc)) + " and be <= 36");
  check_range(!rc.out.empty(), "--out", "must not be empty");
  if (rc.dual) {
    const double pd = rc.p / (rc.p - 1.0);
    check_range(pd <= 21.0, "--dual", "dual exponent too large");
  }
}

RunSummary run(const RunConfig& rc) {
  validate(rc);
  std::error_code ec;
  fs::create_directories(rc.out, ec);
  if (ec || !fs::is_directory(rc.out)) {
    fail(ErrorKind::Config, "--out: cannot create directory '" + rc.out + "'");
  }
  fs::remove(fs::path(rc.out) / "_FAILED", ec);

  Context ctx(rc);
  ctx.need_generation(needed_generation(rc));
  json summary;
  summary["tool"] = "weightlab";
  summary["command"] = to_string(rc.command);
  summary["config"] = config_json(rc, ctx.cfg());
  summary["notes"] = json::array(
      {"test family indexed from k = 1 (theta is the Cantor sibling)",
       "quadratic functional integrates outside the triple 3I",
       "testing scans use sigma depth min(L, N - 2) so omega nodes avoid atoms"});

  for (const auto& [name, fn] : stages_for(rc.command)) {
    const auto t0 = std::chrono::steady_clock::now();
    fn(ctx);
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    ctx.stages().push_back({name, "ok", secs});
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", secs);
    std::cerr << "[weightlab] " << name << ": " << buf << " s\n";
  }

  RunSummary out;
  json stages = json::array();
  for (const StageReport& s : ctx.stages()) {
    json st;
    st["name"] = s.name;
    st["status"] = s.status;
    if (rc.timings) st["seconds"] = s.seconds;
    stages.push_back(st);
  }
  summary["stages"] = stages;
  summary["results"] = ctx.results();
  if (rc.command == Command::Report) {
    const json& r = ctx.results();
    json v;
    v["ap"] = r["ap"]["verdict"];
    v["testing"] = r["testing"]["verdict"];
    v["quad_lhs"] = r["quadap"]["lhs_verdict"];
    v["quad_rhs"] = r["quadap"]["rhs_verdict"];
    out.verdict_line = v["ap"].get<std::string>() + "/" +
                       v["testing"].get<std::string>() + "/" +
                       v["quad_lhs"].get<std::string>() + "/" +
                       v["quad_rhs"].get<std::string>();
    v["line"] = out.verdict_line;
    v["order"] = "A_p/testing/quad-LHS/quad-RHS";
    summary["verdict"] = v;
  }
  json manifest = json::array();
  for (const auto& m : ctx.manifest()) manifest.push_back(m);
  manifest.push_back("summary.json");
  summary["manifest"] = manifest;
  out.json = summary.dump(2) + "\n";
  ctx.write("summary.json", out.json);
  out.stages = ctx.stages();
  out.manifest = ctx.manifest();
  if (!out.verdict_line.empty()) {
    std::cout << "verdict (A_p/testing/quad-LHS/quad-RHS): " << out.verdict_line
              << '\n';
  }
  return out;
}

std::string svg_loglog(const std::vector<GrowthPoint>& series,
                       double target_slope) {
  if (series.size() < 2) fail(ErrorKind::Config, "svg needs at least 2 points");
  std::vector<double> xs;
  std::vector<double> ys;
  for (const GrowthPoint& pt : series) {
    if (!(pt.n > 0.0) || !(pt.value > 0.0)) {
      fail(ErrorKind::Config, "svg needs positive n and values");
    }
    xs.push_back(std::log10(pt.n));
    ys.push_back(std::log10(pt.value));
  }
  std::vector<double> ref;
  for (double x : xs) ref.push_back(ys.front() + target_slope * (x - xs.front()));

  double x0 = *std::min_element(xs.begin(), xs.end());
  double x1 = *std::max_element(xs.begin(), xs.end());
  double y0 = std::min(*std::min_element(ys.begin(), ys.end()),
                       *std::min_element(ref.begin(), ref.end()));
  double y1 = std::max(*std::max_element(ys.begin(), ys.end()),
                       *std::max_element(ref.begin(), ref.end()));
  if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }

  const double w = 640, h = 480, m = 60;
  auto px = [&](double x) { return m + (x - x0) / (x1 - x0) * (w - 2 * m); };
  auto py = [&](double y) { return h - m - (y - y0) / (y1 - y0) * (h - 2 * m); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto polyline = [&](const std::vector<double>& yv) {
    std::string pts;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) pts += ' ';
      pts += num(px(xs[i])) + "," + num(py(yv[i]));
    }
    return pts;
  };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
       "viewBox=\"0 0 640 480\">\n"
    << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n"
    << "<g stroke=\"black\" stroke-width=\"1\">\n"
    << "<line x1=\"" << num(m) << "\" y1=\"" << num(h - m) << "\" x2=\""
    << num(w - m) << "\" y2=\"" << num(h - m) << "\"/>\n"
    << "<line x1=\"" << num(m) << "\" y1=\"" << num(m) << "\" x2=\"" << num(m)
    << "\" y2=\"" << num(h - m) << "\"/>\n"
    << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int d = static_cast<int>(std::ceil(x0 - 1e-9));
       d <= static_cast<int>(std::floor(x1 + 1e-9)); ++d) {
    s << "<text x=\"" << num(px(d)) << "\" y=\"" << num(h - m + 16)
      << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(y0 - 1e-9));
       d <= static_cast<int>(std::floor(y1 + 1e-9)); ++d) {
    s << "<text x=\"" << num(m - 6) << "\" y=\"" << num(py(d) + 4)
      << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  s << "<text x=\"" << num(w / 2) << "\" y=\"" << num(h - 16)
    << "\" text-anchor=\"middle\">N</text>\n"
    << "<text x=\"" << num(w - m) << "\" y=\"" << num(m - 20)
    << "\" text-anchor=\"end\">dashed: slope " << num(target_slope)
    << "</text>\n</g>\n"
    << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\""
    << polyline(ys) << "\"/>\n"
    << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" "
       "stroke-dasharray=\"6,4\" points=\""
    << polyline(ref) << "\"/>\n"
    << "</svg>\n";
  return s.str();
}

void emit_svg_loglog(const std::vector<GrowthPoint>& series,
                     double target_slope, const std::string& path) {
  const std::string text = svg_loglog(series, target_slope);
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) fail(ErrorKind::Config, "cannot write " + path);
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::InvalidIndex:
    case ErrorKind::NoSibling:
    case ErrorKind::ResourceLimit:
    case ErrorKind::Dependency:
      return 2;
    default:
      return 3;
  }
}

void write_failure_marker(const std::string& dir, const std::string& what) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream marker(fs::path(dir) / "_FAILED");
  marker << what << '\n';
}

int main(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  RunConfig rc;
  try {
    rc = parse_config(args);
  } catch (const HelpRequested& h) {
    std::cout << h.what();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "weightlab: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "weightlab: " << e.what() << '\n';
    return 2;
  }
  try {
    run(rc);
    return 0;
  } catch (const Error& e) {
    std::cerr << "weightlab: " << to_string(e.kind()) << ": " << e.what() << '\n';
    const int code = exit_code(e.kind());
    if (code == 3) write_failure_marker(rc.out, std::string(to_string(e.kind())) + ": " + e.what());
    return code;
  } catch (const std::exception& e) {
    std::cerr << "weightlab: " << e.what() << '\n';
    write_failure_marker(rc.out, e.what());
    return 3;
  }
}

}  // namespace weightlab::cli
