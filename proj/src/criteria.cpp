#include "weightlab/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "weightlab/cylinder_tree.hpp"
#include "weightlab/error.hpp"
#include "weightlab/format.hpp"
#include "weightlab/parallel.hpp"
#include "weightlab/summation.hpp"

namespace weightlab {

namespace {

struct Label {
  std::string kind;
  int k = 0;
  std::int64_t j = 0;
};

Label describe(const Interval& iv) {
  if (auto idx = iv.as_cylinder()) return {"cylinder", idx->k, idx->j};
  const std::int64_t l = iv.left_num();
  if (iv.level() >= 1 && iv.right_num() - l == 1 && l % 3 == 1) {
    const Interval parent_guess(l - 1, l + 2, iv.level());
    if (auto idx = parent_guess.as_cylinder()) {
      return {"gap", idx->k, idx->j};
    }
  }
  return {"interval", iv.level(), l};
}

double pow_abs(double x, double q) { return std::pow(std::fabs(x), q); }

int tree_level(int depth, int below) {
  return std::clamp(depth - below, 0, 20);
}

}  // namespace

// --- ScanResult ------------------------------------------------------------

double ScanResult::summary() const {
  return sup_where([](const ScanRow&) { return true; });
}

double ScanResult::sup_where(
    const std::function<bool(const ScanRow&)>& pred) const {
  double best = 0.0;
  bool any = false;
  for (const ScanRow& r : rows) {
    if (!pred(r)) continue;
    best = any ? std::max(best, r.value) : r.value;
    any = true;
  }
  return best;
}

void ScanResult::write_csv(std::ostream& out) const {
  for (const auto& name : param_names) out << name << ',';
  out << "value,error_bound,depth_omega,depth_sigma\n";
  for (const ScanRow& r : rows) {
    for (const auto& p : r.params) out << p << ',';
    out << format_double(r.value) << ',';
    if (r.error_bound) out << format_double(*r.error_bound);
    out << ',' << r.depth_omega << ',' << r.depth_sigma << '\n';
  }
}

// --- A_p -------------------------------------------------------------------

CertifiedValue ap_tail(const Interval& iv, const AtomicMeasure& mu, double q) {
  if (!(q > 1.0)) fail(ErrorKind::Config, "ap_tail needs q > 1");
  const double len = iv.length();
  const Provenance& prov = mu.provenance();
  const bool omega = prov.kind == MeasureKind::OmegaQuadrature;
  const double half = omega ? 0.5 * inv_pow3(prov.depth) : 0.0;
  CompensatedSum value;
  CompensatedSum bound;
  for (const Atom& a : mu.atoms()) {
    const double d = iv.dist(a.position);
    const double ratio = len / (len + d);
    value.add(a.mass / len * std::pow(ratio, q));
    if (omega) {
      const double dmin = std::max(0.0, d - half);
      const double r = len / (len + dmin);
      bound.add(a.mass * half * q / (len * len) * std::pow(r, q + 1.0));
    }
  }
  double err = bound.value();
  if ((prov.kind == MeasureKind::SigmaCentered ||
       prov.kind == MeasureKind::SigmaZeroed) &&
      prov.p > 1.0) {
    const ExponentConfig built{prov.p, prov.p / (prov.p - 1.0), 1.0, false};
    err += sigma_tail_mass(built, prov.depth) / len;
  }
  return {value.value(), err};
}

std::vector<Interval> ap_family(int max_k) {
  std::vector<Interval> out;
  for (int k = 0; k <= max_k; ++k) {
    for (std::int64_t j = 1; j <= (std::int64_t{1} << k); ++j) {
      out.push_back(interval({k, j}));
    }
  }
  for (int k = 0; k <= max_k; ++k) {
    for (std::int64_t j = 1; j <= (std::int64_t{1} << k); ++j) {
      out.push_back(gap({k, j}).closure_of());
    }
  }
  return out;
}

ScanResult ap_constant(const ExponentConfig& cfg,
                       const std::vector<Interval>& family,
                       const AtomicMeasure& omega, const AtomicMeasure& sigma) {
  ScanResult result;
  result.param_names = {"kind", "k", "j"};
  result.rows.resize(family.size());
  const int n_omega = omega.provenance().depth;
  const int n_sigma = sigma.provenance().depth;
  parallel_for(family.size(), [&](std::size_t i) {
    const Interval& iv = family[i];
    const CertifiedValue a = ap_tail(iv, omega, cfg.p);
    const CertifiedValue b = ap_tail(iv, sigma, cfg.p_prime);
    auto product = [&](double x, double y) {
      return std::pow(std::max(x, 0.0), 1.0 / cfg.p) *
             std::pow(std::max(y, 0.0), 1.0 / cfg.p_prime);
    };
    const double v = product(a.value, b.value);
    const double up = product(a.value + a.error_bound, b.value + b.error_bound);
    const double down =
        product(a.value - a.error_bound, b.value - b.error_bound);
    const Label lab = describe(iv);
    ScanRow& row = result.rows[i];
    row.params = {lab.kind, std::to_string(lab.k), std::to_string(lab.j)};
    row.value = v;
    row.error_bound = std::max(up - v, v - down);
    row.depth_omega = n_omega;
    row.depth_sigma = n_sigma;
  });
  return result;
}

ScanResult ap_constant(const ExponentConfig& cfg,
                       const std::vector<Interval>& family, int omega_depth,
                       int sigma_depth, SigmaVariant variant,
                       const ZeroTable* zeros) {
  const AtomicMeasure omega = cantor_quadrature(omega_depth);
  const AtomicMeasure sigma =
      sigma_truncated(cfg, sigma_depth, variant, zeros);
  return ap_constant(cfg, family, omega, sigma);
}

// --- Testing ---------------------------------------------------------------

const char* to_string(Direction dir, bool roles_swapped) {
  const bool fwd = (dir == Direction::Forward) != roles_swapped;
  return fwd ? "forward" : "backward";
}

TestingEngine::TestingEngine(const ExponentConfig& cfg, AtomicMeasure omega,
                             AtomicMeasure sigma)
    : cfg_(cfg), omega_(std::move(omega)), sigma_(std::move(sigma)) {
  if (omega_.provenance().kind != MeasureKind::OmegaQuadrature) {
    fail(ErrorKind::Config, "testing needs an omega quadrature measure");
  }
  const int n = omega_.provenance().depth;
  omega_half_ = 0.5 * inv_pow3(n);
  omega_tree_ = std::make_unique<CylinderTree>(omega_, tree_level(n, 3));
  sigma_tree_ = std::make_unique<CylinderTree>(
      sigma_, tree_level(sigma_.provenance().depth, 2));
}

TestingEngine::~TestingEngine() = default;
TestingEngine::TestingEngine(TestingEngine&&) noexcept = default;
TestingEngine& TestingEngine::operator=(TestingEngine&&) noexcept = default;

double TestingEngine::normalizer(const Interval& iv, Direction dir) const {
  return dir == Direction::Forward ? sigma_.mass_in(iv) : omega_.mass_in(iv);
}

CertifiedValue TestingEngine::norm(const Interval& iv, Direction dir) const {
  const auto idx = iv.as_cylinder();
  if (dir == Direction::Forward) {
    return idx ? forward_cylinder(*idx) : forward_brute(iv);
  }
  return idx ? backward_cylinder(*idx) : backward_brute(iv);
}

CertifiedValue TestingEngine::forward_cylinder(TriadicIndex idx) const {
  const auto [lo, hi] = omega_tree_->range(idx);
  const double p = cfg_.p;
  CompensatedSum value;
  CompensatedSum bound;
  for (std::size_t i = lo; i < hi; ++i) {
    const double w = omega_tree_->mass(i);
    const auto ev =
        sigma_tree_->evaluate(idx, omega_tree_->position(i), omega_half_);
    const double f = std::fabs(ev.value);
    const double e = ev.kernel_sq * omega_half_ + ev.truncation;
    value.add(w * std::pow(f, p));
    bound.add(w * p * std::pow(f + e, p - 1.0) * e);
  }
  return {value.value(), bound.value()};
}

CertifiedValue TestingEngine::backward_cylinder(TriadicIndex idx) const {
  const auto [lo, hi] = sigma_tree_->range(idx);
  const double q = cfg_.p_prime;
  CompensatedSum value;
  CompensatedSum bound;
  for (std::size_t i = lo; i < hi; ++i) {
    const double s = sigma_tree_->mass(i);
    const auto ev =
        omega_tree_->evaluate(idx, sigma_tree_->position(i), omega_half_);
    const double g = std::fabs(ev.value);
    const double e = ev.kernel_sq * omega_half_ + ev.truncation;
    value.add(s * std::pow(g, q));
    bound.add(s * q * std::pow(g + e, q - 1.0) * e);
  }
  return {value.value(), bound.value()};
}

CertifiedValue TestingEngine::forward_brute(const Interval& iv) const {
  const auto [lo, hi] = omega_.range_in(iv);
  const auto [slo, shi] = sigma_.range_in(iv);
  const auto nodes = omega_.atoms();
  const auto atoms = sigma_.atoms();
  const double p = cfg_.p;
  CompensatedSum value;
  CompensatedSum bound;
  for (std::size_t i = lo; i < hi; ++i) {
    const double y = nodes[i].position;
    const double f = std::fabs(h_indicator(sigma_, iv, y));
    CompensatedSum lip;
    for (std::size_t a = slo; a < shi; ++a) {
      const double g = std::fabs(atoms[a].position - y) - omega_half_;
      lip.add(g > 0.0 ? atoms[a].mass / (g * g)
                      : std::numeric_limits<double>::infinity());
    }
    const double e = lip.value() * omega_half_;
    value.add(nodes[i].mass * std::pow(f, p));
    bound.add(nodes[i].mass * p * std::pow(f + e, p - 1.0) * e);
  }
  return {value.value(), bound.value()};
}

CertifiedValue TestingEngine::backward_brute(const Interval& iv) const {
  const auto [lo, hi] = sigma_.range_in(iv);
  const auto [olo, ohi] = omega_.range_in(iv);
  const auto atoms = sigma_.atoms();
  const auto nodes = omega_.atoms();
  const double q = cfg_.p_prime;
  CompensatedSum value;
  CompensatedSum bound;
  for (std::size_t i = lo; i < hi; ++i) {
    const double z = atoms[i].position;
    const double g = std::fabs(h_indicator(omega_, iv, z));
    CompensatedSum disp;
    for (std::size_t a = olo; a < ohi; ++a) {
      const double d = std::fabs(nodes[a].position - z) - omega_half_;
      disp.add(d > 0.0 ? nodes[a].mass * omega_half_ / (d * d)
                       : std::numeric_limits<double>::infinity());
    }
    const double e = disp.value();
    value.add(atoms[i].mass * std::pow(g, q));
    bound.add(atoms[i].mass * q * std::pow(g + e, q - 1.0) * e);
  }
  return {value.value(), bound.value()};
}

CertifiedValue testing_norm(const ExponentConfig& cfg, const Interval& iv,
                            Direction dir, int omega_depth, int sigma_depth,
                            SigmaVariant variant, const ZeroTable* zeros) {
  TestingEngine engine(cfg, cantor_quadrature(omega_depth),
                       sigma_truncated(cfg, sigma_depth, variant, zeros));
  return engine.norm(iv, dir);
}

ScanResult testing_scan(const ExponentConfig& cfg, int max_k,
                        const TestingEngine& engine) {
  if (max_k < 0 || max_k > kMaxTestingScanK) {
    fail(ErrorKind::ResourceLimit, "testing scan depth must lie in [0, 8]");
  }
  const int n_omega = engine.omega().provenance().depth;
  const int n_sigma = engine.sigma().provenance().depth;
  if (n_omega <= n_sigma) {
    fail(ErrorKind::TooClose,
         "testing scan needs omega depth > sigma depth (got " +
             std::to_string(n_omega) + " <= " + std::to_string(n_sigma) + ")");
  }
  struct Task {
    TriadicIndex idx;
    Direction dir;
  };
  std::vector<Task> tasks;
  for (int k = 0; k <= max_k; ++k) {
    for (std::int64_t j = 1; j <= (std::int64_t{1} << k); ++j) {
      tasks.push_back({{k, j}, Direction::Forward});
      tasks.push_back({{k, j}, Direction::Backward});
    }
  }
  ScanResult result;
  result.param_names = {"k", "j", "direction"};
  result.rows.resize(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    const Task& t = tasks[i];
    const Interval iv = interval(t.idx);
    const CertifiedValue v = engine.norm(iv, t.dir);
    const double norm = engine.normalizer(iv, t.dir);
    ScanRow& row = result.rows[i];
    row.params = {std::to_string(t.idx.k), std::to_string(t.idx.j),
                  to_string(t.dir, cfg.roles_swapped)};
    row.value = norm > 0.0 ? v.value / norm : 0.0;
    row.error_bound = norm > 0.0 ? v.error_bound / norm : 0.0;
    row.depth_omega = n_omega;
    row.depth_sigma = n_sigma;
  });
  return result;
}

ScanResult testing_scan(const ExponentConfig& cfg, int max_k, int omega_depth,
                        int sigma_depth, SigmaVariant variant,
                        const ZeroTable* zeros) {
  TestingEngine engine(cfg, cantor_quadrature(omega_depth),
                       sigma_truncated(cfg, sigma_depth, variant, zeros));
  return testing_scan(cfg, max_k, engine);
}

// --- Test family -----------------------------------------------------------

long double TestFamily::log_a(long long k) const {
  if (k < 0) fail(ErrorKind::InvalidIndex, "negative family index");
  const long double kk = static_cast<long double>(k);
  return std::log(kk + 1.0L) / cfg_.p +
         (1.0L + cfg_.delta) / cfg_.p * std::log(std::log(kk + 2.0L));
}

double TestFamily::a(long long k) const {
  return static_cast<double>(std::exp(log_a(k)));
}

long double TestFamily::log_beta(long long k) const {
  return (cfg_.p_prime - 1.0L) * static_cast<long double>(k) *
             std::log(1.5L) -
         log_a(k);
}

double TestFamily::beta(long long k) const {
  const double b = static_cast<double>(std::exp(log_beta(k)));
  if (!std::isfinite(b)) {
    fail(ErrorKind::ResourceLimit,
         "beta_k overflows at k = " + std::to_string(k));
  }
  return b;
}

FamilyCoefficients test_family_coeffs(const ExponentConfig& cfg, long long k) {
  const TestFamily fam(cfg);
  return {fam.a(k), fam.beta(k)};
}

// --- Quadratic functional --------------------------------------------------

namespace {

void require_sigma_depth(const AtomicMeasure& sigma, int n) {
  const Provenance& prov = sigma.provenance();
  if ((prov.kind == MeasureKind::SigmaCentered ||
       prov.kind == MeasureKind::SigmaZeroed) &&
      prov.depth < n) {
    fail(ErrorKind::Config, "sigma depth " + std::to_string(prov.depth) +
                                " below family cutoff " + std::to_string(n));
  }
}

}  // namespace

double quad_lhs_direct(const ExponentConfig& cfg, int n,
                       const AtomicMeasure& sigma) {
  if (n < 0) fail(ErrorKind::Config, "negative family cutoff");
  require_sigma_depth(sigma, n);
  const TestFamily fam(cfg);
  int max_gen = 0;
  for (const Atom& a : sigma.atoms()) max_gen = std::max(max_gen, a.generation);
  // prefix[l] = sum_{k=1}^{min(l,n)} beta_k^2
  std::vector<double> prefix(static_cast<std::size_t>(max_gen) + 1, 0.0);
  CompensatedSum run;
  for (int l = 1; l <= max_gen; ++l) {
    if (l <= n) {
      const double b = fam.beta(l);
      run.add(b * b);
    }
    prefix[static_cast<std::size_t>(l)] = run.value();
  }
  CompensatedSum total;
  for (const Atom& a : sigma.atoms()) {
    const double s = prefix[static_cast<std::size_t>(a.generation)];
    if (s > 0.0) total.add(a.mass * std::pow(s, cfg.p / 2.0));
  }
  return total.value();
}

double quad_lhs_closed(const ExponentConfig& cfg, long long n) {
  CompensatedSum acc;
  for (long long k = 1; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    acc.add(1.0 / ((kk + 1.0) * std::pow(std::log(kk + 2.0), 1.0 + cfg.delta)));
  }
  return acc.value();
}

double quad_lhs_series_bound(const ExponentConfig& cfg) {
  const double l2 = std::log(2.0);
  return 1.0 / (2.0 * std::pow(l2, 1.0 + cfg.delta)) +
         1.0 / (cfg.delta * std::pow(l2, cfg.delta));
}

std::vector<double> quad_rhs_terms(const ExponentConfig& cfg, int n,
                                   const AtomicMeasure& sigma) {
  if (n < 0 || n > 24) fail(ErrorKind::Config, "family cutoff out of range");
  require_sigma_depth(sigma, n);
  const TestFamily fam(cfg);
  std::vector<double> terms((std::size_t{1} << (n + 1)) - 1, 0.0);
  const auto atoms = sigma.atoms();
  for (int k = 1; k <= n; ++k) {
    const double beta = fam.beta(k);
    const std::int64_t count = std::int64_t{1} << k;
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t jj) {
      const TriadicIndex idx{k, static_cast<std::int64_t>(jj) + 1};
      const Interval own = interval(idx);
      const Interval triple = own.tripled();
      const double c = own.center();
      const auto [lo, hi] = sigma.range_in(interval(sibling(idx)));
      CompensatedSum acc;
      for (std::size_t i = lo; i < hi; ++i) {
        const double x = atoms[i].position;
        if (triple.contains(x)) continue;
        acc.add(atoms[i].mass / std::fabs(x - c));
      }
      terms[static_cast<std::size_t>(flat_index(idx))] = beta * acc.value();
    });
  }
  return terms;
}

std::vector<double> quad_rhs_cylinder_values(const ExponentConfig& cfg, int n,
                                             const AtomicMeasure& sigma) {
  const std::vector<double> terms = quad_rhs_terms(cfg, n, sigma);
  std::vector<double> level{0.0};
  for (int k = 1; k <= n; ++k) {
    std::vector<double> next(level.size() * 2);
    for (std::size_t jj = 0; jj < next.size(); ++jj) {
      const TriadicIndex idx{k, static_cast<std::int64_t>(jj) + 1};
      const double t = terms[static_cast<std::size_t>(flat_index(idx))];
      next[jj] = level[jj / 2] + t * t;
    }
    level = std::move(next);
  }
  return level;
}

double quad_rhs_integrand(const ExponentConfig&, int n,
                          const std::vector<double>& terms, double y) {
  CompensatedSum acc;
  for (int k = 1; k <= n; ++k) {
    for (std::int64_t j = 1; j <= (std::int64_t{1} << k); ++j) {
      if (!interval({k, j}).contains(y)) continue;
      const double t = terms[static_cast<std::size_t>(flat_index({k, j}))];
      acc.add(t * t);
    }
  }
  return acc.value();
}

double quad_rhs_direct(const ExponentConfig& cfg, int n,
                       const AtomicMeasure& sigma) {
  if (n == 0) return 0.0;
  const std::vector<double> g = quad_rhs_cylinder_values(cfg, n, sigma);
  const double w = omega_mass(n);
  CompensatedSum acc;
  for (double v : g) acc.add(w * std::pow(v, cfg.p / 2.0));
  return acc.value();
}

std::vector<double> quad_rhs_direct_series(const ExponentConfig& cfg,
                                           int n_max,
                                           const AtomicMeasure& sigma) {
  const std::vector<double> terms = quad_rhs_terms(cfg, n_max, sigma);
  std::vector<double> out;
  std::vector<double> level{0.0};
  for (int k = 1; k <= n_max; ++k) {
    std::vector<double> next(level.size() * 2);
    CompensatedSum acc;
    const double w = omega_mass(k);
    for (std::size_t jj = 0; jj < next.size(); ++jj) {
      const TriadicIndex idx{k, static_cast<std::int64_t>(jj) + 1};
      const double t = terms[static_cast<std::size_t>(flat_index(idx))];
      next[jj] = level[jj / 2] + t * t;
      acc.add(w * std::pow(next[jj], cfg.p / 2.0));
    }
    out.push_back(acc.value());
    level = std::move(next);
  }
  return out;
}

namespace {

double rhs_summand(const ExponentConfig& cfg, long long k) {
  const double kk = static_cast<double>(k);
  return std::exp(-2.0 / cfg.p * std::log(kk + 1.0) -
                  2.0 * (1.0 + cfg.delta) / cfg.p *
                      std::log(std::log(kk + 2.0)));
}

}  // namespace

double quad_rhs_closed_log(const ExponentConfig& cfg, long long n) {
  if (n <= 0) return -std::numeric_limits<double>::infinity();
  CompensatedSum acc;
  for (long long k = 1; k <= n; ++k) acc.add(rhs_summand(cfg, k));
  return cfg.p / 2.0 * std::log(acc.value());
}

double quad_rhs_closed(const ExponentConfig& cfg, long long n) {
  return std::exp(quad_rhs_closed_log(cfg, n));
}

std::vector<double> quad_rhs_closed_series(const ExponentConfig& cfg,
                                           const std::vector<long long>& ns) {
  std::vector<double> out;
  out.reserve(ns.size());
  CompensatedSum acc;
  long long done = 0;
  for (long long n : ns) {
    if (n < done) fail(ErrorKind::Config, "series grid must be increasing");
    for (long long k = done + 1; k <= n; ++k) acc.add(rhs_summand(cfg, k));
    done = n;
    out.push_back(n <= 0 ? 0.0 : std::pow(acc.value(), cfg.p / 2.0));
  }
  return out;
}

std::vector<double> quad_lhs_closed_series(const ExponentConfig& cfg,
                                           const std::vector<long long>& ns) {
  std::vector<double> out;
  out.reserve(ns.size());
  CompensatedSum acc;
  long long done = 0;
  for (long long n : ns) {
    if (n < done) fail(ErrorKind::Config, "series grid must be increasing");
    for (long long k = done + 1; k <= n; ++k) {
      const double kk = static_cast<double>(k);
      acc.add(1.0 /
              ((kk + 1.0) * std::pow(std::log(kk + 2.0), 1.0 + cfg.delta)));
    }
    done = n;
    out.push_back(acc.value());
  }
  return out;
}

// --- Self-similar energy ---------------------------------------------------

double selfsim_energy(const ExponentConfig& cfg, int sigma_depth,
                      int omega_depth) {
  const AtomicMeasure sigma =
      sigma_truncated(cfg, sigma_depth, SigmaVariant::Centered);
  const AtomicMeasure omega = cantor_quadrature(omega_depth);
  const CylinderTree tree(sigma, tree_level(sigma_depth, 2));
  const auto nodes = omega.atoms();
  std::vector<double> contrib(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t i) {
    const auto ev = tree.evaluate({0, 1}, nodes[i].position, 0.0);
    contrib[i] = nodes[i].mass * pow_abs(ev.value, cfg.p);
  });
  return compensated_sum(contrib);
}

}  // namespace weightlab
