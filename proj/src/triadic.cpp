#include "weightlab/triadic.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "weightlab/error.hpp"

namespace weightlab {

namespace {

constexpr std::array<std::int64_t, kMaxExactLevel + 1> make_pow3_table() {
  std::array<std::int64_t, kMaxExactLevel + 1> t{};
  t[0] = 1;
  for (int i = 1; i <= kMaxExactLevel; ++i) t[i] = t[i - 1] * 3;
  return t;
}

constexpr auto kPow3 = make_pow3_table();

void check_level(int level) {
  if (level < 0 || level > kMaxExactLevel) {
    fail(ErrorKind::InvalidIndex,
         "triadic level " + std::to_string(level) + " outside [0, " +
             std::to_string(kMaxExactLevel) + "]");
  }
}

double ratio(std::int64_t num, int level) {
  return static_cast<double>(num) / static_cast<double>(kPow3[level]);
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    fail(ErrorKind::ResourceLimit, "triadic numerator overflow");
  }
  return out;
}

}  // namespace

std::int64_t pow3(int n) {
  check_level(n);
  return kPow3[n];
}

double inv_pow3(int n) {
  check_level(n);
  return 1.0 / static_cast<double>(kPow3[n]);
}

bool is_valid(TriadicIndex idx) noexcept {
  if (idx.k < 0 || idx.k > kMaxExactLevel) return false;
  if (idx.j < 1) return false;
  return idx.j <= (std::int64_t{1} << idx.k);
}

std::string to_string(TriadicIndex idx) {
  return "(" + std::to_string(idx.k) + "," + std::to_string(idx.j) + ")";
}

static void require_valid(TriadicIndex idx) {
  if (!is_valid(idx)) {
    fail(ErrorKind::InvalidIndex, "invalid triadic index " + to_string(idx));
  }
}

TriadicIndex parent(TriadicIndex idx) {
  require_valid(idx);
  if (idx.k == 0) fail(ErrorKind::InvalidIndex, "root has no parent");
  return {idx.k - 1, (idx.j + 1) / 2};
}

TriadicIndex sibling(TriadicIndex idx) {
  require_valid(idx);
  if (idx.k == 0) {
    fail(ErrorKind::NoSibling, "generation-0 interval has no sibling");
  }
  return {idx.k, (idx.j % 2 == 1) ? idx.j + 1 : idx.j - 1};
}

TriadicIndex mirror(TriadicIndex idx) {
  require_valid(idx);
  return {idx.k, (std::int64_t{1} << idx.k) + 1 - idx.j};
}

TriadicIndex ancestor(TriadicIndex idx, int level) {
  require_valid(idx);
  if (level < 0 || level > idx.k) {
    fail(ErrorKind::InvalidIndex, "ancestor level out of range");
  }
  return {level, ((idx.j - 1) >> (idx.k - level)) + 1};
}

std::int64_t flat_index(TriadicIndex idx) noexcept {
  return (std::int64_t{1} << idx.k) - 1 + (idx.j - 1);
}

TriadicIndex from_flat_index(std::int64_t flat) {
  if (flat < 0) fail(ErrorKind::InvalidIndex, "negative flat index");
  int k = 0;
  while ((std::int64_t{1} << (k + 1)) - 1 <= flat) ++k;
  return {k, flat - ((std::int64_t{1} << k) - 1) + 1};
}

Interval::Interval(std::int64_t left_num, std::int64_t right_num, int level,
                   Closure closure)
    : left_num_(left_num),
      right_num_(right_num),
      level_(level),
      closure_(closure) {
  check_level(level);
  if (!(left_num < right_num)) {
    fail(ErrorKind::InvalidIndex, "interval requires left < right");
  }
  left_ = ratio(left_num_, level_);
  right_ = ratio(right_num_, level_);
}

double Interval::left() const { return left_; }
double Interval::right() const { return right_; }

double Interval::length() const {
  return static_cast<double>(right_num_ - left_num_) /
         static_cast<double>(kPow3[level_]);
}

double Interval::center() const {
  // (L + R) / (2 * 3^level); L + R stays far below 2^63 for level <= 39.
  return static_cast<double>(left_num_ + right_num_) /
         (2.0 * static_cast<double>(kPow3[level_]));
}

bool Interval::contains(double x) const noexcept {
  if (closure_ == Closure::Closed) return left_ <= x && x <= right_;
  return left_ < x && x < right_;
}

double Interval::dist(double x) const noexcept {
  double d = 0.0;
  double scale = 0.0;
  if (x < left_) {
    d = left_ - x;
    scale = std::fabs(left_) + std::fabs(x);
  } else if (x > right_) {
    d = x - right_;
    scale = std::fabs(right_) + std::fabs(x);
  } else {
    return 0.0;
  }
  // Endpoint rounding plus subtraction rounding, both below one ulp of scale.
  d -= scale * std::numeric_limits<double>::epsilon();
  return d > 0.0 ? d : 0.0;
}

Interval Interval::refined_to(int level) const {
  check_level(level);
  if (level < level_) {
    fail(ErrorKind::InvalidIndex, "cannot coarsen an interval");
  }
  const std::int64_t f = kPow3[level - level_];
  return Interval(checked_mul(left_num_, f), checked_mul(right_num_, f), level,
                  closure_);
}

Interval Interval::closure_of() const {
  return Interval(left_num_, right_num_, level_, Closure::Closed);
}

Interval Interval::mirrored() const {
  const std::int64_t one = kPow3[level_];
  return Interval(one - right_num_, one - left_num_, level_, closure_);
}

Interval Interval::tripled() const {
  const std::int64_t len = right_num_ - left_num_;
  return Interval(left_num_ - len, right_num_ + len, level_, closure_);
}

Interval Interval::shrunk(int steps) const {
  if (steps < 0) fail(ErrorKind::InvalidIndex, "negative shrink");
  const std::int64_t f = pow3(steps);
  check_level(level_ + steps);
  const std::int64_t l =
      (checked_mul(left_num_, f + 1) + checked_mul(right_num_, f - 1)) / 2;
  const std::int64_t r =
      (checked_mul(left_num_, f - 1) + checked_mul(right_num_, f + 1)) / 2;
  return Interval(l, r, level_ + steps, closure_);
}

std::optional<TriadicIndex> Interval::as_cylinder() const {
  if (closure_ != Closure::Closed) return std::nullopt;
  std::int64_t l = left_num_;
  std::int64_t r = right_num_;
  int level = level_;
  while (level > 0 && l % 3 == 0 && r % 3 == 0) {
    l /= 3;
    r /= 3;
    --level;
  }
  if (r - l != 1 || l < 0 || r > kPow3[level]) return std::nullopt;
  std::int64_t j = 0;
  std::int64_t rest = l;
  for (int i = 0; i < level; ++i) {
    const std::int64_t digit = rest % 3;
    if (digit == 1) return std::nullopt;
    if (digit == 2) j |= std::int64_t{1} << i;
    rest /= 3;
  }
  return TriadicIndex{level, j + 1};
}

std::string to_string(const Interval& iv) {
  const bool closed = iv.closure() == Closure::Closed;
  return std::string(closed ? "[" : "(") + std::to_string(iv.left_num()) +
         "/3^" + std::to_string(iv.level()) + ", " +
         std::to_string(iv.right_num()) + "/3^" + std::to_string(iv.level()) +
         (closed ? "]" : ")");
}

std::int64_t cylinder_left_num(TriadicIndex idx) {
  require_valid(idx);
  std::int64_t num = 0;
  const std::int64_t bits = idx.j - 1;
  for (int i = 0; i < idx.k; ++i) {
    if ((bits >> i) & 1) num += 2 * kPow3[i];
  }
  return num;
}

Interval interval(TriadicIndex idx) {
  const std::int64_t l = cylinder_left_num(idx);
  return Interval(l, l + 1, idx.k, Closure::Closed);
}

Interval gap(TriadicIndex idx) {
  const std::int64_t l = cylinder_left_num(idx);
  if (idx.k + 1 > kMaxExactLevel) {
    fail(ErrorKind::InvalidIndex, "gap level exceeds exact range");
  }
  return Interval(3 * l + 1, 3 * l + 2, idx.k + 1, Closure::Open);
}

double cylinder_center(TriadicIndex idx) {
  const std::int64_t l = cylinder_left_num(idx);
  return static_cast<double>(2 * l + 1) /
         (2.0 * static_cast<double>(kPow3[idx.k]));
}

double omega_mass(int k) {
  if (k < 0) fail(ErrorKind::InvalidIndex, "negative generation");
  return std::ldexp(1.0, -k);
}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidIndex: return "invalid-index";
    case ErrorKind::NoSibling: return "no-sibling";
    case ErrorKind::ResourceLimit: return "resource-limit";
    case ErrorKind::Dependency: return "dependency";
    case ErrorKind::Singularity: return "singularity";
    case ErrorKind::TooClose: return "too-close";
    case ErrorKind::NumericalFailure: return "numerical-failure";
    case ErrorKind::Fit: return "fit";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

}  // namespace weightlab
