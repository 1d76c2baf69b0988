#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace weightlab {

/// Deepest level at which 3^level still fits an int64 numerator.
inline constexpr int kMaxExactLevel = 39;

std::int64_t pow3(int n);
/// 3^{-n} as the correctly rounded double (n <= kMaxExactLevel).
double inv_pow3(int n);

/// (k, j) address of a Cantor interval I_j^k or of its gap G_j^k.
struct TriadicIndex {
  int k = 0;
  std::int64_t j = 1;

  auto operator<=>(const TriadicIndex&) const = default;
};

bool is_valid(TriadicIndex idx) noexcept;
std::string to_string(TriadicIndex idx);

TriadicIndex parent(TriadicIndex idx);
/// Other Cantor child of the same parent. Throws NoSibling at k = 0.
TriadicIndex sibling(TriadicIndex idx);
/// Image under x -> 1 - x.
TriadicIndex mirror(TriadicIndex idx);
/// Generation-`level` ancestor (level <= idx.k).
TriadicIndex ancestor(TriadicIndex idx, int level);
/// Breadth-first position: 2^k - 1 + (j - 1).
std::int64_t flat_index(TriadicIndex idx) noexcept;
TriadicIndex from_flat_index(std::int64_t flat);

enum class Closure { Closed, Open };

/// Interval with endpoints num/3^level held exactly. Endpoints need not lie
/// in [0,1]; only Cantor cylinders and gaps are produced by the tree itself.
class Interval {
 public:
  Interval(std::int64_t left_num, std::int64_t right_num, int level,
           Closure closure = Closure::Closed);

  std::int64_t left_num() const noexcept { return left_num_; }
  std::int64_t right_num() const noexcept { return right_num_; }
  int level() const noexcept { return level_; }
  Closure closure() const noexcept { return closure_; }

  double left() const;
  double right() const;
  double length() const;
  double center() const;

  bool contains(double x) const noexcept;
  /// Distance from x to the closure, rounded toward zero.
  double dist(double x) const noexcept;

  /// Same interval expressed over a finer denominator 3^level.
  Interval refined_to(int level) const;
  Interval closure_of() const;
  Interval mirrored() const;
  /// Concentric triple 3I.
  Interval tripled() const;
  /// Concentric copy shrunk by 3^{-steps}.
  Interval shrunk(int steps) const;

  /// Cantor cylinder index when this is exactly some closed I_j^k.
  std::optional<TriadicIndex> as_cylinder() const;

  bool operator==(const Interval&) const = default;

 private:
  std::int64_t left_num_;
  std::int64_t right_num_;
  int level_;
  Closure closure_;
  double left_;
  double right_;
};

std::string to_string(const Interval& iv);

/// j-th generation-k Cantor interval, left to right.
Interval interval(TriadicIndex idx);
/// Open middle third of interval(idx).
Interval gap(TriadicIndex idx);
/// Numerator of the left endpoint of I_j^k over 3^k.
std::int64_t cylinder_left_num(TriadicIndex idx);
/// Midpoint of I_j^k as a double.
double cylinder_center(TriadicIndex idx);
/// |I_j^k|_omega = 2^{-k} (exact in binary floating point).
double omega_mass(int k);

}  // namespace weightlab
