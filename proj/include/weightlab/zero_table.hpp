#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "weightlab/triadic.hpp"

namespace weightlab {

struct ZeroEntry {
  double z = 0.0;
  double residual = 0.0;
  int depth = 0;
};

/// Zeros z_j^k of H(omega_N) inside each gap G_j^k, k <= max_generation.
/// Entries are addressed by the gap's TriadicIndex.
class ZeroTable {
 public:
  ZeroTable() = default;
  explicit ZeroTable(int max_generation);

  int max_generation() const noexcept { return max_generation_; }
  std::size_t size() const noexcept { return present_count_; }
  bool complete_to(int generation) const noexcept;

  void set(TriadicIndex idx, const ZeroEntry& entry);
  const ZeroEntry* find(TriadicIndex idx) const noexcept;
  /// Throws ErrorKind::Dependency when the entry is missing.
  const ZeroEntry& at(TriadicIndex idx) const;

  /// CSV with header `k,j,z,residual,depth`, 17 significant digits.
  void write_csv(std::ostream& out) const;
  static ZeroTable read_csv(std::istream& in);

 private:
  int max_generation_ = -1;
  std::size_t present_count_ = 0;
  std::vector<ZeroEntry> entries_;
  std::vector<std::uint8_t> present_;
};

}  // namespace weightlab
