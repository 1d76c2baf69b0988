#include "weightlab/zero_table.hpp"

#include <algorithm>
#include <istream>
#include <stdexcept>
#include <ostream>
#include <sstream>
#include <string>

#include "weightlab/error.hpp"
#include "weightlab/format.hpp"

namespace weightlab {

namespace {
constexpr int kMaxTableGeneration = 24;
}

ZeroTable::ZeroTable(int max_generation) : max_generation_(max_generation) {
  if (max_generation < 0 || max_generation > kMaxTableGeneration) {
    fail(ErrorKind::ResourceLimit, "zero table generation out of range");
  }
  const std::size_t n = (std::size_t{1} << (max_generation + 1)) - 1;
  entries_.resize(n);
  present_.assign(n, 0);
}

bool ZeroTable::complete_to(int generation) const noexcept {
  if (generation > max_generation_) return false;
  if (generation < 0) return true;
  const std::size_t n = (std::size_t{1} << (generation + 1)) - 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!present_[i]) return false;
  }
  return true;
}

void ZeroTable::set(TriadicIndex idx, const ZeroEntry& entry) {
  if (!is_valid(idx) || idx.k > max_generation_) {
    fail(ErrorKind::InvalidIndex,
         "zero table has no slot for gap " + to_string(idx));
  }
  const auto i = static_cast<std::size_t>(flat_index(idx));
  if (!present_[i]) ++present_count_;
  present_[i] = 1;
  entries_[i] = entry;
}

const ZeroEntry* ZeroTable::find(TriadicIndex idx) const noexcept {
  if (!is_valid(idx) || idx.k > max_generation_) return nullptr;
  const auto i = static_cast<std::size_t>(flat_index(idx));
  return present_[i] ? &entries_[i] : nullptr;
}

const ZeroEntry& ZeroTable::at(TriadicIndex idx) const {
  const ZeroEntry* e = find(idx);
  if (e == nullptr) {
    fail(ErrorKind::Dependency, "zero table lacks gap " + to_string(idx));
  }
  return *e;
}

void ZeroTable::write_csv(std::ostream& out) const {
  out << "k,j,z,residual,depth\n";
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!present_[i]) continue;
    const TriadicIndex idx = from_flat_index(static_cast<std::int64_t>(i));
    const ZeroEntry& e = entries_[i];
    out << idx.k << ',' << idx.j << ',' << format_double(e.z) << ','
        << format_double(e.residual) << ',' << e.depth << '\n';
  }
}

ZeroTable ZeroTable::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("k,j,z,residual,depth", 0) != 0) {
    fail(ErrorKind::Dependency, "zero file lacks header k,j,z,residual,depth");
  }
  struct Row {
    TriadicIndex idx;
    ZeroEntry e;
  };
  std::vector<Row> rows;
  int max_k = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field[5];
    for (auto& f : field) std::getline(ss, f, ',');
    try {
      Row r;
      r.idx.k = std::stoi(field[0]);
      r.idx.j = std::stoll(field[1]);
      r.e.z = std::stod(field[2]);
      r.e.residual = std::stod(field[3]);
      r.e.depth = std::stoi(field[4]);
      if (!is_valid(r.idx)) throw std::invalid_argument("index");
      max_k = std::max(max_k, r.idx.k);
      rows.push_back(r);
    } catch (const std::exception&) {
      fail(ErrorKind::Dependency,
           "malformed zero file at line " + std::to_string(line_no));
    }
  }
  if (max_k < 0) return ZeroTable{};
  ZeroTable table(max_k);
  for (const Row& r : rows) table.set(r.idx, r.e);
  return table;
}

}  // namespace weightlab
