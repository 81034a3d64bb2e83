#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace infdiag {

class Diagram;

struct LedgerStep {
  std::string operation;  // "remove_chance_node", "reverse_arc", "propagate_evidence", ...
  std::string node;
  std::size_t space = 1;
  /// Reversed-conditional rows set to uniform because their marginal was zero.
  std::size_t uniform_rows = 0;

  bool operator==(const LedgerStep&) const = default;
};

/// Per-step record of the computational outcome space of a reduction.
class SpaceLedger {
 public:
  void record(LedgerStep step);
  void append(const SpaceLedger& other);

  const std::vector<LedgerStep>& steps() const noexcept { return steps_; }
  std::size_t max_space() const noexcept { return max_space_; }
  bool empty() const noexcept { return steps_.empty(); }

  bool operator==(const SpaceLedger&) const = default;

 private:
  std::vector<LedgerStep> steps_;
  std::size_t max_space_ = 0;
};

/// The node set S(J) ∪ {J} ∪ C(J) ∪ C(S(J)) without the value node.
std::set<std::string> computational_set(const Diagram& diagram, std::string_view id);

/// |Ω| over computational_set(diagram, id).
std::size_t computational_space(const Diagram& diagram, std::string_view id);

}  // namespace infdiag
