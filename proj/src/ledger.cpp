#include "infdiag/ledger.hpp"

#include <algorithm>

#include "infdiag/diagram.hpp"

namespace infdiag {

void SpaceLedger::record(LedgerStep step) {
  max_space_ = std::max(max_space_, step.space);
  steps_.push_back(std::move(step));
}

void SpaceLedger::append(const SpaceLedger& other) {
  for (const auto& s : other.steps()) record(s);
}

std::set<std::string> computational_set(const Diagram& diagram, std::string_view id) {
  std::set<std::string> set;
  const Node& j = diagram.node(id);
  set.insert(j.id);
  set.insert(j.parents.begin(), j.parents.end());
  for (const auto& s : diagram.successors(id)) {
    set.insert(s);
    const auto& ps = diagram.node(s).parents;
    set.insert(ps.begin(), ps.end());
  }
  for (auto it = set.begin(); it != set.end();) {
    if (diagram.node(*it).kind == NodeKind::Value)
      it = set.erase(it);
    else
      ++it;
  }
  return set;
}

std::size_t computational_space(const Diagram& diagram, std::string_view id) {
  return configuration_count(diagram, computational_set(diagram, id));
}

}  // namespace infdiag
