#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "infdiag/diagram.hpp"
#include "infdiag/ledger.hpp"

namespace infdiag {

/// Values within this distance of the optimum count as tied; the lowest
/// alternative index among tied values is chosen.
inline constexpr double kTieTolerance = 1e-9;

/// Optimal alternative of one decision for every configuration of the
/// variables it depends on (a subset of its informational predecessors).
struct DecisionRule {
  std::string decision;
  std::vector<std::string> parents;
  std::vector<std::size_t> choices;  // row-major over parents

  bool operator==(const DecisionRule&) const = default;
};

using Policy = std::map<std::string, DecisionRule>;

/// Chosen alternative index given observed outcome indices by node id.
/// Parents missing from `observed` throw InvalidArgument.
std::size_t choice_for(const Diagram& diagram, const DecisionRule& rule,
                       const std::map<std::string, std::size_t>& observed);

/// Flip the conditional arc from -> to between two chance nodes (Bayes rule).
Diagram reverse_arc(const Diagram& diagram, std::string_view from, std::string_view to);

/// Sum a chance node whose only successor is the value node into the value table.
Diagram remove_chance_node(const Diagram& diagram, std::string_view id);

struct DecisionRemoval {
  Diagram diagram;
  DecisionRule rule;
};

/// Optimize a decision whose only successor is the value node out of the value table.
DecisionRemoval remove_decision_node(const Diagram& diagram, std::string_view id);

/// Replace a deterministic node by a chance node with degenerate rows.
Diagram convert_deterministic(const Diagram& diagram, std::string_view id);

/// Delete chance and deterministic nodes without successors until none remain.
Diagram remove_barren(const Diagram& diagram, const std::set<std::string>& keep = {});

struct ReductionOptions {
  /// Nodes never selected for removal; the residual value table is over them.
  std::set<std::string> locked;
  /// Skip the no-forgetting check before reducing.
  bool allow_forgetting = true;
};

struct Reduction {
  Diagram residual;  // the value node plus any locked nodes
  Policy policy;
  SpaceLedger ledger;
};

/// Reduce the diagram with the greedy smallest-outcome-space ordering
/// (ties broken by node id) until only locked nodes and the value node remain.
Reduction reduce(const Diagram& diagram, const ReductionOptions& options = {});

struct Evaluation {
  double ev = 0.0;
  Policy policy;
  SpaceLedger ledger;
};

/// Expected value, optimal policy, and outcome-space ledger.
Evaluation evaluate(const Diagram& diagram);

/// Name recorded in comparison reports for the ordering rule used by reduce().
inline constexpr std::string_view kOrderingHeuristic = "min-outcome-space/lexicographic";

namespace detail {

struct ReversalOutcome {
  Diagram diagram;
  std::size_t uniform_rows = 0;
};

ReversalOutcome reverse_arc_counted(const Diagram& diagram, std::string_view from, std::string_view to);

/// Converts every deterministic node to a chance node.
Diagram convert_all_deterministic(const Diagram& diagram);

}  // namespace detail

}  // namespace infdiag
