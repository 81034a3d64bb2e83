#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "infdiag/diagram.hpp"
#include "infdiag/ledger.hpp"

namespace infdiag {

/// An observation. The simple form fixes one outcome; the conditional form
/// fixes, for every configuration of the node's decision predecessors, the
/// outcome the node would take under that configuration.
struct Evidence {
  struct Simple {
    std::string outcome;
    bool operator==(const Simple&) const = default;
  };
  struct Conditional {
    std::vector<std::string> decisions;
    /// Alternative labels (one per entry of `decisions`) -> outcome label.
    std::map<std::vector<std::string>, std::string> outcomes;
    bool operator==(const Conditional&) const = default;
  };

  std::string node;
  std::variant<Simple, Conditional> form;

  bool is_simple() const { return std::holds_alternative<Simple>(form); }

  static Evidence simple(std::string node, std::string outcome);
  static Evidence conditional(std::string node, std::vector<std::string> decisions,
                              std::map<std::vector<std::string>, std::string> outcomes);

  bool operator==(const Evidence&) const = default;
};

struct PropagationResult {
  Diagram diagram;
  /// Probability of the observation. For conditional evidence it is the
  /// smallest of the per-configuration weights.
  double evidence_weight = 1.0;
  /// P{node = observed | configuration} for each decision configuration
  /// (a single entry for simple evidence).
  std::vector<double> configuration_weights;
  SpaceLedger ledger;
};

/// The observed column of the node's table.
struct Absorption {
  std::string node;
  std::vector<std::string> parents;
  /// P{node = observed | parents} per parent configuration.
  std::vector<double> likelihood;
};

Absorption absorb_evidence(const Diagram& diagram, const Evidence& evidence);

/// Condition the diagram on the evidence: chance predecessors are reversed
/// into the node, the observation is folded into every successor, arcs into
/// decisions are dropped, and the node is deleted. Conditional evidence makes
/// the node's decision predecessors inherit its successors.
PropagationResult propagate_evidence(const Diagram& diagram, const Evidence& evidence);

/// Propagation for a node with chance predecessors, whose tables become
/// posteriors given the observation.
PropagationResult evidence_reversal(const Diagram& diagram, const Evidence& evidence);

/// Partially apply `target`'s function at the observed outcome; the target
/// stays deterministic and loses the evidence node as a parent.
Diagram propagate_to_deterministic(const Diagram& diagram, const Evidence& evidence, std::string_view target);

/// Evidence on a deterministic node: convert it to a chance node, then reverse.
PropagationResult evidence_reversal_deterministic(const Diagram& diagram, const Evidence& evidence);

/// Delete the arc chance -> decision when the decision is the chance node's
/// only successor.
Diagram prune_decision_arc(const Diagram& diagram, std::string_view chance, std::string_view decision);

/// Unconditional distribution of a chance node. Decision predecessors whose
/// rows are identical are dropped first; any remaining decision ancestor is
/// an error.
std::vector<double> marginal_probability(const Diagram& diagram, std::string_view id);

/// Drop arcs from decisions into `id` when the node's rows do not depend on them.
Diagram drop_vacuous_decision_arcs(const Diagram& diagram, std::string_view id);

}  // namespace infdiag
