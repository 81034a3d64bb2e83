#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "infdiag/diagram.hpp"
#include "infdiag/evidence.hpp"
#include "infdiag/ledger.hpp"
#include "infdiag/transforms.hpp"

namespace infdiag {

/// Joint distribution of a node's conditional outcomes: one outcome per
/// configuration of its decision parents.
struct JointConditionalTable {
  std::string node;
  std::vector<std::string> decision_parents;
  /// Alternative labels of every decision configuration, row-major over decision_parents.
  std::vector<std::vector<std::string>> configurations;
  std::vector<std::string> outcomes;
  /// Outcome index per configuration -> probability. Absent vectors have probability zero.
  std::map<std::vector<std::size_t>, double> joint;

  bool operator==(const JointConditionalTable&) const = default;

  /// "alt:out|alt:out", multi-decision alternatives joined by '&'.
  std::string vector_label(const std::vector<std::size_t>& components) const;
  std::vector<std::size_t> parse_vector_label(std::string_view label) const;
  std::size_t configuration_index(const std::vector<std::string>& alternatives) const;
};

/// Builds a joint bound to `diagram`'s outcome spaces from vector labels.
JointConditionalTable make_joint(const Diagram& diagram, std::string node, std::vector<std::string> decision_parents,
                                 const std::map<std::string, double>& probabilities);

/// Throws ValidationError when the joint does not sum to one or its margins
/// differ from the node's conditional rows by more than kLoadTolerance.
void check_joint(const Diagram& diagram, const JointConditionalTable& joint);

struct ValuationMode {
  /// Set for full-conditional mode, empty for naive mode.
  std::optional<JointConditionalTable> joint;

  static ValuationMode naive() { return {}; }
  static ValuationMode full(JointConditionalTable joint) { return {std::move(joint)}; }
  bool is_full() const { return joint.has_value(); }
};

struct VoeEntry {
  std::string label;  // outcome, or conditional-outcome vector label
  Evidence evidence;
  double voe = 0.0;
  double ev_after = 0.0;
  double probability = 0.0;
  Policy policy;
};

struct VoeReport {
  std::string node;
  Objective objective = Objective::Maximize;
  double baseline_ev = 0.0;
  std::vector<VoeEntry> entries;
};

/// EV after propagating the evidence minus the baseline EV.
double value_of_evidence(const Diagram& diagram, const Evidence& evidence);

/// One entry per outcome of positive probability (naive) or per conditional
/// vector of positive joint probability (full).
VoeReport voe_report(const Diagram& diagram, std::string_view node, const ValuationMode& mode = {});

double outcome_sensitivity(const VoeReport& report);
double vopi_from_voe(const VoeReport& report);
/// Optimum VOE entry (max when maximizing, min when minimizing).
double value_of_control(const VoeReport& report);

/// EV with the node observed by `decision` (and every later decision) minus
/// the baseline. Full mode first replaces the node by its conditional expansion.
double vopi_standard(const Diagram& diagram, std::string_view node, std::string_view decision,
                     const ValuationMode& mode = {});

/// EV with the node turned into the earliest decision minus the baseline.
/// Only root chance nodes can be converted without changing what the other
/// decisions observe.
double voc_standard(const Diagram& diagram, std::string_view node);

/// Replace a node with decision parents by a root chance node over its
/// conditional-outcome vectors and a deterministic selector.
Diagram conditional_expansion(const Diagram& diagram, std::string_view node, const JointConditionalTable& joint);

/// Id of the vector node conditional_expansion() inserts.
std::string expansion_node_id(const Diagram& diagram, const JointConditionalTable& joint);

struct ConditionedJoint {
  /// Configuration indices still free, in increasing order.
  std::vector<std::size_t> configurations;
  /// Outcome index per free configuration -> conditional probability.
  std::map<std::vector<std::size_t>, double> distribution;
};

/// Distribution of the remaining components given one component's outcome.
ConditionedJoint condition_joint(const JointConditionalTable& joint, const std::vector<std::string>& configuration,
                                 std::string_view outcome);

/// Earliest decision (temporal order) that does not already observe `node`.
std::optional<std::string> default_vopi_decision(const Diagram& diagram, std::string_view node);

namespace detail {

struct LedgeredReport {
  VoeReport report;
  SpaceLedger ledger;
};

/// Method 1: evidence propagation and a full reduction per outcome.
LedgeredReport voe_by_propagation(const Diagram& diagram, std::string_view node, const ValuationMode& mode);

/// Method 2: one reduction with the evidence node locked.
LedgeredReport voe_by_lock(const Diagram& diagram, std::string_view node, const ValuationMode& mode);

struct StandardVopi {
  double value = 0.0;
  double ev_with_information = 0.0;
  SpaceLedger ledger;
};

StandardVopi vopi_standard_run(const Diagram& diagram, std::string_view node, std::string_view decision,
                               const ValuationMode& mode);

/// Diagram in which `informant` is observed by `decision` and every later decision.
Diagram inform_decisions(const Diagram& diagram, std::string_view informant, std::string_view decision);

/// Policy with `node` fixed at `index` in every rule that depends on it.
Policy restrict_policy(const Diagram& diagram, const Policy& policy, std::string_view node, std::size_t index);

}  // namespace detail

}  // namespace infdiag
