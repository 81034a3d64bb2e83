#include "infdiag/valuation.hpp"

#include <algorithm>
#include <cmath>

#include "infdiag/scope.hpp"

namespace infdiag {

namespace {

// Outcomes at or below this probability are left out of reports.
constexpr double kNegligibleProbability = 1e-12;

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// JointConditionalTable

std::string JointConditionalTable::vector_label(const std::vector<std::size_t>& components) const {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < configurations.size(); ++i)
    parts.push_back(join(configurations[i], "&") + ":" + outcomes.at(components.at(i)));
  return join(parts, "|");
}

std::size_t JointConditionalTable::configuration_index(const std::vector<std::string>& alternatives) const {
  for (std::size_t i = 0; i < configurations.size(); ++i)
    if (configurations[i] == alternatives) return i;
  throw invalid_argument("joint for '" + node + "' has no configuration " + join(alternatives, "&"));
}

std::vector<std::size_t> JointConditionalTable::parse_vector_label(std::string_view label) const {
  std::vector<std::size_t> components(configurations.size(), 0);
  std::vector<bool> seen(configurations.size(), false);
  for (const auto& part : split(label, '|')) {
    auto colon = part.find(':');
    if (colon == std::string::npos)
      throw invalid_argument("vector label component '" + part + "' is not of the form alternative:outcome");
    const std::size_t cfg = configuration_index(split(std::string_view(part).substr(0, colon), '&'));
    if (seen[cfg]) throw invalid_argument("vector label '" + std::string(label) + "' repeats a configuration");
    seen[cfg] = true;
    const std::string outcome = part.substr(colon + 1);
    auto it = std::find(outcomes.begin(), outcomes.end(), outcome);
    if (it == outcomes.end()) throw invalid_argument("unknown outcome '" + outcome + "' in vector label");
    components[cfg] = static_cast<std::size_t>(it - outcomes.begin());
  }
  for (bool s : seen)
    if (!s) throw invalid_argument("vector label '" + std::string(label) + "' misses a configuration");
  return components;
}

JointConditionalTable make_joint(const Diagram& diagram, std::string node, std::vector<std::string> decision_parents,
                                 const std::map<std::string, double>& probabilities) {
  JointConditionalTable joint;
  joint.node = std::move(node);
  joint.decision_parents = std::move(decision_parents);
  joint.outcomes = diagram.node(joint.node).space.labels();
  for (const auto& d : joint.decision_parents)
    if (diagram.node(d).kind != NodeKind::Decision)
      throw invalid_argument("joint for '" + joint.node + "': '" + d + "' is not a decision");
  const Scope scope = Scope::of(diagram, joint.decision_parents);
  scope.for_each([&](std::span<const std::size_t> digits) {
    std::vector<std::string> alts;
    for (std::size_t i = 0; i < digits.size(); ++i)
      alts.push_back(diagram.node(joint.decision_parents[i]).space.label(digits[i]));
    joint.configurations.push_back(std::move(alts));
  });
  for (const auto& [label, p] : probabilities) {
    auto components = joint.parse_vector_label(label);
    if (!joint.joint.emplace(std::move(components), p).second)
      throw invalid_argument("joint lists vector '" + label + "' twice");
  }
  return joint;
}

void check_joint(const Diagram& diagram, const JointConditionalTable& joint) {
  std::vector<Violation> problems;
  const Node& n = diagram.node(joint.node);
  if (n.kind != NodeKind::Chance) problems.push_back({n.id, "joint-node", "joint target must be a chance node"});
  std::set<std::string> parents(n.parents.begin(), n.parents.end());
  std::set<std::string> given(joint.decision_parents.begin(), joint.decision_parents.end());
  if (parents != given || parents.empty())
    problems.push_back({n.id, "joint-parents", "joint decision parents must equal the node's parents"});
  if (!problems.empty()) throw ValidationError("inconsistent joint conditional table", std::move(problems));

  double sum = 0.0;
  for (const auto& [components, p] : joint.joint) {
    if (!(p >= 0.0 && p <= 1.0))
      problems.push_back({n.id, "probability-range", "vector " + joint.vector_label(components) + " outside [0,1]"});
    sum += p;
  }
  if (!(std::abs(sum - 1.0) <= kProbabilityTolerance))
    problems.push_back({n.id, "row-sum", "joint sums to " + std::to_string(sum)});

  const auto& table = n.probabilities().entries;
  const std::size_t cols = n.space.size();
  for (std::size_t cfg = 0; cfg < joint.configurations.size(); ++cfg) {
    std::size_t row = 0;
    for (const auto& p : n.parents) {
      auto pos = std::find(joint.decision_parents.begin(), joint.decision_parents.end(), p) -
                 joint.decision_parents.begin();
      const auto& space = diagram.node(p).space;
      row = row * space.size() + space.index_of(joint.configurations[cfg][static_cast<std::size_t>(pos)]);
    }
    for (std::size_t x = 0; x < cols; ++x) {
      double margin = 0.0;
      for (const auto& [components, p] : joint.joint)
        if (components[cfg] == x) margin += p;
      if (std::abs(margin - table[row * cols + x]) > kLoadTolerance)
        problems.push_back({n.id, "joint-margin",
                            "margin of " + join(joint.configurations[cfg], "&") + ":" + joint.outcomes[x] +
                                " differs from the conditional table"});
    }
  }
  if (!problems.empty()) throw ValidationError("inconsistent joint conditional table", std::move(problems));
}

std::string expansion_node_id(const Diagram& diagram, const JointConditionalTable& joint) {
  std::string id = joint.node + "|" + join(joint.decision_parents, ",");
  while (diagram.contains(id)) id += "'";
  return id;
}

Diagram conditional_expansion(const Diagram& diagram, std::string_view node, const JointConditionalTable& joint) {
  if (joint.node != node) throw invalid_argument("joint is for '" + joint.node + "', not '" + std::string(node) + "'");
  check_joint(diagram, joint);
  const Node& j = diagram.node(node);
  const std::string vector_id = expansion_node_id(diagram, joint);

  std::vector<std::string> labels;
  std::vector<double> probabilities;
  std::vector<std::vector<std::size_t>> vectors;
  for (const auto& [components, p] : joint.joint) {
    labels.push_back(joint.vector_label(components));
    probabilities.push_back(p);
    vectors.push_back(components);
  }
  Node vector_node = Node::chance(vector_id, labels, {}, probabilities);

  std::vector<std::string> selector_parents{vector_id};
  selector_parents.insert(selector_parents.end(), j.parents.begin(), j.parents.end());
  Diagram out = diagram;
  out.insert_node_before(j.id, std::move(vector_node));

  const Scope scope = Scope::of(out, selector_parents);
  std::vector<std::size_t> map;
  scope.for_each([&](std::span<const std::size_t> digits) {
    std::vector<std::string> alts(joint.decision_parents.size());
    for (std::size_t i = 1; i < digits.size(); ++i) {
      auto pos = std::find(joint.decision_parents.begin(), joint.decision_parents.end(), selector_parents[i]) -
                 joint.decision_parents.begin();
      alts[static_cast<std::size_t>(pos)] = out.node(selector_parents[i]).space.label(digits[i]);
    }
    map.push_back(vectors[digits[0]][joint.configuration_index(alts)]);
  });
  out.replace_node(Node::deterministic(j.id, j.space.labels(), std::move(selector_parents), std::move(map)));
  return out;
}

ConditionedJoint condition_joint(const JointConditionalTable& joint, const std::vector<std::string>& configuration,
                                 std::string_view outcome) {
  const std::size_t cfg = joint.configuration_index(configuration);
  auto it = std::find(joint.outcomes.begin(), joint.outcomes.end(), outcome);
  if (it == joint.outcomes.end()) throw invalid_argument("unknown outcome '" + std::string(outcome) + "'");
  const auto x = static_cast<std::size_t>(it - joint.outcomes.begin());

  ConditionedJoint out;
  for (std::size_t i = 0; i < joint.configurations.size(); ++i)
    if (i != cfg) out.configurations.push_back(i);
  double mass = 0.0;
  for (const auto& [components, p] : joint.joint) {
    if (components[cfg] != x) continue;
    std::vector<std::size_t> rest;
    for (auto i : out.configurations) rest.push_back(components[i]);
    out.distribution[rest] += p;
    mass += p;
  }
  if (!(mass > 0.0))
    throw impossible_evidence("conditioning joint on " + join(configuration, "&") + ":" + std::string(outcome) +
                              " with zero probability");
  for (auto& [rest, p] : out.distribution) p /= mass;
  return out;
}

// ---------------------------------------------------------------------------
// VOE and derived metrics

double value_of_evidence(const Diagram& diagram, const Evidence& evidence) {
  const double after = evaluate(propagate_evidence(diagram, evidence).diagram).ev;
  return after - evaluate(diagram).ev;
}

VoeReport voe_report(const Diagram& diagram, std::string_view node, const ValuationMode& mode) {
  return detail::voe_by_propagation(diagram, node, mode).report;
}

double outcome_sensitivity(const VoeReport& report) {
  if (report.entries.empty()) throw invalid_argument("outcome_sensitivity: empty report");
  auto [lo, hi] = std::minmax_element(report.entries.begin(), report.entries.end(),
                                      [](const auto& a, const auto& b) { return a.voe < b.voe; });
  return hi->voe - lo->voe;
}

double vopi_from_voe(const VoeReport& report) {
  double sum = 0.0;
  for (const auto& e : report.entries) sum += e.voe * e.probability;
  return sum;
}

double value_of_control(const VoeReport& report) {
  if (report.entries.empty()) throw invalid_argument("value_of_control: empty report");
  auto cmp = [](const auto& a, const auto& b) { return a.voe < b.voe; };
  return report.objective == Objective::Maximize
             ? std::max_element(report.entries.begin(), report.entries.end(), cmp)->voe
             : std::min_element(report.entries.begin(), report.entries.end(), cmp)->voe;
}

double vopi_standard(const Diagram& diagram, std::string_view node, std::string_view decision,
                     const ValuationMode& mode) {
  return detail::vopi_standard_run(diagram, node, decision, mode).value;
}

double voc_standard(const Diagram& diagram, std::string_view node) {
  const double baseline = evaluate(diagram).ev;
  Diagram cur = drop_vacuous_decision_arcs(diagram, node);
  const Node& j = cur.node(node);
  if (j.kind != NodeKind::Chance) throw structural_error("voc_standard: '" + j.id + "' is not a chance node");
  if (!j.parents.empty())
    throw structural_error("voc_standard: converting '" + j.id +
                           "' to a decision would make later decisions observe its predecessors");
  for (const auto& d : decision_order(cur)) {
    Node dn = cur.node(d);
    if (dn.has_parent(j.id)) continue;
    dn.parents.push_back(j.id);
    cur.replace_node(std::move(dn));
  }
  cur.replace_node(Node::decision(j.id, j.space.labels()));
  return evaluate(cur).ev - baseline;
}

std::optional<std::string> default_vopi_decision(const Diagram& diagram, std::string_view node) {
  for (const auto& d : decision_order(diagram))
    if (!diagram.node(d).has_parent(node)) return d;
  return std::nullopt;
}

namespace detail {

Diagram inform_decisions(const Diagram& diagram, std::string_view informant, std::string_view decision) {
  const Node& target = diagram.node(decision);
  if (target.kind != NodeKind::Decision)
    throw structural_error("'" + target.id + "' is not a decision node");
  const auto order = decision_order(diagram);
  Diagram out = diagram;
  bool reached = false;
  for (const auto& d : order) {
    reached |= d == decision;
    if (!reached) continue;
    if (d == informant || descendants(diagram, d).count(std::string(informant)))
      throw structural_error("informing '" + d + "' of '" + std::string(informant) + "' would create a cycle");
    Node dn = out.node(d);
    if (dn.has_parent(informant)) continue;
    dn.parents.emplace_back(informant);
    out.replace_node(std::move(dn));
  }
  return out;
}

Policy restrict_policy(const Diagram& diagram, const Policy& policy, std::string_view node, std::size_t index) {
  Policy out;
  for (const auto& [id, rule] : policy) {
    auto it = std::find(rule.parents.begin(), rule.parents.end(), node);
    if (it == rule.parents.end()) {
      out.emplace(id, rule);
      continue;
    }
    DecisionRule r{rule.decision, {}, {}};
    for (const auto& p : rule.parents)
      if (p != node) r.parents.push_back(p);
    const Scope full = Scope::of(diagram, rule.parents);
    const Scope rest = Scope::of(diagram, r.parents);
    const std::size_t pos = static_cast<std::size_t>(it - rule.parents.begin());
    rest.for_each([&](std::span<const std::size_t> digits) {
      std::vector<std::size_t> d(digits.begin(), digits.end());
      d.insert(d.begin() + static_cast<std::ptrdiff_t>(pos), index);
      r.choices.push_back(rule.choices[full.encode(d)]);
    });
    out.emplace(id, std::move(r));
  }
  return out;
}

namespace {

// Replaces the conditioned node in every rule by the joint's decision
// parents, whose alternatives fix its outcome under `components`. New
// parents follow the decision's own parent order.
Policy restrict_to_vector(const Diagram& diagram, const Policy& policy, const JointConditionalTable& joint,
                          const std::vector<std::size_t>& components) {
  Policy out;
  for (const auto& [id, rule] : policy) {
    if (std::find(rule.parents.begin(), rule.parents.end(), joint.node) == rule.parents.end()) {
      out.emplace(id, rule);
      continue;
    }
    auto wanted = [&](const std::string& p) {
      return p != joint.node && (std::find(rule.parents.begin(), rule.parents.end(), p) != rule.parents.end() ||
                                 std::find(joint.decision_parents.begin(), joint.decision_parents.end(), p) !=
                                     joint.decision_parents.end());
    };
    DecisionRule r{rule.decision, {}, {}};
    for (const auto& p : diagram.node(rule.decision).parents)
      if (wanted(p)) r.parents.push_back(p);
    for (const auto& p : rule.parents)
      if (wanted(p) && std::find(r.parents.begin(), r.parents.end(), p) == r.parents.end()) r.parents.push_back(p);
    for (const auto& k : joint.decision_parents)
      if (std::find(r.parents.begin(), r.parents.end(), k) == r.parents.end()) r.parents.push_back(k);

    const Scope full = Scope::of(diagram, rule.parents);
    const Scope rest = Scope::of(diagram, r.parents);
    auto digit_of = [&](std::span<const std::size_t> digits, const std::string& p) {
      return digits[static_cast<std::size_t>(std::find(r.parents.begin(), r.parents.end(), p) - r.parents.begin())];
    };
    rest.for_each([&](std::span<const std::size_t> digits) {
      std::vector<std::string> alternatives;
      for (const auto& k : joint.decision_parents) alternatives.push_back(diagram.node(k).space.label(digit_of(digits, k)));
      std::vector<std::size_t> d;
      for (const auto& p : rule.parents)
        d.push_back(p == joint.node ? components[joint.configuration_index(alternatives)] : digit_of(digits, p));
      r.choices.push_back(rule.choices[full.encode(d)]);
    });
    out.emplace(id, std::move(r));
  }
  return out;
}

Evidence conditional_evidence(const JointConditionalTable& joint, const std::vector<std::size_t>& components) {
  std::map<std::vector<std::string>, std::string> outcomes;
  for (std::size_t i = 0; i < joint.configurations.size(); ++i)
    outcomes.emplace(joint.configurations[i], joint.outcomes[components[i]]);
  return Evidence::conditional(joint.node, joint.decision_parents, std::move(outcomes));
}

/// Adds arcs from `informant` to every decision.
Diagram inform_all(const Diagram& diagram, std::string_view informant) {
  const auto order = decision_order(diagram);
  if (order.empty()) return diagram;
  return inform_decisions(diagram, informant, order.front());
}

}  // namespace

LedgeredReport voe_by_propagation(const Diagram& diagram, std::string_view node, const ValuationMode& mode) {
  LedgeredReport out;
  out.report.node = std::string(node);
  out.report.objective = diagram.objective();
  out.report.baseline_ev = evaluate(diagram).ev;
  // Barren nodes other than the evidence node cannot change any posterior.
  const Diagram pruned = remove_barren(diagram, {std::string(node)});

  auto run = [&](std::string label, Evidence evidence, double probability) {
    auto propagated = propagate_evidence(pruned, evidence);
    auto after = evaluate(propagated.diagram);
    out.ledger.append(propagated.ledger);
    out.ledger.append(after.ledger);
    out.report.entries.push_back({std::move(label), std::move(evidence), after.ev - out.report.baseline_ev,
                                  after.ev, probability, std::move(after.policy)});
  };

  if (!mode.is_full()) {
    const auto probabilities = marginal_probability(diagram, node);
    const Node& j = diagram.node(node);
    for (std::size_t x = 0; x < probabilities.size(); ++x)
      if (probabilities[x] > kNegligibleProbability)
        run(j.space.label(x), Evidence::simple(j.id, j.space.label(x)), probabilities[x]);
  } else {
    const auto& joint = *mode.joint;
    if (joint.node != node) throw invalid_argument("joint is for '" + joint.node + "'");
    check_joint(diagram, joint);
    for (const auto& [components, p] : joint.joint)
      if (p > kNegligibleProbability) run(joint.vector_label(components), conditional_evidence(joint, components), p);
  }
  return out;
}

LedgeredReport voe_by_lock(const Diagram& diagram, std::string_view node, const ValuationMode& mode) {
  LedgeredReport out;
  out.report.node = std::string(node);
  out.report.objective = diagram.objective();
  out.report.baseline_ev = evaluate(diagram).ev;

  Diagram cur;
  std::string locked;
  if (!mode.is_full()) {
    marginal_probability(diagram, node);
    cur = drop_vacuous_decision_arcs(diagram, node);
    if (cur.node(node).kind == NodeKind::Deterministic) cur = convert_deterministic(cur, node);
    locked = std::string(node);
  } else {
    if (mode.joint->node != node) throw invalid_argument("joint is for '" + mode.joint->node + "'");
    cur = conditional_expansion(diagram, node, *mode.joint);
    locked = expansion_node_id(diagram, *mode.joint);
  }
  cur = inform_all(cur, locked);

  Reduction reduction = reduce(cur, ReductionOptions{{locked}, true});
  out.ledger = reduction.ledger;
  const Diagram& residual = reduction.residual;
  const Node& lock = residual.node(locked);
  if (!lock.parents.empty())
    throw structural_error("voe_by_lock: locked node '" + locked + "' kept predecessors after reduction");
  const Node& v = residual.value_node();
  const auto& probabilities = lock.probabilities().entries;

  std::vector<std::vector<std::size_t>> vectors;
  if (mode.is_full())
    for (const auto& [components, p] : mode.joint->joint) vectors.push_back(components);

  for (std::size_t x = 0; x < lock.space.size(); ++x) {
    const double p = mode.is_full() ? mode.joint->joint.at(vectors[x]) : probabilities[x];
    if (!(p > kNegligibleProbability)) continue;
    const double ev = v.values().entries.at(v.parents.empty() ? 0 : x);
    Evidence evidence = mode.is_full() ? conditional_evidence(*mode.joint, vectors[x])
                                       : Evidence::simple(std::string(node), lock.space.label(x));
    Policy policy = restrict_policy(cur, reduction.policy, locked, x);
    if (mode.is_full()) policy = restrict_to_vector(cur, policy, *mode.joint, vectors[x]);
    out.report.entries.push_back({lock.space.label(x), std::move(evidence), ev - out.report.baseline_ev, ev, p,
                                  std::move(policy)});
  }
  return out;
}

StandardVopi vopi_standard_run(const Diagram& diagram, std::string_view node, std::string_view decision,
                               const ValuationMode& mode) {
  StandardVopi out;
  const double baseline = evaluate(diagram).ev;
  Diagram cur;
  if (!mode.is_full()) {
    cur = drop_vacuous_decision_arcs(diagram, node);
    cur = inform_decisions(cur, node, decision);
  } else {
    if (mode.joint->node != node) throw invalid_argument("joint is for '" + mode.joint->node + "'");
    cur = conditional_expansion(diagram, node, *mode.joint);
    cur = inform_decisions(cur, expansion_node_id(diagram, *mode.joint), decision);
  }
  auto informed = evaluate(cur);
  out.ev_with_information = informed.ev;
  out.value = informed.ev - baseline;
  out.ledger = std::move(informed.ledger);
  return out;
}

}  // namespace detail

}  // namespace infdiag
