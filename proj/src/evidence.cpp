#include "infdiag/evidence.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <utility>

#include "infdiag/scope.hpp"
#include "infdiag/transforms.hpp"

namespace infdiag {

Evidence Evidence::simple(std::string node, std::string outcome) {
  return Evidence{std::move(node), Simple{std::move(outcome)}};
}

Evidence Evidence::conditional(std::string node, std::vector<std::string> decisions,
                               std::map<std::vector<std::string>, std::string> outcomes) {
  return Evidence{std::move(node), Conditional{std::move(decisions), std::move(outcomes)}};
}

namespace {

std::size_t row_width(const Node& n) { return n.kind == NodeKind::Chance ? n.space.size() : 1; }

/// Rebuilds `node` over `new_parents`; `old_row` maps a configuration of the
/// new parents to the row of the current table that supplies it.
Node rebuild_rows(const Diagram& d, const Node& node, std::vector<std::string> new_parents,
                  const std::function<std::size_t(std::span<const std::size_t>)>& old_row) {
  const Scope scope = Scope::of(d, new_parents);
  const std::size_t w = row_width(node);
  Node out = node;
  out.parents = std::move(new_parents);
  std::visit(
      [&](const auto& table) {
        using T = std::decay_t<decltype(table)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return;
        } else {
          T rebuilt;
          rebuilt.entries.reserve(scope.count() * w);
          scope.for_each([&](std::span<const std::size_t> digits) {
            const std::size_t r = old_row(digits);
            for (std::size_t c = 0; c < w; ++c) rebuilt.entries.push_back(table.entries[r * w + c]);
          });
          out.payload = std::move(rebuilt);
        }
      },
      node.payload);
  return out;
}

/// Row index over `parents` given digits for a (super)scope `scope`, with
/// `fixed` overriding one variable.
std::size_t row_with(const Diagram& d, const std::vector<std::string>& parents, const Scope& scope,
                     std::span<const std::size_t> digits, std::string_view fixed_id, std::size_t fixed_value) {
  std::size_t row = 0;
  for (const auto& p : parents) {
    const std::size_t size = d.node(p).space.size();
    const std::size_t digit = p == fixed_id ? fixed_value : digits[*scope.position(p)];
    row = row * size + digit;
  }
  return row;
}

std::vector<std::string> chance_parents(const Diagram& d, const Node& n) {
  std::vector<std::string> out;
  for (const auto& p : n.parents) {
    auto k = d.node(p).kind;
    if (k == NodeKind::Chance || k == NodeKind::Deterministic) out.push_back(p);
  }
  return out;
}

/// Outcome space of reversing `pred` into `observed`, the observed node
/// counting as a single outcome.
std::size_t evidence_reversal_space(const Diagram& d, const std::string& pred, const std::string& observed) {
  std::set<std::string> set{pred};
  const auto& pp = d.node(pred).parents;
  const auto& jp = d.node(observed).parents;
  set.insert(pp.begin(), pp.end());
  set.insert(jp.begin(), jp.end());
  return configuration_count(d, set);
}

/// Largest successor table rewritten when `observed` is fixed; arcs into
/// decisions are dropped without computation.
std::size_t propagation_space(const Diagram& d, const std::string& observed) {
  std::size_t space = 1;
  for (const auto& s : d.successors(observed)) {
    const Node& n = d.node(s);
    if (n.kind == NodeKind::Decision) continue;
    std::set<std::string> set(n.parents.begin(), n.parents.end());
    set.erase(observed);
    if (n.kind != NodeKind::Value) set.insert(n.id);
    space = std::max(space, configuration_count(d, set));
  }
  return space;
}

/// Reverses every chance predecessor into `id` until its parents are all decisions.
Diagram reverse_predecessors_into(Diagram cur, const std::string& id, SpaceLedger* ledger) {
  for (;;) {
    auto parents = chance_parents(cur, cur.node(id));
    if (parents.empty()) return cur;
    // Reversible parents only; the topologically last one always is unless a
    // decision lies on another path. Smallest space first, then smallest id.
    std::optional<std::pair<std::size_t, std::string>> best;
    for (const auto& p : parents) {
      if (has_indirect_path(cur, p, id)) continue;
      std::pair<std::size_t, std::string> candidate{evidence_reversal_space(cur, p, id), p};
      if (!best || candidate < *best) best = std::move(candidate);
    }
    if (!best)
      throw structural_error("cannot reverse any predecessor into '" + id + "': another path passes a decision");
    const auto [space, pred] = *best;
    if (cur.node(pred).kind == NodeKind::Deterministic) cur = convert_deterministic(cur, pred);
    auto reversed = detail::reverse_arc_counted(cur, pred, id);
    if (ledger) ledger->record({"evidence_reversal", pred, space, reversed.uniform_rows});
    cur = std::move(reversed.diagram);
  }
}

bool rows_independent_of(const Diagram& d, const Node& n, std::string_view parent) {
  const Scope scope = Scope::of(d, n.parents);
  const std::size_t pos = *scope.position(parent);
  const std::size_t w = row_width(n);
  bool same = true;
  scope.for_each([&](std::span<const std::size_t> digits) {
    if (!same || digits[pos] == 0) return;
    std::vector<std::size_t> base(digits.begin(), digits.end());
    base[pos] = 0;
    const std::size_t r = scope.encode(digits), r0 = scope.encode(base);
    std::visit(
        [&](const auto& table) {
          using T = std::decay_t<decltype(table)>;
          if constexpr (!std::is_same_v<T, std::monostate>) {
            for (std::size_t c = 0; c < w; ++c) {
              const double a = static_cast<double>(table.entries[r * w + c]);
              const double b = static_cast<double>(table.entries[r0 * w + c]);
              if (std::abs(a - b) > kProbabilityTolerance) same = false;
            }
          }
        },
        n.payload);
  });
  return same;
}

/// Observed outcome index for every configuration of the node's (decision) parents.
std::vector<std::size_t> observed_indices(const Diagram& d, const Node& j, const Evidence& ev) {
  const Scope scope = Scope::of(d, j.parents);
  std::vector<std::size_t> out;
  if (const auto* s = std::get_if<Evidence::Simple>(&ev.form)) {
    out.assign(scope.count(), j.space.index_of(s->outcome));
    return out;
  }
  const auto& c = std::get<Evidence::Conditional>(ev.form);
  std::set<std::string> given(c.decisions.begin(), c.decisions.end());
  std::set<std::string> actual(j.parents.begin(), j.parents.end());
  if (given != actual || given.size() != c.decisions.size()) {
    std::string names;
    for (const auto& p : j.parents) names += (names.empty() ? "" : ",") + p;
    throw invalid_argument("conditional evidence on '" + j.id + "' must be given per configuration of {" + names +
                           "}");
  }
  scope.for_each([&](std::span<const std::size_t> digits) {
    std::vector<std::string> key;
    for (const auto& dec : c.decisions) key.push_back(d.node(dec).space.label(digits[*scope.position(dec)]));
    auto it = c.outcomes.find(key);
    if (it == c.outcomes.end()) {
      std::string cfg;
      for (const auto& k : key) cfg += (cfg.empty() ? "" : "&") + k;
      throw invalid_argument("conditional evidence on '" + j.id + "' has no outcome for configuration " + cfg);
    }
    out.push_back(j.space.index_of(it->second));
  });
  if (out.size() != c.outcomes.size())
    throw invalid_argument("conditional evidence on '" + j.id + "' lists unknown configurations");
  return out;
}

/// Folds the observation of `j_id` (whose parents are all decisions) into
/// `node`, which inherits those decision parents.
Node substitute_observation(const Diagram& d, const Node& node, const Node& j,
                            const std::vector<std::size_t>& observed) {
  std::vector<std::string> new_parents;
  for (const auto& p : node.parents)
    if (p != j.id) new_parents.push_back(p);
  for (const auto& p : j.parents)
    if (std::find(new_parents.begin(), new_parents.end(), p) == new_parents.end()) new_parents.push_back(p);
  const Scope scope = Scope::of(d, new_parents);
  const Scope j_scope = Scope::of(d, j.parents);
  const Projection to_j(scope, j_scope);
  return rebuild_rows(d, node, new_parents, [&](std::span<const std::size_t> digits) {
    return row_with(d, node.parents, scope, digits, j.id, observed[to_j(digits)]);
  });
}

PropagationResult condition(const Diagram& diagram, const Evidence& ev) {
  PropagationResult result;
  Diagram cur = diagram;
  const Node& original = cur.node(ev.node);
  if (original.kind == NodeKind::Decision || original.kind == NodeKind::Value)
    throw structural_error("evidence on '" + ev.node + "': only chance or deterministic nodes can be observed");
  if (original.kind == NodeKind::Deterministic) cur = convert_deterministic(cur, ev.node);
  if (const auto* s = std::get_if<Evidence::Simple>(&ev.form)) cur.node(ev.node).space.index_of(s->outcome);

  cur = reverse_predecessors_into(std::move(cur), ev.node, &result.ledger);
  if (ev.is_simple()) {
    cur = drop_vacuous_decision_arcs(cur, ev.node);
    if (!cur.node(ev.node).parents.empty())
      throw structural_error("evidence on '" + ev.node + "' depends on decision '" +
                             cur.node(ev.node).parents.front() + "'; use conditional evidence");
  }

  const Node j = cur.node(ev.node);
  const auto observed = observed_indices(cur, j, ev);
  const auto& table = j.probabilities().entries;
  const std::size_t cols = j.space.size();
  for (std::size_t r = 0; r < observed.size(); ++r) {
    const double w = table[r * cols + observed[r]];
    if (!(w > 0.0)) throw impossible_evidence("evidence on '" + ev.node + "' has probability zero");
    result.configuration_weights.push_back(w);
  }
  result.evidence_weight =
      *std::min_element(result.configuration_weights.begin(), result.configuration_weights.end());

  result.ledger.record({"propagate_evidence", j.id, propagation_space(cur, j.id), 0});
  for (const auto& s : cur.successors(j.id)) {
    Node succ = cur.node(s);
    if (succ.kind == NodeKind::Decision) {
      succ.parents.erase(std::find(succ.parents.begin(), succ.parents.end(), j.id));
      cur.replace_node(std::move(succ));
    } else {
      cur.replace_node(substitute_observation(cur, succ, j, observed));
    }
  }
  cur.erase_node(j.id);
  result.diagram = std::move(cur);
  return result;
}

}  // namespace

Diagram drop_vacuous_decision_arcs(const Diagram& diagram, std::string_view id) {
  Diagram out = diagram;
  for (bool changed = true; changed;) {
    changed = false;
    const Node& n = out.node(id);
    for (const auto& p : n.parents) {
      if (out.node(p).kind != NodeKind::Decision || !rows_independent_of(out, n, p)) continue;
      std::vector<std::string> rest;
      for (const auto& q : n.parents)
        if (q != p) rest.push_back(q);
      const Scope scope = Scope::of(out, rest);
      Node rebuilt = rebuild_rows(out, n, rest, [&](std::span<const std::size_t> digits) {
        return row_with(out, n.parents, scope, digits, p, 0);
      });
      out.replace_node(std::move(rebuilt));
      changed = true;
      break;
    }
  }
  return out;
}

Absorption absorb_evidence(const Diagram& diagram, const Evidence& evidence) {
  const Node& j = diagram.node(evidence.node);
  if (j.kind != NodeKind::Chance)
    throw structural_error("absorb_evidence: '" + j.id + "' is " + std::string(to_string(j.kind)) +
                           "; convert deterministic nodes first");
  std::vector<std::string> decision_parents;
  for (const auto& p : j.parents)
    if (diagram.node(p).kind == NodeKind::Decision) decision_parents.push_back(p);

  if (evidence.is_simple()) {
    const Diagram reduced = drop_vacuous_decision_arcs(diagram, j.id);
    for (const auto& p : reduced.node(j.id).parents)
      if (reduced.node(p).kind == NodeKind::Decision)
        throw structural_error("absorb_evidence: '" + j.id + "' depends on decision '" + p +
                               "'; use conditional evidence");
  }

  // Observed outcome per configuration of the decision parents.
  Node decision_view = j;
  decision_view.parents = decision_parents;
  const auto observed = observed_indices(diagram, decision_view, evidence);
  const Scope scope = Scope::of(diagram, j.parents);
  const Projection to_decisions(scope, Scope::of(diagram, decision_parents));
  const auto& table = j.probabilities().entries;
  const std::size_t cols = j.space.size();

  Absorption out{j.id, j.parents, {}};
  bool possible = false;
  scope.for_each([&](std::span<const std::size_t> digits) {
    const double w = table[scope.encode(digits) * cols + observed[to_decisions(digits)]];
    possible |= w > 0.0;
    out.likelihood.push_back(w);
  });
  if (!possible) throw impossible_evidence("evidence on '" + j.id + "' has probability zero in every row");
  return out;
}

PropagationResult propagate_evidence(const Diagram& diagram, const Evidence& evidence) {
  return condition(diagram, evidence);
}

PropagationResult evidence_reversal(const Diagram& diagram, const Evidence& evidence) {
  const Node& j = diagram.node(evidence.node);
  if (j.kind != NodeKind::Chance)
    throw structural_error("evidence_reversal: '" + j.id + "' is not a chance node");
  if (chance_parents(diagram, j).empty())
    throw structural_error("evidence_reversal: '" + j.id + "' has no chance predecessor");
  return condition(diagram, evidence);
}

Diagram propagate_to_deterministic(const Diagram& diagram, const Evidence& evidence, std::string_view target) {
  const Node& t = diagram.node(target);
  if (t.kind != NodeKind::Deterministic)
    throw structural_error("propagate_to_deterministic: '" + t.id + "' is not deterministic");
  if (!t.has_parent(evidence.node))
    throw structural_error("propagate_to_deterministic: '" + evidence.node + "' is not a parent of '" + t.id + "'");
  const Node& j = diagram.node(evidence.node);
  Node decision_view = j;
  if (!evidence.is_simple()) {
    decision_view.parents.clear();
    for (const auto& p : j.parents)
      if (diagram.node(p).kind == NodeKind::Decision) decision_view.parents.push_back(p);
  } else {
    decision_view.parents.clear();
  }
  const auto observed = observed_indices(diagram, decision_view, evidence);
  Diagram out = diagram;
  out.replace_node(substitute_observation(diagram, t, decision_view, observed));
  return out;
}

PropagationResult evidence_reversal_deterministic(const Diagram& diagram, const Evidence& evidence) {
  const Node& j = diagram.node(evidence.node);
  if (j.kind != NodeKind::Deterministic)
    throw structural_error("evidence_reversal_deterministic: '" + j.id + "' is not deterministic");
  return condition(convert_deterministic(diagram, j.id), evidence);
}

Diagram prune_decision_arc(const Diagram& diagram, std::string_view chance, std::string_view decision) {
  const Node& c = diagram.node(chance);
  const Node& d = diagram.node(decision);
  if (c.kind != NodeKind::Chance && c.kind != NodeKind::Deterministic)
    throw structural_error("prune_decision_arc: '" + c.id + "' is not a chance node");
  if (d.kind != NodeKind::Decision)
    throw structural_error("prune_decision_arc: '" + d.id + "' is not a decision node");
  if (!d.has_parent(c.id)) throw structural_error("prune_decision_arc: no arc " + c.id + " -> " + d.id);
  const auto succ = diagram.successors(c.id);
  if (succ.size() != 1)
    throw structural_error("prune_decision_arc: '" + c.id + "' still has successors other than '" + d.id + "'");
  Node pruned = d;
  pruned.parents.erase(std::find(pruned.parents.begin(), pruned.parents.end(), c.id));
  Diagram out = diagram;
  out.replace_node(std::move(pruned));
  return out;
}

std::vector<double> marginal_probability(const Diagram& diagram, std::string_view id) {
  const Node& j = diagram.node(id);
  if (j.kind != NodeKind::Chance && j.kind != NodeKind::Deterministic)
    throw structural_error("marginal_probability: '" + j.id + "' is not a chance node");
  Diagram cur = diagram;
  if (j.kind == NodeKind::Deterministic) cur = convert_deterministic(cur, j.id);
  cur = reverse_predecessors_into(std::move(cur), j.id, nullptr);
  cur = drop_vacuous_decision_arcs(cur, j.id);
  const Node& root = cur.node(id);
  if (!root.parents.empty())
    throw structural_error("marginal_probability: '" + root.id + "' depends on decision '" + root.parents.front() +
                           "'");
  return root.probabilities().entries;
}

}  // namespace infdiag
