#include "infdiag/transforms.hpp"

#include <algorithm>
#include <limits>

#include "infdiag/scope.hpp"

namespace infdiag {

namespace {

void append_unique(std::vector<std::string>& out, const std::vector<std::string>& ids,
                   std::string_view skip = {}) {
  for (const auto& id : ids)
    if (id != skip && std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
}

std::vector<std::string> without(const std::vector<std::string>& ids, std::string_view skip) {
  std::vector<std::string> out;
  for (const auto& id : ids)
    if (id != skip) out.push_back(id);
  return out;
}

const Node& require_kind(const Diagram& diagram, std::string_view id, NodeKind kind, const char* op) {
  const Node& n = diagram.node(id);
  if (n.kind != kind)
    throw structural_error(std::string(op) + ": node '" + n.id + "' is " + std::string(to_string(n.kind)) +
                           ", expected " + std::string(to_string(kind)));
  return n;
}

bool only_value_successors(const Diagram& diagram, std::string_view id) {
  for (const auto& s : diagram.successors(id))
    if (diagram.node(s).kind != NodeKind::Value) return false;
  return true;
}

Diagram remove_barren_except(const Diagram& diagram, const std::set<std::string>& keep) {
  Diagram out = diagram;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& n : out.nodes()) {
      if (n.kind != NodeKind::Chance && n.kind != NodeKind::Deterministic) continue;
      if (keep.count(n.id) || !out.successors(n.id).empty()) continue;
      out.erase_node(n.id);
      changed = true;
      break;
    }
  }
  return out;
}

}  // namespace

std::size_t choice_for(const Diagram& diagram, const DecisionRule& rule,
                       const std::map<std::string, std::size_t>& observed) {
  std::size_t row = 0;
  for (const auto& p : rule.parents) {
    auto it = observed.find(p);
    if (it == observed.end()) throw invalid_argument("rule for '" + rule.decision + "' needs '" + p + "'");
    row = row * diagram.node(p).space.size() + it->second;
  }
  return rule.choices.at(row);
}

namespace detail {

ReversalOutcome reverse_arc_counted(const Diagram& diagram, std::string_view from, std::string_view to) {
  const Node& x = require_kind(diagram, from, NodeKind::Chance, "reverse_arc");
  const Node& y = require_kind(diagram, to, NodeKind::Chance, "reverse_arc");
  if (!y.has_parent(x.id)) throw structural_error("reverse_arc: no arc " + x.id + " -> " + y.id);
  if (has_indirect_path(diagram, x.id, y.id))
    throw structural_error("reverse_arc: another path " + x.id + " -> " + y.id + " would form a cycle");

  std::vector<std::string> y_parents = without(y.parents, x.id);
  append_unique(y_parents, x.parents);
  std::vector<std::string> x_parents = x.parents;
  append_unique(x_parents, y.parents, x.id);
  x_parents.push_back(y.id);

  std::vector<std::string> all = y_parents;
  all.push_back(x.id);
  all.push_back(y.id);
  const Scope joint = Scope::of(diagram, all);
  const Projection old_x(joint, Scope::of(diagram, x.parents));
  const Projection old_y(joint, Scope::of(diagram, y.parents));
  const Projection new_y(joint, Scope::of(diagram, y_parents));
  const Projection new_x(joint, Scope::of(diagram, x_parents));
  const std::size_t xi = joint.width() - 2, yi = joint.width() - 1;
  const std::size_t nx = x.space.size(), ny = y.space.size();
  const auto& px = x.probabilities().entries;
  const auto& py = y.probabilities().entries;

  std::vector<double> y_table(Scope::of(diagram, y_parents).count() * ny, 0.0);
  std::vector<double> x_table(Scope::of(diagram, x_parents).count() * nx, 0.0);
  joint.for_each([&](std::span<const std::size_t> d) {
    const double p = px[old_x(d) * nx + d[xi]] * py[old_y(d) * ny + d[yi]];
    y_table[new_y(d) * ny + d[yi]] += p;
    x_table[new_x(d) * nx + d[xi]] = p;
  });

  std::size_t uniform_rows = 0;
  joint.for_each([&](std::span<const std::size_t> d) {
    const double marginal = y_table[new_y(d) * ny + d[yi]];
    double& cell = x_table[new_x(d) * nx + d[xi]];
    if (marginal > 0.0) {
      cell /= marginal;
    } else {
      cell = 1.0 / static_cast<double>(nx);
      if (d[xi] == 0) ++uniform_rows;
    }
  });

  Diagram out = diagram;
  Node nx_node = x;
  nx_node.parents = std::move(x_parents);
  nx_node.payload = ConditionalTable{std::move(x_table)};
  Node ny_node = y;
  ny_node.parents = std::move(y_parents);
  ny_node.payload = ConditionalTable{std::move(y_table)};
  out.replace_node(std::move(nx_node));
  out.replace_node(std::move(ny_node));
  return {std::move(out), uniform_rows};
}

Diagram convert_all_deterministic(const Diagram& diagram) {
  Diagram out = diagram;
  for (const auto& n : diagram.nodes())
    if (n.kind == NodeKind::Deterministic) out = convert_deterministic(out, n.id);
  return out;
}

}  // namespace detail

Diagram reverse_arc(const Diagram& diagram, std::string_view from, std::string_view to) {
  return detail::reverse_arc_counted(diagram, from, to).diagram;
}

Diagram remove_chance_node(const Diagram& diagram, std::string_view id) {
  const Node& x = require_kind(diagram, id, NodeKind::Chance, "remove_chance_node");
  if (!only_value_successors(diagram, id))
    throw structural_error("remove_chance_node: '" + x.id + "' has successors other than the value node");

  Diagram out = diagram;
  if (diagram.successors(id).empty()) {
    out.erase_node(id);
    return out;
  }

  const Node& v = diagram.value_node();
  std::vector<std::string> v_parents = without(v.parents, x.id);
  append_unique(v_parents, x.parents);
  std::vector<std::string> all = v_parents;
  all.push_back(x.id);

  const Scope joint = Scope::of(diagram, all);
  const Projection old_v(joint, Scope::of(diagram, v.parents));
  const Projection old_x(joint, Scope::of(diagram, x.parents));
  const Projection new_v(joint, Scope::of(diagram, v_parents));
  const std::size_t xi = joint.width() - 1, nx = x.space.size();
  const auto& px = x.probabilities().entries;
  const auto& values = v.values().entries;

  std::vector<double> table(Scope::of(diagram, v_parents).count(), 0.0);
  joint.for_each([&](std::span<const std::size_t> d) {
    table[new_v(d)] += px[old_x(d) * nx + d[xi]] * values[old_v(d)];
  });

  Node nv = v;
  nv.parents = std::move(v_parents);
  nv.payload = ValueTable{std::move(table)};
  out.replace_node(std::move(nv));
  out.erase_node(id);
  return out;
}

DecisionRemoval remove_decision_node(const Diagram& diagram, std::string_view id) {
  const Node& dnode = require_kind(diagram, id, NodeKind::Decision, "remove_decision_node");
  if (!only_value_successors(diagram, id))
    throw structural_error("remove_decision_node: '" + dnode.id + "' has successors other than the value node");

  const Node& v = diagram.value_node();
  DecisionRule rule{dnode.id, {}, {}};
  Diagram out = diagram;
  if (!v.has_parent(dnode.id)) {
    rule.choices = {0};
    out.erase_node(id);
    return {std::move(out), std::move(rule)};
  }

  std::vector<std::string> others = without(v.parents, dnode.id);
  for (const auto& o : others)
    if (!dnode.has_parent(o))
      throw structural_error("remove_decision_node: value depends on '" + o + "', which '" + dnode.id +
                             "' does not observe");

  const Scope rest = Scope::of(diagram, others);
  std::vector<std::string> all = others;
  all.push_back(dnode.id);
  const Scope joint = Scope::of(diagram, all);
  const Projection old_v(joint, Scope::of(diagram, v.parents));
  const auto& values = v.values().entries;
  const bool maximize = diagram.objective() == Objective::Maximize;
  const std::size_t alternatives = dnode.space.size();

  std::vector<double> table(rest.count(), 0.0);
  rule.parents = others;
  rule.choices.assign(rest.count(), 0);
  std::vector<std::size_t> digits(joint.width(), 0);
  rest.for_each([&](std::span<const std::size_t> r) {
    std::copy(r.begin(), r.end(), digits.begin());
    std::vector<double> candidate(alternatives);
    for (std::size_t a = 0; a < alternatives; ++a) {
      digits.back() = a;
      candidate[a] = values[old_v(digits)];
    }
    const double best = maximize ? *std::max_element(candidate.begin(), candidate.end())
                                 : *std::min_element(candidate.begin(), candidate.end());
    std::size_t pick = 0;
    while (std::abs(candidate[pick] - best) > kTieTolerance) ++pick;
    const std::size_t row = rest.encode(r);
    rule.choices[row] = pick;
    table[row] = candidate[pick];
  });

  Node nv = v;
  nv.parents = std::move(others);
  nv.payload = ValueTable{std::move(table)};
  out.replace_node(std::move(nv));
  out.erase_node(id);
  return {std::move(out), std::move(rule)};
}

Diagram convert_deterministic(const Diagram& diagram, std::string_view id) {
  const Node& f = require_kind(diagram, id, NodeKind::Deterministic, "convert_deterministic");
  const std::size_t cols = f.space.size();
  const auto& map = f.function().entries;
  std::vector<double> table(map.size() * cols, 0.0);
  for (std::size_t r = 0; r < map.size(); ++r) table[r * cols + map[r]] = 1.0;
  Node c = f;
  c.kind = NodeKind::Chance;
  c.payload = ConditionalTable{std::move(table)};
  Diagram out = diagram;
  out.replace_node(std::move(c));
  return out;
}

Diagram remove_barren(const Diagram& diagram, const std::set<std::string>& keep) {
  return remove_barren_except(diagram, keep);
}

namespace {

enum class StepKind { RemoveChance, EliminateChance, RemoveDecision };

struct Candidate {
  StepKind kind;
  std::string node;
  std::size_t space;
};

std::vector<Candidate> admissible_steps(const Diagram& d, const std::set<std::string>& locked) {
  std::vector<Candidate> out;
  const Node& v = d.value_node();
  for (const auto& n : d.nodes()) {
    if (n.kind == NodeKind::Value || locked.count(n.id)) continue;
    const auto succ = d.successors(n.id);
    const bool value_only = only_value_successors(d, n.id);
    if (n.kind == NodeKind::Chance) {
      bool decision_successor = false;
      for (const auto& s : succ) decision_successor |= d.node(s).kind == NodeKind::Decision;
      if (value_only)
        out.push_back({StepKind::RemoveChance, n.id, computational_space(d, n.id)});
      else if (!decision_successor)
        out.push_back({StepKind::EliminateChance, n.id, computational_space(d, n.id)});
    } else if (n.kind == NodeKind::Decision && value_only) {
      bool observed = true;
      if (v.has_parent(n.id))
        for (const auto& p : v.parents)
          if (p != n.id && !n.has_parent(p)) observed = false;
      if (observed) out.push_back({StepKind::RemoveDecision, n.id, computational_space(d, n.id)});
    }
  }
  return out;
}

}  // namespace

Reduction reduce(const Diagram& diagram, const ReductionOptions& options) {
  require_valid(diagram, ValidationOptions{options.allow_forgetting});
  for (const auto& id : options.locked) {
    const Node& n = diagram.node(id);
    if (n.kind == NodeKind::Value || n.kind == NodeKind::Decision)
      throw structural_error("reduce: only chance nodes can be locked, '" + id + "' is " +
                             std::string(to_string(n.kind)));
  }

  Reduction result;
  Diagram cur = detail::convert_all_deterministic(diagram);
  for (;;) {
    cur = remove_barren_except(cur, options.locked);
    std::size_t removable = 0;
    for (const auto& n : cur.nodes())
      if (n.kind != NodeKind::Value && !options.locked.count(n.id)) ++removable;
    if (removable == 0) break;

    auto steps = admissible_steps(cur, options.locked);
    if (steps.empty()) throw structural_error("reduce: no admissible reduction step remains");
    const Candidate best = *std::min_element(steps.begin(), steps.end(), [](const auto& a, const auto& b) {
      return a.space != b.space ? a.space < b.space : a.node < b.node;
    });

    switch (best.kind) {
      case StepKind::RemoveChance:
        result.ledger.record({"remove_chance_node", best.node, best.space, 0});
        cur = remove_chance_node(cur, best.node);
        break;
      case StepKind::EliminateChance: {
        for (;;) {
          const auto order = topological_order(cur);
          const auto succ = cur.successors(best.node);
          std::string target;
          for (const auto& id : order) {
            if (std::find(succ.begin(), succ.end(), id) != succ.end() &&
                cur.node(id).kind == NodeKind::Chance) {
              target = id;
              break;
            }
          }
          if (target.empty()) break;
          const std::size_t space = computational_space(cur, best.node);
          auto reversed = detail::reverse_arc_counted(cur, best.node, target);
          result.ledger.record({"reverse_arc", best.node, space, reversed.uniform_rows});
          cur = std::move(reversed.diagram);
        }
        result.ledger.record({"remove_chance_node", best.node, computational_space(cur, best.node), 0});
        cur = remove_chance_node(cur, best.node);
        break;
      }
      case StepKind::RemoveDecision: {
        result.ledger.record({"remove_decision_node", best.node, best.space, 0});
        auto removal = remove_decision_node(cur, best.node);
        result.policy.emplace(best.node, std::move(removal.rule));
        cur = std::move(removal.diagram);
        break;
      }
    }
  }
  result.residual = std::move(cur);
  return result;
}

Evaluation evaluate(const Diagram& diagram) {
  Reduction r = reduce(diagram);
  const Node& v = r.residual.value_node();
  if (!v.parents.empty()) throw structural_error("evaluate: value node still has predecessors");
  return {v.values().entries.at(0), std::move(r.policy), std::move(r.ledger)};
}

}  // namespace infdiag
