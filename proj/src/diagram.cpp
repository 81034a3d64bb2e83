#include "infdiag/diagram.hpp"
#include "infdiag/scope.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace infdiag {

ValidationError::ValidationError(std::vector<Violation> violations)
    : ValidationError("diagram failed validation", std::move(violations)) {}

ValidationError::ValidationError(const std::string& message, std::vector<Violation> violations)
    : Error(ErrorKind::Validation,
            [&] {
              std::string text = message;
              for (const auto& v : violations) {
                text += "\n  [" + v.rule + "]";
                if (!v.node.empty()) text += " " + v.node + ":";
                text += " " + v.message;
              }
              return text;
            }()),
      violations_(std::move(violations)) {}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Chance: return "chance";
    case NodeKind::Deterministic: return "deterministic";
    case NodeKind::Decision: return "decision";
    case NodeKind::Value: return "value";
  }
  return "unknown";
}

std::string_view to_string(Objective objective) {
  return objective == Objective::Maximize ? "maximize" : "minimize";
}

std::optional<std::size_t> OutcomeSpace::find(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return i;
  return std::nullopt;
}

std::size_t OutcomeSpace::index_of(std::string_view label) const {
  if (auto i = find(label)) return *i;
  throw invalid_argument("unknown outcome '" + std::string(label) + "'");
}

// ---------------------------------------------------------------------------
// Node

bool Node::has_parent(std::string_view parent) const {
  return std::find(parents.begin(), parents.end(), parent) != parents.end();
}

namespace {

template <typename T, typename P>
auto& payload_as(P& payload, const std::string& id, const char* what) {
  if (auto* p = std::get_if<T>(&payload)) return *p;
  throw structural_error("node '" + id + "' has no " + what);
}

}  // namespace

const ConditionalTable& Node::probabilities() const {
  return payload_as<ConditionalTable>(payload, id, "probability table");
}
const FunctionTable& Node::function() const {
  return payload_as<FunctionTable>(payload, id, "function table");
}
const ValueTable& Node::values() const { return payload_as<ValueTable>(payload, id, "value table"); }
ConditionalTable& Node::probabilities() { return payload_as<ConditionalTable>(payload, id, "probability table"); }
FunctionTable& Node::function() { return payload_as<FunctionTable>(payload, id, "function table"); }
ValueTable& Node::values() { return payload_as<ValueTable>(payload, id, "value table"); }

Node Node::chance(std::string id, std::vector<std::string> outcomes, std::vector<std::string> parents,
                  std::vector<double> table) {
  return Node{std::move(id), NodeKind::Chance, OutcomeSpace(std::move(outcomes)), std::move(parents),
              ConditionalTable{std::move(table)}};
}

Node Node::deterministic(std::string id, std::vector<std::string> outcomes, std::vector<std::string> parents,
                         std::vector<std::size_t> map) {
  return Node{std::move(id), NodeKind::Deterministic, OutcomeSpace(std::move(outcomes)), std::move(parents),
              FunctionTable{std::move(map)}};
}

Node Node::decision(std::string id, std::vector<std::string> alternatives, std::vector<std::string> parents) {
  return Node{std::move(id), NodeKind::Decision, OutcomeSpace(std::move(alternatives)), std::move(parents),
              std::monostate{}};
}

Node Node::value(std::string id, std::vector<std::string> parents, std::vector<double> values) {
  return Node{std::move(id), NodeKind::Value, OutcomeSpace{}, std::move(parents), ValueTable{std::move(values)}};
}

// ---------------------------------------------------------------------------
// Diagram

bool Diagram::contains(std::string_view id) const { return index_.count(std::string(id)) > 0; }

std::optional<std::size_t> Diagram::position(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Node& Diagram::node(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw unknown_node(std::string(id));
  return nodes_[it->second];
}

const Node& Diagram::value_node() const {
  for (const auto& n : nodes_)
    if (n.kind == NodeKind::Value) return n;
  throw structural_error("diagram has no value node");
}

void Diagram::add_node(Node node) {
  if (contains(node.id)) throw invalid_argument("duplicate node id '" + node.id + "'");
  index_.emplace(node.id, nodes_.size());
  nodes_.push_back(std::move(node));
}

void Diagram::insert_node_before(std::string_view before, Node node) {
  if (contains(node.id)) throw invalid_argument("duplicate node id '" + node.id + "'");
  auto pos = position(before);
  if (!pos) throw unknown_node(std::string(before));
  nodes_.insert(nodes_.begin() + static_cast<std::ptrdiff_t>(*pos), std::move(node));
  reindex();
}

void Diagram::replace_node(Node node) {
  auto pos = position(node.id);
  if (!pos) throw unknown_node(node.id);
  nodes_[*pos] = std::move(node);
}

void Diagram::erase_node(std::string_view id) {
  auto pos = position(id);
  if (!pos) throw unknown_node(std::string(id));
  nodes_.erase(nodes_.begin() + static_cast<std::ptrdiff_t>(*pos));
  reindex();
}

std::vector<std::string> Diagram::successors(std::string_view id) const {
  std::vector<std::string> out;
  for (const auto& n : nodes_)
    if (n.has_parent(id)) out.push_back(n.id);
  return out;
}

void Diagram::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i].id, i);
}

// ---------------------------------------------------------------------------
// Graph queries

std::vector<std::string> direct_predecessors(const Diagram& diagram, std::string_view id) {
  return diagram.node(id).parents;
}

std::set<std::string> direct_successors(const Diagram& diagram, std::string_view id) {
  diagram.node(id);
  auto succ = diagram.successors(id);
  return {succ.begin(), succ.end()};
}

std::size_t configuration_count(const Diagram& diagram, const std::set<std::string>& ids) {
  std::size_t count = 1;
  for (const auto& id : ids) {
    const Node& n = diagram.node(id);
    if (n.kind == NodeKind::Value) throw structural_error("value node '" + id + "' has no outcome space");
    count *= n.space.size();
  }
  return count;
}

std::size_t row_count(const Diagram& diagram, const Node& node) {
  std::size_t rows = 1;
  for (const auto& p : node.parents) rows *= diagram.node(p).space.size();
  return rows;
}

std::vector<std::string> topological_order(const Diagram& diagram) {
  const auto& nodes = diagram.nodes();
  std::vector<std::size_t> pending(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (const auto& p : nodes[i].parents)
      if (diagram.contains(p)) ++pending[i];

  std::vector<std::string> order;
  std::vector<bool> done(nodes.size(), false);
  while (order.size() < nodes.size()) {
    bool progressed = false;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (done[i] || pending[i] != 0) continue;
      done[i] = true;
      progressed = true;
      order.push_back(nodes[i].id);
      for (std::size_t j = 0; j < nodes.size(); ++j)
        if (!done[j]) pending[j] -= static_cast<std::size_t>(std::count(nodes[j].parents.begin(),
                                                                         nodes[j].parents.end(), nodes[i].id));
      break;
    }
    if (!progressed) throw structural_error("diagram contains a directed cycle");
  }
  return order;
}

std::vector<std::string> decision_order(const Diagram& diagram) {
  std::vector<std::string> out;
  for (const auto& id : topological_order(diagram))
    if (diagram.node(id).kind == NodeKind::Decision) out.push_back(id);
  return out;
}

std::set<std::string> ancestors(const Diagram& diagram, std::string_view id) {
  std::set<std::string> seen;
  std::deque<std::string> queue(diagram.node(id).parents.begin(), diagram.node(id).parents.end());
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    if (!seen.insert(cur).second || !diagram.contains(cur)) continue;
    for (const auto& p : diagram.node(cur).parents) queue.push_back(p);
  }
  return seen;
}

std::set<std::string> descendants(const Diagram& diagram, std::string_view id) {
  std::set<std::string> seen;
  std::deque<std::string> queue;
  for (auto& s : diagram.successors(id)) queue.push_back(s);
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    if (!seen.insert(cur).second) continue;
    for (auto& s : diagram.successors(cur)) queue.push_back(s);
  }
  return seen;
}

bool has_indirect_path(const Diagram& diagram, std::string_view from, std::string_view to) {
  for (const auto& s : diagram.successors(from)) {
    if (s == to) continue;
    if (descendants(diagram, s).count(std::string(to))) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

std::string row_label(const Diagram& diagram, const Node& node, std::size_t row) {
  Scope scope = Scope::of(diagram, node.parents);
  if (scope.width() == 0) return "row 0";
  auto digits = scope.decode(row);
  std::string text = "row " + std::to_string(row) + " (";
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i) text += ", ";
    text += node.parents[i] + "=" + diagram.node(node.parents[i]).space.label(digits[i]);
  }
  return text + ")";
}

}  // namespace

std::vector<Violation> validate(const Diagram& diagram, const ValidationOptions& options) {
  std::vector<Violation> out;
  auto report = [&](const std::string& node, const char* rule, std::string message) {
    out.push_back({node, rule, std::move(message)});
  };

  std::size_t value_nodes = 0;
  bool parents_known = true;
  for (const auto& n : diagram.nodes()) {
    if (n.id.empty()) report(n.id, "empty-id", "node id is empty");
    if (n.kind == NodeKind::Value) ++value_nodes;

    std::set<std::string> seen_parents;
    for (const auto& p : n.parents) {
      if (!seen_parents.insert(p).second) report(n.id, "duplicate-parent", "parent '" + p + "' listed twice");
      if (p == n.id) {
        report(n.id, "cycle", "node lists itself as parent");
        parents_known = false;
      } else if (!diagram.contains(p)) {
        report(n.id, "unknown-parent", "parent '" + p + "' does not exist");
        parents_known = false;
      } else if (diagram.node(p).kind == NodeKind::Value) {
        report(p, "value-successor", "value node has successor '" + n.id + "'");
        parents_known = false;
      }
    }

    if (n.kind == NodeKind::Value) {
      if (!n.space.empty()) report(n.id, "value-outcomes", "value node must not have outcomes");
    } else {
      if (n.space.empty()) report(n.id, "outcome-space", "outcome space is empty");
      std::set<std::string> labels;
      for (const auto& l : n.space.labels())
        if (!labels.insert(l).second) report(n.id, "duplicate-label", "outcome '" + l + "' repeated");
    }
  }
  if (value_nodes != 1)
    report("", "value-count", "expected exactly one value node, found " + std::to_string(value_nodes));

  if (!parents_known) return out;

  // Payload shapes and contents.
  for (const auto& n : diagram.nodes()) {
    const std::size_t rows = row_count(diagram, n);
    switch (n.kind) {
      case NodeKind::Chance: {
        const auto* t = std::get_if<ConditionalTable>(&n.payload);
        if (!t) {
          report(n.id, "payload-kind", "chance node needs a probability table");
          break;
        }
        const std::size_t cols = n.space.size();
        if (t->entries.size() != rows * cols) {
          report(n.id, "table-shape",
                 "expected " + std::to_string(rows) + "x" + std::to_string(cols) + " entries, found " +
                     std::to_string(t->entries.size()));
          break;
        }
        for (std::size_t r = 0; r < rows; ++r) {
          double sum = 0.0;
          bool in_range = true;
          for (std::size_t c = 0; c < cols; ++c) {
            double p = t->entries[r * cols + c];
            if (!(p >= 0.0 && p <= 1.0)) in_range = false;
            sum += p;
          }
          if (!in_range)
            report(n.id, "probability-range", row_label(diagram, n, r) + " has an entry outside [0,1]");
          if (!(std::abs(sum - 1.0) <= kProbabilityTolerance))
            report(n.id, "row-sum", row_label(diagram, n, r) + " sums to " + std::to_string(sum));
        }
        break;
      }
      case NodeKind::Deterministic: {
        const auto* t = std::get_if<FunctionTable>(&n.payload);
        if (!t) {
          report(n.id, "payload-kind", "deterministic node needs a function table");
          break;
        }
        if (t->entries.size() != rows) {
          report(n.id, "table-shape",
                 "expected " + std::to_string(rows) + " entries, found " + std::to_string(t->entries.size()));
          break;
        }
        for (std::size_t r = 0; r < rows; ++r)
          if (t->entries[r] >= n.space.size())
            report(n.id, "function-index", row_label(diagram, n, r) + " maps outside the outcome space");
        break;
      }
      case NodeKind::Decision:
        if (!std::holds_alternative<std::monostate>(n.payload))
          report(n.id, "payload-kind", "decision node carries no table");
        break;
      case NodeKind::Value: {
        const auto* t = std::get_if<ValueTable>(&n.payload);
        if (!t) {
          report(n.id, "payload-kind", "value node needs a value table");
          break;
        }
        if (t->entries.size() != rows)
          report(n.id, "table-shape",
                 "expected " + std::to_string(rows) + " entries, found " + std::to_string(t->entries.size()));
        break;
      }
    }
  }

  std::vector<std::string> order;
  try {
    order = topological_order(diagram);
  } catch (const Error&) {
    report("", "cycle", "diagram contains a directed cycle");
    return out;
  }

  // Decisions must be totally ordered along directed paths.
  std::vector<std::string> decisions;
  for (const auto& id : order)
    if (diagram.node(id).kind == NodeKind::Decision) decisions.push_back(id);
  for (std::size_t i = 0; i + 1 < decisions.size(); ++i) {
    if (!descendants(diagram, decisions[i]).count(decisions[i + 1]))
      report(decisions[i + 1], "decision-order",
             "no directed path from earlier decision '" + decisions[i] + "'");
  }

  if (!options.allow_forgetting) {
    for (std::size_t i = 1; i < decisions.size(); ++i) {
      const Node& later = diagram.node(decisions[i]);
      for (std::size_t j = 0; j < i; ++j) {
        const Node& earlier = diagram.node(decisions[j]);
        if (!later.has_parent(earlier.id))
          report(later.id, "no-forgetting", "does not observe earlier decision '" + earlier.id + "'");
        for (const auto& p : earlier.parents)
          if (!later.has_parent(p))
            report(later.id, "no-forgetting", "forgets '" + p + "' observed by '" + earlier.id + "'");
      }
    }
  }
  return out;
}

void require_valid(const Diagram& diagram, const ValidationOptions& options) {
  auto violations = validate(diagram, options);
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

Diagram normalize_rows(Diagram diagram) {
  for (const auto& original : diagram.nodes()) {
    if (original.kind != NodeKind::Chance) continue;
    const auto* t = std::get_if<ConditionalTable>(&original.payload);
    const std::size_t cols = original.space.size();
    if (!t || cols == 0 || t->entries.size() % cols != 0) continue;
    Node n = original;
    auto& entries = n.probabilities().entries;
    for (std::size_t r = 0; r * cols < entries.size(); ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < cols; ++c) sum += entries[r * cols + c];
      if (sum > 0.0 && std::abs(sum - 1.0) > kCanonicalRowSlack && std::abs(sum - 1.0) <= kLoadTolerance)
        for (std::size_t c = 0; c < cols; ++c) entries[r * cols + c] /= sum;
    }
    diagram.replace_node(std::move(n));
  }
  return diagram;
}

}  // namespace infdiag
