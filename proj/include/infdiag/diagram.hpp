#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "infdiag/error.hpp"

namespace infdiag {

/// Absolute tolerance on chance-table row sums for a valid diagram.
inline constexpr double kProbabilityTolerance = 1e-9;
/// Rows within this distance of 1 are renormalized on load; beyond it they are rejected.
inline constexpr double kLoadTolerance = 1e-6;
/// Rows within this distance of 1 are kept verbatim on load, so saved
/// 12-digit tables load back bit-for-bit.
inline constexpr double kCanonicalRowSlack = 1e-10;

enum class NodeKind { Chance, Deterministic, Decision, Value };
enum class Objective { Maximize, Minimize };

std::string_view to_string(NodeKind kind);
std::string_view to_string(Objective objective);

/// Ordered, named outcomes of one variable. The order is the index order
/// used by every table that mentions the variable.
class OutcomeSpace {
 public:
  OutcomeSpace() = default;
  explicit OutcomeSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {}

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  const std::string& label(std::size_t index) const { return labels_.at(index); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  std::optional<std::size_t> find(std::string_view label) const;
  /// Throws InvalidArgument when the label is not an outcome.
  std::size_t index_of(std::string_view label) const;

  bool operator==(const OutcomeSpace&) const = default;

 private:
  std::vector<std::string> labels_;
};

// Tables are indexed by parent configuration in row-major order: the first
// listed parent varies slowest. The node's parent list is the row order.

/// P{X | parents}: rows x |outcomes| entries.
struct ConditionalTable {
  std::vector<double> entries;
  bool operator==(const ConditionalTable&) const = default;
};

/// One outcome index per parent configuration.
struct FunctionTable {
  std::vector<std::size_t> entries;
  bool operator==(const FunctionTable&) const = default;
};

/// One value per parent configuration.
struct ValueTable {
  std::vector<double> entries;
  bool operator==(const ValueTable&) const = default;
};

using Payload = std::variant<std::monostate, ConditionalTable, FunctionTable, ValueTable>;

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Chance;
  OutcomeSpace space;  // alternatives for a decision; empty for the value node
  std::vector<std::string> parents;
  Payload payload;

  bool operator==(const Node&) const = default;

  bool has_parent(std::string_view parent) const;

  // Payload accessors; throw Structural when the payload is of another kind.
  const ConditionalTable& probabilities() const;
  const FunctionTable& function() const;
  const ValueTable& values() const;
  ConditionalTable& probabilities();
  FunctionTable& function();
  ValueTable& values();

  static Node chance(std::string id, std::vector<std::string> outcomes,
                     std::vector<std::string> parents, std::vector<double> table);
  static Node deterministic(std::string id, std::vector<std::string> outcomes,
                            std::vector<std::string> parents, std::vector<std::size_t> map);
  static Node decision(std::string id, std::vector<std::string> alternatives,
                       std::vector<std::string> parents = {});
  static Node value(std::string id, std::vector<std::string> parents, std::vector<double> values);
};

/// An influence diagram. Nodes keep insertion order, which is also the
/// order used for serialization and for deterministic iteration.
class Diagram {
 public:
  Diagram() = default;
  explicit Diagram(std::string name, Objective objective = Objective::Maximize)
      : name_(std::move(name)), objective_(objective) {}

  const std::string& name() const noexcept { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }
  Objective objective() const noexcept { return objective_; }
  void set_objective(Objective objective) { objective_ = objective; }

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool contains(std::string_view id) const;
  std::optional<std::size_t> position(std::string_view id) const;

  /// Throws UnknownNode.
  const Node& node(std::string_view id) const;

  /// The first value node; throws Structural when there is none.
  const Node& value_node() const;

  /// Throws InvalidArgument on duplicate ids.
  void add_node(Node node);
  /// Inserts before the node `before`; throws on duplicates or unknown `before`.
  void insert_node_before(std::string_view before, Node node);
  /// Replaces the node with the same id; throws UnknownNode.
  void replace_node(Node node);
  void erase_node(std::string_view id);

  /// Direct successors in node order.
  std::vector<std::string> successors(std::string_view id) const;

  bool operator==(const Diagram& other) const {
    return name_ == other.name_ && objective_ == other.objective_ && nodes_ == other.nodes_;
  }

 private:
  void reindex();

  std::string name_;
  Objective objective_ = Objective::Maximize;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct ValidationOptions {
  /// Skip the no-forgetting rule (each decision observes every earlier
  /// decision and everything those decisions observed).
  bool allow_forgetting = false;
};

/// Every invariant violation, empty when the diagram is valid.
std::vector<Violation> validate(const Diagram& diagram, const ValidationOptions& options = {});

/// Throws ValidationError when validate() reports anything.
void require_valid(const Diagram& diagram, const ValidationOptions& options = {});

/// Renormalizes chance rows whose sum is off by more than kCanonicalRowSlack
/// and at most kLoadTolerance.
/// Rows further off are left untouched so validate() reports them.
Diagram normalize_rows(Diagram diagram);

std::vector<std::string> direct_predecessors(const Diagram& diagram, std::string_view id);
std::set<std::string> direct_successors(const Diagram& diagram, std::string_view id);

/// Product of outcome-space sizes; 1 for the empty set. Throws Structural
/// for the value node.
std::size_t configuration_count(const Diagram& diagram, const std::set<std::string>& ids);

/// Product of the parent space sizes of `node`.
std::size_t row_count(const Diagram& diagram, const Node& node);

/// Topological order of all nodes; ties broken by node order. Throws
/// Structural on a cycle.
std::vector<std::string> topological_order(const Diagram& diagram);

/// Decisions in temporal order (their order along directed paths).
std::vector<std::string> decision_order(const Diagram& diagram);

std::set<std::string> ancestors(const Diagram& diagram, std::string_view id);
std::set<std::string> descendants(const Diagram& diagram, std::string_view id);

/// True when a directed path from -> to exists that does not use the direct arc.
bool has_indirect_path(const Diagram& diagram, std::string_view from, std::string_view to);

}  // namespace infdiag
