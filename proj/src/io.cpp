#include "infdiag/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "infdiag/scope.hpp"

namespace infdiag {

using nlohmann::json;

namespace {

[[noreturn]] void parse_failure(const std::string& where, const std::string& message) {
  throw ValidationError("document could not be parsed", {{"", "parse", where + ": " + message}});
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

json parse_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::string what = e.what();
    const auto pos = what.find("]: ");
    parse_failure(line_column(text, e.byte == 0 ? 0 : e.byte - 1),
                  pos == std::string::npos ? what : what.substr(pos + 3));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw invalid_argument("cannot read '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

const json& field(const json& object, const std::string& key, const std::string& where) {
  if (!object.is_object()) parse_failure(where, "expected an object");
  auto it = object.find(key);
  if (it == object.end()) parse_failure(where + "." + key, "missing field");
  return *it;
}

std::string string_at(const json& value, const std::string& where) {
  if (!value.is_string()) parse_failure(where, "expected a string");
  return value.get<std::string>();
}

std::vector<std::string> strings_at(const json& value, const std::string& where) {
  if (!value.is_array()) parse_failure(where, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < value.size(); ++i) out.push_back(string_at(value[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

double number_at(const json& value, const std::string& where) {
  if (!value.is_number()) parse_failure(where, "expected a number");
  return value.get<double>();
}

std::vector<double> numbers_at(const json& value, const std::string& where) {
  if (!value.is_array()) parse_failure(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < value.size(); ++i) out.push_back(number_at(value[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

NodeKind kind_from(const std::string& text, const std::string& where) {
  if (text == "chance") return NodeKind::Chance;
  if (text == "deterministic") return NodeKind::Deterministic;
  if (text == "decision") return NodeKind::Decision;
  if (text == "value") return NodeKind::Value;
  parse_failure(where, "unknown kind '" + text + "'");
}

Node node_from(const json& object, const std::string& where) {
  Node n;
  n.id = string_at(field(object, "id", where), where + ".id");
  n.kind = kind_from(string_at(field(object, "kind", where), where + ".kind"), where + ".kind");
  if (object.contains("parents")) n.parents = strings_at(object["parents"], where + ".parents");
  if (n.kind != NodeKind::Value) n.space = OutcomeSpace(strings_at(field(object, "outcomes", where), where + ".outcomes"));

  switch (n.kind) {
    case NodeKind::Chance: {
      const json& rows = field(object, "table", where);
      if (!rows.is_array()) parse_failure(where + ".table", "expected an array of rows");
      ConditionalTable table;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::string at = where + ".table[" + std::to_string(r) + "]";
        auto row = numbers_at(rows[r], at);
        if (row.size() != n.space.size())
          throw ValidationError("document could not be parsed",
                                {{n.id, "table-shape",
                                  at + " has " + std::to_string(row.size()) + " entries, expected " +
                                      std::to_string(n.space.size())}});
        table.entries.insert(table.entries.end(), row.begin(), row.end());
      }
      n.payload = std::move(table);
      break;
    }
    case NodeKind::Deterministic: {
      const json& map = field(object, "map", where);
      if (!map.is_array()) parse_failure(where + ".map", "expected an array of outcome indices");
      FunctionTable table;
      for (std::size_t i = 0; i < map.size(); ++i) {
        if (!map[i].is_number_unsigned())
          parse_failure(where + ".map[" + std::to_string(i) + "]", "expected a non-negative integer");
        table.entries.push_back(map[i].get<std::size_t>());
      }
      n.payload = std::move(table);
      break;
    }
    case NodeKind::Value:
      n.payload = ValueTable{numbers_at(field(object, "values", where), where + ".values")};
      break;
    case NodeKind::Decision:
      break;
  }
  return n;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

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

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t");
  return std::string(text.substr(first, last - first + 1));
}

}  // namespace

double canonical_number(double value) {
  if (!std::isfinite(value)) return value;
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  const double rounded = std::strtod(buffer, nullptr);
  return rounded == 0.0 ? 0.0 : rounded;
}

std::string format_number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.10g", canonical_number(value));
  return buffer;
}

// ---------------------------------------------------------------------------
// Diagrams

Diagram diagram_from_json(const json& document, const LoadOptions& options) {
  if (!document.is_object()) parse_failure("document", "expected an object");
  Diagram d;
  if (document.contains("name")) d.set_name(string_at(document["name"], "name"));
  if (document.contains("objective")) {
    const auto objective = string_at(document["objective"], "objective");
    if (objective == "maximize")
      d.set_objective(Objective::Maximize);
    else if (objective == "minimize")
      d.set_objective(Objective::Minimize);
    else
      parse_failure("objective", "expected \"maximize\" or \"minimize\"");
  }
  const json& nodes = field(document, "nodes", "document");
  if (!nodes.is_array()) parse_failure("nodes", "expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    Node n = node_from(nodes[i], "nodes[" + std::to_string(i) + "]");
    if (d.contains(n.id))
      throw ValidationError("document could not be parsed", {{n.id, "duplicate-id", "node id appears twice"}});
    d.add_node(std::move(n));
  }
  d = normalize_rows(std::move(d));
  require_valid(d, ValidationOptions{options.allow_forgetting});
  return d;
}

Diagram load_diagram(std::string_view text, const LoadOptions& options) {
  return diagram_from_json(parse_text(text), options);
}

Diagram load_diagram_file(const std::filesystem::path& path, const LoadOptions& options) {
  return load_diagram(read_file(path), options);
}

json diagram_to_json(const Diagram& diagram) {
  json nodes = json::array();
  for (const auto& n : diagram.nodes()) {
    json node = {{"id", n.id}, {"kind", std::string(to_string(n.kind))}, {"parents", n.parents}};
    if (n.kind != NodeKind::Value) node["outcomes"] = n.space.labels();
    switch (n.kind) {
      case NodeKind::Chance: {
        json rows = json::array();
        const auto& entries = n.probabilities().entries;
        const std::size_t cols = n.space.size();
        for (std::size_t r = 0; cols && r * cols < entries.size(); ++r) {
          json row = json::array();
          for (std::size_t c = 0; c < cols; ++c) row.push_back(canonical_number(entries[r * cols + c]));
          rows.push_back(std::move(row));
        }
        node["table"] = std::move(rows);
        break;
      }
      case NodeKind::Deterministic:
        node["map"] = n.function().entries;
        break;
      case NodeKind::Value: {
        json values = json::array();
        for (double v : n.values().entries) values.push_back(canonical_number(v));
        node["values"] = std::move(values);
        break;
      }
      case NodeKind::Decision:
        break;
    }
    nodes.push_back(std::move(node));
  }
  return {{"name", diagram.name()}, {"objective", std::string(to_string(diagram.objective()))}, {"nodes", nodes}};
}

std::string save_diagram(const Diagram& diagram) { return diagram_to_json(diagram).dump(2) + "\n"; }

bool structural_equal(const Diagram& a, const Diagram& b, double tolerance) {
  if (a.name() != b.name() || a.objective() != b.objective() || a.size() != b.size()) return false;
  auto close = [&](const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (std::abs(x[i] - y[i]) > tolerance) return false;
    return true;
  };
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Node& x = a.nodes()[i];
    const Node& y = b.nodes()[i];
    if (x.id != y.id || x.kind != y.kind || x.space != y.space || x.parents != y.parents) return false;
    if (x.payload.index() != y.payload.index()) return false;
    switch (x.kind) {
      case NodeKind::Chance:
        if (!close(x.probabilities().entries, y.probabilities().entries)) return false;
        break;
      case NodeKind::Value:
        if (!close(x.values().entries, y.values().entries)) return false;
        break;
      case NodeKind::Deterministic:
        if (x.function() != y.function()) return false;
        break;
      case NodeKind::Decision:
        break;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Joints

JointConditionalTable joint_from_json(const json& document, const Diagram& diagram) {
  const std::string node = string_at(field(document, "node", "document"), "node");
  auto decisions = strings_at(field(document, "decisionParents", "document"), "decisionParents");
  const json& entries = field(document, "joint", "document");
  if (!entries.is_object()) parse_failure("joint", "expected an object of vector-label: probability");
  std::map<std::string, double> probabilities;
  for (const auto& [label, p] : entries.items()) probabilities[label] = number_at(p, "joint." + label);
  auto joint = make_joint(diagram, node, std::move(decisions), probabilities);
  check_joint(diagram, joint);
  return joint;
}

JointConditionalTable load_joint(std::string_view text, const Diagram& diagram) {
  return joint_from_json(parse_text(text), diagram);
}

JointConditionalTable load_joint_file(const std::filesystem::path& path, const Diagram& diagram) {
  return load_joint(read_file(path), diagram);
}

json joint_to_json(const JointConditionalTable& joint) {
  json entries = json::object();
  for (const auto& [components, p] : joint.joint) entries[joint.vector_label(components)] = canonical_number(p);
  return {{"node", joint.node}, {"decisionParents", joint.decision_parents}, {"joint", entries}};
}

// ---------------------------------------------------------------------------
// Evidence

Evidence parse_evidence(std::string_view expression, const Diagram& diagram) {
  const auto eq = expression.find('=');
  if (eq == std::string_view::npos)
    throw invalid_argument("evidence '" + std::string(expression) + "' is not of the form NODE=OUTCOME");
  const std::string left = trim(expression.substr(0, eq));
  const std::string right = trim(expression.substr(eq + 1));

  const auto bar = left.find('|');
  if (diagram.contains(left) || bar == std::string::npos) {
    const Node& n = diagram.node(left);
    if (!n.space.find(right)) throw invalid_argument("'" + right + "' is not an outcome of '" + n.id + "'");
    return Evidence::simple(n.id, right);
  }

  const std::string node = trim(left.substr(0, bar));
  diagram.node(node);
  std::vector<std::string> decisions;
  for (const auto& d : split(std::string_view(left).substr(bar + 1), ',')) decisions.push_back(trim(d));
  std::map<std::vector<std::string>, std::string> outcomes;
  for (const auto& clause : split(right, ',')) {
    const auto colon = clause.rfind(':');
    if (colon == std::string::npos)
      throw invalid_argument("conditional clause '" + clause + "' is not of the form alternative:outcome");
    std::vector<std::string> alternatives;
    for (const auto& a : split(std::string_view(clause).substr(0, colon), '&')) alternatives.push_back(trim(a));
    if (alternatives.size() != decisions.size())
      throw invalid_argument("clause '" + clause + "' names " + std::to_string(alternatives.size()) +
                             " alternatives for " + std::to_string(decisions.size()) + " decisions");
    if (!outcomes.emplace(std::move(alternatives), trim(clause.substr(colon + 1))).second)
      throw invalid_argument("clause '" + clause + "' repeats a configuration");
  }
  return Evidence::conditional(node, std::move(decisions), std::move(outcomes));
}

std::string format_evidence(const Evidence& evidence) {
  if (const auto* s = std::get_if<Evidence::Simple>(&evidence.form)) return evidence.node + "=" + s->outcome;
  const auto& c = std::get<Evidence::Conditional>(evidence.form);
  std::vector<std::string> clauses;
  for (const auto& [alternatives, outcome] : c.outcomes) clauses.push_back(join(alternatives, "&") + ":" + outcome);
  return evidence.node + "|" + join(c.decisions, ",") + "=" + join(clauses, ",");
}

json evidence_to_json(const Evidence& evidence) {
  json out = {{"node", evidence.node}, {"expr", format_evidence(evidence)}};
  if (const auto* s = std::get_if<Evidence::Simple>(&evidence.form)) {
    out["outcome"] = s->outcome;
  } else {
    const auto& c = std::get<Evidence::Conditional>(evidence.form);
    out["decisions"] = c.decisions;
    json outcomes = json::array();
    for (const auto& [alternatives, outcome] : c.outcomes)
      outcomes.push_back({{"alternatives", alternatives}, {"outcome", outcome}});
    out["outcomes"] = std::move(outcomes);
  }
  return out;
}

Evidence evidence_from_json(const json& document, const Diagram& diagram) {
  if (!document.is_object()) parse_failure("evidence", "expected an object");
  if (document.contains("expr")) return parse_evidence(string_at(document["expr"], "expr"), diagram);
  const std::string node = string_at(field(document, "node", "evidence"), "node");
  diagram.node(node);
  if (document.contains("outcome")) {
    const std::string outcome = string_at(document["outcome"], "outcome");
    if (!diagram.node(node).space.find(outcome))
      throw invalid_argument("'" + outcome + "' is not an outcome of '" + node + "'");
    return Evidence::simple(node, outcome);
  }
  auto decisions = strings_at(field(document, "decisions", "evidence"), "decisions");
  const json& clauses = field(document, "outcomes", "evidence");
  if (!clauses.is_array()) parse_failure("outcomes", "expected an array");
  std::map<std::vector<std::string>, std::string> outcomes;
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    const std::string at = "outcomes[" + std::to_string(i) + "]";
    outcomes.emplace(strings_at(field(clauses[i], "alternatives", at), at + ".alternatives"),
                     string_at(field(clauses[i], "outcome", at), at + ".outcome"));
  }
  return Evidence::conditional(node, std::move(decisions), std::move(outcomes));
}

// ---------------------------------------------------------------------------
// Reports

json policy_to_json(const Diagram& diagram, const Policy& policy) {
  json out = json::object();
  for (const auto& [id, rule] : policy) {
    const Node& decision = diagram.node(id);
    const Scope scope = Scope::of(diagram, rule.parents);
    json rules = json::array();
    std::size_t row = 0;
    scope.for_each([&](std::span<const std::size_t> digits) {
      json observed = json::object();
      for (std::size_t i = 0; i < digits.size(); ++i)
        observed[rule.parents[i]] = diagram.node(rule.parents[i]).space.label(digits[i]);
      rules.push_back({{"observed", observed}, {"choice", decision.space.label(rule.choices.at(row++))}});
    });
    out[id] = {{"parents", rule.parents}, {"rules", rules}};
  }
  return out;
}

json ledger_to_json(const SpaceLedger& ledger) {
  json steps = json::array();
  for (const auto& s : ledger.steps())
    steps.push_back({{"operation", s.operation}, {"node", s.node}, {"space", s.space}, {"uniformRows", s.uniform_rows}});
  return {{"maxSpace", ledger.max_space()}, {"steps", steps}};
}

json report_to_json(const Diagram& diagram, const VoeReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries)
    entries.push_back({{"label", e.label},
                       {"evidence", evidence_to_json(e.evidence)},
                       {"voe", canonical_number(e.voe)},
                       {"evAfter", canonical_number(e.ev_after)},
                       {"probability", canonical_number(e.probability)},
                       {"policy", policy_to_json(diagram, e.policy)}});
  return {{"node", report.node},
          {"objective", std::string(to_string(report.objective))},
          {"baselineEv", canonical_number(report.baseline_ev)},
          {"entries", entries}};
}

json comparison_to_json(const MethodComparison& comparison) {
  json runs = json::array();
  for (const auto& r : comparison.runs)
    runs.push_back({{"method", r.method},
                    {"value", canonical_number(r.value)},
                    {"maxSpace", r.max_space},
                    {"steps", r.steps}});
  return {{"node", comparison.node},
          {"decision", comparison.decision},
          {"heuristic", comparison.heuristic},
          {"runs", runs},
          {"valuesAgree", comparison.values_agree},
          {"prop6Holds", comparison.prop6_holds},
          {"prop7Holds", comparison.prop7_holds}};
}

json violations_to_json(const std::vector<Violation>& violations) {
  json out = json::array();
  for (const auto& v : violations) out.push_back({{"node", v.node}, {"rule", v.rule}, {"message", v.message}});
  return out;
}

std::string format_policy(const Diagram& diagram, const Policy& policy) {
  std::string out;
  for (const auto& [id, rule] : policy) {
    const Node& decision = diagram.node(id);
    const Scope scope = Scope::of(diagram, rule.parents);
    std::size_t row = 0;
    scope.for_each([&](std::span<const std::size_t> digits) {
      std::vector<std::string> observed;
      for (std::size_t i = 0; i < digits.size(); ++i)
        observed.push_back(rule.parents[i] + "=" + diagram.node(rule.parents[i]).space.label(digits[i]));
      out += id;
      if (!observed.empty()) out += " | " + join(observed, ", ");
      out += " -> " + decision.space.label(rule.choices.at(row++)) + "\n";
    });
  }
  return out;
}

std::string format_report(const VoeReport& report) {
  std::size_t width = 7;
  for (const auto& e : report.entries) width = std::max(width, e.label.size());
  std::string out = "node " + report.node + "  baseline EV " + format_number(report.baseline_ev) + "\n";
  char line[512];
  std::snprintf(line, sizeof line, "%-*s  %12s  %12s  %12s\n", static_cast<int>(width), "outcome", "probability",
                "EV after", "VOE");
  out += line;
  for (const auto& e : report.entries) {
    std::snprintf(line, sizeof line, "%-*s  %12s  %12s  %12s\n", static_cast<int>(width), e.label.c_str(),
                  format_number(e.probability).c_str(), format_number(e.ev_after).c_str(),
                  format_number(e.voe).c_str());
    out += line;
  }
  return out;
}

}  // namespace infdiag
