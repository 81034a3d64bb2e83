#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "infdiag/bench.hpp"
#include "infdiag/diagram.hpp"
#include "infdiag/evidence.hpp"
#include "infdiag/ledger.hpp"
#include "infdiag/transforms.hpp"
#include "infdiag/valuation.hpp"

namespace infdiag {

struct LoadOptions {
  bool allow_forgetting = false;
};

/// Parses, renormalizes rows within the load tolerance and validates.
/// Parse failures are ValidationErrors with rule "parse" and a line/field location.
Diagram load_diagram(std::string_view text, const LoadOptions& options = {});
Diagram load_diagram_file(const std::filesystem::path& path, const LoadOptions& options = {});

Diagram diagram_from_json(const nlohmann::json& document, const LoadOptions& options = {});
nlohmann::json diagram_to_json(const Diagram& diagram);

/// Canonical document: sorted keys, numbers rounded to 12 significant digits.
std::string save_diagram(const Diagram& diagram);

/// Shape and tolerance equality; table entries within `tolerance`.
bool structural_equal(const Diagram& a, const Diagram& b, double tolerance = 1e-9);

/// {node, decisionParents, joint: {vector-label: probability}}, checked against the diagram.
JointConditionalTable load_joint(std::string_view text, const Diagram& diagram);
JointConditionalTable load_joint_file(const std::filesystem::path& path, const Diagram& diagram);
JointConditionalTable joint_from_json(const nlohmann::json& document, const Diagram& diagram);
nlohmann::json joint_to_json(const JointConditionalTable& joint);

/// `NODE=OUTCOME` or `NODE|D1,D2=a1&b1:out,...`.
Evidence parse_evidence(std::string_view expression, const Diagram& diagram);
std::string format_evidence(const Evidence& evidence);
nlohmann::json evidence_to_json(const Evidence& evidence);
/// Accepts {"expr": "..."}, {"node", "outcome"} or {"node", "decisions", "outcomes": [{alternatives, outcome}]}.
Evidence evidence_from_json(const nlohmann::json& document, const Diagram& diagram);

/// 12 significant digits, with negative zero folded to zero.
double canonical_number(double value);
/// Fixed display form used by the CLI (%.10g).
std::string format_number(double value);

nlohmann::json policy_to_json(const Diagram& diagram, const Policy& policy);
nlohmann::json ledger_to_json(const SpaceLedger& ledger);
nlohmann::json report_to_json(const Diagram& diagram, const VoeReport& report);
nlohmann::json comparison_to_json(const MethodComparison& comparison);
nlohmann::json violations_to_json(const std::vector<Violation>& violations);

/// One line per decision and observed configuration.
std::string format_policy(const Diagram& diagram, const Policy& policy);
std::string format_report(const VoeReport& report);

}  // namespace infdiag
