#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "infdiag/diagram.hpp"
#include "infdiag/ledger.hpp"
#include "infdiag/valuation.hpp"

namespace infdiag {

/// One evidence propagation and one full reduction per outcome.
std::pair<VoeReport, SpaceLedger> voe_method1(const Diagram& diagram, std::string_view node,
                                              const ValuationMode& mode = {});

/// One reduction with the evidence node locked.
std::pair<VoeReport, SpaceLedger> voe_method2(const Diagram& diagram, std::string_view node,
                                              const ValuationMode& mode = {});

struct MethodRun {
  std::string method;  // "standard", "method1", "method2"
  double value = 0.0;  // VOPI
  std::size_t max_space = 0;
  std::size_t steps = 0;
  std::optional<VoeReport> report;  // absent for the standard pipeline
};

struct MethodComparison {
  std::string node;
  std::string decision;
  std::string heuristic;
  std::vector<MethodRun> runs;  // standard, method1, method2
  bool values_agree = false;
  /// maxSpace(standard) == maxSpace(method2)
  bool prop6_holds = false;
  /// maxSpace(standard) >= maxSpace(method1)
  bool prop7_holds = false;

  const MethodRun& run(std::string_view method) const;
};

/// Runs the three VOPI pipelines under the shared ordering heuristic.
MethodComparison compare_methods(const Diagram& diagram, std::string_view node, std::string_view decision,
                                 const ValuationMode& mode = {});

/// Columns: diagram,method,value,max_space,steps.
void write_comparison_csv(std::ostream& out, std::string_view diagram_id, const MethodComparison& comparison,
                          bool header = true);

/// Valid random diagram with `node_count` nodes including the value node.
/// Decisions are totally ordered with no-forgetting arcs. Deterministic in seed.
Diagram generate_random_diagram(std::uint64_t seed, std::size_t node_count, std::size_t max_outcomes);

}  // namespace infdiag
