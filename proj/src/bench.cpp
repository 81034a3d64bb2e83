#include "infdiag/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "infdiag/scope.hpp"
#include "infdiag/transforms.hpp"

namespace infdiag {

std::pair<VoeReport, SpaceLedger> voe_method1(const Diagram& diagram, std::string_view node,
                                              const ValuationMode& mode) {
  auto run = detail::voe_by_propagation(diagram, node, mode);
  return {std::move(run.report), std::move(run.ledger)};
}

std::pair<VoeReport, SpaceLedger> voe_method2(const Diagram& diagram, std::string_view node,
                                              const ValuationMode& mode) {
  auto run = detail::voe_by_lock(diagram, node, mode);
  return {std::move(run.report), std::move(run.ledger)};
}

const MethodRun& MethodComparison::run(std::string_view method) const {
  for (const auto& r : runs)
    if (r.method == method) return r;
  throw invalid_argument("no run for method '" + std::string(method) + "'");
}

MethodComparison compare_methods(const Diagram& diagram, std::string_view node, std::string_view decision,
                                 const ValuationMode& mode) {
  MethodComparison out;
  out.node = std::string(node);
  out.decision = std::string(decision);
  out.heuristic = std::string(kOrderingHeuristic);

  auto standard = detail::vopi_standard_run(diagram, node, decision, mode);
  out.runs.push_back({"standard", standard.value, standard.ledger.max_space(), standard.ledger.steps().size(), {}});
  auto [r1, l1] = voe_method1(diagram, node, mode);
  out.runs.push_back({"method1", vopi_from_voe(r1), l1.max_space(), l1.steps().size(), std::move(r1)});
  auto [r2, l2] = voe_method2(diagram, node, mode);
  out.runs.push_back({"method2", vopi_from_voe(r2), l2.max_space(), l2.steps().size(), std::move(r2)});

  // The VOE routes reveal the node before every decision; agreement with the
  // standard route presumes no earlier decision is left uninformed.
  const double tolerance = mode.is_full() ? 1e-6 : 1e-9;
  out.values_agree = std::all_of(out.runs.begin(), out.runs.end(), [&](const MethodRun& r) {
    return std::abs(r.value - out.runs.front().value) <= tolerance;
  });
  out.prop6_holds = out.runs[0].max_space == out.runs[2].max_space;
  out.prop7_holds = out.runs[0].max_space >= out.runs[1].max_space;
  return out;
}

void write_comparison_csv(std::ostream& out, std::string_view diagram_id, const MethodComparison& comparison,
                          bool header) {
  if (header) out << "diagram,method,value,max_space,steps\n";
  for (const auto& r : comparison.runs) {
    char value[32];
    std::snprintf(value, sizeof value, "%.10g", r.value);
    out << diagram_id << ',' << r.method << ',' << value << ',' << r.max_space << ',' << r.steps << '\n';
  }
}

Diagram generate_random_diagram(std::uint64_t seed, std::size_t node_count, std::size_t max_outcomes) {
  if (node_count < 2) throw invalid_argument("generate_random_diagram: node_count must be at least 2");
  if (max_outcomes < 2) throw invalid_argument("generate_random_diagram: max_outcomes must be at least 2");

  std::mt19937_64 rng(seed);
  auto uniform_int = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  auto uniform_real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto chance_of = [&](double p) { return uniform_real(0.0, 1.0) < p; };

  const std::size_t others = node_count - 1;
  const std::size_t decision_count = uniform_int(0, std::min<std::size_t>(2, others - 1));
  std::vector<NodeKind> kinds(others, NodeKind::Chance);
  {
    std::vector<std::size_t> slots(others);
    for (std::size_t i = 0; i < others; ++i) slots[i] = i;
    std::shuffle(slots.begin(), slots.end(), rng);
    for (std::size_t i = 0; i < decision_count; ++i) kinds[slots[i]] = NodeKind::Decision;
  }

  Diagram d("random-" + std::to_string(seed), Objective::Maximize);
  std::vector<std::string> decisions;
  std::size_t counter = 0;
  for (std::size_t i = 0; i < others; ++i) {
    const std::size_t size = uniform_int(2, max_outcomes);
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < size; ++k) labels.push_back("s" + std::to_string(k));

    if (kinds[i] == NodeKind::Decision) {
      std::vector<std::string> parents;
      auto add = [&](const std::string& p) {
        if (std::find(parents.begin(), parents.end(), p) == parents.end()) parents.push_back(p);
      };
      for (const auto& earlier : decisions) {
        add(earlier);
        for (const auto& p : d.node(earlier).parents) add(p);
      }
      for (const auto& n : d.nodes())
        if (n.kind != NodeKind::Decision && chance_of(0.4)) add(n.id);
      // Keep the scope of later rules in node order.
      std::vector<std::string> ordered;
      for (const auto& n : d.nodes())
        if (std::find(parents.begin(), parents.end(), n.id) != parents.end()) ordered.push_back(n.id);
      std::string id = "D" + std::to_string(counter++);
      decisions.push_back(id);
      d.add_node(Node::decision(std::move(id), std::move(labels), std::move(ordered)));
      continue;
    }

    std::vector<std::string> parents;
    for (const auto& n : d.nodes())
      if (parents.size() < 3 && chance_of(0.4)) parents.push_back(n.id);
    const std::size_t rows = Scope::of(d, parents).count();
    if (!parents.empty() && chance_of(0.15)) {
      std::vector<std::size_t> map(rows);
      for (auto& m : map) m = uniform_int(0, size - 1);
      d.add_node(Node::deterministic("T" + std::to_string(counter++), std::move(labels), std::move(parents),
                                     std::move(map)));
      continue;
    }
    std::vector<double> table(rows * size);
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      for (std::size_t k = 0; k < size; ++k) sum += table[r * size + k] = uniform_real(0.05, 1.0);
      for (std::size_t k = 0; k < size; ++k) table[r * size + k] /= sum;
    }
    d.add_node(Node::chance("C" + std::to_string(counter++), std::move(labels), std::move(parents), std::move(table)));
  }

  std::vector<std::string> value_parents;
  for (const auto& n : d.nodes())
    if (value_parents.size() < 3 && chance_of(n.kind == NodeKind::Decision ? 0.8 : 0.5)) value_parents.push_back(n.id);
  if (value_parents.empty()) value_parents.push_back(d.nodes().back().id);
  std::vector<double> values(Scope::of(d, value_parents).count());
  for (auto& v : values) v = std::round(uniform_real(-100.0, 100.0) * 100.0) / 100.0;
  d.add_node(Node::value("V", std::move(value_parents), std::move(values)));
  return d;
}

}  // namespace infdiag
