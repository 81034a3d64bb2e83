#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "infdiag/bench.hpp"
#include "infdiag/evidence.hpp"
#include "infdiag/transforms.hpp"
#include "oracle.hpp"

namespace infdiag::properties {
namespace {

constexpr double kExact = 1e-9;
constexpr double kJointTolerance = 1e-6;
constexpr double kNegligible = 1e-12;
constexpr std::size_t kMaxFailures = 20;

std::string where(std::uint64_t seed, const std::string& node = {}) {
  std::ostringstream out;
  out << "seed " << seed;
  if (!node.empty()) out << " node " << node;
  return out.str();
}

std::string gap(double a, double b) {
  std::ostringstream out;
  out.precision(17);
  out << a << " vs " << b;
  return out.str();
}

bool close(double a, double b, double tolerance) { return std::abs(a - b) <= tolerance; }

bool decisions_only_parents(const Diagram& d, const Node& n) {
  if (n.kind != NodeKind::Chance || n.parents.empty()) return false;
  return std::all_of(n.parents.begin(), n.parents.end(),
                     [&](const std::string& p) { return d.node(p).kind == NodeKind::Decision; });
}

bool reaches_value(const Diagram& d, const std::string& id) { return descendants(d, id).count(d.value_node().id) > 0; }

// Policies may differ only at information states of zero posterior mass, so
// unequal policies must both attain the entry's conditional EV.
bool equivalent_policies(const Diagram& d, const VoeEntry& a, const VoeEntry& b, double tolerance) {
  if (a.policy == b.policy) return true;
  try {
    const Diagram post = propagate_evidence(d, a.evidence).diagram;
    return close(oracle::policy_value(post, a.policy), a.ev_after, tolerance) &&
           close(oracle::policy_value(post, b.policy), b.ev_after, tolerance);
  } catch (const std::exception&) {
    return false;
  }
}

bool same_reports(const Diagram& d, const VoeReport& a, const VoeReport& b, double tolerance) {
  if (a.entries.size() != b.entries.size() || !close(a.baseline_ev, b.baseline_ev, tolerance)) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const auto& x = a.entries[i];
    const auto& y = b.entries[i];
    if (x.label != y.label || !close(x.voe, y.voe, tolerance) || !close(x.probability, y.probability, tolerance) ||
        !equivalent_policies(d, x, y, tolerance))
      return false;
  }
  return true;
}

}  // namespace

void Tally::check(bool condition, const std::string& what) {
  ++checks;
  if (!condition && failures.size() < kMaxFailures) failures.push_back(what);
  if (!condition && failures.size() == kMaxFailures) failures.back() = "... further failures omitted";
}

Diagram oracle_sample(std::uint64_t seed) { return generate_random_diagram(seed, 2 + seed % 5, 2 + seed % 3); }

Diagram method_sample(std::uint64_t seed) { return generate_random_diagram(seed, 2 + seed % 6, 2 + seed % 3); }

std::vector<std::string> unconditioned_nodes(const Diagram& diagram) {
  std::vector<std::string> out;
  for (const Node& n : diagram.nodes()) {
    if (n.kind != NodeKind::Chance && n.kind != NodeKind::Deterministic) continue;
    const auto up = ancestors(diagram, n.id);
    if (std::none_of(up.begin(), up.end(),
                     [&](const std::string& a) { return diagram.node(a).kind == NodeKind::Decision; }))
      out.push_back(n.id);
  }
  return out;
}

std::optional<JointConditionalTable> product_joint(const Diagram& diagram, const std::string& node,
                                                   std::size_t max_vectors) {
  const Node& n = diagram.node(node);
  JointConditionalTable joint = make_joint(diagram, node, n.parents, {});
  const std::size_t configs = joint.configurations.size();
  const std::size_t outcomes = n.space.size();
  double vectors = std::pow(static_cast<double>(outcomes), static_cast<double>(configs));
  if (vectors > static_cast<double>(max_vectors)) return std::nullopt;
  // Configurations follow the parent order, which is also the table's row order.
  const auto& rows = n.probabilities().entries;
  std::vector<std::size_t> components(configs, 0);
  for (std::size_t k = 0; k < static_cast<std::size_t>(vectors); ++k) {
    double p = 1.0;
    for (std::size_t c = 0; c < configs; ++c) p *= rows[c * outcomes + components[c]];
    joint.joint[components] = p;
    for (std::size_t c = configs; c-- > 0;) {
      if (++components[c] < outcomes) break;
      components[c] = 0;
    }
  }
  return joint;
}

Tally oracle_equivalence(std::size_t count) {
  Tally t;
  for (std::uint64_t seed = 1; seed <= count; ++seed) {
    const Diagram d = oracle_sample(seed);
    ++t.diagrams;
    try {
      const Evaluation e = evaluate(d);
      const oracle::Solution s = oracle::solve(d);
      t.check(close(e.ev, s.ev, kExact), where(seed) + " EV " + gap(e.ev, s.ev));
      for (const Node& n : d.nodes())
        if (n.kind == NodeKind::Decision) t.check(e.policy.count(n.id) == 1, where(seed, n.id) + " has no rule");
      const auto faults = oracle::policy_faults(d, e.policy, s, kExact);
      t.check(faults.empty(), where(seed) + " policy: " + (faults.empty() ? "" : faults.front()));
      const double pv = oracle::policy_value(d, e.policy);
      t.check(close(pv, s.ev, kExact), where(seed) + " policy value " + gap(pv, s.ev));

      for (const auto& id : unconditioned_nodes(d)) {
        const Node& n = d.node(id);
        for (std::size_t k = 0; k < n.space.size(); ++k) {
          const Evidence ev = Evidence::simple(id, n.space.label(k));
          const std::string at = where(seed, id) + "=" + n.space.label(k);
          if (oracle::probability(d, {{id, k}}) <= kNegligible) {
            bool impossible = false;
            try {
              propagate_evidence(d, ev);
            } catch (const Error& err) {
              impossible = err.kind() == ErrorKind::ImpossibleEvidence;
            }
            t.check(impossible, at + " should be impossible");
            continue;
          }
          const auto p = propagate_evidence(d, ev);
          const Evaluation after = evaluate(p.diagram);
          const oracle::Solution conditioned = oracle::solve(d, {{id, k}});
          ++t.special;
          t.check(close(after.ev, conditioned.ev, kExact), at + " EV " + gap(after.ev, conditioned.ev));
          const auto post_faults = oracle::policy_faults(p.diagram, after.policy, conditioned, kExact);
          t.check(post_faults.empty(), at + " policy: " + (post_faults.empty() ? "" : post_faults.front()));
        }
      }
    } catch (const std::exception& ex) {
      t.check(false, where(seed) + " threw: " + ex.what());
    }
  }
  return t;
}

Tally metric_identities(std::size_t count) {
  Tally t;
  for (std::uint64_t seed = 1; seed <= count; ++seed) {
    const Diagram d = oracle_sample(seed);
    ++t.diagrams;
    try {
      const double baseline = evaluate(d).ev;
      for (const auto& id : unconditioned_nodes(d)) {
        const std::string at = where(seed, id);
        const VoeReport r = voe_report(d, id);
        t.check(r.baseline_ev == baseline, at + " baseline " + gap(r.baseline_ev, baseline));
        double lo = r.entries.front().ev_after, hi = lo;
        for (const auto& e : r.entries) {
          t.check(e.voe == e.ev_after - baseline, at + " entry " + e.label + " voe is not evAfter - baseline");
          lo = std::min(lo, e.ev_after);
          hi = std::max(hi, e.ev_after);
        }
        const double os = outcome_sensitivity(r);
        t.check(close(os, hi - lo, kExact), at + " outcome sensitivity " + gap(os, hi - lo));

        const double weighted = vopi_from_voe(r);
        t.check(weighted >= -kExact, at + " negative VOPI " + gap(weighted, 0.0));
        const auto decision = default_vopi_decision(d, id);
        const double standard = decision ? vopi_standard(d, id, *decision) : 0.0;
        t.check(close(weighted, standard, kExact), at + " VOPI " + gap(weighted, standard));

        const Node& n = d.node(id);
        if (n.kind == NodeKind::Chance && n.parents.empty()) {
          const double control = value_of_control(r);
          const double converted = voc_standard(d, id);
          t.check(close(control, converted, kExact), at + " VOC " + gap(control, converted));
        } else {
          ++t.skipped;
        }
      }

      for (const Node& n : d.nodes()) {
        if (!decisions_only_parents(d, n)) continue;
        const auto joint = product_joint(d, n.id);
        if (!joint) {
          ++t.skipped;
          continue;
        }
        const std::string at = where(seed, n.id) + " full";
        const auto mode = ValuationMode::full(*joint);
        const VoeReport r = voe_report(d, n.id, mode);
        const double weighted = vopi_from_voe(r);
        t.check(weighted >= -kExact, at + " negative VOPI " + gap(weighted, 0.0));
        const auto decision = decision_order(d).front();
        const double standard = vopi_standard(d, n.id, decision, mode);
        t.check(close(weighted, standard, kJointTolerance), at + " VOPI " + gap(weighted, standard));
        ++t.special;
      }
    } catch (const std::exception& ex) {
      t.check(false, where(seed) + " threw: " + ex.what());
    }
  }
  return t;
}

Tally method_equivalence(std::size_t count) {
  Tally t;
  for (std::uint64_t seed = 1; seed <= count; ++seed) {
    const Diagram d = method_sample(seed);
    ++t.diagrams;
    try {
      auto compare = [&](const std::string& id, const ValuationMode& mode, const std::string& at) {
        const auto [r1, l1] = voe_method1(d, id, mode);
        const auto [r2, l2] = voe_method2(d, id, mode);
        t.check(same_reports(d, r1, r2, kExact), at + " Method 1 and Method 2 reports differ");
        const auto decision = mode.is_full() ? std::optional(decision_order(d).front()) : default_vopi_decision(d, id);
        if (!decision) return;
        const MethodComparison c = compare_methods(d, id, *decision, mode);
        t.check(c.values_agree, at + " VOPI values differ");
        t.check(c.prop7_holds, at + " standard space " + std::to_string(c.run("standard").max_space) +
                                   " below Method 1 space " + std::to_string(c.run("method1").max_space));
        if (reaches_value(d, id))
          t.check(c.prop6_holds, at + " standard space " + std::to_string(c.run("standard").max_space) +
                                     " differs from Method 2 space " + std::to_string(c.run("method2").max_space));
        else
          ++t.skipped;
        if (c.run("standard").max_space > c.run("method1").max_space) ++t.special;
      };
      for (const auto& id : unconditioned_nodes(d)) compare(id, {}, where(seed, id));
      for (const Node& n : d.nodes()) {
        if (!decisions_only_parents(d, n)) continue;
        if (const auto joint = product_joint(d, n.id)) compare(n.id, ValuationMode::full(*joint), where(seed, n.id) + " full");
      }
    } catch (const std::exception& ex) {
      t.check(false, where(seed) + " threw: " + ex.what());
    }
  }
  return t;
}

}  // namespace infdiag::properties
