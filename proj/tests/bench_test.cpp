#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "infdiag/bench.hpp"
#include "infdiag/io.hpp"

namespace infdiag {
namespace {

void expect_same_reports(const VoeReport& a, const VoeReport& b, double tolerance) {
  ASSERT_EQ(a.entries.size(), b.entries.size());
  EXPECT_NEAR(a.baseline_ev, b.baseline_ev, tolerance);
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(a.entries[i].label, b.entries[i].label);
    EXPECT_NEAR(a.entries[i].voe, b.entries[i].voe, tolerance) << a.entries[i].label;
    EXPECT_NEAR(a.entries[i].probability, b.entries[i].probability, tolerance) << a.entries[i].label;
    EXPECT_EQ(a.entries[i].policy, b.entries[i].policy) << a.entries[i].label;
  }
}

TEST(Method1, MarsVenusNaive) {
  const auto [report, ledger] = voe_method1(fixtures::mars_venus(), "Mission");
  ASSERT_EQ(report.entries.size(), 2u);
  EXPECT_NEAR(report.entries[0].voe, 44.0, 1e-9);
  EXPECT_NEAR(report.entries[1].voe, -46.0, 1e-9);
  // The observed variable counts as a single outcome in every step after instantiation.
  EXPECT_EQ(ledger.max_space(), 2u);
  EXPECT_EQ(ledger.steps().size(), 4u);
}

TEST(Method1, MarsVenusFullConditional) {
  const Diagram d = fixtures::mars_venus();
  const auto [report, ledger] = voe_method1(d, "Mission", ValuationMode::full(fixtures::mars_venus_joint(d)));
  ASSERT_EQ(report.entries.size(), 4u);
  std::map<std::string, double> voe;
  for (const auto& e : report.entries) voe[e.label] = e.voe;
  EXPECT_NEAR(voe.at("Mars:Success|Venus:Success"), 44.0, 1e-6);
  EXPECT_NEAR(voe.at("Mars:Success|Venus:Failure"), -6.0, 1e-6);
  EXPECT_NEAR(voe.at("Mars:Failure|Venus:Success"), 44.0, 1e-6);
  EXPECT_NEAR(voe.at("Mars:Failure|Venus:Failure"), -46.0, 1e-6);
}

TEST(Method1, SingleChanceNodeHasOneStepPerOutcome) {
  Diagram d("single");
  d.add_node(Node::chance("X", {"a", "b", "c"}, {}, {0.2, 0.3, 0.5}));
  d.add_node(Node::value("V", {"X"}, {1, 2, 3}));
  const auto [report, ledger] = voe_method1(d, "X");
  ASSERT_EQ(ledger.steps().size(), 3u);
  for (const auto& s : ledger.steps()) {
    EXPECT_EQ(s.operation, "propagate_evidence");
    EXPECT_EQ(s.space, 1u);
  }
  EXPECT_NEAR(report.entries[2].voe, 3.0 - 2.3, 1e-12);
}

TEST(Method2, MarsVenusMatchesMethod1) {
  const Diagram d = fixtures::mars_venus();
  const auto [r1, l1] = voe_method1(d, "Mission");
  const auto [r2, l2] = voe_method2(d, "Mission");
  expect_same_reports(r1, r2, 1e-9);
  EXPECT_EQ(l2.max_space(), 4u);

  const auto mode = ValuationMode::full(fixtures::mars_venus_joint(d));
  expect_same_reports(voe_method1(d, "Mission", mode).first, voe_method2(d, "Mission", mode).first, 1e-9);
}

TEST(Method2, LockedSoleValueParentReadsValueRows) {
  Diagram d("direct");
  d.add_node(Node::chance("X", {"a", "b", "c"}, {}, {0.2, 0.3, 0.5}));
  d.add_node(Node::value("V", {"X"}, {7, -1, 4}));
  const auto [report, ledger] = voe_method2(d, "X");
  ASSERT_EQ(report.entries.size(), 3u);
  EXPECT_DOUBLE_EQ(report.entries[0].ev_after, 7.0);
  EXPECT_DOUBLE_EQ(report.entries[1].ev_after, -1.0);
  EXPECT_DOUBLE_EQ(report.entries[2].ev_after, 4.0);
}

TEST(CompareMethods, MarsVenus) {
  const MethodComparison c = compare_methods(fixtures::mars_venus(), "Mission", "Destination");
  EXPECT_EQ(c.heuristic, kOrderingHeuristic);
  ASSERT_EQ(c.runs.size(), 3u);
  for (const auto& run : c.runs) EXPECT_NEAR(run.value, 8.0, 1e-9) << run.method;
  EXPECT_TRUE(c.values_agree);
  EXPECT_TRUE(c.prop6_holds);
  EXPECT_TRUE(c.prop7_holds);
  EXPECT_LE(c.run("method1").max_space, c.run("standard").max_space);
  EXPECT_LE(c.run("method1").max_space, c.run("method2").max_space);
  EXPECT_FALSE(c.run("standard").report.has_value());
  EXPECT_TRUE(c.run("method2").report.has_value());
}

TEST(CompareMethods, EvidenceChainIsStrict) {
  const Diagram d = fixtures::evidence_chain();
  const MethodComparison c = compare_methods(d, "I", "K", ValuationMode::full(fixtures::evidence_chain_joint(d)));
  EXPECT_TRUE(c.values_agree);
  EXPECT_TRUE(c.prop6_holds);
  EXPECT_TRUE(c.prop7_holds);
  EXPECT_EQ(c.run("standard").max_space, 108u);
  EXPECT_EQ(c.run("method2").max_space, 108u);
  EXPECT_EQ(c.run("method1").max_space, 18u);
  EXPECT_NEAR(c.run("standard").value, 2.842, 1e-9);
}

// C1 feeds V directly and D4 observes only C3, which V ignores. The informed
// reduction drops C3 as irrelevant; evidence on C1 still rewrites C3's table.
TEST(CompareMethods, UnneededObservationCanFavorStandard) {
  const Diagram d = generate_random_diagram(19511, 7, 4);
  const MethodComparison c = compare_methods(d, "C1", "D4");
  EXPECT_TRUE(c.values_agree);
  EXPECT_TRUE(c.prop6_holds);
  EXPECT_FALSE(c.prop7_holds);
  EXPECT_EQ(c.run("standard").max_space, 24u);
  EXPECT_EQ(c.run("method1").max_space, 32u);
}

TEST(CompareMethods, CsvColumns) {
  const MethodComparison c = compare_methods(fixtures::mars_venus(), "Mission", "Destination");
  std::ostringstream out;
  write_comparison_csv(out, "MarsVenus", c);
  EXPECT_EQ(out.str(),
            "diagram,method,value,max_space,steps\n"
            "MarsVenus,standard,8,4,2\n"
            "MarsVenus,method1,8,2,4\n"
            "MarsVenus,method2,8,4,1\n");
  std::ostringstream rows;
  write_comparison_csv(rows, "M", c, false);
  EXPECT_EQ(rows.str().substr(0, 11), "M,standard,");
}

TEST(Generator, SmallestCase) {
  const Diagram d = generate_random_diagram(1, 2, 2);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.nodes()[0].kind, NodeKind::Chance);
  EXPECT_EQ(d.nodes()[1].kind, NodeKind::Value);
  EXPECT_TRUE(validate(d).empty());
}

TEST(Generator, DeterministicInSeed) {
  for (std::uint64_t seed : {3u, 17u, 999u}) {
    const Diagram a = generate_random_diagram(seed, 6, 4);
    const Diagram b = generate_random_diagram(seed, 6, 4);
    EXPECT_EQ(a, b);
    EXPECT_EQ(save_diagram(a), save_diagram(b));
  }
  EXPECT_NE(generate_random_diagram(1, 6, 4), generate_random_diagram(2, 6, 4));
}

TEST(Generator, ThousandSamplesValidate) {
  std::size_t decisions = 0, deterministic = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const std::size_t n = 2 + seed % 6;
    const Diagram d = generate_random_diagram(seed, n, 2 + seed % 3);
    ASSERT_TRUE(validate(d).empty()) << "seed " << seed;
    ASSERT_EQ(d.size(), n);
    for (const Node& node : d.nodes()) {
      decisions += node.kind == NodeKind::Decision;
      deterministic += node.kind == NodeKind::Deterministic;
      if (node.kind != NodeKind::Value) {
        EXPECT_GE(node.space.size(), 2u);
        EXPECT_LE(node.space.size(), 2 + seed % 3);
      }
    }
  }
  EXPECT_GT(decisions, 0u);
  EXPECT_GT(deterministic, 0u);
}

}  // namespace
}  // namespace infdiag
