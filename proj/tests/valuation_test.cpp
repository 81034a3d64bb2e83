#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "checks.hpp"
#include "fixtures.hpp"
#include "infdiag/evidence.hpp"
#include "infdiag/transforms.hpp"
#include "infdiag/valuation.hpp"

namespace infdiag {
namespace {

using checks::error_kind;

const VoeEntry& entry(const VoeReport& report, const std::string& label) {
  for (const auto& e : report.entries)
    if (e.label == label) return e;
  throw std::out_of_range("no entry " + label);
}

void expect_consistent(const VoeReport& report, double baseline, double tolerance) {
  EXPECT_NEAR(report.baseline_ev, baseline, tolerance);
  double total = 0.0;
  for (const auto& e : report.entries) {
    EXPECT_NEAR(e.voe, e.ev_after - report.baseline_ev, 1e-9) << e.label;
    total += e.probability;
  }
  EXPECT_NEAR(total, 1.0, 1e-6);
}

JointConditionalTable product_joint(const Diagram& d) {
  return make_joint(d, "Mission", {"Destination"},
                    {{"Mars:Success|Venus:Success", 0.36},
                     {"Mars:Success|Venus:Failure", 0.24},
                     {"Mars:Failure|Venus:Success", 0.24},
                     {"Mars:Failure|Venus:Failure", 0.16}});
}

TEST(ValueOfEvidence, MarsVenusOutcomes) {
  const Diagram d = fixtures::mars_venus();
  EXPECT_NEAR(value_of_evidence(d, Evidence::simple("Mission", "Failure")), -46.0, 1e-9);
  EXPECT_NEAR(value_of_evidence(d, Evidence::simple("Mission", "Success")), 44.0, 1e-9);
}

TEST(ValueOfEvidence, CertainOutcomeIsWorthNothing) {
  Diagram d("certain");
  d.add_node(Node::chance("X", {"x0", "x1"}, {}, {1.0, 0.0}));
  d.add_node(Node::decision("D", {"a", "b"}));
  d.add_node(Node::value("V", {"D", "X"}, {1, 8, 3, 2}));
  EXPECT_NEAR(value_of_evidence(d, Evidence::simple("X", "x0")), 0.0, 1e-12);
  EXPECT_EQ(error_kind([&] { value_of_evidence(d, Evidence::simple("X", "x1")); }), ErrorKind::ImpossibleEvidence);
}

TEST(VoeReport, NaiveMarsVenus) {
  const VoeReport r = voe_report(fixtures::mars_venus(), "Mission");
  ASSERT_EQ(r.entries.size(), 2u);
  expect_consistent(r, 56.0, 1e-9);
  EXPECT_NEAR(entry(r, "Failure").voe, -46.0, 1e-9);
  EXPECT_NEAR(entry(r, "Failure").probability, 0.4, 1e-12);
  EXPECT_NEAR(entry(r, "Success").voe, 44.0, 1e-9);
  EXPECT_NEAR(entry(r, "Success").probability, 0.6, 1e-12);
  EXPECT_EQ(entry(r, "Success").policy.at("Destination").choices, std::vector<std::size_t>{1});
  EXPECT_EQ(entry(r, "Failure").policy.at("Destination").choices, std::vector<std::size_t>{0});
}

TEST(VoeReport, FullConditionalMarsVenus) {
  const Diagram d = fixtures::mars_venus();
  const VoeReport r = voe_report(d, "Mission", ValuationMode::full(fixtures::mars_venus_joint(d)));
  ASSERT_EQ(r.entries.size(), 4u);
  expect_consistent(r, 56.0, 1e-9);
  EXPECT_NEAR(entry(r, "Mars:Failure|Venus:Failure").voe, -46.0, 1e-6);
  EXPECT_NEAR(entry(r, "Mars:Failure|Venus:Failure").probability, 0.354, 1e-12);
  EXPECT_NEAR(entry(r, "Mars:Success|Venus:Failure").voe, -6.0, 1e-6);
  EXPECT_NEAR(entry(r, "Mars:Success|Venus:Failure").probability, 0.046, 1e-12);
  EXPECT_NEAR(entry(r, "Mars:Failure|Venus:Success").voe, 44.0, 1e-6);
  EXPECT_NEAR(entry(r, "Mars:Failure|Venus:Success").probability, 0.046, 1e-12);
  EXPECT_NEAR(entry(r, "Mars:Success|Venus:Success").voe, 44.0, 1e-6);
  EXPECT_NEAR(entry(r, "Mars:Success|Venus:Success").probability, 0.554, 1e-12);
}

TEST(VoeReport, SplitDiagramUsesUnroundedConditionals) {
  const VoeReport r = voe_report(fixtures::mars_venus_split(), "Mars Landing");
  ASSERT_EQ(r.entries.size(), 2u);
  expect_consistent(r, 56.0, 1e-9);
  EXPECT_NEAR(entry(r, "Failure").voe, -46.0, 1e-9);
  EXPECT_NEAR(entry(r, "Success").ev_after, (100 * 0.554 - 10 * 0.046) / 0.6, 1e-9);
  EXPECT_NEAR(entry(r, "Success").ev_after, 91.57, 0.01);
  EXPECT_NEAR(entry(r, "Success").voe, 35.57, 0.01);
}

TEST(VoeReport, FullModeRejectsInconsistentJoint) {
  const Diagram d = fixtures::mars_venus();
  const auto joint = make_joint(d, "Mission", {"Destination"},
                                {{"Mars:Success|Venus:Success", 0.50},
                                 {"Mars:Success|Venus:Failure", 0.20},
                                 {"Mars:Failure|Venus:Success", 0.20},
                                 {"Mars:Failure|Venus:Failure", 0.10}});
  EXPECT_EQ(error_kind([&] { check_joint(d, joint); }), ErrorKind::Validation);
  EXPECT_EQ(error_kind([&] { voe_report(d, "Mission", ValuationMode::full(joint)); }), ErrorKind::Validation);
}

TEST(OutcomeSensitivity, SpreadOfVoe) {
  const Diagram d = fixtures::mars_venus();
  EXPECT_NEAR(outcome_sensitivity(voe_report(d, "Mission")), 90.0, 1e-9);
  EXPECT_NEAR(outcome_sensitivity(voe_report(d, "Mission", ValuationMode::full(fixtures::mars_venus_joint(d)))), 90.0,
              1e-6);

  VoeReport single;
  single.entries.push_back({"only", Evidence::simple("X", "only"), 3.0, 3.0, 1.0, {}});
  EXPECT_DOUBLE_EQ(outcome_sensitivity(single), 0.0);
  EXPECT_EQ(error_kind([] { outcome_sensitivity(VoeReport{}); }), ErrorKind::InvalidArgument);
}

TEST(Vopi, FromVoeWeighting) {
  const Diagram d = fixtures::mars_venus();
  EXPECT_NEAR(vopi_from_voe(voe_report(d, "Mission")), 8.0, 1e-9);
  EXPECT_NEAR(vopi_from_voe(voe_report(d, "Mission", ValuationMode::full(fixtures::mars_venus_joint(d)))), 9.84, 1e-6);
  EXPECT_NEAR(vopi_from_voe(voe_report(fixtures::mars_venus_split(), "Mars Landing")), 2.94, 0.01);
}

TEST(Vopi, StandardByArcAddition) {
  const Diagram d = fixtures::mars_venus();
  EXPECT_NEAR(vopi_standard(d, "Mission", "Destination"), 8.0, 1e-9);
  const auto run = detail::vopi_standard_run(d, "Mission", "Destination", {});
  EXPECT_NEAR(run.ev_with_information, 64.0, 1e-9);
  const auto full = detail::vopi_standard_run(d, "Mission", "Destination",
                                              ValuationMode::full(fixtures::mars_venus_joint(d)));
  EXPECT_NEAR(full.ev_with_information, 65.84, 1e-6);
  EXPECT_NEAR(full.value, 9.84, 1e-6);
  EXPECT_NEAR(vopi_standard(fixtures::mars_venus_split(), "Mars Landing", "Destination"), 2.94, 0.01);
}

TEST(Vopi, AlreadyObservedNodeAddsNothing) {
  Diagram d("observed");
  d.add_node(Node::chance("J", {"j0", "j1"}, {}, {0.4, 0.6}));
  d.add_node(Node::decision("D", {"a", "b"}, {"J"}));
  d.add_node(Node::value("V", {"D", "J"}, {3, 1, 0, 5}));
  EXPECT_NEAR(vopi_standard(d, "J", "D"), 0.0, 1e-12);
}

TEST(Vopi, ProductJointRevealsEachDestinationIndependently) {
  const Diagram d = fixtures::mars_venus();
  const auto mode = ValuationMode::full(product_joint(d));
  // .36*100 + .24*100 + .24*50 + .16*10 - 56
  EXPECT_NEAR(vopi_standard(d, "Mission", "Destination", mode), 17.6, 1e-9);
  EXPECT_NEAR(vopi_from_voe(voe_report(d, "Mission", mode)), 17.6, 1e-9);
}

TEST(ValueOfControl, OptimumVoe) {
  const Diagram d = fixtures::mars_venus();
  EXPECT_NEAR(value_of_control(voe_report(d, "Mission")), 44.0, 1e-9);
  EXPECT_NEAR(value_of_control(voe_report(d, "Mission", ValuationMode::full(fixtures::mars_venus_joint(d)))), 44.0,
              1e-6);
  const VoeReport split = voe_report(fixtures::mars_venus_split(), "Mars Landing");
  EXPECT_NEAR(value_of_control(split), 35.57, 0.01);
}

TEST(ValueOfControl, MinimizeTakesTheSmallestVoe) {
  VoeReport r;
  r.objective = Objective::Minimize;
  r.entries.push_back({"a", Evidence::simple("X", "a"), 2.0, 0, 0.5, {}});
  r.entries.push_back({"b", Evidence::simple("X", "b"), -3.0, 0, 0.5, {}});
  EXPECT_DOUBLE_EQ(value_of_control(r), -3.0);
}

TEST(VocStandard, ConversionToDecision) {
  EXPECT_NEAR(voc_standard(fixtures::mars_venus(), "Mission"), 44.0, 1e-9);
  EXPECT_NEAR(voc_standard(fixtures::mars_venus_split(), "Mars Landing"),
              value_of_control(voe_report(fixtures::mars_venus_split(), "Mars Landing")), 1e-9);
}

TEST(VocStandard, DecisionAlreadyObservingTheNode) {
  Diagram d("observed");
  d.add_node(Node::chance("J", {"j0", "j1"}, {}, {0.4, 0.6}));
  d.add_node(Node::decision("D", {"a", "b"}, {"J"}));
  d.add_node(Node::value("V", {"D", "J"}, {3, 1, 0, 5}));
  EXPECT_NEAR(voc_standard(d, "J"), 5.0 - (0.4 * 3 + 0.6 * 5), 1e-12);
  EXPECT_NEAR(value_of_control(voe_report(d, "J")), voc_standard(d, "J"), 1e-12);
}

TEST(VocStandard, CertainOptimalOutcomeIsWorthNothing) {
  Diagram d("certain");
  d.add_node(Node::chance("X", {"x0", "x1"}, {}, {1.0, 0.0}));
  d.add_node(Node::decision("D", {"a", "b"}));
  d.add_node(Node::value("V", {"D", "X"}, {1, 0, 3, 2}));
  EXPECT_NEAR(voc_standard(d, "X"), 0.0, 1e-12);
}

TEST(VocStandard, NonRootIsRejected) {
  EXPECT_EQ(error_kind([] { voc_standard(fixtures::mars_venus_split(), "Venus Landing"); }), ErrorKind::Structural);
}

TEST(ConditionalExpansion, PreservesEvaluation) {
  const Diagram d = fixtures::mars_venus();
  const auto joint = fixtures::mars_venus_joint(d);
  const Diagram expanded = conditional_expansion(d, "Mission", joint);
  EXPECT_TRUE(validate(expanded).empty());
  const std::string m = expansion_node_id(d, joint);
  EXPECT_EQ(m, "Mission|Destination");
  EXPECT_EQ(expanded.node(m).kind, NodeKind::Chance);
  EXPECT_TRUE(expanded.node(m).parents.empty());
  EXPECT_EQ(expanded.node("Mission").kind, NodeKind::Deterministic);
  const Evaluation a = evaluate(d);
  const Evaluation b = evaluate(expanded);
  EXPECT_NEAR(b.ev, 56.0, 1e-9);
  EXPECT_EQ(a.policy, b.policy);
}

TEST(ConditionalExpansion, RequiresDecisionParent) {
  const Diagram d = fixtures::mars_venus_split();
  JointConditionalTable j;
  j.node = "Mars Landing";
  EXPECT_NE(error_kind([&] { conditional_expansion(d, "Mars Landing", j); }), std::nullopt);
}

TEST(ConditionJoint, ReproducesConditionalTable) {
  const Diagram d = fixtures::mars_venus();
  const auto joint = fixtures::mars_venus_joint(d);
  const auto success = condition_joint(joint, {"Mars"}, "Success");
  EXPECT_EQ(success.configurations, std::vector<std::size_t>{1});
  EXPECT_NEAR(success.distribution.at({0}), 0.923, 0.001);
  EXPECT_NEAR(success.distribution.at({1}), 0.077, 0.001);
  EXPECT_NEAR(success.distribution.at({0}), 0.554 / 0.6, 1e-12);

  const auto failure = condition_joint(joint, {"Mars"}, "Failure");
  EXPECT_NEAR(failure.distribution.at({1}), 0.885, 0.001);
  EXPECT_NEAR(failure.distribution.at({0}), 0.115, 0.001);
}

TEST(ConditionJoint, ProductJointKeepsOtherMargin) {
  const Diagram d = fixtures::mars_venus();
  const auto c = condition_joint(product_joint(d), {"Venus"}, "Failure");
  EXPECT_EQ(c.configurations, std::vector<std::size_t>{0});
  EXPECT_NEAR(c.distribution.at({0}), 0.6, 1e-12);
  EXPECT_NEAR(c.distribution.at({1}), 0.4, 1e-12);
}

TEST(ConditionJoint, ZeroMassIsImpossible) {
  const Diagram d = fixtures::mars_venus();
  Diagram certain = d;
  Node mission = certain.node("Mission");
  mission.probabilities().entries = {1.0, 0.0, 1.0, 0.0};
  certain.replace_node(mission);
  const auto joint = make_joint(certain, "Mission", {"Destination"}, {{"Mars:Success|Venus:Success", 1.0}});
  EXPECT_EQ(error_kind([&] { condition_joint(joint, {"Mars"}, "Failure"); }), ErrorKind::ImpossibleEvidence);
}

TEST(Joint, VectorLabelsRoundTrip) {
  const Diagram d = fixtures::mars_venus();
  const auto joint = fixtures::mars_venus_joint(d);
  EXPECT_EQ(joint.vector_label({0, 1}), "Mars:Success|Venus:Failure");
  EXPECT_EQ(joint.parse_vector_label("Mars:Success|Venus:Failure"), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(joint.configuration_index({"Venus"}), 1u);
  double total = 0.0;
  for (const auto& [k, p] : joint.joint) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(DefaultDecision, EarliestUninformedDecision) {
  EXPECT_EQ(default_vopi_decision(fixtures::mars_venus(), "Mission"), std::optional<std::string>("Destination"));
  Diagram d("observed");
  d.add_node(Node::chance("J", {"j0", "j1"}, {}, {0.4, 0.6}));
  d.add_node(Node::decision("D", {"a", "b"}, {"J"}));
  d.add_node(Node::value("V", {"D", "J"}, {3, 1, 0, 5}));
  EXPECT_EQ(default_vopi_decision(d, "J"), std::nullopt);
}

}  // namespace
}  // namespace infdiag
