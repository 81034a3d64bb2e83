#include "fixtures.hpp"

namespace infdiag::fixtures {

Diagram mars_venus() {
  Diagram d("MarsVenus", Objective::Maximize);
  d.add_node(Node::decision("Destination", {"Mars", "Venus"}));
  d.add_node(Node::chance("Mission", {"Success", "Failure"}, {"Destination"}, {0.6, 0.4, 0.6, 0.4}));
  d.add_node(Node::value("V", {"Destination", "Mission"}, {50, 10, 100, -10}));
  return d;
}

JointConditionalTable mars_venus_joint(const Diagram& diagram) {
  return make_joint(diagram, "Mission", {"Destination"},
                    {{"Mars:Failure|Venus:Failure", 0.354},
                     {"Mars:Success|Venus:Failure", 0.046},
                     {"Mars:Failure|Venus:Success", 0.046},
                     {"Mars:Success|Venus:Success", 0.554}});
}

Diagram mars_venus_split() {
  Diagram d("MarsVenusSplit", Objective::Maximize);
  d.add_node(Node::decision("Destination", {"Mars", "Venus"}));
  d.add_node(Node::chance("Mars Landing", {"Success", "Failure"}, {}, {0.6, 0.4}));
  d.add_node(Node::chance("Venus Landing", {"Success", "Failure"}, {"Mars Landing"},
                          {0.554 / 0.6, 0.046 / 0.6, 0.046 / 0.4, 0.354 / 0.4}));
  // Mars pays on Mars Landing, Venus on Venus Landing.
  d.add_node(Node::value("V", {"Destination", "Mars Landing", "Venus Landing"},
                         {50, 50, 10, 10, 100, -10, 100, -10}));
  return d;
}

Diagram evidence_chain() {
  Diagram d("EvidenceChain", Objective::Maximize);
  d.add_node(Node::decision("K", {"k0", "k1"}));
  d.add_node(Node::chance("I", {"i0", "i1", "i2"}, {"K"}, {0.5, 0.3, 0.2, 0.1, 0.3, 0.6}));
  d.add_node(Node::chance("A", {"a0", "a1", "a2"}, {"I"}, {0.7, 0.2, 0.1, 0.2, 0.5, 0.3, 0.1, 0.1, 0.8}));
  d.add_node(Node::chance("B", {"b0", "b1", "b2"}, {"A", "I"},
                          {0.6, 0.3, 0.1, 0.2, 0.6, 0.2, 0.1, 0.2, 0.7, 0.5, 0.4, 0.1, 0.3, 0.3, 0.4,
                           0.2, 0.2, 0.6, 0.4, 0.4, 0.2, 0.1, 0.8, 0.1, 0.3, 0.1, 0.6}));
  d.add_node(Node::decision("D", {"d0", "d1"}, {"K"}));
  d.add_node(Node::value("V", {"D", "B"}, {10, -5, 30, 0, 20, 15}));
  return d;
}

JointConditionalTable evidence_chain_joint(const Diagram& diagram) {
  const Node& i = diagram.node("I");
  const auto& rows = i.probabilities().entries;
  const std::size_t n = i.space.size();
  std::map<std::string, double> joint;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      joint["k0:" + i.space.label(a) + "|k1:" + i.space.label(b)] = rows[a] * rows[n + b];
  return make_joint(diagram, "I", {"K"}, joint);
}

}  // namespace infdiag::fixtures
