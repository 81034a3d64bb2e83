#pragma once

#include "infdiag/diagram.hpp"
#include "infdiag/valuation.hpp"

namespace infdiag::fixtures {

/// Destination decision, Mission chance (60% success either way), value node.
Diagram mars_venus();

/// Joint of Mission's outcomes under both destinations.
JointConditionalTable mars_venus_joint(const Diagram& diagram);

/// Mars Landing and Venus Landing as separate chance nodes with a dependency
/// arc; conditionals are exact ratios of the joint.
Diagram mars_venus_split();

/// I has decision parent K; I and K feed a chain of chance nodes into V, so
/// the informed reduction carries I through every elimination.
Diagram evidence_chain();

/// Joint over I's outcome under each alternative of K, with the two
/// components independent.
JointConditionalTable evidence_chain_joint(const Diagram& diagram);

}  // namespace infdiag::fixtures
