#pragma once

// Test-suite aliases for the library's dense-reference equivalence runner.

#include <mposim/equivalence.hpp>

namespace testsupport {

using mposim::EquivalenceReport;
using mposim::layer_bonds;
using mposim::run_equivalence;

}  // namespace testsupport
