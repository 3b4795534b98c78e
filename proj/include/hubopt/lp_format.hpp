#pragma once

#include <iosfwd>
#include <string>

#include "hubopt/milp.hpp"

namespace hubopt::milp {

/// Writes the model in the CPLEX LP text subset documented in
/// docs/lp_format.md (objective, constraints, bounds, binaries). Output is
/// byte-stable for a given model.
void write_lp(const MilpModel& model, std::ostream& out);
std::string to_lp_string(const MilpModel& model);

/// Identifier accepted by LP readers: brackets become parentheses, commas
/// become dots, anything else outside [A-Za-z0-9_.()] becomes '_'.
std::string lp_identifier(const std::string& name);

}  // namespace hubopt::milp
