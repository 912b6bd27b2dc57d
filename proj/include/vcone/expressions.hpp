#pragma once
#include "vcone/correlations.hpp"

namespace vcone {

// The four-party expression S on the ABD (z = 0) and ACD (y = 0) marginals,
// with lemma bound 7.  Coefficients are exact multiples of 1/360.
BellExpression expression_S();

// CHSH in probability form: sum_{xy} (-1)^{xy} <A_x B_y>, local bound 2.
BellExpression expression_chsh();

// Four-party correlator sum_{xyzw} (-1)^{yz} <A_x B_y C_z D_w>.
BellExpression expression_abcd();

// Expression selector for the CLI: "S", "chsh", "abcd" or a JSON file path.
BellExpression expression_by_name(const std::string& name_or_path);

}  // namespace vcone
