#pragma once

// Named example walks. A name may carry parameters: "m4-eps?eps=0.05",
// "z8-period4?alpha=1.2", "ex-9.6?p=0.3".

#include <string>
#include <string_view>
#include <vector>

#include "oqrw/walk_model.hpp"

namespace oqrw {

/// Throws PreconditionError listing the registry for unknown names or parameters.
WalkModel builtin(std::string_view spec);

std::vector<std::string> builtin_names();

/// Shift generators {+1: L+, -1: L-} of the cyclic walks "m3" / "m4".
ShiftGenerators cyclic_generators();

/// {+1: p swap, -1: q diag(1, e^{i alpha})} with p = q = 1/sqrt(2).
ShiftGenerators phase_shift_generators(double alpha);

}  // namespace oqrw
