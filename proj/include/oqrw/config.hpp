#pragma once

// JSON walk definitions:
//
//   {"name": "...",
//    "sites": [{"id": "1", "dim": 2}, ...],
//    "edges": [{"from": "1", "to": "2", "kraus": [M, ...]}, ...]}
//
// A matrix M is a list of rows, each entry a [re, im] pair (a bare number is
// read as a real entry).

#include <string>
#include <string_view>

#include "oqrw/walk_model.hpp"

namespace oqrw {

/// Throws ParseError naming the offending field (and line/column for syntax errors).
WalkModel parse_config(std::string_view text);

/// Deterministic output; parse_config(serialize_config(w)) == w.
std::string serialize_config(const WalkModel& walk);

}  // namespace oqrw
