#pragma once

#include <nlohmann/json.hpp>

namespace cope {

/// Insertion-ordered JSON: every artifact is written with a fixed key order
/// so files diff cleanly between runs.
using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

}  // namespace cope
