#pragma once

#include <string_view>

namespace cope::assets {

/// Text asset compiled in from assets/ (templates, extraction grammar).
/// Throws std::out_of_range for unknown names.
std::string_view find(std::string_view name);

}  // namespace cope::assets
