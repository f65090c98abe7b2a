#pragma once

#include <boost/regex.hpp>

#include <vector>

#include "cope/features/grammar.hpp"

namespace cope::features {

/// Compiled patterns, index-aligned with Grammar::rules().
struct Grammar::Compiled {
  std::vector<boost::regex> patterns;
};

}  // namespace cope::features
