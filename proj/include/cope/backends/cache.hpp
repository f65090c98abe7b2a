#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "cope/util/json.hpp"

namespace cope::backends {

/// Content-addressed response store: `<key>.txt` holds the response text and
/// `<key>.meta.json` the request snapshot. Entries survive restarts; writes are
/// atomic, so concurrent stores of one key leave a single complete entry.
class ResponseCache {
 public:
  /// Creates `dir` if needed. Throws IoError when it cannot.
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> lookup(std::string_view key) const;
  /// Throws IoError on storage failure, std::invalid_argument on a key that is
  /// not lowercase hex.
  void store(std::string_view key, std::string_view value, const ojson& meta = ojson::object());

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

}  // namespace cope::backends
