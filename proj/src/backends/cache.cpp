#include "cope/backends/cache.hpp"

#include <stdexcept>

#include "cope/util/error.hpp"
#include "cope/util/io.hpp"

namespace cope::backends {

namespace {
void check_key(std::string_view key) {
  if (key.empty()) throw std::invalid_argument("empty cache key");
  for (char c : key) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
      throw std::invalid_argument("cache key is not lowercase hex");
    }
  }
}
}  // namespace

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::optional<std::string> ResponseCache::lookup(std::string_view key) const {
  check_key(key);
  const auto path = dir_ / (std::string(key) + ".txt");
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  return read_file(path);
}

void ResponseCache::store(std::string_view key, std::string_view value, const ojson& meta) {
  check_key(key);
  ojson snapshot = meta;
  snapshot["stored_at"] = utc_timestamp();
  // Metadata first: a visible .txt always has its snapshot beside it.
  write_file_atomic(dir_ / (std::string(key) + ".meta.json"), snapshot.dump(2) + "\n");
  write_file_atomic(dir_ / (std::string(key) + ".txt"), value);
}

}  // namespace cope::backends
