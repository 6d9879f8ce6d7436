#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include "idfield/haar.hpp"

namespace idfield {

// Text format, values as hexfloats so a round trip is bit-exact.
void write_coefficients(const std::filesystem::path& path, const std::string& kernel_id,
                        const CoefficientSet& set);
// std::nullopt on a missing file, bad checksum or a header that does not
// match the expected key.
std::optional<CoefficientSet> read_coefficients(const std::filesystem::path& path,
                                                const std::string& kernel_id);

/// Write-once store of coefficient sets keyed by (kernel id, target, level,
/// delta), held in memory and optionally mirrored to a directory.
class CoefficientCache {
 public:
  explicit CoefficientCache(std::optional<std::filesystem::path> directory = std::nullopt);

  std::shared_ptr<const CoefficientSet> get_or_compute(
      const std::string& kernel_id, const Point& target, int level, double delta,
      const std::function<CoefficientSet()>& compute);

  std::size_t hits() const;
  std::size_t misses() const;
  std::size_t rejected_files() const;

  std::filesystem::path file_for(const std::string& kernel_id, const Point& target, int level,
                                 double delta) const;

 private:
  using Key = std::tuple<std::string, Point, int, double>;

  std::optional<std::filesystem::path> directory_;
  mutable std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const CoefficientSet>> entries_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
  std::atomic<std::size_t> rejected_{0};
};

}  // namespace idfield
