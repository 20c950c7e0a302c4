#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace cbalancer {

/// Resource kinds tracked per container and node, in a fixed total order.
enum class ResourceKind : std::size_t { cpu = 0, memory, cache, blkio, network };

inline constexpr std::size_t kResourceCount = 5;

inline constexpr std::array<ResourceKind, kResourceCount> kAllResources = {
    ResourceKind::cpu, ResourceKind::memory, ResourceKind::cache,
    ResourceKind::blkio, ResourceKind::network};

constexpr std::string_view resource_name(ResourceKind r) {
  constexpr std::array<std::string_view, kResourceCount> names = {
      "cpu", "memory", "cache", "blkio", "network"};
  return names[static_cast<std::size_t>(r)];
}

constexpr std::optional<ResourceKind> parse_resource(std::string_view name) {
  for (auto r : kAllResources) {
    if (resource_name(r) == name) return r;
  }
  return std::nullopt;
}

/// One value per ResourceKind, normalized so that 1.0 is one node's capacity.
class ResourceVector {
 public:
  constexpr ResourceVector() = default;
  constexpr explicit ResourceVector(std::array<double, kResourceCount> values)
      : values_(values) {}

  static constexpr ResourceVector filled(double v) {
    ResourceVector out;
    out.values_.fill(v);
    return out;
  }

  constexpr double operator[](ResourceKind r) const {
    return values_[static_cast<std::size_t>(r)];
  }
  constexpr double& operator[](ResourceKind r) {
    return values_[static_cast<std::size_t>(r)];
  }

  constexpr const std::array<double, kResourceCount>& values() const { return values_; }

  constexpr ResourceVector& operator+=(const ResourceVector& o) {
    for (std::size_t i = 0; i < kResourceCount; ++i) values_[i] += o.values_[i];
    return *this;
  }
  friend constexpr ResourceVector operator+(ResourceVector a, const ResourceVector& b) {
    return a += b;
  }

  constexpr bool non_negative() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
  }

  /// Entry-wise a <= b.
  constexpr bool fits_within(const ResourceVector& cap) const {
    for (std::size_t i = 0; i < kResourceCount; ++i) {
      if (values_[i] > cap.values_[i]) return false;
    }
    return true;
  }

  constexpr double sum() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
  }

  friend constexpr bool operator==(const ResourceVector&, const ResourceVector&) = default;

 private:
  std::array<double, kResourceCount> values_{};
};

}  // namespace cbalancer
