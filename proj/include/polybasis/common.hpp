#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace polybasis {

/// Thrown when a configuration or argument violates a precondition.
class invalid_config : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when the training loss becomes non-finite; carries the epoch index.
class training_divergence : public std::runtime_error {
 public:
  training_divergence(const std::string& what, int epoch)
      : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

// FNV-1a, used for config digests and library file checksums.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 14695981039346656037ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a(std::string_view s,
                           std::uint64_t h = 14695981039346656037ull) {
  return fnv1a(s.data(), s.size(), h);
}

}  // namespace polybasis
