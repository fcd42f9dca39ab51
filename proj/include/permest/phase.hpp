#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "permest/errors.hpp"

namespace permest {

using cplx = std::complex<double>;

/// exp(2*pi*i*phase/modulus). Quarter turns are returned exactly so that
/// binary phase vectors produce exact +-1.
inline cplx root_of_unity(std::uint64_t phase, std::uint64_t modulus) {
  phase %= modulus;
  if ((4 * phase) % modulus == 0) {
    switch ((4 * phase) / modulus) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(phase) / static_cast<double>(modulus);
  return {std::cos(angle), std::sin(angle)};
}

/// A sample point: coordinate i is the root of unity exp(2*pi*i*phase_i/modulus_i).
/// In the binary case every modulus is 2 and phase 1 stands for -1.
class PhaseVector {
 public:
  PhaseVector(std::vector<std::uint32_t> moduli, std::vector<std::uint32_t> phases)
      : moduli_(std::move(moduli)), phases_(std::move(phases)) {
    if (moduli_.size() != phases_.size()) throw DomainError("phase and modulus counts differ");
    for (std::size_t i = 0; i < moduli_.size(); ++i) {
      if (moduli_[i] == 0) throw DomainError("modulus must be positive");
      if (phases_[i] >= moduli_[i]) {
        throw DomainError("phase " + std::to_string(phases_[i]) + " out of range for modulus " +
                          std::to_string(moduli_[i]));
      }
    }
  }

  /// Binary vector from signs: true means -1.
  static PhaseVector binary(const std::vector<bool>& negative) {
    std::vector<std::uint32_t> ph(negative.size());
    for (std::size_t i = 0; i < ph.size(); ++i) ph[i] = negative[i] ? 1 : 0;
    std::vector<std::uint32_t> moduli(ph.size(), 2);
    return PhaseVector(std::move(moduli), std::move(ph));
  }

  /// Decodes a mixed-radix index (coordinate 0 least significant).
  static PhaseVector from_index(std::vector<std::uint32_t> moduli, std::uint64_t index) {
    std::vector<std::uint32_t> ph(moduli.size());
    for (std::size_t i = 0; i < moduli.size(); ++i) {
      ph[i] = static_cast<std::uint32_t>(index % moduli[i]);
      index /= moduli[i];
    }
    return PhaseVector(std::move(moduli), std::move(ph));
  }

  std::size_t size() const noexcept { return phases_.size(); }
  std::span<const std::uint32_t> moduli() const noexcept { return moduli_; }
  std::span<const std::uint32_t> phases() const noexcept { return phases_; }

  bool is_binary() const noexcept {
    for (std::uint32_t m : moduli_)
      if (m != 2) return false;
    return true;
  }

  cplx value(std::size_t i) const { return root_of_unity(phases_[i], moduli_[i]); }

 private:
  std::vector<std::uint32_t> moduli_;
  std::vector<std::uint32_t> phases_;
};

/// Product of the moduli, i.e. the size of the full sample domain. Saturates at UINT64_MAX.
inline std::uint64_t domain_size(std::span<const std::uint32_t> moduli) {
  std::uint64_t total = 1;
  for (std::uint32_t m : moduli) {
    if (m != 0 && total > UINT64_MAX / m) return UINT64_MAX;
    total *= m;
  }
  return total;
}

}  // namespace permest
