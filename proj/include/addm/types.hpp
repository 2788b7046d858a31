#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace addm {

using Vec = std::vector<double>;

// Component / phase indices. Two-component, two-phase: each component lives in
// its own phase (oil in oil, gas in gas), so the same index works for both.
inline constexpr int kOil = 0;
inline constexpr int kGas = 1;
inline constexpr int kNumComp = 2;

// Unknown / equation layout per cell: [pressure, moles oil, moles gas] and
// [volume balance, oil conservation, gas conservation].
inline constexpr int kCellDof = 3;

// Thrown for malformed configuration (decks, grids, well placement).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unit conversion constants, defined once and configurable from the deck.
struct UnitConstants {
  double darcy = 0.008527;       // flow coefficient: rate = darcy * (mD*ft) * mobility * psi
  double gravity = 1.0 / 144.0;  // psi per (lb/ft^3 * ft) of fluid column
};

}  // namespace addm
