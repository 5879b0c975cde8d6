#pragma once

#include <string_view>

namespace qens {

enum class UnitSystem { natural, si };

enum class Quantity {
  dimensionless,
  length,
  wavenumber,
  energy,
  time,
  mass,
  action,
  velocity,
  angle,
  probability,
  count,
  amplitude,         // ψ of a 3-D ensemble
  ensemble_density,  // |ψ|² of a 3-D ensemble
  line_density,      // probability per unit length
  intensity,         // φ_em
};

namespace si {
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double electron_mass = 9.1093837015e-31;  // kg
}  // namespace si

std::string_view unit_label(UnitSystem system, Quantity q);
std::string_view to_string(UnitSystem system);
UnitSystem parse_unit_system(std::string_view text);

}  // namespace qens
