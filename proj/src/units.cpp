#include "qensemble/units.hpp"

#include <string>

#include "qensemble/error.hpp"

namespace qens {

std::string_view unit_label(UnitSystem system, Quantity q) {
  const bool nat = system == UnitSystem::natural;
  switch (q) {
    case Quantity::dimensionless: return "1";
    case Quantity::length: return nat ? "nat.length" : "m";
    case Quantity::wavenumber: return nat ? "nat.wavenumber" : "1/m";
    case Quantity::energy: return nat ? "nat.energy" : "J";
    case Quantity::time: return nat ? "nat.time" : "s";
    case Quantity::mass: return nat ? "nat.mass" : "kg";
    case Quantity::action: return nat ? "nat.action" : "J s";
    case Quantity::velocity: return nat ? "nat.velocity" : "m/s";
    case Quantity::angle: return "rad";
    case Quantity::probability: return "1";
    case Quantity::count: return "count";
    case Quantity::amplitude: return nat ? "nat.amplitude" : "kg^(1/2) m^-3";
    case Quantity::ensemble_density: return nat ? "nat.density" : "kg m^-6";
    case Quantity::line_density: return nat ? "1/nat.length" : "1/m";
    case Quantity::intensity: return nat ? "nat.intensity" : "J/m^3";
  }
  return "?";
}

std::string_view to_string(UnitSystem system) {
  return system == UnitSystem::natural ? "natural" : "si";
}

UnitSystem parse_unit_system(std::string_view text) {
  if (text == "natural") return UnitSystem::natural;
  if (text == "si") return UnitSystem::si;
  throw ValidationError("unknown unit system '" + std::string(text) + "' (natural|si)");
}

}  // namespace qens
