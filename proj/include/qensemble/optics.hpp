#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qensemble/numerics.hpp"
#include "qensemble/parallel.hpp"

namespace qens {

using Vec3 = std::array<double, 3>;
using CVec3 = std::array<cplx, 3>;

namespace axis {
inline constexpr Vec3 x{1.0, 0.0, 0.0};
inline constexpr Vec3 y{0.0, 1.0, 0.0};
inline constexpr Vec3 z{0.0, 0.0, 1.0};
/// (e_x + e_y)/√2
Vec3 diagonal();
}  // namespace axis

double dot(const Vec3& a, const Vec3& b);
Vec3 cross(const Vec3& a, const Vec3& b);

/// A plane-wave component with complex scalar amplitudes along real unit
/// polarization vectors. E, B and the propagation direction are mutually
/// orthogonal.
struct PolarizedBeam {
  cplx E_amp{1.0, 0.0};
  cplx B_amp{1.0, 0.0};
  Vec3 e_E = axis::x;
  Vec3 e_B = axis::y;
  Vec3 k_dir = axis::z;
  double phase = 0.0;
  double c = 1.0;

  /// Horizontally polarized beam travelling along z.
  static PolarizedBeam horizontal(cplx E, cplx B, double c = 1.0);

  CVec3 E() const;
  CVec3 B() const;
  /// Largest of |e_E·k|, |e_B·k|, |e_E·e_B|.
  double orthogonality_residual() const;
  void validate() const;
};

/// φ_em = ½(|E|²/c² + |B|²) of the vector sum of the beams' fields.
double em_intensity(std::span<const PolarizedBeam> beams);
double em_intensity(const PolarizedBeam& beam);

// Optical elements. Splitter, rotator and mirror are lossless; the polarizer
// keeps only the projection onto its axis.

/// Transmitted (amplitude √(1−r)) and reflected (amplitude √r) beams.
std::pair<PolarizedBeam, PolarizedBeam> split(const PolarizedBeam& in, double reflectivity);
/// Quarter-turn of the polarization about k: e_x → e_y, e_y → −e_x for k = e_z.
PolarizedBeam rotate_polarization(const PolarizedBeam& in);
PolarizedBeam polarize(const PolarizedBeam& in, const Vec3& transmission_axis);
PolarizedBeam shift_phase(const PolarizedBeam& in, double phi);
/// Ideal mirror: a π phase shift.
PolarizedBeam mirror(const PolarizedBeam& in);

enum class EraserStage { baseline, rotator_in_path1, rotator_plus_diagonal };

std::string_view to_string(EraserStage stage);
EraserStage parse_eraser_stage(std::string_view text);
inline constexpr std::array<EraserStage, 3> kEraserStages{
    EraserStage::baseline, EraserStage::rotator_in_path1, EraserStage::rotator_plus_diagonal};

struct EraserConfig {
  EraserStage stage = EraserStage::baseline;
  /// Phase of path 2 relative to path 1.
  double phi = 0.0;
  cplx E1{1.0, 0.0};
  cplx B1{1.0, 0.0};
  double c = 1.0;
};

/// Beams arriving at the screen for the given stage (after any polarizer).
std::vector<PolarizedBeam> eraser_beams(const EraserConfig& cfg);

/// Intensity from the recombined intrinsic E and B fields.
double eraser_intensity_fields(const EraserConfig& cfg);

/// |ψ|² from the path ⊗ polarization state vector, summed over the two
/// polarization outcomes at the screen.
double eraser_intensity_statevector(const EraserConfig& cfg);

struct StageAgreement {
  EraserStage stage;
  std::vector<double> phi;
  std::vector<double> fields;
  std::vector<double> statevector;
  double visibility_fields = 0.0;
  double visibility_statevector = 0.0;
};

struct AgreementReport {
  std::vector<StageAgreement> stages;
  /// Least-squares constant with fields ≈ constant · statevector over all stages.
  double constant = 0.0;
  /// max |fields − constant · statevector| over all samples.
  double max_deviation = 0.0;
  /// Peak of the diagonal stage over peak of the baseline (fields).
  double diagonal_to_baseline_peak = 0.0;
  bool agree = false;
  std::string diff;
};

inline constexpr double kAgreementTolerance = 1e-12;

/// Sweeps φ over [0, 2π) in n_phi steps for every stage.
AgreementReport formalism_agreement(std::size_t n_phi = 64, const EraserConfig& base = {});

double visibility(std::span<const double> curve);

struct MZConfig {
  bool bomb_present = false;
  double reflectivity = 0.5;
  double detector_efficiency = 0.02;

  void validate() const;
};

/// Where a photon ends up. Without an obstruction the dark port receives no
/// amplitude for any reflectivity.
struct MZOutcome {
  double bright = 0.0;
  double dark = 0.0;
  double absorbed = 0.0;
};

/// Single-photon amplitudes through splitter, mirrors and a second splitter.
/// Splitters act as [[t, s], [s, −t]] with t = √(1−r), s = √r; the bomb sits
/// in the reflected arm and removes its amplitude.
MZOutcome mz_probabilities(const MZConfig& cfg);

/// Monte-Carlo bookkeeping of where photons go when detectors are inefficient.
struct EfficiencyLedger {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::uint64_t absorbed = 0;
  std::uint64_t detected_bright = 0;
  std::uint64_t detected_dark = 0;
  std::uint64_t undetected = 0;

  double expected_absorbed = 0.0;
  double expected_detected = 0.0;
  double expected_undetected = 0.0;
  /// Undetected share of photons that reached a detector: 1 − efficiency.
  double expected_undetected_share = 0.0;
  double empirical_undetected_share = 0.0;

  /// Every count lies within 3 binomial standard deviations of expectation.
  bool within_three_sigma = false;
};

inline constexpr std::uint64_t kDefaultSeed = 20260419;

EfficiencyLedger efficiency_account(const MZConfig& cfg, std::uint64_t n_trials,
                                    std::uint64_t seed = kDefaultSeed, Exec exec = Exec::parallel);

/// Counter-based uniform variate in [0, 1): a pure function of (seed, counter),
/// so batches of trials can be drawn in any order.
double counter_uniform(std::uint64_t seed, std::uint64_t counter);

}  // namespace qens
