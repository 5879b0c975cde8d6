#include "qensemble/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qensemble/error.hpp"

namespace qens {

namespace {

constexpr double kPi = std::numbers::pi;

double norm3(const Vec3& v) { return std::sqrt(dot(v, v)); }

Vec3 scaled(const Vec3& v, double s) { return {v[0] * s, v[1] * s, v[2] * s}; }

void check_probability(double p, const char* what) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
    throw ValidationError(std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace

Vec3 axis::diagonal() {
  const double h = 1.0 / std::sqrt(2.0);
  return {h, h, 0.0};
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

PolarizedBeam PolarizedBeam::horizontal(cplx E, cplx B, double c) {
  PolarizedBeam beam;
  beam.E_amp = E;
  beam.B_amp = B;
  beam.c = c;
  beam.validate();
  return beam;
}

CVec3 PolarizedBeam::E() const {
  const cplx a = E_amp * std::polar(1.0, phase);
  return {a * e_E[0], a * e_E[1], a * e_E[2]};
}

CVec3 PolarizedBeam::B() const {
  const cplx a = B_amp * std::polar(1.0, phase);
  return {a * e_B[0], a * e_B[1], a * e_B[2]};
}

double PolarizedBeam::orthogonality_residual() const {
  return std::max({std::abs(dot(e_E, k_dir)), std::abs(dot(e_B, k_dir)), std::abs(dot(e_E, e_B))});
}

void PolarizedBeam::validate() const {
  if (!std::isfinite(c) || !(c > 0.0)) throw ValidationError("beam speed constant must be positive");
  if (!is_finite(E_amp) || !is_finite(B_amp) || !std::isfinite(phase)) {
    throw ValidationError("beam amplitudes and phase must be finite");
  }
  for (const Vec3* v : {&e_E, &e_B, &k_dir}) {
    if (std::abs(norm3(*v) - 1.0) > 1e-12) throw ValidationError("beam direction vectors must be unit");
  }
  if (orthogonality_residual() > 1e-12) {
    throw ValidationError("beam violates E·k = B·k = E·B = 0");
  }
}

double em_intensity(std::span<const PolarizedBeam> beams) {
  if (beams.empty()) return 0.0;
  const double c = beams.front().c;
  CVec3 E{}, B{};
  for (const PolarizedBeam& beam : beams) {
    if (beam.c != c) throw ValidationError("superposed beams must share the speed constant");
    const CVec3 e = beam.E();
    const CVec3 b = beam.B();
    for (int i = 0; i < 3; ++i) {
      E[i] += e[i];
      B[i] += b[i];
    }
  }
  double e2 = 0.0, b2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    e2 += std::norm(E[i]);
    b2 += std::norm(B[i]);
  }
  return 0.5 * (e2 / (c * c) + b2);
}

double em_intensity(const PolarizedBeam& beam) { return em_intensity(std::span(&beam, 1)); }

std::pair<PolarizedBeam, PolarizedBeam> split(const PolarizedBeam& in, double reflectivity) {
  check_probability(reflectivity, "reflectivity");
  const double t = std::sqrt(1.0 - reflectivity);
  const double s = std::sqrt(reflectivity);
  PolarizedBeam transmitted = in;
  PolarizedBeam reflected = in;
  transmitted.E_amp *= t;
  transmitted.B_amp *= t;
  reflected.E_amp *= s;
  reflected.B_amp *= s;
  return {transmitted, reflected};
}

PolarizedBeam rotate_polarization(const PolarizedBeam& in) {
  const auto turn = [&](const Vec3& v) {
    const Vec3 r = cross(in.k_dir, v);
    const double along = dot(in.k_dir, v);
    return Vec3{r[0] + along * in.k_dir[0], r[1] + along * in.k_dir[1], r[2] + along * in.k_dir[2]};
  };
  PolarizedBeam out = in;
  out.e_E = turn(in.e_E);
  out.e_B = turn(in.e_B);
  return out;
}

PolarizedBeam polarize(const PolarizedBeam& in, const Vec3& transmission_axis) {
  // Only the part of the axis transverse to k can transmit.
  const double along = dot(transmission_axis, in.k_dir);
  Vec3 a{transmission_axis[0] - along * in.k_dir[0], transmission_axis[1] - along * in.k_dir[1],
         transmission_axis[2] - along * in.k_dir[2]};
  const double len = norm3(a);
  if (!(len > 1e-12)) throw ValidationError("polarizer axis is parallel to the beam");
  a = scaled(a, 1.0 / len);
  PolarizedBeam out = in;
  const Vec3 b_axis = cross(in.k_dir, a);
  out.E_amp = in.E_amp * dot(in.e_E, a);
  out.B_amp = in.B_amp * dot(in.e_B, b_axis);
  out.e_E = a;
  out.e_B = b_axis;
  return out;
}

PolarizedBeam shift_phase(const PolarizedBeam& in, double phi) {
  PolarizedBeam out = in;
  out.phase += phi;
  return out;
}

PolarizedBeam mirror(const PolarizedBeam& in) { return shift_phase(in, kPi); }

std::string_view to_string(EraserStage stage) {
  switch (stage) {
    case EraserStage::rotator_in_path1: return "rotator_in_path1";
    case EraserStage::rotator_plus_diagonal: return "rotator_plus_diagonal";
    case EraserStage::baseline: break;
  }
  return "baseline";
}

EraserStage parse_eraser_stage(std::string_view text) {
  for (EraserStage s : kEraserStages) {
    if (to_string(s) == text) return s;
  }
  throw ValidationError("unknown eraser stage '" + std::string(text) + "'");
}

std::vector<PolarizedBeam> eraser_beams(const EraserConfig& cfg) {
  if (!std::isfinite(cfg.phi)) throw ValidationError("phase must be finite");
  auto [path1, path2] = split(PolarizedBeam::horizontal(cfg.E1, cfg.B1, cfg.c), 0.5);
  path2 = shift_phase(path2, cfg.phi);
  if (cfg.stage != EraserStage::baseline) path1 = rotate_polarization(path1);
  if (cfg.stage == EraserStage::rotator_plus_diagonal) {
    path1 = polarize(path1, axis::diagonal());
    path2 = polarize(path2, axis::diagonal());
  }
  return {path1, path2};
}

double eraser_intensity_fields(const EraserConfig& cfg) {
  const std::vector<PolarizedBeam> beams = eraser_beams(cfg);
  return em_intensity(beams);
}

double eraser_intensity_statevector(const EraserConfig& cfg) {
  if (!std::isfinite(cfg.phi)) throw ValidationError("phase must be finite");
  // amp[path][pol], pol 0 = H, 1 = V.
  const double h = std::sqrt(0.5);
  std::array<std::array<cplx, 2>, 2> amp{};
  amp[0][0] = h;
  amp[1][0] = h * std::polar(1.0, cfg.phi);
  if (cfg.stage != EraserStage::baseline) {
    const cplx H = amp[0][0], V = amp[0][1];
    amp[0][0] = -V;
    amp[0][1] = H;
  }
  if (cfg.stage == EraserStage::rotator_plus_diagonal) {
    const cplx d = (amp[0][0] + amp[0][1]) * h + (amp[1][0] + amp[1][1]) * h;
    return std::norm(d);
  }
  return std::norm(amp[0][0] + amp[1][0]) + std::norm(amp[0][1] + amp[1][1]);
}

double visibility(std::span<const double> curve) {
  if (curve.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(curve.begin(), curve.end());
  const double sum = *hi + *lo;
  return sum > 0.0 ? (*hi - *lo) / sum : 0.0;
}

AgreementReport formalism_agreement(std::size_t n_phi, const EraserConfig& base) {
  if (n_phi < 2) throw ValidationError("phase sweep needs at least 2 samples");
  AgreementReport report;
  double fs = 0.0, ss = 0.0;
  for (EraserStage stage : kEraserStages) {
    StageAgreement row{stage, {}, {}, {}};
    for (std::size_t j = 0; j < n_phi; ++j) {
      EraserConfig cfg = base;
      cfg.stage = stage;
      cfg.phi = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n_phi);
      row.phi.push_back(cfg.phi);
      row.fields.push_back(eraser_intensity_fields(cfg));
      row.statevector.push_back(eraser_intensity_statevector(cfg));
      fs += row.fields.back() * row.statevector.back();
      ss += row.statevector.back() * row.statevector.back();
    }
    row.visibility_fields = visibility(row.fields);
    row.visibility_statevector = visibility(row.statevector);
    report.stages.push_back(std::move(row));
  }
  report.constant = ss > 0.0 ? fs / ss : 0.0;

  std::ostringstream diff;
  diff.precision(17);
  for (const StageAgreement& row : report.stages) {
    for (std::size_t j = 0; j < row.phi.size(); ++j) {
      const double dev = std::abs(row.fields[j] - report.constant * row.statevector[j]);
      report.max_deviation = std::max(report.max_deviation, dev);
      if (dev > kAgreementTolerance) {
        diff << to_string(row.stage) << " phi=" << row.phi[j] << " fields=" << row.fields[j]
             << " statevector*const=" << report.constant * row.statevector[j] << "\n";
      }
    }
  }
  const auto peak = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); };
  report.diagonal_to_baseline_peak = peak(report.stages[2].fields) / peak(report.stages[0].fields);
  report.agree = report.max_deviation <= kAgreementTolerance;
  report.diff = diff.str();
  return report;
}

void MZConfig::validate() const {
  check_probability(reflectivity, "splitter reflectivity");
  check_probability(detector_efficiency, "detector efficiency");
}

namespace {

// Amplitude term ±t^a s^b; probabilities are built from products of terms so
// squared factors come out as exact powers of (1 − r) and r.
struct Term {
  int sign;
  int t_pow;
  int s_pow;
};

double probability(const std::vector<Term>& terms, double r) {
  double total = 0.0;
  for (const Term& a : terms) {
    for (const Term& b : terms) {
      const int tp = a.t_pow + b.t_pow;
      const int sp = a.s_pow + b.s_pow;
      double v = a.sign * b.sign;
      v *= (tp % 2 == 0) ? std::pow(1.0 - r, tp / 2) : std::pow(std::sqrt(1.0 - r), tp);
      v *= (sp % 2 == 0) ? std::pow(r, sp / 2) : std::pow(std::sqrt(r), sp);
      total += v;
    }
  }
  return total;
}

}  // namespace

MZOutcome mz_probabilities(const MZConfig& cfg) {
  cfg.validate();
  const double r = cfg.reflectivity;
  // First splitter: transmitted arm t, reflected arm s. Second splitter:
  // transmitted arm → bright t, dark s; reflected arm → bright s, dark −t.
  std::vector<Term> bright{{+1, 2, 0}};
  std::vector<Term> dark{{+1, 1, 1}};
  MZOutcome out;
  if (cfg.bomb_present) {
    out.absorbed = r;
  } else {
    bright.push_back({+1, 0, 2});
    dark.push_back({-1, 1, 1});
  }
  out.bright = probability(bright, r);
  out.dark = probability(dark, r);
  return out;
}

double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  const auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return static_cast<double>(mix(mix(seed) ^ counter) >> 11) * 0x1.0p-53;
}

EfficiencyLedger efficiency_account(const MZConfig& cfg, std::uint64_t n_trials, std::uint64_t seed,
                                    Exec exec) {
  cfg.validate();
  if (n_trials < 1) throw ValidationError("efficiency ledger needs at least one trial");
  const MZOutcome p = mz_probabilities(cfg);
  const double eta = cfg.detector_efficiency;

  struct Counts {
    std::uint64_t absorbed = 0, bright = 0, dark = 0, undetected = 0;
  };
  constexpr std::uint64_t kBatch = 4096;
  const std::size_t batches = static_cast<std::size_t>((n_trials + kBatch - 1) / kBatch);
  std::vector<Counts> per_batch(batches);
  for_each_index(batches, exec, [&](std::size_t b) {
    Counts c;
    const std::uint64_t begin = b * kBatch;
    const std::uint64_t end = std::min(n_trials, begin + kBatch);
    for (std::uint64_t i = begin; i < end; ++i) {
      const double u = counter_uniform(seed, 2 * i);
      if (u < p.absorbed) {
        ++c.absorbed;
        continue;
      }
      if (counter_uniform(seed, 2 * i + 1) >= eta) {
        ++c.undetected;
      } else if (u < p.absorbed + p.bright) {
        ++c.bright;
      } else {
        ++c.dark;
      }
    }
    per_batch[b] = c;
  });

  EfficiencyLedger ledger;
  ledger.trials = n_trials;
  ledger.seed = seed;
  for (const Counts& c : per_batch) {
    ledger.absorbed += c.absorbed;
    ledger.detected_bright += c.bright;
    ledger.detected_dark += c.dark;
    ledger.undetected += c.undetected;
  }
  ledger.expected_absorbed = p.absorbed;
  ledger.expected_detected = (1.0 - p.absorbed) * eta;
  ledger.expected_undetected = (1.0 - p.absorbed) * (1.0 - eta);
  ledger.expected_undetected_share = 1.0 - eta;
  const std::uint64_t bound = n_trials - ledger.absorbed;
  ledger.empirical_undetected_share =
      bound > 0 ? static_cast<double>(ledger.undetected) / static_cast<double>(bound) : 0.0;

  const auto within = [](std::uint64_t count, std::uint64_t n, double prob) {
    const double mean = static_cast<double>(n) * prob;
    const double sigma = std::sqrt(static_cast<double>(n) * prob * (1.0 - prob));
    return std::abs(static_cast<double>(count) - mean) <= 3.0 * sigma;
  };
  const std::uint64_t detected = ledger.detected_bright + ledger.detected_dark;
  ledger.within_three_sigma = within(ledger.absorbed, n_trials, ledger.expected_absorbed) &&
                              within(detected, n_trials, ledger.expected_detected) &&
                              within(ledger.undetected, n_trials, ledger.expected_undetected) &&
                              within(ledger.undetected, bound, ledger.expected_undetected_share);
  return ledger;
}

}  // namespace qens
