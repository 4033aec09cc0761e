// Scalar parameter arithmetic for the experimental-feasibility estimates:
// adiabatic Raman rate, dispersive transit time, control-photon requirement,
// and an explicitly labeled toy bound on the atom number.
#pragma once

#include <string>
#include <vector>

namespace noonsim::feasibility {

struct FeasibilityInput {
    double omega_c = 0.0;            // classical Raman Rabi frequency (rad/s)
    double g = 0.0;                  // cavity coupling (rad/s)
    double kappa = 0.0;              // cavity decay (rad/s)
    double delta = 0.0;              // detuning (rad/s)
    int n_atoms = 0;                 // requested atom number
    double detector_efficiency = 1.0;
    double phi0 = 0.0;               // per-photon cross-Kerr phase (rad)
};

struct FeasibilityReport {
    double eta = 0.0;             // effective atom-field rate (rad/s)
    int k_required = 0;           // control photons for a pi swap
    double tau_c = 0.0;           // cavity transit time (s)
    long long atom_limit_estimate = 0;
    std::vector<std::string> notes;
};

// eta = Omega_c * g * Delta / (kappa^2 + Delta^2).
double raman_rabi(const FeasibilityInput& input);

// tau_c = target_phi * Delta / g^2, the transit time giving dispersive phase
// g^2 tau_c / Delta = target_phi.
double dispersive_transit(double g, double delta, double target_phi);

// Largest atom number N keeping the toy noise estimate
//   N * kappa * transfer_duration * kExcitedFraction
// below 1. MODEL-BASED: kExcitedFraction is a frozen stand-in for a full
// noise analysis, and estimates within 1e-12 (relative) of the boundary
// count as below it so IEEE rounding cannot flip an intended-exact case.
// kappa = 0 means no decay; the result is capped at kAtomLimitCap.
inline constexpr double kExcitedFraction = 0.01;
inline constexpr long long kAtomLimitCap = 1000000;
long long atom_limit(const FeasibilityInput& input, double transfer_duration);

// Control photons needed to boost the per-photon Kerr phase phi0 to pi.
int bootstrap_requirements(const FeasibilityInput& input);

// All of the above plus derivation notes, with tau_c solved for a pi phase.
FeasibilityReport feasibility_report(const FeasibilityInput& input,
                                     double transfer_duration);

} // namespace noonsim::feasibility
