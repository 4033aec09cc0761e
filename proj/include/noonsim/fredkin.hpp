// Quantum Fredkin Gate NOON generation: the single-photon-control scheme,
// its bootstrapped variant with a K-photon NOON control, heralded detection,
// and the per-outcome phase correction.
//
// Mode conventions: signal modes are labeled "a" and "b"; the control
// interferometer uses "c" (the Kerr-coupled arm, detector D1) and "d"
// (detector D2). The per-sector gate on the signal is
//   U = exp(i chi n_c J0) exp(i chi n_c J2),
// realized as a Mach-Zehnder with a cross-Kerr element: B(-pi/4) on (a,b),
// then exp(i chi n_b n_c), preceded by B(+pi/4). With the project-wide
// splitter convention this composition equals U exactly, so the calibration
// phases the equivalence test is allowed to introduce are frozen at zero.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "noonsim/fock.hpp"

namespace noonsim::fredkin {

struct SchwingerOps {
    LinearOperator j0; // (a^dagger a + b^dagger b)/2
    LinearOperator j2; // (a^dagger b - a b^dagger)/2i
};

SchwingerOps schwinger_ops(ModeSystemPtr system, const std::string& mode_a,
                           const std::string& mode_b);

// exp(i chi n_control J0) * exp(i chi n_control J2); the J2 factor acts first.
LinearOperator u_qfg(ModeSystemPtr system, double chi, const std::string& control_mode);

// The explicit circuit B(-pi/4)_ab o cross_kerr(b, control; chi) o B(+pi/4)_ab.
// Equal to u_qfg sector-by-sector (frozen calibration phases: none needed).
LinearOperator circuit_qfg(ModeSystemPtr system, double chi, const std::string& control_mode);

struct BootstrapConfig {
    int n = 1;                        // signal photons
    int k = 1;                        // control photons
    double phi0 = 0.0;                // per-photon cross-Kerr phase (radians)
    double detector_efficiency = 1.0; // per detected photon
    MeasureMode mode = MeasureMode::exact;
    std::uint64_t seed = 0;
};

struct DetectionOutcome {
    int n_d1 = 0; // detected count on mode c
    int n_d2 = 0; // detected count on mode d
    bool heralded = false;
    double probability = 0.0;
    StateVector conditional_state; // signal modes a,b; phase-corrected when heralded
};

// Two-mode signal system with n_a + n_b = n fixed.
ModeSystemPtr signal_system(int n);

// (|n,0> + |0,n>)/sqrt(2) over the two listed modes.
StateVector noon_state(ModeSystemPtr system, const std::string& mode_a,
                       const std::string& mode_b, int n);

// Fig-style single-photon control: |N,0>_ab with one photon behind a 50/50
// splitter on (c,d); exact detection.
std::vector<DetectionOutcome> run_single_control(int n, double chi);

// K-photon NOON control on (c,d), cross-Kerr per-photon phase phi0, detection
// with the configured efficiency; heralds on n_d1 + n_d2 = K.
std::vector<DetectionOutcome> run_bootstrap(const BootstrapConfig& cfg);

// Phase shifter on mode b with the angle (in [0, 2pi)) that cancels the
// heralded conditional state's relative phase i(-i)^{n_d1}/(-i)^{n_d2},
// mapping it to (|N,0> + |0,N>)/sqrt(2) up to global phase.
LinearOperator phase_correction(int n_d1, int n_d2, int n, int k, ModeSystemPtr signal);

// Smallest K with K * phi0 >= target.
int kerr_boost_requirement(double phi0, double target);

} // namespace noonsim::fredkin
