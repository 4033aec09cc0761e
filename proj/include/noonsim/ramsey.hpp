// Dispersive-cavity Quantum Fredkin Gate inside a Ramsey interferometer: an
// atom crossing a bimodal cavity imparts a photon-number phase g^2 tau_c/Delta
// when it is in level g1, and the two classical Ramsey zones convert which-level
// information into the heralded NOON sign.
//
// Mode conventions: the joint system carries a qubit mode "atom" (occupation
// 1 = |g1>, 0 = |g2>) and signal modes "a", "b" with n_a + n_b = N. The atom
// is prepared in |g2> and read out in the {g1, g2} basis after the second zone.
#pragma once

#include <string>
#include <vector>

#include "noonsim/fock.hpp"

namespace noonsim::ramsey {

struct RamseyParams {
    int n = 1;          // signal photons
    double g = 0.0;     // atom-cavity coupling (rad/s)
    double tau_c = 0.0; // cavity transit time (s)
    double delta = 0.0; // atom-cavity detuning (rad/s)

    // Dispersive phase g^2 * tau_c / delta; validates positivity.
    double phi() const;
};

enum class RamseyZone { r1, r2 };

// Joint system: qubit "atom" plus signal modes "a", "b" with n_a + n_b = n.
ModeSystemPtr ramsey_system(int n);

// Classical-field mixing zone on the atom qubit, identity on the photons:
// |g1> -> (|g1> + |g2>)/sqrt(2), |g2> -> (|g1> - |g2>)/sqrt(2). The model
// uses the same matrix for both zones, so `which` does not change the result.
LinearOperator ramsey_zone(ModeSystemPtr system, RamseyZone which);

// exp(i phi P1 J0) exp(i phi P1 J2) with P1 = |g1><g1|; identity on the g2
// sector, and on the g1 sector the same gate as the one-photon-control QFG.
LinearOperator u_ramsey_qfg(const RamseyParams& params);

struct RamseyOutcome {
    int detected_level = 0; // 1 = |g1>, 2 = |g2>
    double probability = 0.0;
    StateVector conditional_photons; // on the two-mode signal system
};

// Full interferometer: atom |g2>, photons |N,0>; R1, dispersive gate, R2,
// then exact atomic readout. Returns the outcomes that occur (nonzero
// probability), ordered g1 before g2. At phi = pi the conditionals are the
// NOON pair [|N,0> -+ e^{-i N pi/2}|0,N>]/sqrt(2): g1 heralds the minus sign,
// g2 the plus sign, each with probability 1/2.
std::vector<RamseyOutcome> run_ramsey_qfg(const RamseyParams& params);

} // namespace noonsim::ramsey
