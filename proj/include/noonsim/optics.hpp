// Linear-optical elements (beam splitter, phase shifter), cross-Kerr
// interaction, and the wave-plate polarization-to-path conversion, all as
// unitaries over the constrained occupation basis.
//
// Beam-splitter convention (fixed project-wide): B(theta) = exp[i theta
// (a^dagger b + a b^dagger)], so theta = pi/4 is the 50/50 splitter with
// a^dagger -> (a^dagger + i b^dagger)/sqrt(2).
#pragma once

#include <string>

#include "noonsim/fock.hpp"

namespace noonsim {

struct KerrCoupling {
    std::string mode_a;
    std::string mode_b;
    double phi0 = 0.0; // radians of phase per photon pair
};

LinearOperator beam_splitter(ModeSystemPtr system, const std::string& mode_a,
                             const std::string& mode_b, double theta);

// Diagonal e^{i phi n_mode}.
LinearOperator phase_shifter(ModeSystemPtr system, const std::string& mode, double phi);

// Diagonal e^{i phi0 n_A n_B}.
LinearOperator cross_kerr(ModeSystemPtr system, const KerrCoupling& coupling);

// Lossless relabeling of the two circular-polarization modes L, R onto the
// spatial paths a_path, b_path (the quarter-wave-plate / polarizing-splitter
// / half-wave-plate chain sends each circular polarization to its own path).
StateVector polarization_to_path(const StateVector& psi);

} // namespace noonsim
