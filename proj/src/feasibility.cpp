#include "noonsim/feasibility.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "noonsim/errors.hpp"
#include "noonsim/fredkin.hpp"

namespace noonsim::feasibility {

double raman_rabi(const FeasibilityInput& input) {
    if (input.omega_c < 0.0 || input.g < 0.0 || input.kappa < 0.0 || input.delta < 0.0)
        throw ConfigError("raman_rabi: rates must be nonnegative");
    const double denom = input.kappa * input.kappa + input.delta * input.delta;
    if (denom == 0.0) throw ConfigError("raman_rabi: kappa and delta are both zero");
    return input.omega_c * input.g * input.delta / denom;
}

double dispersive_transit(double g, double delta, double target_phi) {
    if (!(g > 0.0)) throw ConfigError("dispersive_transit: g must be positive");
    if (delta <= 0.0) throw ConfigError("dispersive_transit: delta must be positive");
    if (target_phi < 0.0) throw ConfigError("dispersive_transit: target phase must be nonnegative");
    return target_phi * delta / (g * g);
}

long long atom_limit(const FeasibilityInput& input, double transfer_duration) {
    if (!(transfer_duration > 0.0))
        throw ConfigError("atom_limit: transfer duration must be positive");
    if (input.kappa < 0.0) throw ConfigError("atom_limit: kappa must be nonnegative");
    if (input.kappa == 0.0) return kAtomLimitCap;
    const double per_atom = input.kappa * transfer_duration * kExcitedFraction;
    // Largest N with N * per_atom < 1, reading near-boundary values as below.
    const double bound = (1.0 + 1e-12) / per_atom;
    if (bound >= static_cast<double>(kAtomLimitCap)) return kAtomLimitCap;
    const long long limit = static_cast<long long>(std::floor(bound));
    return limit > 0 ? limit : 0;
}

int bootstrap_requirements(const FeasibilityInput& input) {
    return fredkin::kerr_boost_requirement(input.phi0, std::numbers::pi);
}

FeasibilityReport feasibility_report(const FeasibilityInput& input,
                                     double transfer_duration) {
    FeasibilityReport report;
    report.eta = raman_rabi(input);
    report.k_required = bootstrap_requirements(input);
    report.tau_c = dispersive_transit(input.g, input.delta, std::numbers::pi);
    report.atom_limit_estimate = atom_limit(input, transfer_duration);

    report.notes.push_back(
        "eta = Omega_c*g*Delta/(kappa^2+Delta^2): adiabatic Raman rate of the scheme.");
    report.notes.push_back(
        "tau_c solves g^2*tau_c/Delta = pi exactly (dispersive gate phase).");
    report.notes.push_back("K_required = ceil(pi/phi0) control photons (exact arithmetic).");
    report.notes.push_back(
        "atom_limit is MODEL-BASED: largest N with N*kappa*duration*" +
        std::to_string(kExcitedFraction) +
        " < 1; a frozen toy stand-in, not a derived error analysis.");
    if (input.kappa == 0.0)
        report.notes.push_back("kappa = 0: no cavity decay, atom limit capped at " +
                               std::to_string(kAtomLimitCap) + ".");
    if (input.n_atoms > 0)
        report.notes.push_back(
            "requested n_atoms = " + std::to_string(input.n_atoms) +
            (input.n_atoms <= report.atom_limit_estimate ? " is within" : " exceeds") +
            " the model atom limit.");
    return report;
}

} // namespace noonsim::feasibility
