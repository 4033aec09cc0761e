#include "noonsim/optics.hpp"

#include <cmath>

#include "noonsim/errors.hpp"

namespace noonsim {

LinearOperator beam_splitter(ModeSystemPtr system, const std::string& mode_a,
                             const std::string& mode_b, double theta) {
    if (mode_a == mode_b) throw ConfigError("beam_splitter: modes must differ");
    // Generator a^dagger b + a b^dagger, built atomically so it stays inside
    // photon-number-constrained bases.
    const LinearOperator gen =
        (transition_operator(system, {{mode_a, +1}, {mode_b, -1}}) +
         transition_operator(system, {{mode_b, +1}, {mode_a, -1}}))
            .as_hermitian();
    // exp(i theta G) = exp(-i G (-theta)).
    return LinearOperator::from_dense(system, propagator(gen, -theta));
}

LinearOperator phase_shifter(ModeSystemPtr system, const std::string& mode, double phi) {
    const std::size_t idx = system->mode_index(mode);
    std::vector<LinearOperator::Triplet> entries;
    entries.reserve(system->dim());
    for (std::size_t i = 0; i < system->dim(); ++i) {
        const double n = static_cast<double>(system->basis_state(i)[idx]);
        entries.push_back({i, i, std::polar(1.0, phi * n)});
    }
    return LinearOperator(std::move(system), entries, false);
}

LinearOperator cross_kerr(ModeSystemPtr system, const KerrCoupling& coupling) {
    if (coupling.mode_a == coupling.mode_b)
        throw ConfigError("cross_kerr: modes must differ");
    if (!std::isfinite(coupling.phi0)) throw ConfigError("cross_kerr: phi0 must be finite");
    const std::size_t ia = system->mode_index(coupling.mode_a);
    const std::size_t ib = system->mode_index(coupling.mode_b);
    std::vector<LinearOperator::Triplet> entries;
    entries.reserve(system->dim());
    for (std::size_t i = 0; i < system->dim(); ++i) {
        const BasisState& occ = system->basis_state(i);
        const double pairs = static_cast<double>(occ[ia]) * static_cast<double>(occ[ib]);
        entries.push_back({i, i, std::polar(1.0, coupling.phi0 * pairs)});
    }
    return LinearOperator(std::move(system), entries, false);
}

StateVector polarization_to_path(const StateVector& psi) {
    const ModeSystemPtr& in = psi.system();
    if (in->mode_count() != 2)
        throw ConfigError("polarization_to_path: expected exactly the two modes L, R");
    const std::size_t il = in->mode_index("L");
    const std::size_t ir = in->mode_index("R");

    std::vector<ModeSpec> out_modes(2);
    out_modes[0] = {"a_path", ModeKind::bosonic, in->modes()[il].cutoff};
    out_modes[1] = {"b_path", ModeKind::bosonic, in->modes()[ir].cutoff};
    // Mirror any constraints so the output basis matches tuple-for-tuple.
    std::vector<Constraint> out_constraints;
    for (const auto& c : in->constraints()) {
        Constraint mapped;
        mapped.coeffs = {c.coeffs[il], c.coeffs[ir]};
        mapped.value = c.value;
        out_constraints.push_back(mapped);
    }
    auto out = std::make_shared<ModeSystem>(out_modes, out_constraints);

    std::vector<complexd> amps(out->dim(), complexd(0.0, 0.0));
    for (std::size_t i = 0; i < psi.dim(); ++i) {
        if (psi[i] == complexd(0.0, 0.0)) continue;
        const BasisState& occ = in->basis_state(i);
        const auto j = out->find({occ[il], occ[ir]});
        if (!j) throw ContractError("polarization_to_path: relabeled tuple missing");
        amps[*j] = psi[i];
    }
    return StateVector(out, std::move(amps));
}

} // namespace noonsim
