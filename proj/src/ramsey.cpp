#include "noonsim/ramsey.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "noonsim/dense.hpp"
#include "noonsim/errors.hpp"
#include "noonsim/fredkin.hpp"

namespace noonsim::ramsey {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

std::size_t atom_index(const ModeSystem& system) {
    const std::size_t idx = system.mode_index("atom");
    const ModeSpec& spec = system.modes()[idx];
    if (spec.kind != ModeKind::qubit || spec.cutoff != 1)
        throw ContractError("ramsey: mode 'atom' must be a qubit with cutoff 1");
    return idx;
}

} // namespace

double RamseyParams::phi() const {
    if (n < 1) throw ConfigError("RamseyParams: need at least one photon");
    if (!(g > 0.0) || !(tau_c > 0.0) || !(delta > 0.0))
        throw ConfigError("RamseyParams: g, tau_c, and delta must be positive");
    return g * g * tau_c / delta;
}

ModeSystemPtr ramsey_system(int n) {
    if (n < 1) throw ConfigError("ramsey_system: need at least one photon");
    std::vector<ModeSpec> modes = {{"atom", ModeKind::qubit, 1},
                                   {"a", ModeKind::bosonic, n},
                                   {"b", ModeKind::bosonic, n}};
    std::vector<Constraint> constraints = {{{0, 1, 1}, n}};
    return std::make_shared<ModeSystem>(modes, constraints);
}

LinearOperator ramsey_zone(ModeSystemPtr system, RamseyZone /*which*/) {
    const std::size_t atom = atom_index(*system);
    std::vector<LinearOperator::Triplet> entries;
    entries.reserve(2 * system->dim());
    for (std::size_t col = 0; col < system->dim(); ++col) {
        BasisState occ = system->basis_state(col);
        const int q = occ[atom];
        occ[atom] = 1;
        const auto row_g1 = system->find(occ);
        occ[atom] = 0;
        const auto row_g2 = system->find(occ);
        if (!row_g1 || !row_g2)
            throw ContractError("ramsey_zone: atom qubit flip left the basis");
        entries.push_back({*row_g1, col, complexd(kInvSqrt2, 0.0)});
        entries.push_back({*row_g2, col, complexd(q == 1 ? kInvSqrt2 : -kInvSqrt2, 0.0)});
    }
    return LinearOperator(std::move(system), entries, true);
}

LinearOperator u_ramsey_qfg(const RamseyParams& params) {
    const double phi = params.phi();
    ModeSystemPtr system = ramsey_system(params.n);
    const fredkin::SchwingerOps j = fredkin::schwinger_ops(system, "a", "b");
    const LinearOperator p1 = build_mode_operator(system, "atom", ModeOpKind::number);
    const LinearOperator m0 = (p1 * j.j0).as_hermitian();
    const LinearOperator m2 = (p1 * j.j2).as_hermitian();
    // exp(i phi P1 J0) exp(i phi P1 J2), J2 factor rightmost.
    const DenseMatrix u = propagator(m0, -phi) * propagator(m2, -phi);
    return LinearOperator::from_dense(std::move(system), u);
}

std::vector<RamseyOutcome> run_ramsey_qfg(const RamseyParams& params) {
    const LinearOperator u = u_ramsey_qfg(params);
    const ModeSystemPtr& system = u.system();

    BasisState prep(3, 0);
    prep[system->mode_index("a")] = params.n;
    StateVector psi(system, prep);

    psi = ramsey_zone(system, RamseyZone::r1).apply(psi);
    psi = u.apply(psi);
    psi = ramsey_zone(system, RamseyZone::r2).apply(psi);

    const auto detections =
        measure_occupations(psi, {"atom"}, {1.0}, MeasureMode::exact, 0);

    ModeSystemPtr signal = fredkin::signal_system(params.n);
    std::vector<RamseyOutcome> outcomes;
    outcomes.reserve(detections.size());
    for (const auto& det : detections) {
        RamseyOutcome out{.detected_level = det.true_counts[0] == 1 ? 1 : 2,
                          .probability = det.probability,
                          .conditional_photons =
                              extract_modes(det.conditional, {"a", "b"}, signal)};
        outcomes.push_back(std::move(out));
    }
    std::sort(outcomes.begin(), outcomes.end(),
              [](const RamseyOutcome& x, const RamseyOutcome& y) {
                  return x.detected_level < y.detected_level;
              });
    return outcomes;
}

} // namespace noonsim::ramsey
