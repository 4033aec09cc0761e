#include "noonsim/fredkin.hpp"

#include <cmath>
#include <numbers>

#include "noonsim/errors.hpp"
#include "noonsim/optics.hpp"

namespace noonsim::fredkin {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_2pi(double angle) {
    double out = std::fmod(angle, 2.0 * kPi);
    if (out < 0.0) out += 2.0 * kPi;
    return out;
}

// Fixed phase plate on mode b applied before detection. With the project
// splitter convention the raw conditional states differ from the published
// two-component form by the N-dependent relative phase e^{-i pi (N+1)/2};
// this plate cancels it. The value was determined once by the formula-match
// test and is frozen here (calibration constant, not a tunable).
double calibration_phase(int n) {
    return wrap_2pi(kPi * (n + 1) / 2.0) / n;
}

} // namespace

SchwingerOps schwinger_ops(ModeSystemPtr system, const std::string& mode_a,
                           const std::string& mode_b) {
    const std::size_t ia = system->mode_index(mode_a);
    const std::size_t ib = system->mode_index(mode_b);
    std::vector<LinearOperator::Triplet> diag;
    for (std::size_t i = 0; i < system->dim(); ++i) {
        const BasisState& occ = system->basis_state(i);
        const double total = occ[ia] + occ[ib];
        if (total != 0.0) diag.push_back({i, i, complexd(total / 2.0, 0.0)});
    }
    LinearOperator j0(system, diag, true);

    const LinearOperator up = transition_operator(system, {{mode_a, +1}, {mode_b, -1}});
    const LinearOperator down = transition_operator(system, {{mode_b, +1}, {mode_a, -1}});
    // (a^dagger b - a b^dagger) / 2i
    LinearOperator j2 = (up + down.scaled(complexd(-1.0, 0.0)))
                            .scaled(complexd(0.0, -0.5))
                            .as_hermitian();
    return {std::move(j0), std::move(j2)};
}

LinearOperator u_qfg(ModeSystemPtr system, double chi, const std::string& control_mode) {
    const SchwingerOps j = schwinger_ops(system, "a", "b");
    const LinearOperator n_c = build_mode_operator(system, control_mode, ModeOpKind::number);
    const LinearOperator m0 = (n_c * j.j0).as_hermitian();
    const LinearOperator m2 = (n_c * j.j2).as_hermitian();
    // exp(i chi n_c J0) exp(i chi n_c J2), J2 factor rightmost.
    const DenseMatrix u = propagator(m0, -chi) * propagator(m2, -chi);
    return LinearOperator::from_dense(std::move(system), u);
}

LinearOperator circuit_qfg(ModeSystemPtr system, double chi, const std::string& control_mode) {
    const LinearOperator bs1 = beam_splitter(system, "a", "b", kPi / 4.0);
    const LinearOperator kerr = cross_kerr(system, {"b", control_mode, chi});
    const LinearOperator bs2 = beam_splitter(system, "a", "b", -kPi / 4.0);
    return bs2 * kerr * bs1;
}

ModeSystemPtr signal_system(int n) {
    if (n < 1) throw ConfigError("signal_system: need at least one photon");
    std::vector<ModeSpec> modes = {{"a", ModeKind::bosonic, n}, {"b", ModeKind::bosonic, n}};
    std::vector<Constraint> constraints = {{{1, 1}, n}};
    return std::make_shared<ModeSystem>(modes, constraints);
}

StateVector noon_state(ModeSystemPtr system, const std::string& mode_a,
                       const std::string& mode_b, int n) {
    const std::size_t ia = system->mode_index(mode_a);
    const std::size_t ib = system->mode_index(mode_b);
    BasisState all_a(system->mode_count(), 0);
    all_a[ia] = n;
    BasisState all_b(system->mode_count(), 0);
    all_b[ib] = n;
    const auto i = system->find(all_a);
    const auto j = system->find(all_b);
    if (!i || !j) throw ConfigError("noon_state: components not in basis");
    std::vector<complexd> amps(system->dim(), complexd(0.0, 0.0));
    const double r = 1.0 / std::sqrt(2.0);
    amps[*i] = complexd(r, 0.0);
    amps[*j] = complexd(r, 0.0);
    return StateVector(std::move(system), std::move(amps));
}

LinearOperator phase_correction(int n_d1, int n_d2, int n, int k, ModeSystemPtr signal) {
    if (n_d1 + n_d2 != k)
        throw PostselectionError("phase_correction: outcome is not heralded (n_d1+n_d2 != K)");
    if (n < 1) throw ConfigError("phase_correction: n must be >= 1");
    // The heralded state is [(-i)^{n_d2}|N,0> + i(-i)^{n_d1}|0,N>]/sqrt(2);
    // N theta must cancel the relative phase i(-i)^{n_d1-n_d2} (mod 2pi).
    const double angle = wrap_2pi((n_d1 - n_d2 - 1) * kPi / 2.0) / n;
    return phase_shifter(std::move(signal), "b", angle);
}

int kerr_boost_requirement(double phi0, double target) {
    if (!(phi0 > 0.0)) throw ConfigError("kerr_boost_requirement: phi0 must be positive");
    return static_cast<int>(std::ceil(target / phi0));
}

namespace {

std::vector<DetectionOutcome> run_joint(int n, int k, double phi0, double efficiency,
                                        MeasureMode mode, std::uint64_t seed,
                                        bool single_photon_prep) {
    if (n < 1) throw ConfigError("run: signal photon number must be >= 1");
    if (k < 1) throw ConfigError("run: control photon number must be >= 1");
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
        throw ConfigError("run: detector_efficiency must lie in [0,1]");
    const std::size_t joint_dim =
        static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(k + 1);
    if (joint_dim > kDenseLimit)
        throw ResourceError("run: joint dimension " + std::to_string(joint_dim) +
                            " exceeds the dense limit " + std::to_string(kDenseLimit));
    if (efficiency == 0.0 && k >= 1)
        throw PostselectionError("run: efficiency 0 leaves the herald set empty");

    std::vector<ModeSpec> modes = {{"a", ModeKind::bosonic, n},
                                   {"b", ModeKind::bosonic, n},
                                   {"c", ModeKind::bosonic, k},
                                   {"d", ModeKind::bosonic, k}};
    std::vector<Constraint> constraints = {{{1, 1, 0, 0}, n}, {{0, 0, 1, 1}, k}};
    auto sys = std::make_shared<ModeSystem>(modes, constraints);

    StateVector state(sys, BasisState{n, 0, k, 0});
    if (single_photon_prep) {
        // One photon behind a 50/50 splitter; the fixed -pi/2 plate on d makes
        // the control state (|1,0> + |0,1>)/sqrt(2), the K=1 NOON.
        if (k != 1) throw ContractError("run: single-photon preparation requires K=1");
        state = beam_splitter(sys, "c", "d", kPi / 4.0).apply(state);
        state = phase_shifter(sys, "d", -kPi / 2.0).apply(state);
    } else {
        std::vector<complexd> amps(sys->dim(), complexd(0.0, 0.0));
        const double r = 1.0 / std::sqrt(2.0);
        amps[*sys->find({n, 0, k, 0})] = complexd(r, 0.0);
        amps[*sys->find({n, 0, 0, k})] = complexd(r, 0.0);
        state = StateVector(sys, std::move(amps));
    }

    state = circuit_qfg(sys, phi0, "c").apply(state);
    state = phase_shifter(sys, "b", calibration_phase(n)).apply(state);
    state = beam_splitter(sys, "c", "d", kPi / 4.0).apply(state);

    const auto records =
        measure_occupations(state, {"c", "d"}, {efficiency, efficiency}, mode, seed);

    auto signal = signal_system(n);
    std::vector<DetectionOutcome> outcomes;
    outcomes.reserve(records.size());
    bool any_heralded = false;
    for (const auto& rec : records) {
        DetectionOutcome out{rec.detected_counts[0], rec.detected_counts[1],
                             rec.detected_counts[0] + rec.detected_counts[1] == k,
                             rec.probability,
                             extract_modes(rec.conditional, {"a", "b"}, signal)};
        if (out.heralded) {
            out.conditional_state =
                phase_correction(out.n_d1, out.n_d2, n, k, signal).apply(out.conditional_state);
            any_heralded = true;
        }
        outcomes.push_back(std::move(out));
    }
    if (mode == MeasureMode::exact && !any_heralded)
        throw PostselectionError("run: no heralded outcome is reachable");
    return outcomes;
}

} // namespace

std::vector<DetectionOutcome> run_single_control(int n, double chi) {
    return run_joint(n, 1, chi, 1.0, MeasureMode::exact, 0, true);
}

std::vector<DetectionOutcome> run_bootstrap(const BootstrapConfig& cfg) {
    return run_joint(cfg.n, cfg.k, cfg.phi0, cfg.detector_efficiency, cfg.mode, cfg.seed,
                     false);
}

} // namespace noonsim::fredkin
