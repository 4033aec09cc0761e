#include "noonsim/atomcavity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "noonsim/errors.hpp"
#include "noonsim/optics.hpp"

namespace noonsim::atomcavity {

namespace {

constexpr double kPi = std::numbers::pi;

double choose(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double out = 1.0;
    for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
    return out;
}

// Dicke-basis amplitudes of (|a> +/- |b>)^{tensor N} / 2^{N/2}, indexed by
// n_a ascending (matching spin_system enumeration order).
std::vector<complexd> coherent_amplitudes(int n_atoms, double sign_b) {
    std::vector<complexd> amps(n_atoms + 1);
    const double scale = std::pow(2.0, -0.5 * n_atoms);
    for (int na = 0; na <= n_atoms; ++na) {
        const int nb = n_atoms - na;
        const double parity = (sign_b < 0.0 && nb % 2 == 1) ? -1.0 : 1.0;
        amps[na] = complexd(parity * std::sqrt(choose(n_atoms, na)) * scale, 0.0);
    }
    return amps;
}

} // namespace

ModeSystemPtr spin_system(int n_atoms) {
    if (n_atoms < 1) throw ConfigError("spin_system: need at least one atom");
    std::vector<ModeSpec> modes = {{"atom_a", ModeKind::atomic_population, n_atoms},
                                   {"atom_b", ModeKind::atomic_population, n_atoms}};
    std::vector<Constraint> constraints = {{{1, 1}, n_atoms}};
    return std::make_shared<ModeSystem>(modes, constraints);
}

StateVector coherent_plus_x(int n_atoms) {
    return StateVector(spin_system(n_atoms), coherent_amplitudes(n_atoms, +1.0));
}

LinearOperator ghz_hamiltonian(int n_atoms, double eta) {
    auto sys = spin_system(n_atoms);
    const double s = 0.5 * n_atoms;
    std::vector<LinearOperator::Triplet> entries;
    for (std::size_t i = 0; i < sys->dim(); ++i) {
        const BasisState& occ = sys->basis_state(i);
        const double m = 0.5 * (occ[0] - occ[1]);
        const double value = eta * (s * (s + 1.0) - m * m + m);
        if (value != 0.0) entries.push_back({i, i, complexd(value, 0.0)});
    }
    return LinearOperator(std::move(sys), entries, true);
}

StateVector evolve_ghz(int n_atoms, double eta, double t) {
    return evolve_exact(ghz_hamiltonian(n_atoms, eta), coherent_plus_x(n_atoms), t);
}

double ghz_fidelity(const StateVector& state) {
    const int n_atoms = static_cast<int>(state.dim()) - 1;
    const StateVector plus(state.system(), coherent_amplitudes(n_atoms, +1.0));
    const StateVector minus(state.system(), coherent_amplitudes(n_atoms, -1.0));
    const double overlap =
        std::abs(inner_product(plus, state)) + std::abs(inner_product(minus, state));
    return overlap * overlap / 2.0;
}

GhzScanResult ghz_scan(int n_atoms, double step, bool keep_samples) {
    if (!(step > 0.0)) throw ConfigError("ghz_scan: step must be positive");
    // The Hamiltonian is diagonal, so the scan evaluates analytic phases
    // directly; evolve_ghz/evolve_exact agreement is covered by tests.
    const LinearOperator h = ghz_hamiltonian(n_atoms, 1.0);
    std::vector<double> eigen(h.dim());
    for (std::size_t i = 0; i < h.dim(); ++i) eigen[i] = h.entry(i, i).real();
    const StateVector psi0 = coherent_plus_x(n_atoms);

    auto fidelity_at = [&](double angle) {
        std::vector<complexd> amps(psi0.dim());
        for (std::size_t i = 0; i < psi0.dim(); ++i)
            amps[i] = psi0[i] * std::polar(1.0, -eigen[i] * angle);
        return ghz_fidelity(StateVector(psi0.system(), std::move(amps)));
    };

    GhzScanResult result;
    const int count = static_cast<int>(std::ceil(2.0 * kPi / step));
    if (keep_samples) result.samples.reserve(count);
    for (int i = 1; i <= count; ++i) {
        const double angle = std::min(i * step, 2.0 * kPi);
        const double f = fidelity_at(angle);
        if (keep_samples) result.samples.emplace_back(angle, f);
        if (f > result.best_fidelity) {
            result.best_fidelity = f;
            result.best_angle = angle;
        }
    }

    // Golden-section refinement on the bracketing interval.
    const double gold = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = std::max(result.best_angle - step, step * 0.5);
    double hi = std::min(result.best_angle + step, 2.0 * kPi);
    double x1 = hi - gold * (hi - lo);
    double x2 = lo + gold * (hi - lo);
    double f1 = fidelity_at(x1);
    double f2 = fidelity_at(x2);
    for (int iter = 0; iter < 80; ++iter) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gold * (hi - lo);
            f2 = fidelity_at(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gold * (hi - lo);
            f1 = fidelity_at(x1);
        }
    }
    const double refined = 0.5 * (lo + hi);
    const double f_refined = fidelity_at(refined);
    if (f_refined > result.best_fidelity) {
        result.best_fidelity = f_refined;
        result.best_angle = refined;
    }
    return result;
}

StateVector raman_rotation(const StateVector& state, double angle) {
    const ModeSystemPtr& sys = state.system();
    // S_axis = -S_y = (a b^dagger - a^dagger b)/2i over the atomic modes.
    const LinearOperator up = transition_operator(sys, {{"atom_a", +1}, {"atom_b", -1}});
    const LinearOperator down = transition_operator(sys, {{"atom_b", +1}, {"atom_a", -1}});
    const LinearOperator axis =
        (down + up.scaled(complexd(-1.0, 0.0))).scaled(complexd(0.0, -0.5)).as_hermitian();
    return evolve_exact(axis, state, angle);
}

PulseSchedule make_schedule(const RampSpec& spec) {
    if (!(spec.duration > 0.0)) throw ConfigError("make_schedule: duration must be positive");
    if (spec.peak < 0.0) throw ConfigError("make_schedule: peak must be nonnegative");
    PulseSchedule schedule;
    schedule.duration = spec.duration;
    const double peak = spec.peak;
    const double duration = spec.duration;
    switch (spec.shape) {
        case RampShape::constant:
            schedule.value = [peak](double) { return peak; };
            break;
        case RampShape::linear:
            schedule.value = [peak, duration](double t) { return peak * t / duration; };
            break;
        case RampShape::tanh_ramp: {
            // Monotone 0 -> peak, exactly 0 at t=0 and peak at t=duration.
            const double alpha = 4.0;
            const double norm = 2.0 * std::tanh(alpha);
            schedule.value = [peak, duration, alpha, norm](double t) {
                return peak * (std::tanh(alpha * (2.0 * t / duration - 1.0)) + std::tanh(alpha)) /
                       norm;
            };
            break;
        }
    }
    return schedule;
}

ModeSystemPtr noon_gun_system(int n_atoms) {
    if (n_atoms < 1) throw ConfigError("noon_gun_system: need at least one atom");
    const int n = n_atoms;
    std::vector<ModeSpec> modes = {
        {"a", ModeKind::atomic_population, n},     {"a_exc", ModeKind::atomic_population, n},
        {"b", ModeKind::atomic_population, n},     {"b_exc", ModeKind::atomic_population, n},
        {"g", ModeKind::atomic_population, n},     {"L", ModeKind::bosonic, n},
        {"R", ModeKind::bosonic, n}};
    std::vector<Constraint> constraints = {
        {{1, 1, 1, 1, 1, 0, 0}, n}, // total atoms
        {{0, 0, 0, 0, 1, -1, -1}, 0} // each atom in g has emitted one photon
    };
    return std::make_shared<ModeSystem>(modes, constraints);
}

namespace {

// Pump part (per unit Omega_P) and cavity part, built on a shared system so
// H(Omega) = cavity + Omega * pump can be reassembled cheaply along a ramp.
LinearOperator pump_term(const ModeSystemPtr& sys) {
    return transition_operator(sys, {{"a_exc", +1}, {"a", -1}}) +
           transition_operator(sys, {{"a", +1}, {"a_exc", -1}}) +
           transition_operator(sys, {{"b_exc", +1}, {"b", -1}}) +
           transition_operator(sys, {{"b", +1}, {"b_exc", -1}});
}

LinearOperator cavity_term(const ModeSystemPtr& sys, double g_l, double g_r) {
    const complexd gl(g_l, 0.0);
    const complexd gr(g_r, 0.0);
    return transition_operator(sys, {{"L", -1}, {"a_exc", +1}, {"g", -1}}, gl) +
           transition_operator(sys, {{"L", +1}, {"a_exc", -1}, {"g", +1}}, gl) +
           transition_operator(sys, {{"R", -1}, {"b_exc", +1}, {"g", -1}}, gr) +
           transition_operator(sys, {{"R", +1}, {"b_exc", -1}, {"g", +1}}, gr);
}

} // namespace

LinearOperator noon_gun_hamiltonian(const NoonGunParams& params, double omega_p) {
    if (!(params.g_l > 0.0) || !(params.g_r > 0.0))
        throw ConfigError("noon_gun_hamiltonian: couplings must be positive");
    auto sys = noon_gun_system(params.n_atoms);
    return (cavity_term(sys, params.g_l, params.g_r) +
            pump_term(sys).scaled(complexd(omega_p, 0.0)))
        .as_hermitian();
}

StateVector dark_state(int n_atoms, int manifold, double omega_p, double g) {
    if (!(g > 0.0)) throw ConfigError("dark_state: g must be positive");
    if (manifold != 1 && manifold != 2) throw ConfigError("dark_state: manifold must be 1 or 2");
    auto sys = noon_gun_system(n_atoms);
    std::vector<complexd> amps(sys->dim(), complexd(0.0, 0.0));
    const double ratio = -omega_p / g;
    for (int j = 0; j <= n_atoms; ++j) {
        double coeff = 1.0;
        for (int p = 0; p < j; ++p) coeff *= ratio;
        double denom = 1.0;
        for (int p = 2; p <= n_atoms - j; ++p) denom *= p; // (N-j)!
        double jfact = 1.0;
        for (int p = 2; p <= j; ++p) jfact *= p; // j!
        coeff /= std::sqrt(denom * jfact * jfact);
        BasisState occ(sys->mode_count(), 0);
        if (manifold == 1) {
            occ[sys->mode_index("a")] = n_atoms - j;
            occ[sys->mode_index("L")] = j;
        } else {
            occ[sys->mode_index("b")] = n_atoms - j;
            occ[sys->mode_index("R")] = j;
        }
        occ[sys->mode_index("g")] = j;
        amps[*sys->find(occ)] = complexd(coeff, 0.0);
    }
    return StateVector(std::move(sys), std::move(amps)).normalized();
}

StateVector embed_atomic(const StateVector& spin_state) {
    const int n_atoms = static_cast<int>(spin_state.dim()) - 1;
    auto full = noon_gun_system(n_atoms);
    std::vector<complexd> amps(full->dim(), complexd(0.0, 0.0));
    const ModeSystemPtr& spin = spin_state.system();
    for (std::size_t i = 0; i < spin_state.dim(); ++i) {
        if (spin_state[i] == complexd(0.0, 0.0)) continue;
        const BasisState& occ = spin->basis_state(i);
        BasisState target(full->mode_count(), 0);
        target[full->mode_index("a")] = occ[0];
        target[full->mode_index("b")] = occ[1];
        amps[*full->find(target)] = spin_state[i];
    }
    return StateVector(std::move(full), std::move(amps));
}

namespace {

// Ideal-transfer image: every atom in level x ends in g having emitted one
// photon into the matching cavity mode.
StateVector ideal_transfer_image(const StateVector& initial) {
    const ModeSystemPtr& sys = initial.system();
    const std::size_t ia = sys->mode_index("a");
    const std::size_t ib = sys->mode_index("b");
    const std::size_t ig = sys->mode_index("g");
    const std::size_t il = sys->mode_index("L");
    const std::size_t ir = sys->mode_index("R");
    std::vector<complexd> amps(sys->dim(), complexd(0.0, 0.0));
    for (std::size_t i = 0; i < initial.dim(); ++i) {
        if (initial[i] == complexd(0.0, 0.0)) continue;
        const BasisState& occ = sys->basis_state(i);
        BasisState target(sys->mode_count(), 0);
        target[ig] = occ[ia] + occ[ib] + occ[ig];
        target[il] = occ[ia] + occ[il];
        target[ir] = occ[ib] + occ[ir];
        const auto j = sys->find(target);
        if (!j) throw ContractError("ideal_transfer_image: image tuple missing");
        amps[*j] += initial[i];
    }
    return StateVector(sys, std::move(amps));
}

} // namespace

StirapReport run_stirap(const NoonGunParams& params, const StateVector& initial) {
    auto sys = initial.system();
    if (!sys->compatible(*noon_gun_system(params.n_atoms)))
        throw ContractError("run_stirap: initial state is not on the five-level basis");
    if (!(params.g_l > 0.0) || !(params.g_r > 0.0))
        throw ConfigError("run_stirap: couplings must be positive");
    const LinearOperator h_pump = pump_term(sys);
    const LinearOperator h_cavity = cavity_term(sys, params.g_l, params.g_r);

    const PulseSchedule schedule = make_schedule(params.schedule);
    const int steps = std::max(1, params.schedule.samples);
    const int stride = std::max(1, steps / 256);

    auto builder = [&](double omega) {
        return (h_cavity + h_pump.scaled(complexd(omega, 0.0))).as_hermitian();
    };

    StirapReport report{.trajectory = {},
                        .final_state = initial,
                        .target_fidelity = 0.0,
                        .max_excited_population = 0.0,
                        .leakage = 0.0};
    report.trajectory = evolve_timedep(builder, schedule, initial, steps, stride);
    report.final_state = report.trajectory.back().state;

    const LinearOperator n_exc =
        (build_mode_operator(sys, "a_exc", ModeOpKind::number) +
         build_mode_operator(sys, "b_exc", ModeOpKind::number))
            .as_hermitian();
    for (const auto& point : report.trajectory)
        report.max_excited_population =
            std::max(report.max_excited_population, expectation(n_exc, point.state).real());

    // Leakage: probability outside the (N_A, N_B) = (n_a+n_a_exc+n_L,
    // n_b+n_b_exc+n_R) sectors populated by the initial state. Both totals
    // commute with the Hamiltonian, so any growth is integration error.
    const std::size_t ia = sys->mode_index("a");
    const std::size_t iae = sys->mode_index("a_exc");
    const std::size_t ib = sys->mode_index("b");
    const std::size_t ibe = sys->mode_index("b_exc");
    const std::size_t il = sys->mode_index("L");
    const std::size_t ir = sys->mode_index("R");
    auto sector = [&](std::size_t i) {
        const BasisState& occ = sys->basis_state(i);
        return std::pair<int, int>(occ[ia] + occ[iae] + occ[il], occ[ib] + occ[ibe] + occ[ir]);
    };
    std::vector<std::pair<int, int>> initial_sectors;
    for (std::size_t i = 0; i < initial.dim(); ++i) {
        if (std::abs(initial[i]) <= 1e-14) continue;
        const auto s = sector(i);
        if (std::find(initial_sectors.begin(), initial_sectors.end(), s) ==
            initial_sectors.end())
            initial_sectors.push_back(s);
    }
    double outside = 0.0;
    for (std::size_t i = 0; i < report.final_state.dim(); ++i) {
        const auto s = sector(i);
        if (std::find(initial_sectors.begin(), initial_sectors.end(), s) ==
            initial_sectors.end())
            outside += std::norm(report.final_state[i]);
    }
    report.leakage = outside;

    report.target_fidelity = fidelity(report.final_state, ideal_transfer_image(initial));
    return report;
}

RampOptimum optimize_ramp(const NoonGunParams& params, double target_fidelity) {
    if (!(target_fidelity >= 0.0 && target_fidelity < 1.0))
        throw ConfigError("optimize_ramp: target fidelity must lie in [0,1)");
    const StateVector initial = embed_atomic(raman_rotation(
        evolve_ghz(params.n_atoms, 1.0,
                   ghz_scan(params.n_atoms).best_angle),
        kPi / 2.0));

    const double base = params.schedule.duration;
    auto fidelity_for = [&](double duration) {
        NoonGunParams p = params;
        p.schedule.duration = duration;
        // Step count scales with duration so accuracy is uniform.
        p.schedule.samples = std::max(
            params.schedule.samples,
            static_cast<int>(std::ceil(params.schedule.samples * duration / base)));
        return run_stirap(p, initial).target_fidelity;
    };

    // Doubling grid from base/16 up to 16*base, then bisection.
    const double lo_grid = base / 16.0;
    double bracket_hi = -1.0;
    double bracket_lo = 0.0;
    double f_hi = 0.0;
    for (int j = 0; j <= 8; ++j) {
        const double duration = lo_grid * std::pow(2.0, j);
        const double f = fidelity_for(duration);
        if (f >= target_fidelity) {
            bracket_hi = duration;
            f_hi = f;
            break;
        }
        bracket_lo = duration;
    }
    if (bracket_hi < 0.0) return {false, 16.0 * base, fidelity_for(16.0 * base)};
    if (bracket_lo == 0.0) return {true, bracket_hi, f_hi};

    double best_duration = bracket_hi;
    double best_fidelity = f_hi;
    for (int iter = 0; iter < 6; ++iter) {
        const double mid = 0.5 * (bracket_lo + bracket_hi);
        const double f = fidelity_for(mid);
        if (f >= target_fidelity) {
            bracket_hi = mid;
            best_duration = mid;
            best_fidelity = f;
        } else {
            bracket_lo = mid;
        }
    }
    return {true, best_duration, best_fidelity};
}

PipelineReport ghz_to_noon_pipeline(int n_atoms, const NoonGunParams& params,
                                    GhzTimeChoice time_choice) {
    PipelineReport report{.ghz_angle_used = 0.0,
                          .ghz_fidelity_at_angle = 0.0,
                          .scan_angle = 0.0,
                          .scan_fidelity = 0.0,
                          .reference_fidelity = 0.0,
                          .stirap_target_fidelity = 0.0,
                          .max_excited_population = 0.0,
                          .leakage = 0.0,
                          .end_to_end_noon_fidelity = 0.0,
                          .photonic_state = coherent_plus_x(1)};

    const GhzScanResult scan = ghz_scan(n_atoms);
    report.scan_angle = scan.best_angle;
    report.scan_fidelity = scan.best_fidelity;
    report.reference_fidelity = ghz_fidelity(evolve_ghz(n_atoms, 1.0, kPi));
    report.ghz_angle_used =
        time_choice == GhzTimeChoice::scan_optimum ? scan.best_angle : kPi;

    const StateVector ghz = evolve_ghz(n_atoms, 1.0, report.ghz_angle_used);
    report.ghz_fidelity_at_angle = ghz_fidelity(ghz);

    const StateVector rotated = raman_rotation(ghz, kPi / 2.0);
    const StateVector initial = embed_atomic(rotated);

    const StirapReport stirap = run_stirap(params, initial);
    report.stirap_target_fidelity = stirap.target_fidelity;
    report.max_excited_population = stirap.max_excited_population;
    report.leakage = stirap.leakage;

    // End-to-end metric on the full final state: success means all atoms in g
    // with the photons in a NOON superposition.
    const ModeSystemPtr& sys = stirap.final_state.system();
    BasisState comp_l(sys->mode_count(), 0);
    comp_l[sys->mode_index("g")] = n_atoms;
    BasisState comp_r = comp_l;
    comp_l[sys->mode_index("L")] = n_atoms;
    comp_r[sys->mode_index("R")] = n_atoms;
    report.end_to_end_noon_fidelity =
        phase_free_two_component_fidelity(stirap.final_state, comp_l, comp_r);

    // Collapse the atoms onto the ideal all-g configuration to present the
    // photonic output; falls back to vacuum when that weight vanishes.
    const std::size_t ig = sys->mode_index("g");
    const std::size_t il = sys->mode_index("L");
    const std::size_t ir = sys->mode_index("R");
    std::vector<complexd> photon_amps;
    std::vector<ModeSpec> photon_modes = {{"L", ModeKind::bosonic, n_atoms},
                                          {"R", ModeKind::bosonic, n_atoms}};
    auto photon_sys = std::make_shared<ModeSystem>(photon_modes);
    photon_amps.assign(photon_sys->dim(), complexd(0.0, 0.0));
    double weight = 0.0;
    for (std::size_t i = 0; i < stirap.final_state.dim(); ++i) {
        const BasisState& occ = sys->basis_state(i);
        bool atoms_ideal = occ[ig] == n_atoms;
        for (const char* label : {"a", "a_exc", "b", "b_exc"})
            atoms_ideal = atoms_ideal && occ[sys->mode_index(label)] == 0;
        if (!atoms_ideal) continue;
        const auto j = photon_sys->find({occ[il], occ[ir]});
        photon_amps[*j] = stirap.final_state[i];
        weight += std::norm(stirap.final_state[i]);
    }
    StateVector photons(photon_sys, std::move(photon_amps));
    if (weight > 1e-12) photons = photons.normalized();
    report.photonic_state = polarization_to_path(photons);
    return report;
}

} // namespace noonsim::atomcavity
