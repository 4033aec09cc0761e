// GHZ preparation, five-level dark states, STIRAP transfer, full pipeline.
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "noonsim/atomcavity.hpp"
#include "noonsim/errors.hpp"
#include "noonsim/fock.hpp"

using namespace noonsim;
using namespace noonsim::atomcavity;

namespace {

double binom(int n, int k) {
    double out = 1.0;
    for (int i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / i;
    return out;
}

// Exchange-evolution fidelity in closed form, from the diagonal spectrum
// E(m) = eta [S(S+1) - m^2 + m] and the binomial coherent-state weights.
double ghz_fidelity_closed_form(int n, double eta_t) {
    const double s = 0.5 * n;
    complexd plus(0.0, 0.0);
    complexd minus(0.0, 0.0);
    for (int n_a = 0; n_a <= n; ++n_a) {
        const double m = n_a - s;
        const double energy = s * (s + 1.0) - m * m + m;
        const complexd phase = std::exp(complexd(0.0, -energy * eta_t));
        const double weight = binom(n, n_a) / std::pow(2.0, n);
        plus += weight * phase;
        minus += weight * phase * (((n - n_a) % 2 == 0) ? 1.0 : -1.0);
    }
    const double sum = std::abs(plus) + std::abs(minus);
    return 0.5 * sum * sum;
}

} // namespace

TEST_CASE("spin system and coherent state weights") {
    auto sys = spin_system(3);
    REQUIRE(sys->dim() == 4);
    CHECK(sys->basis_state(0) == BasisState{0, 3}); // ascending n_a
    CHECK(sys->basis_state(3) == BasisState{3, 0});
    StateVector plus = coherent_plus_x(3);
    for (int n_a = 0; n_a <= 3; ++n_a) {
        const double expected = std::sqrt(binom(3, n_a)) / std::pow(2.0, 1.5);
        CHECK(std::abs(plus[*sys->find({n_a, 3 - n_a})] - complexd(expected, 0.0)) < 1e-14);
    }
    CHECK(plus.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(spin_system(0), ConfigError);
}

TEST_CASE("exchange Hamiltonian matches a product-basis brute force") {
    const double eta = 0.8;
    for (int n = 1; n <= 4; ++n) {
        auto sys = spin_system(n);
        LinearOperator h = ghz_hamiltonian(n, eta);
        const std::size_t full = std::size_t{1} << n;
        for (int n_a = 0; n_a <= n; ++n_a) {
            // Dicke state: uniform over bitstrings with popcount n_a.
            std::vector<double> dicke(full, 0.0);
            const double amp = 1.0 / std::sqrt(binom(n, n_a));
            for (std::size_t bits = 0; bits < full; ++bits)
                if (std::popcount(bits) == n_a) dicke[bits] = amp;
            // eta sum_{j,k} sigma^+_j sigma^-_k, including j == k.
            std::vector<double> image(full, 0.0);
            for (std::size_t bits = 0; bits < full; ++bits) {
                if (dicke[bits] == 0.0) continue;
                for (int k = 0; k < n; ++k) {
                    if (!(bits & (std::size_t{1} << k))) continue; // needs atom k in |a>
                    for (int j = 0; j < n; ++j) {
                        if (j == k) {
                            image[bits] += eta * dicke[bits];
                        } else if (!(bits & (std::size_t{1} << j))) {
                            const std::size_t flipped =
                                (bits & ~(std::size_t{1} << k)) | (std::size_t{1} << j);
                            image[flipped] += eta * dicke[bits];
                        }
                    }
                }
            }
            // The Dicke state is an eigenvector; read the eigenvalue off any
            // populated component and compare with the diagonal operator.
            double eigenvalue = 0.0;
            for (std::size_t bits = 0; bits < full; ++bits) {
                if (dicke[bits] == 0.0) {
                    CHECK(std::abs(image[bits]) < 1e-12);
                } else {
                    eigenvalue = image[bits] / dicke[bits];
                }
            }
            for (std::size_t bits = 0; bits < full; ++bits)
                CHECK(std::abs(image[bits] - eigenvalue * dicke[bits]) < 1e-12);
            const std::size_t i = *sys->find({n_a, n - n_a});
            CHECK(std::abs(h.entry(i, i) - complexd(eigenvalue, 0.0)) < 1e-12);
        }
    }
}

TEST_CASE("evolved fidelity follows the closed-form curves") {
    for (int n : {2, 3, 4}) {
        for (double t : {0.17, 0.6154797086703874, 1.0, std::numbers::pi / 2, 2.9,
                         std::numbers::pi, 5.5}) {
            const double simulated = ghz_fidelity(evolve_ghz(n, 1.0, t));
            CHECK(simulated == doctest::Approx(ghz_fidelity_closed_form(n, t)).epsilon(1e-11));
        }
        // Only the eta*t product matters.
        CHECK(ghz_fidelity(evolve_ghz(n, 0.5, 1.7)) ==
              doctest::Approx(ghz_fidelity(evolve_ghz(n, 1.0, 0.85))).epsilon(1e-11));
    }
}

TEST_CASE("known optima of the exchange evolution") {
    // N=3 reaches a perfect GHZ at eta*t = pi/2.
    CHECK(ghz_fidelity(evolve_ghz(3, 1.0, std::numbers::pi / 2)) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // N=2 caps at 2/3, reached at eta*t = arccos(1/3)/2.
    const double t2 = 0.5 * std::acos(1.0 / 3.0);
    CHECK(ghz_fidelity(evolve_ghz(2, 1.0, t2)) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    // All of N=2,3,4 sit at exactly 1/2 at eta*t = pi.
    for (int n : {2, 3, 4})
        CHECK(ghz_fidelity(evolve_ghz(n, 1.0, std::numbers::pi)) ==
              doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("scan locates the documented optima") {
    // For N=2 every level gap is an even multiple of eta, so the fidelity is
    // pi-periodic in eta*t and the maximum is degenerate: arccos(1/3)/2 and
    // the same point shifted by pi are equally good. Accept either.
    GhzScanResult two = ghz_scan(2, 1e-3);
    CHECK(two.best_fidelity == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    const double base = 0.6154797086703874;
    const bool at_base = std::abs(two.best_angle - base) < 1e-4;
    const bool at_shift = std::abs(two.best_angle - (base + std::numbers::pi)) < 1e-4;
    CHECK((at_base || at_shift));

    GhzScanResult three = ghz_scan(3, 1e-3);
    CHECK(three.best_fidelity == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(three.best_angle - std::numbers::pi / 2) < 1e-4);

    // N=4 has a flat global maximum of 1/2, attained at the trivial revival
    // angles pi and 2 pi; the interior structure only reaches ~0.4585.
    GhzScanResult four = ghz_scan(4, 1e-3);
    CHECK(four.best_fidelity == doctest::Approx(0.5).epsilon(1e-6));
    const bool near_pi = std::abs(four.best_angle - std::numbers::pi) < 1e-2;
    const bool near_two_pi = std::abs(four.best_angle - 2.0 * std::numbers::pi) < 1e-2;
    CHECK((near_pi || near_two_pi));

    GhzScanResult sampled = ghz_scan(2, 1e-2, true);
    CHECK(!sampled.samples.empty());
    for (std::size_t i : {std::size_t{0}, sampled.samples.size() / 2}) {
        const auto& [angle, fid] = sampled.samples[i];
        CHECK(fid == doctest::Approx(ghz_fidelity_closed_form(2, angle)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(ghz_scan(2, 0.0), ConfigError);
}

TEST_CASE("Raman pulse rotates the GHZ basis onto the population basis") {
    for (int n : {1, 2, 3}) {
        auto sys = spin_system(n);
        StateVector plus = coherent_plus_x(n);
        StateVector rotated = raman_rotation(plus, std::numbers::pi / 2);
        StateVector all_a(sys, BasisState{n, 0});
        CHECK(fidelity(rotated, all_a) == doctest::Approx(1.0).epsilon(1e-11));

        std::vector<complexd> amps(sys->dim(), complexd(0.0, 0.0));
        for (int n_a = 0; n_a <= n; ++n_a) {
            const double sign = ((n - n_a) % 2 == 0) ? 1.0 : -1.0;
            amps[*sys->find({n_a, n - n_a})] =
                complexd(sign * std::sqrt(binom(n, n_a)) / std::pow(2.0, 0.5 * n), 0.0);
        }
        StateVector minus(sys, amps);
        StateVector rotated_minus = raman_rotation(minus, std::numbers::pi / 2);
        StateVector all_b(sys, BasisState{0, n});
        CHECK(fidelity(rotated_minus, all_b) == doctest::Approx(1.0).epsilon(1e-11));
    }
}

TEST_CASE("dark states are annihilated by the five-level Hamiltonian") {
    for (int n : {1, 2, 3}) {
        NoonGunParams params;
        params.n_atoms = n;
        params.g_l = 1.0;
        params.g_r = 1.0;
        for (double omega : {0.0, 0.5, 2.0}) {
            LinearOperator h = noon_gun_hamiltonian(params, omega);
            for (int manifold : {1, 2}) {
                StateVector dark = dark_state(n, manifold, omega, 1.0);
                CHECK(dark.norm() == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(h.apply(dark).norm() < 1e-10);
            }
        }
        // Omega = 0 limit: the dark state is the bare initial state.
        auto sys = noon_gun_system(n);
        StateVector bare = dark_state(n, 1, 0.0, 1.0);
        BasisState all_a(sys->mode_count(), 0);
        all_a[sys->mode_index("a")] = n;
        CHECK(std::abs(std::abs(bare[*sys->find(all_a)]) - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(dark_state(2, 3, 0.5, 1.0), ConfigError);
    CHECK_THROWS_AS(dark_state(2, 1, 0.5, 0.0), ConfigError);
}

TEST_CASE("embed_atomic plants the spin state in the five-level basis") {
    StateVector plus = coherent_plus_x(2);
    StateVector embedded = embed_atomic(plus);
    auto sys = embedded.system();
    CHECK(sys->compatible(*noon_gun_system(2)));
    CHECK(embedded.norm() == doctest::Approx(1.0).epsilon(1e-13));
    BasisState occ(sys->mode_count(), 0);
    occ[sys->mode_index("a")] = 1;
    occ[sys->mode_index("b")] = 1;
    CHECK(std::abs(embedded[*sys->find(occ)] - plus[*plus.system()->find({1, 1})]) < 1e-14);
}

TEST_CASE("STIRAP transfers the one-sided state along the dark path") {
    // For N >= 2 the zero-energy subspace of the collective Hamiltonian is
    // degenerate (a second null vector with doubly-excited support exists at
    // every pump strength), and parallel transport within that subspace mixes
    // the followed dark state into its partner. The transfer therefore
    // converges to a ramp-speed-independent plateau rather than to the
    // single-dark-state value; the frozen number below is the dt->0 limit for
    // this schedule (cross-checked at 2000/4000/16000/64000 samples).
    NoonGunParams params;
    params.n_atoms = 2;
    params.schedule = {RampShape::tanh_ramp, 20.0, 200.0, 2000};
    StateVector initial = embed_atomic(StateVector(spin_system(2), BasisState{2, 0}));
    StirapReport report = run_stirap(params, initial);
    CHECK(report.target_fidelity == doctest::Approx(0.9436391170).epsilon(1e-6));
    CHECK(report.leakage < 1e-6);
    CHECK(report.max_excited_population < 0.05);
    REQUIRE(!report.trajectory.empty());

    // The a-side sector (n_a + n_a_exc + n_L) is exactly conserved, and the
    // b-side never gets populated from an a-only start.
    auto sys = initial.system();
    LinearOperator side_a = (build_mode_operator(sys, "a", ModeOpKind::number) +
                             build_mode_operator(sys, "a_exc", ModeOpKind::number) +
                             build_mode_operator(sys, "L", ModeOpKind::number))
                                .as_hermitian();
    LinearOperator side_b = (build_mode_operator(sys, "b", ModeOpKind::number) +
                             build_mode_operator(sys, "b_exc", ModeOpKind::number) +
                             build_mode_operator(sys, "R", ModeOpKind::number))
                                .as_hermitian();
    for (const auto& point : report.trajectory) {
        CHECK(std::abs(expectation(side_a, point.state) - complexd(2.0, 0.0)) < 1e-10);
        CHECK(std::abs(expectation(side_b, point.state)) < 1e-12);
    }

    // Final state concentrates on |g g; L L>.
    BasisState target(sys->mode_count(), 0);
    target[sys->mode_index("g")] = 2;
    target[sys->mode_index("L")] = 2;
    CHECK(std::abs(report.final_state[*sys->find(target)]) > 0.97);
}

TEST_CASE("adiabatic limit: N=1 improves monotonically, N=2 hits a geometric floor") {
    // N=1 has a unique zero mode, so slower ramps converge to the dark-state
    // endpoint overlap Omega^2/(1+Omega^2) = 400/401.
    NoonGunParams one;
    one.n_atoms = 1;
    StateVector init1 = embed_atomic(StateVector(spin_system(1), BasisState{1, 0}));
    double previous = 0.0;
    for (double duration : {25.0, 50.0, 100.0}) {
        one.schedule = {RampShape::tanh_ramp, 20.0, duration,
                        static_cast<int>(duration * 40)};
        const double f = run_stirap(one, init1).target_fidelity;
        CHECK(f > previous);
        previous = f;
    }
    CHECK(previous == doctest::Approx(400.0 / 401.0).epsilon(1e-4));

    // N=2: the degenerate-subspace mixing is geometric (depends on the path
    // through pump strength, not its speed), so doubling the duration leaves
    // the infidelity at the same plateau instead of shrinking it.
    NoonGunParams two;
    two.n_atoms = 2;
    StateVector init2 = embed_atomic(StateVector(spin_system(2), BasisState{2, 0}));
    two.schedule = {RampShape::tanh_ramp, 20.0, 100.0, 2000};
    const double f100 = run_stirap(two, init2).target_fidelity;
    two.schedule = {RampShape::tanh_ramp, 20.0, 200.0, 4000};
    const double f200 = run_stirap(two, init2).target_fidelity;
    CHECK(std::abs(f100 - f200) < 1e-3);
    CHECK(f200 == doctest::Approx(0.9436391744).epsilon(1e-6));
}

TEST_CASE("ramp optimizer reaches the requested fidelity") {
    NoonGunParams params;
    params.n_atoms = 1;
    params.schedule = {RampShape::tanh_ramp, 20.0, 40.0, 800};
    RampOptimum opt = optimize_ramp(params, 0.98);
    CHECK(opt.feasible);
    CHECK(opt.fidelity >= 0.98);
    CHECK(opt.duration > 0.0);
    CHECK_THROWS_AS(optimize_ramp(params, 1.5), ConfigError);
}

TEST_CASE("ramp shapes and schedule guards") {
    PulseSchedule tanh_pulse = make_schedule({RampShape::tanh_ramp, 10.0, 100.0, 100});
    CHECK(tanh_pulse.duration == doctest::Approx(100.0));
    CHECK(tanh_pulse(0.0) < 0.1);               // starts near zero
    CHECK(tanh_pulse(100.0) > 9.9);             // ends at the peak
    CHECK(tanh_pulse(60.0) > tanh_pulse(40.0)); // monotone

    PulseSchedule linear = make_schedule({RampShape::linear, 10.0, 100.0, 100});
    CHECK(linear(50.0) == doctest::Approx(5.0).epsilon(1e-12));
    PulseSchedule constant = make_schedule({RampShape::constant, 7.0, 10.0, 100});
    CHECK(constant(3.0) == doctest::Approx(7.0));
    CHECK_THROWS_AS(make_schedule({RampShape::linear, 10.0, 0.0, 100}), ConfigError);
    CHECK_THROWS_AS(make_schedule({RampShape::linear, -1.0, 10.0, 100}), ConfigError);
}

TEST_CASE("pipeline stitches GHZ, rotation, STIRAP, and path conversion") {
    NoonGunParams params;
    params.n_atoms = 2;
    params.schedule = {RampShape::tanh_ramp, 20.0, 200.0, 2000};

    PipelineReport scan_run = ghz_to_noon_pipeline(2, params, GhzTimeChoice::scan_optimum);
    CHECK(scan_run.scan_fidelity == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
    CHECK(scan_run.ghz_angle_used == doctest::Approx(scan_run.scan_angle));
    CHECK(scan_run.ghz_fidelity_at_angle == doctest::Approx(scan_run.scan_fidelity));
    CHECK(scan_run.reference_fidelity == doctest::Approx(0.5).epsilon(1e-9));
    // Transfer plateau for N=2 (degenerate zero subspace; see the STIRAP
    // test above for the frozen dt->0 value).
    CHECK(scan_run.stirap_target_fidelity == doctest::Approx(0.9436).epsilon(2e-3));
    CHECK(scan_run.leakage < 1e-6);
    // The two-atom exchange stage caps the GHZ fidelity at 2/3 and the
    // transfer stage multiplies in its plateau: 2/3 * 0.9436391 = 0.6290927.
    CHECK(scan_run.end_to_end_noon_fidelity == doctest::Approx(0.6290927447).epsilon(1e-5));
    CHECK(scan_run.end_to_end_noon_fidelity < 2.0 / 3.0 + 1e-6);
    CHECK(scan_run.photonic_state.norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(scan_run.photonic_state.system()->mode_index("a_path") == 0);

    PipelineReport pi_run = ghz_to_noon_pipeline(2, params, GhzTimeChoice::reference_angle);
    CHECK(pi_run.ghz_angle_used == doctest::Approx(std::numbers::pi));
    CHECK(pi_run.ghz_fidelity_at_angle == doctest::Approx(0.5).epsilon(1e-9));
}
