// Constrained occupation-number basis, state vectors, sparse operators,
// exact / time-dependent evolution, measurement, and fidelity metrics.
//
// A ModeSystem declares an ordered list of modes (bosonic, atomic-population,
// or qubit) plus integer linear constraints over the occupations; the basis
// is every occupation tuple inside the cutoffs that satisfies all constraints,
// enumerated in lexicographic order. All operators are sparse (CSR) over that
// basis. Evolution goes dense (scaling-and-squaring exponential) when a full
// propagator is requested and matrix-free (Taylor series of the stepwise
// exponential) for time-dependent schedules.
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "noonsim/dense.hpp"

namespace noonsim {

using complexd = std::complex<double>;

// Occupation tuple in declared mode order.
using BasisState = std::vector<int>;

enum class ModeKind { bosonic, atomic_population, qubit };

struct ModeSpec {
    std::string label;
    ModeKind kind = ModeKind::bosonic;
    int cutoff = 0;
};

// Linear invariant sum_i coeffs[i] * n_i == value over every basis state.
struct Constraint {
    std::vector<long long> coeffs;
    long long value = 0;
};

class ModeSystem {
public:
    ModeSystem(std::vector<ModeSpec> modes, std::vector<Constraint> constraints = {});

    const std::vector<ModeSpec>& modes() const { return modes_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    std::size_t mode_count() const { return modes_.size(); }
    std::size_t mode_index(const std::string& label) const;

    std::size_t dim() const { return basis_.size(); }
    const std::vector<BasisState>& basis() const { return basis_; }
    const BasisState& basis_state(std::size_t index) const { return basis_[index]; }
    // Index of an occupation tuple, or nullopt when it is outside the basis.
    std::optional<std::size_t> find(const BasisState& occupations) const;

    // Structural equality: independently constructed systems with the same
    // modes and constraints are interchangeable.
    bool compatible(const ModeSystem& other) const;

private:
    std::vector<ModeSpec> modes_;
    std::vector<Constraint> constraints_;
    std::vector<BasisState> basis_; // lexicographically sorted
};

using ModeSystemPtr = std::shared_ptr<const ModeSystem>;

std::vector<BasisState> enumerate_basis(const ModeSystem& system);

class StateVector {
public:
    StateVector(ModeSystemPtr system, std::vector<complexd> amplitudes);
    // Basis vector |occupations>.
    StateVector(ModeSystemPtr system, const BasisState& occupations);

    const ModeSystemPtr& system() const { return system_; }
    std::size_t dim() const { return amplitudes_.size(); }
    const std::vector<complexd>& amplitudes() const { return amplitudes_; }
    std::vector<complexd>& amplitudes() { return amplitudes_; }
    complexd operator[](std::size_t i) const { return amplitudes_[i]; }

    double norm() const;
    StateVector normalized() const;

private:
    ModeSystemPtr system_;
    std::vector<complexd> amplitudes_;
};

complexd inner_product(const StateVector& a, const StateVector& b);

class LinearOperator {
public:
    struct Triplet {
        std::size_t row;
        std::size_t col;
        complexd value;
    };

    // Duplicate (row, col) entries are summed; entries below 1e-15 in
    // magnitude are dropped. When hermitian is set, A = A^dagger is verified
    // to 1e-12 elementwise.
    LinearOperator(ModeSystemPtr system, const std::vector<Triplet>& entries,
                   bool hermitian = false);

    static LinearOperator identity(ModeSystemPtr system);
    static LinearOperator zero(ModeSystemPtr system);
    static LinearOperator from_dense(ModeSystemPtr system, const DenseMatrix& m,
                                     bool hermitian = false);

    const ModeSystemPtr& system() const { return system_; }
    std::size_t dim() const { return dim_; }
    bool hermitian() const { return hermitian_; }
    std::size_t nnz() const { return values_.size(); }

    StateVector apply(const StateVector& psi) const;
    // y = alpha * A * x over raw amplitude arrays.
    void apply_raw(const complexd* x, complexd* y, complexd alpha) const;

    LinearOperator operator*(const LinearOperator& rhs) const;
    LinearOperator operator+(const LinearOperator& rhs) const;
    LinearOperator scaled(complexd factor) const;
    LinearOperator dagger() const;
    // Same entries with the hermitian flag set (verified on construction).
    LinearOperator as_hermitian() const;

    DenseMatrix to_dense() const;
    complexd entry(std::size_t row, std::size_t col) const;
    // Induced 1-norm (max column abs sum), used to scale Taylor steps.
    double opnorm1() const;

private:
    LinearOperator(ModeSystemPtr system, std::size_t dim);

    ModeSystemPtr system_;
    std::size_t dim_ = 0;
    bool hermitian_ = false;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    std::vector<complexd> values_;
};

enum class ModeOpKind { lowering, raising, number };

LinearOperator build_mode_operator(ModeSystemPtr system, const std::string& label,
                                   ModeOpKind which);

// Atomic product of raising (+1) / lowering (-1) steps, e.g.
// {{"a",+1},{"b",-1}} is a^dagger b. The steps are applied to the occupation
// tuple as one unit, so intermediate tuples may violate the constraints as
// long as the final tuple satisfies them; products of single-mode operators
// cannot express this on a constrained basis.
LinearOperator transition_operator(ModeSystemPtr system,
                                   const std::vector<std::pair<std::string, int>>& steps,
                                   complexd coefficient = complexd(1.0, 0.0));

// Diagonal operator sum_i coeffs[i] * n_i for the k-th declared constraint.
LinearOperator constraint_functional(ModeSystemPtr system, std::size_t constraint_index);

// Largest basis dimension evolve_exact will densify.
inline constexpr std::size_t kDenseLimit = 4096;

// psi(t) = exp(-i H t) psi via the dense scaling-and-squaring exponential.
// t is the dimensionless angle (angular frequency times seconds).
StateVector evolve_exact(const LinearOperator& h, const StateVector& psi, double t);

// Full propagator exp(-i H t) as a dense matrix (same dense limit).
DenseMatrix propagator(const LinearOperator& h, double t);

// exp(alpha * A) psi via scaled Taylor series, matrix-free.
StateVector expm_apply(const LinearOperator& a, complexd alpha, const StateVector& psi);

// Scalar control amplitude as a function of time over [0, duration].
struct PulseSchedule {
    double duration = 0.0;
    std::function<double(double)> value;

    double operator()(double t) const { return value(t); }
};

struct TrajectoryPoint {
    double time;
    StateVector state;
};

// Second-order piecewise-constant integration: each step applies
// exp(-i H(Omega(t_mid)) dt). The trajectory always contains the initial and
// final states; intermediate snapshots are kept at most every `stride` steps.
std::vector<TrajectoryPoint> evolve_timedep(
    const std::function<LinearOperator(double)>& h_builder, const PulseSchedule& schedule,
    const StateVector& psi, int steps, int stride = 1);

enum class MeasureMode { exact, sampled };

// One measurement record: Born-rule counts on the measured modes followed by
// independent per-photon binomial thinning. Conditioning on the true counts
// makes the post-measurement state pure, so lost-photon records trace out
// trivially; outcomes are therefore keyed by (true, detected) pairs.
struct DetectionOutcome {
    std::vector<int> true_counts;     // aligned with the measured labels
    std::vector<int> detected_counts; // after thinning
    double probability = 0.0;
    StateVector conditional; // normalized, measured modes collapsed
};

std::vector<DetectionOutcome> measure_occupations(const StateVector& psi,
                                                  const std::vector<std::string>& labels,
                                                  const std::vector<double>& efficiencies,
                                                  MeasureMode mode,
                                                  std::uint64_t seed = 0);

double fidelity(const StateVector& a, const StateVector& b);

// Max over phi of |<psi|(|A> + e^{i phi}|B>)/sqrt(2)|^2
// = (|<A|psi>| + |<B|psi>|)^2 / 2.
double phase_free_two_component_fidelity(const StateVector& psi, const BasisState& comp_a,
                                         const BasisState& comp_b);

// Product-state restriction of psi to the listed modes. All excluded modes
// must hold a definite occupation across every nonzero amplitude (true after
// a collapse); otherwise the restriction is not a pure state and this throws.
// The overload with a target system reuses it (labels must match in order)
// so states extracted from different measurements stay comparable.
StateVector extract_modes(const StateVector& psi, const std::vector<std::string>& labels);
StateVector extract_modes(const StateVector& psi, const std::vector<std::string>& labels,
                          ModeSystemPtr target);

complexd expectation(const LinearOperator& op, const StateVector& psi);

} // namespace noonsim
