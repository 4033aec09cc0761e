#include "noonsim/fock.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "noonsim/errors.hpp"
#include "noonsim/kernels.hpp"

namespace noonsim {

namespace {

std::string tuple_to_string(const BasisState& occ) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < occ.size(); ++i) {
        if (i) os << ",";
        os << occ[i];
    }
    os << ")";
    return os.str();
}

} // namespace

ModeSystem::ModeSystem(std::vector<ModeSpec> modes, std::vector<Constraint> constraints)
    : modes_(std::move(modes)), constraints_(std::move(constraints)) {
    std::set<std::string> seen;
    for (const auto& m : modes_) {
        if (!seen.insert(m.label).second)
            throw ConfigError("ModeSystem: duplicate mode label '" + m.label + "'");
        if (m.cutoff < 0)
            throw ConfigError("ModeSystem: negative cutoff for mode '" + m.label + "'");
        if (m.kind == ModeKind::qubit && m.cutoff != 1)
            throw ConfigError("ModeSystem: qubit mode '" + m.label + "' must have cutoff 1");
    }
    for (const auto& c : constraints_) {
        if (c.coeffs.size() != modes_.size())
            throw ConfigError("ModeSystem: constraint coefficient vector has " +
                              std::to_string(c.coeffs.size()) + " entries, expected " +
                              std::to_string(modes_.size()));
    }

    // Depth-first enumeration in declared mode order with 0..cutoff tried in
    // increasing order, which yields lexicographic output directly. Pruning
    // uses, per constraint, the extreme contributions still reachable from
    // the remaining modes.
    const std::size_t nm = modes_.size();
    const std::size_t nc = constraints_.size();
    std::vector<std::vector<long long>> min_rem(nm + 1, std::vector<long long>(nc, 0));
    std::vector<std::vector<long long>> max_rem(nm + 1, std::vector<long long>(nc, 0));
    for (std::size_t j = nm; j-- > 0;) {
        for (std::size_t c = 0; c < nc; ++c) {
            const long long extreme =
                constraints_[c].coeffs[j] * static_cast<long long>(modes_[j].cutoff);
            min_rem[j][c] = min_rem[j + 1][c] + std::min(0LL, extreme);
            max_rem[j][c] = max_rem[j + 1][c] + std::max(0LL, extreme);
        }
    }

    BasisState current(nm, 0);
    std::vector<long long> partial(nc, 0);
    std::function<void(std::size_t)> rec = [&](std::size_t j) {
        for (std::size_t c = 0; c < nc; ++c) {
            const long long need = constraints_[c].value - partial[c];
            if (need < min_rem[j][c] || need > max_rem[j][c]) return;
        }
        if (j == nm) {
            basis_.push_back(current);
            return;
        }
        for (int n = 0; n <= modes_[j].cutoff; ++n) {
            current[j] = n;
            for (std::size_t c = 0; c < nc; ++c) partial[c] += constraints_[c].coeffs[j] * n;
            rec(j + 1);
            for (std::size_t c = 0; c < nc; ++c) partial[c] -= constraints_[c].coeffs[j] * n;
        }
        current[j] = 0;
    };
    rec(0);
}

bool ModeSystem::compatible(const ModeSystem& other) const {
    if (this == &other) return true;
    if (modes_.size() != other.modes_.size()) return false;
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        if (modes_[i].label != other.modes_[i].label || modes_[i].kind != other.modes_[i].kind ||
            modes_[i].cutoff != other.modes_[i].cutoff)
            return false;
    }
    if (constraints_.size() != other.constraints_.size()) return false;
    for (std::size_t c = 0; c < constraints_.size(); ++c) {
        if (constraints_[c].coeffs != other.constraints_[c].coeffs ||
            constraints_[c].value != other.constraints_[c].value)
            return false;
    }
    return true;
}

std::size_t ModeSystem::mode_index(const std::string& label) const {
    for (std::size_t i = 0; i < modes_.size(); ++i)
        if (modes_[i].label == label) return i;
    throw ConfigError("ModeSystem: unknown mode label '" + label + "'");
}

std::optional<std::size_t> ModeSystem::find(const BasisState& occupations) const {
    if (occupations.size() != modes_.size())
        throw ContractError("ModeSystem::find: occupation tuple has wrong length");
    const auto it = std::lower_bound(basis_.begin(), basis_.end(), occupations);
    if (it == basis_.end() || *it != occupations) return std::nullopt;
    return static_cast<std::size_t>(it - basis_.begin());
}

std::vector<BasisState> enumerate_basis(const ModeSystem& system) { return system.basis(); }

StateVector::StateVector(ModeSystemPtr system, std::vector<complexd> amplitudes)
    : system_(std::move(system)), amplitudes_(std::move(amplitudes)) {
    if (!system_) throw ContractError("StateVector: null system");
    if (amplitudes_.size() != system_->dim())
        throw ContractError("StateVector: amplitude count does not match basis size");
}

StateVector::StateVector(ModeSystemPtr system, const BasisState& occupations)
    : system_(std::move(system)) {
    if (!system_) throw ContractError("StateVector: null system");
    const auto idx = system_->find(occupations);
    if (!idx)
        throw ConfigError("StateVector: occupation tuple " + tuple_to_string(occupations) +
                          " is not in the basis");
    amplitudes_.assign(system_->dim(), complexd(0.0, 0.0));
    amplitudes_[*idx] = complexd(1.0, 0.0);
}

double StateVector::norm() const {
    return kernels::norm2(amplitudes_.data(), amplitudes_.size());
}

StateVector StateVector::normalized() const {
    const double n = norm();
    if (n == 0.0) throw NumericalError("StateVector::normalized: zero state");
    std::vector<complexd> out = amplitudes_;
    for (auto& v : out) v /= n;
    return StateVector(system_, std::move(out));
}

complexd inner_product(const StateVector& a, const StateVector& b) {
    if (!a.system()->compatible(*b.system()))
        throw ContractError("inner_product: states live on different mode systems");
    return kernels::dot_conj(a.amplitudes().data(), b.amplitudes().data(), a.dim());
}

LinearOperator::LinearOperator(ModeSystemPtr system, std::size_t dim)
    : system_(std::move(system)), dim_(dim), row_ptr_(dim + 1, 0) {}

LinearOperator::LinearOperator(ModeSystemPtr system, const std::vector<Triplet>& entries,
                               bool hermitian)
    : system_(std::move(system)), hermitian_(hermitian) {
    if (!system_) throw ContractError("LinearOperator: null system");
    dim_ = system_->dim();

    std::map<std::pair<std::size_t, std::size_t>, complexd> acc;
    for (const auto& t : entries) {
        if (t.row >= dim_ || t.col >= dim_)
            throw ContractError("LinearOperator: entry index out of range");
        acc[{t.row, t.col}] += t.value;
    }

    row_ptr_.assign(dim_ + 1, 0);
    for (const auto& [key, value] : acc)
        if (std::abs(value) > 1e-15) ++row_ptr_[key.first + 1];
    for (std::size_t i = 0; i < dim_; ++i) row_ptr_[i + 1] += row_ptr_[i];
    col_idx_.resize(row_ptr_[dim_]);
    values_.resize(row_ptr_[dim_]);
    std::vector<std::size_t> cursor(row_ptr_.begin(), row_ptr_.end() - 1);
    for (const auto& [key, value] : acc) {
        if (std::abs(value) <= 1e-15) continue;
        const std::size_t slot = cursor[key.first]++;
        col_idx_[slot] = key.second;
        values_[slot] = value;
    }

    if (hermitian_) {
        for (std::size_t i = 0; i < dim_; ++i) {
            for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
                const complexd mirror = entry(col_idx_[p], i);
                if (std::abs(std::conj(mirror) - values_[p]) > 1e-12)
                    throw ContractError("LinearOperator: hermitian flag set but A != A^dagger");
            }
        }
    }
}

LinearOperator LinearOperator::identity(ModeSystemPtr system) {
    std::vector<Triplet> entries;
    const std::size_t dim = system->dim();
    entries.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) entries.push_back({i, i, complexd(1.0, 0.0)});
    return LinearOperator(std::move(system), entries, true);
}

LinearOperator LinearOperator::zero(ModeSystemPtr system) {
    return LinearOperator(std::move(system), std::vector<Triplet>{}, true);
}

LinearOperator LinearOperator::from_dense(ModeSystemPtr system, const DenseMatrix& m,
                                          bool hermitian) {
    if (m.rows() != system->dim() || m.cols() != system->dim())
        throw ContractError("LinearOperator::from_dense: shape mismatch");
    std::vector<Triplet> entries;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (std::abs(m(i, j)) > 1e-15) entries.push_back({i, j, m(i, j)});
    return LinearOperator(std::move(system), entries, hermitian);
}

void LinearOperator::apply_raw(const complexd* x, complexd* y, complexd alpha) const {
    kernels::spmv(row_ptr_.data(), col_idx_.data(), values_.data(), x, y, dim_, alpha);
}

StateVector LinearOperator::apply(const StateVector& psi) const {
    if (!psi.system()->compatible(*system_))
        throw ContractError("LinearOperator::apply: state lives on a different mode system");
    std::vector<complexd> out(dim_);
    apply_raw(psi.amplitudes().data(), out.data(), complexd(1.0, 0.0));
    return StateVector(system_, std::move(out));
}

LinearOperator LinearOperator::operator*(const LinearOperator& rhs) const {
    if (!system_->compatible(*rhs.system_))
        throw ContractError("LinearOperator::operator*: operand system mismatch");
    // Row-by-row CSR product with a dense accumulator.
    std::vector<Triplet> entries;
    std::vector<complexd> work(dim_, complexd(0.0, 0.0));
    std::vector<std::size_t> touched;
    for (std::size_t i = 0; i < dim_; ++i) {
        touched.clear();
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            const std::size_t k = col_idx_[p];
            const complexd aik = values_[p];
            for (std::size_t q = rhs.row_ptr_[k]; q < rhs.row_ptr_[k + 1]; ++q) {
                const std::size_t j = rhs.col_idx_[q];
                if (work[j] == complexd(0.0, 0.0)) touched.push_back(j);
                work[j] += aik * rhs.values_[q];
            }
        }
        for (const std::size_t j : touched) {
            if (std::abs(work[j]) > 1e-15) entries.push_back({i, j, work[j]});
            work[j] = complexd(0.0, 0.0);
        }
    }
    return LinearOperator(system_, entries, false);
}

LinearOperator LinearOperator::operator+(const LinearOperator& rhs) const {
    if (!system_->compatible(*rhs.system_))
        throw ContractError("LinearOperator::operator+: operand system mismatch");
    std::vector<Triplet> entries;
    entries.reserve(nnz() + rhs.nnz());
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
            entries.push_back({i, col_idx_[p], values_[p]});
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t p = rhs.row_ptr_[i]; p < rhs.row_ptr_[i + 1]; ++p)
            entries.push_back({i, rhs.col_idx_[p], rhs.values_[p]});
    return LinearOperator(system_, entries, hermitian_ && rhs.hermitian_);
}

LinearOperator LinearOperator::scaled(complexd factor) const {
    std::vector<Triplet> entries;
    entries.reserve(nnz());
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
            entries.push_back({i, col_idx_[p], factor * values_[p]});
    const bool still_hermitian = hermitian_ && factor.imag() == 0.0;
    return LinearOperator(system_, entries, still_hermitian);
}

LinearOperator LinearOperator::dagger() const {
    std::vector<Triplet> entries;
    entries.reserve(nnz());
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
            entries.push_back({col_idx_[p], i, std::conj(values_[p])});
    return LinearOperator(system_, entries, hermitian_);
}

DenseMatrix LinearOperator::to_dense() const {
    DenseMatrix m(dim_, dim_);
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
            m(i, col_idx_[p]) = values_[p];
    return m;
}

complexd LinearOperator::entry(std::size_t row, std::size_t col) const {
    const auto begin = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
    const auto end = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
    const auto it = std::lower_bound(begin, end, col);
    if (it == end || *it != col) return complexd(0.0, 0.0);
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

double LinearOperator::opnorm1() const {
    std::vector<double> col_sums(dim_, 0.0);
    for (std::size_t p = 0; p < values_.size(); ++p)
        col_sums[col_idx_[p]] += std::abs(values_[p]);
    double best = 0.0;
    for (const double s : col_sums) best = std::max(best, s);
    return best;
}

LinearOperator build_mode_operator(ModeSystemPtr system, const std::string& label,
                                   ModeOpKind which) {
    const std::size_t mode = system->mode_index(label);
    const int cutoff = system->modes()[mode].cutoff;
    std::vector<LinearOperator::Triplet> entries;
    for (std::size_t i = 0; i < system->dim(); ++i) {
        const BasisState& occ = system->basis_state(i);
        const int n = occ[mode];
        switch (which) {
            case ModeOpKind::number:
                if (n > 0) entries.push_back({i, i, complexd(static_cast<double>(n), 0.0)});
                break;
            case ModeOpKind::lowering: {
                if (n == 0) break;
                BasisState target = occ;
                target[mode] = n - 1;
                // Targets outside the constrained basis are dropped: the
                // operator only ever appears inside constraint-conserving
                // products.
                if (const auto j = system->find(target))
                    entries.push_back({*j, i, complexd(std::sqrt(static_cast<double>(n)), 0.0)});
                break;
            }
            case ModeOpKind::raising: {
                if (n >= cutoff) break;
                BasisState target = occ;
                target[mode] = n + 1;
                if (const auto j = system->find(target))
                    entries.push_back(
                        {*j, i, complexd(std::sqrt(static_cast<double>(n + 1)), 0.0)});
                break;
            }
        }
    }
    return LinearOperator(std::move(system), entries, which == ModeOpKind::number);
}

LinearOperator LinearOperator::as_hermitian() const {
    std::vector<Triplet> entries;
    entries.reserve(nnz());
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
            entries.push_back({i, col_idx_[p], values_[p]});
    return LinearOperator(system_, entries, true);
}

LinearOperator transition_operator(ModeSystemPtr system,
                                   const std::vector<std::pair<std::string, int>>& steps,
                                   complexd coefficient) {
    std::vector<std::pair<std::size_t, int>> resolved;
    resolved.reserve(steps.size());
    for (const auto& [label, delta] : steps) {
        if (delta != 1 && delta != -1)
            throw ContractError("transition_operator: step must be +1 or -1");
        resolved.emplace_back(system->mode_index(label), delta);
    }

    std::vector<LinearOperator::Triplet> entries;
    for (std::size_t i = 0; i < system->dim(); ++i) {
        BasisState occ = system->basis_state(i);
        double factor = 1.0;
        bool alive = true;
        for (const auto& [mode, delta] : resolved) {
            if (delta == -1) {
                if (occ[mode] == 0) {
                    alive = false;
                    break;
                }
                factor *= std::sqrt(static_cast<double>(occ[mode]));
                occ[mode] -= 1;
            } else {
                if (occ[mode] >= system->modes()[mode].cutoff) {
                    alive = false;
                    break;
                }
                occ[mode] += 1;
                factor *= std::sqrt(static_cast<double>(occ[mode]));
            }
        }
        if (!alive) continue;
        if (const auto j = system->find(occ))
            entries.push_back({*j, i, coefficient * factor});
    }
    return LinearOperator(std::move(system), entries, false);
}

LinearOperator constraint_functional(ModeSystemPtr system, std::size_t constraint_index) {
    if (constraint_index >= system->constraints().size())
        throw ContractError("constraint_functional: index out of range");
    const Constraint& c = system->constraints()[constraint_index];
    std::vector<LinearOperator::Triplet> entries;
    for (std::size_t i = 0; i < system->dim(); ++i) {
        const BasisState& occ = system->basis_state(i);
        long long total = 0;
        for (std::size_t m = 0; m < occ.size(); ++m) total += c.coeffs[m] * occ[m];
        if (total != 0) entries.push_back({i, i, complexd(static_cast<double>(total), 0.0)});
    }
    return LinearOperator(std::move(system), entries, true);
}

DenseMatrix propagator(const LinearOperator& h, double t) {
    if (!h.hermitian()) throw ContractError("propagator: Hamiltonian must be flagged hermitian");
    if (h.dim() > kDenseLimit)
        throw ResourceError("propagator: dimension " + std::to_string(h.dim()) +
                            " exceeds the dense limit " + std::to_string(kDenseLimit));
    DenseMatrix m = h.to_dense();
    m *= complexd(0.0, -t);
    return expm(m);
}

StateVector evolve_exact(const LinearOperator& h, const StateVector& psi, double t) {
    if (!psi.system()->compatible(*h.system()))
        throw ContractError("evolve_exact: state lives on a different mode system");
    const DenseMatrix u = propagator(h, t);
    std::vector<complexd> out(psi.dim());
    kernels::gemm(u.data(), psi.amplitudes().data(), out.data(), psi.dim(), psi.dim(), 1);
    StateVector result(psi.system(), std::move(out));
    if (std::abs(result.norm() - psi.norm()) > 1e-12)
        throw NumericalError("evolve_exact: norm drifted beyond 1e-12");
    return result;
}

StateVector expm_apply(const LinearOperator& a, complexd alpha, const StateVector& psi) {
    if (!psi.system()->compatible(*a.system()))
        throw ContractError("expm_apply: state lives on a different mode system");
    // Substeps keep ||alpha A|| / s <= 1 so the Taylor series converges in a
    // few dozen terms at double precision.
    const double scaled_norm = std::abs(alpha) * a.opnorm1();
    const int substeps = std::max(1, static_cast<int>(std::ceil(scaled_norm)));
    const complexd step = alpha / static_cast<double>(substeps);

    std::vector<complexd> acc = psi.amplitudes();
    std::vector<complexd> term(psi.dim());
    std::vector<complexd> next(psi.dim());
    for (int s = 0; s < substeps; ++s) {
        term = acc; // k = 0 term of the series for this substep
        std::vector<complexd> local = acc;
        bool converged = false;
        for (int k = 1; k <= 128; ++k) {
            a.apply_raw(term.data(), next.data(), step / static_cast<double>(k));
            term.swap(next);
            for (std::size_t i = 0; i < local.size(); ++i) local[i] += term[i];
            const double term_norm = kernels::norm2(term.data(), term.size());
            const double acc_norm = kernels::norm2(local.data(), local.size());
            if (term_norm <= 1e-16 * acc_norm) {
                converged = true;
                break;
            }
        }
        if (!converged) throw NumericalError("expm_apply: Taylor series failed to converge");
        acc = std::move(local);
    }
    return StateVector(psi.system(), std::move(acc));
}

std::vector<TrajectoryPoint> evolve_timedep(
    const std::function<LinearOperator(double)>& h_builder, const PulseSchedule& schedule,
    const StateVector& psi, int steps, int stride) {
    if (steps < 1) throw ConfigError("evolve_timedep: steps must be >= 1");
    if (stride < 1) throw ConfigError("evolve_timedep: stride must be >= 1");
    if (!(schedule.duration >= 0.0) || !schedule.value)
        throw ConfigError("evolve_timedep: schedule needs a duration and a value function");

    const double dt = schedule.duration / steps;
    std::vector<TrajectoryPoint> trajectory;
    trajectory.push_back({0.0, psi});
    StateVector state = psi;
    for (int k = 0; k < steps; ++k) {
        const double t_mid = (k + 0.5) * dt;
        const LinearOperator h = h_builder(schedule(t_mid));
        if (!h.hermitian())
            throw ContractError("evolve_timedep: builder returned a non-hermitian operator");
        state = expm_apply(h, complexd(0.0, -dt), state);
        if (k == steps - 1 || (k + 1) % stride == 0)
            trajectory.push_back({(k + 1) * dt, state});
    }
    if (std::abs(trajectory.back().state.norm() - psi.norm()) > 1e-9)
        throw NumericalError(
            "evolve_timedep: norm drifted beyond 1e-9; increase the step count");
    return trajectory;
}

namespace {

double choose(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double out = 1.0;
    for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
    return out;
}

// P(detect k | true n) for one mode with per-photon efficiency eta.
double thinning_probability(int n, int k, double eta) {
    if (eta >= 1.0) return k == n ? 1.0 : 0.0;
    if (eta <= 0.0) return k == 0 ? 1.0 : 0.0;
    return choose(n, k) * std::pow(eta, k) * std::pow(1.0 - eta, n - k);
}

} // namespace

std::vector<DetectionOutcome> measure_occupations(const StateVector& psi,
                                                  const std::vector<std::string>& labels,
                                                  const std::vector<double>& efficiencies,
                                                  MeasureMode mode, std::uint64_t seed) {
    if (labels.empty()) throw ConfigError("measure_occupations: no modes listed");
    if (efficiencies.size() != labels.size())
        throw ConfigError("measure_occupations: need one efficiency per measured mode");
    for (const double eta : efficiencies)
        if (!(eta >= 0.0 && eta <= 1.0))
            throw ConfigError("measure_occupations: efficiency must lie in [0,1]");

    const ModeSystemPtr& system = psi.system();
    std::vector<std::size_t> mode_idx;
    mode_idx.reserve(labels.size());
    for (const auto& label : labels) mode_idx.push_back(system->mode_index(label));

    // Born-rule grouping by the occupation tuple on the measured modes.
    std::map<std::vector<int>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < psi.dim(); ++i) {
        if (psi[i] == complexd(0.0, 0.0)) continue;
        std::vector<int> key(mode_idx.size());
        for (std::size_t m = 0; m < mode_idx.size(); ++m)
            key[m] = system->basis_state(i)[mode_idx[m]];
        groups[key].push_back(i);
    }

    struct TrueOutcome {
        std::vector<int> counts;
        double probability;
        StateVector conditional;
    };
    std::vector<TrueOutcome> true_outcomes;
    for (const auto& [counts, indices] : groups) {
        double p = 0.0;
        std::vector<complexd> amps(psi.dim(), complexd(0.0, 0.0));
        for (const std::size_t i : indices) {
            p += std::norm(psi[i]);
            amps[i] = psi[i];
        }
        if (p <= 0.0) continue;
        const double inv = 1.0 / std::sqrt(p);
        for (auto& v : amps) v *= inv;
        true_outcomes.push_back({counts, p, StateVector(system, std::move(amps))});
    }

    std::vector<DetectionOutcome> outcomes;
    if (mode == MeasureMode::exact) {
        for (const auto& to : true_outcomes) {
            // Expand the per-mode thinning product over all detected tuples.
            std::vector<std::pair<std::vector<int>, double>> partial = {{{}, 1.0}};
            for (std::size_t m = 0; m < mode_idx.size(); ++m) {
                std::vector<std::pair<std::vector<int>, double>> next;
                for (const auto& [prefix, weight] : partial) {
                    for (int k = 0; k <= to.counts[m]; ++k) {
                        const double pt = thinning_probability(to.counts[m], k, efficiencies[m]);
                        if (pt == 0.0) continue;
                        auto tuple = prefix;
                        tuple.push_back(k);
                        next.emplace_back(std::move(tuple), weight * pt);
                    }
                }
                partial = std::move(next);
            }
            for (auto& [detected, weight] : partial)
                outcomes.push_back(
                    {to.counts, std::move(detected), to.probability * weight, to.conditional});
        }
        double total = 0.0;
        for (const auto& o : outcomes) total += o.probability;
        if (std::abs(total - 1.0) > 1e-12)
            throw NumericalError("measure_occupations: outcome probabilities sum to " +
                                 std::to_string(total));
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        const double draw = uniform(rng);
        double cumulative = 0.0;
        const TrueOutcome* chosen = &true_outcomes.back();
        for (const auto& to : true_outcomes) {
            cumulative += to.probability;
            if (draw < cumulative) {
                chosen = &to;
                break;
            }
        }
        std::vector<int> detected(mode_idx.size(), 0);
        for (std::size_t m = 0; m < mode_idx.size(); ++m) {
            std::binomial_distribution<int> thin(chosen->counts[m], efficiencies[m]);
            detected[m] = thin(rng);
        }
        double weight = 1.0;
        for (std::size_t m = 0; m < mode_idx.size(); ++m)
            weight *= thinning_probability(chosen->counts[m], detected[m], efficiencies[m]);
        outcomes.push_back(
            {chosen->counts, detected, chosen->probability * weight, chosen->conditional});
    }
    return outcomes;
}

double fidelity(const StateVector& a, const StateVector& b) {
    return std::norm(inner_product(a, b));
}

double phase_free_two_component_fidelity(const StateVector& psi, const BasisState& comp_a,
                                         const BasisState& comp_b) {
    const auto ia = psi.system()->find(comp_a);
    const auto ib = psi.system()->find(comp_b);
    if (!ia || !ib)
        throw ConfigError("phase_free_two_component_fidelity: component not in basis");
    const double amp = std::abs(psi[*ia]) + std::abs(psi[*ib]);
    return amp * amp / 2.0;
}

StateVector extract_modes(const StateVector& psi, const std::vector<std::string>& labels,
                          ModeSystemPtr target) {
    const ModeSystemPtr& full = psi.system();
    std::vector<std::size_t> keep;
    keep.reserve(labels.size());
    for (const auto& label : labels) keep.push_back(full->mode_index(label));

    if (target->mode_count() != labels.size())
        throw ContractError("extract_modes: target system has the wrong mode count");
    for (std::size_t m = 0; m < labels.size(); ++m)
        if (target->modes()[m].label != labels[m])
            throw ContractError("extract_modes: target mode labels do not match");

    std::vector<bool> kept(full->mode_count(), false);
    for (const std::size_t k : keep) kept[k] = true;

    // The excluded modes must be in one definite occupation configuration.
    std::optional<std::vector<int>> frozen;
    for (std::size_t i = 0; i < psi.dim(); ++i) {
        if (std::abs(psi[i]) <= 1e-14) continue;
        std::vector<int> rest;
        for (std::size_t m = 0; m < full->mode_count(); ++m)
            if (!kept[m]) rest.push_back(full->basis_state(i)[m]);
        if (!frozen)
            frozen = std::move(rest);
        else if (*frozen != rest)
            throw ContractError(
                "extract_modes: excluded modes are entangled with the kept modes");
    }
    if (!frozen) throw NumericalError("extract_modes: zero state");

    std::vector<complexd> amps(target->dim(), complexd(0.0, 0.0));
    for (std::size_t i = 0; i < psi.dim(); ++i) {
        if (psi[i] == complexd(0.0, 0.0)) continue;
        BasisState occ(keep.size());
        for (std::size_t m = 0; m < keep.size(); ++m) occ[m] = full->basis_state(i)[keep[m]];
        const auto j = target->find(occ);
        if (!j) throw ContractError("extract_modes: restricted tuple missing from target basis");
        amps[*j] += psi[i];
    }
    return StateVector(std::move(target), std::move(amps));
}

StateVector extract_modes(const StateVector& psi, const std::vector<std::string>& labels) {
    const ModeSystemPtr& full = psi.system();
    std::vector<ModeSpec> sub_modes;
    for (const auto& label : labels)
        sub_modes.push_back(full->modes()[full->mode_index(label)]);
    return extract_modes(psi, labels, std::make_shared<ModeSystem>(sub_modes));
}

complexd expectation(const LinearOperator& op, const StateVector& psi) {
    return inner_product(psi, op.apply(psi));
}

} // namespace noonsim
