// qudit_state.hpp
// Dense statevector simulator over a tensor product of qudit subsystems.
//
// Flattened indices are row-major over the layout: the last subsystem varies
// fastest, so a walker/coin layout [M, 2] stores |x, c> at 2*x + c.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qwchain/error.hpp"
#include "qwchain/rng.hpp"

namespace qwchain {

using complex = std::complex<double>;

/// Tolerance for "equal" amplitudes and normalization.
inline constexpr double amplitude_tolerance = 1e-9;
/// Admission threshold of apply_unitary: ||M^dagger M - I||_max.
inline constexpr double unitary_admission_tolerance = 1e-10;
inline constexpr std::size_t default_dimension_cap = std::size_t{1} << 20;

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

/// Row-major dense complex matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    Matrix(std::initializer_list<std::initializer_list<complex>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& row : rows) {
            if (row.size() != cols_) fail(error_code::dimension_mismatch, "ragged matrix rows");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }

    complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    const std::vector<complex>& data() const noexcept { return data_; }

    Matrix adjoint() const {
        Matrix out(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
        return out;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) fail(error_code::dimension_mismatch, "matrix product shape");
        Matrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const complex aik = a(i, k);
                if (aik == complex{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<complex> data_;
};

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        fail(error_code::dimension_mismatch, "matrix comparison shape");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

/// ||M^dagger M - I||_max
inline double unitarity_defect(const Matrix& m) {
    if (!m.is_square()) fail(error_code::dimension_mismatch, "unitarity of non-square matrix");
    return max_abs_diff(m.adjoint() * m, Matrix::identity(m.rows()));
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

/// Discrete Fourier matrix with entries exp(2 pi i jk / d) / sqrt(d).
inline Matrix fourier_matrix(std::size_t d) {
    if (d < 2) fail(error_code::invalid_dimension, "Fourier dimension must be >= 2");
    Matrix f(d, d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < d; ++k) {
            // reduce jk mod d first so large d keeps full phase accuracy
            const double phase = 2.0 * std::numbers::pi * static_cast<double>((j * k) % d) /
                                 static_cast<double>(d);
            f(j, k) = std::polar(scale, phase);
        }
    return f;
}

// ---------------------------------------------------------------------------
// Layout and state
// ---------------------------------------------------------------------------

class SubsystemLayout {
public:
    SubsystemLayout() = default;

    explicit SubsystemLayout(std::vector<std::size_t> dims, std::size_t cap = default_dimension_cap)
        : dims_(std::move(dims)), strides_(dims_.size()) {
        if (dims_.empty()) fail(error_code::invalid_dimension, "layout needs at least one subsystem");
        total_ = 1;
        for (std::size_t d : dims_) {
            if (d < 2) fail(error_code::invalid_dimension, "subsystem dimension must be >= 2");
            if (total_ > cap / d)
                fail(error_code::invalid_dimension,
                     "Hilbert dimension exceeds cap of " + std::to_string(cap) + " amplitudes");
            total_ *= d;
        }
        std::size_t stride = 1;
        for (std::size_t i = dims_.size(); i-- > 0;) {
            strides_[i] = stride;
            stride *= dims_[i];
        }
    }

    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    std::size_t subsystems() const noexcept { return dims_.size(); }
    std::size_t dim(std::size_t i) const { return dims_.at(i); }
    std::size_t stride(std::size_t i) const { return strides_.at(i); }
    std::size_t total() const noexcept { return total_; }

    std::size_t digit(std::size_t flat, std::size_t subsystem) const {
        return (flat / strides_[subsystem]) % dims_[subsystem];
    }

    std::size_t flatten(const std::vector<std::size_t>& indices) const {
        if (indices.size() != dims_.size())
            fail(error_code::invalid_index, "expected " + std::to_string(dims_.size()) + " indices");
        std::size_t flat = 0;
        for (std::size_t i = 0; i < dims_.size(); ++i) {
            if (indices[i] >= dims_[i])
                fail(error_code::invalid_index, "index " + std::to_string(indices[i]) +
                                                    " out of range for subsystem " +
                                                    std::to_string(i));
            flat += indices[i] * strides_[i];
        }
        return flat;
    }

    std::vector<std::size_t> unflatten(std::size_t flat) const {
        std::vector<std::size_t> out(dims_.size());
        for (std::size_t i = 0; i < dims_.size(); ++i) out[i] = digit(flat, i);
        return out;
    }

    friend bool operator==(const SubsystemLayout& a, const SubsystemLayout& b) {
        return a.dims_ == b.dims_;
    }

private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> strides_;
    std::size_t total_ = 0;
};

enum class Basis { computational, fourier };

/// Immutable statevector. Every operation returns a new value.
class StateVector {
public:
    StateVector() = default;

    static StateVector basis(const SubsystemLayout& layout, const std::vector<std::size_t>& indices) {
        std::vector<complex> amps(layout.total());
        amps[layout.flatten(indices)] = 1.0;
        return StateVector(layout, std::move(amps));
    }

    /// Adopts amplitudes that are already normalized within amplitude_tolerance.
    static StateVector from_amplitudes(const SubsystemLayout& layout, std::vector<complex> amps) {
        if (amps.size() != layout.total())
            fail(error_code::dimension_mismatch, "amplitude count does not match layout");
        StateVector s(layout, std::move(amps));
        if (std::abs(s.norm() - 1.0) > amplitude_tolerance)
            fail(error_code::not_normalized, "amplitudes are not normalized");
        return s;
    }

    /// Scales arbitrary nonzero amplitudes to unit norm.
    static StateVector normalized(const SubsystemLayout& layout, std::vector<complex> amps) {
        if (amps.size() != layout.total())
            fail(error_code::dimension_mismatch, "amplitude count does not match layout");
        double sq = 0.0;
        for (const auto& a : amps) sq += std::norm(a);
        if (sq < 1e-300) fail(error_code::degenerate_state, "zero-norm amplitudes");
        const double inv = 1.0 / std::sqrt(sq);
        for (auto& a : amps) a *= inv;
        return StateVector(layout, std::move(amps));
    }

    const SubsystemLayout& layout() const noexcept { return layout_; }
    const std::vector<complex>& amplitudes() const noexcept { return amps_; }
    std::size_t size() const noexcept { return amps_.size(); }
    const complex& operator[](std::size_t flat) const { return amps_[flat]; }
    complex amplitude(const std::vector<std::size_t>& indices) const {
        return amps_[layout_.flatten(indices)];
    }

    double norm() const {
        double sq = 0.0;
        for (const auto& a : amps_) sq += std::norm(a);
        return std::sqrt(sq);
    }

private:
    friend class StateBuilder;
    StateVector(SubsystemLayout layout, std::vector<complex> amps)
        : layout_(std::move(layout)), amps_(std::move(amps)) {}

    SubsystemLayout layout_;
    std::vector<complex> amps_;
};

/// Mutable scratch used by library kernels to produce a StateVector without
/// a normalization round trip. Callers must keep the amplitudes unitary.
class StateBuilder {
public:
    explicit StateBuilder(const StateVector& s) : layout_(s.layout()), amps_(s.amplitudes()) {}
    explicit StateBuilder(const SubsystemLayout& layout) : layout_(layout), amps_(layout.total()) {}

    const SubsystemLayout& layout() const noexcept { return layout_; }
    std::vector<complex>& amplitudes() noexcept { return amps_; }
    StateVector finish() && { return StateVector(std::move(layout_), std::move(amps_)); }

private:
    SubsystemLayout layout_;
    std::vector<complex> amps_;
};

inline StateVector new_basis_state(const SubsystemLayout& layout, const std::vector<std::size_t>& indices) {
    return StateVector::basis(layout, indices);
}

inline complex inner_product(const StateVector& a, const StateVector& b) {
    if (!(a.layout() == b.layout())) fail(error_code::dimension_mismatch, "inner product layouts");
    complex acc{};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

/// |<a|b>|^2
inline double fidelity(const StateVector& a, const StateVector& b) {
    return std::norm(inner_product(a, b));
}

inline StateVector tensor(const StateVector& a, const StateVector& b) {
    std::vector<std::size_t> dims = a.layout().dims();
    dims.insert(dims.end(), b.layout().dims().begin(), b.layout().dims().end());
    SubsystemLayout layout(std::move(dims));
    std::vector<complex> amps(layout.total());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) amps[i * b.size() + j] = a[i] * b[j];
    StateBuilder out(layout);
    out.amplitudes() = std::move(amps);
    return std::move(out).finish();
}

/// Haar-random pure state (normalized complex Gaussian vector).
inline StateVector random_state(const SubsystemLayout& layout, Rng& rng) {
    std::vector<complex> amps(layout.total());
    for (auto& a : amps) {
        const double re = rng.normal();
        const double im = rng.normal();
        a = complex(re, im);
    }
    return StateVector::normalized(layout, std::move(amps));
}

namespace detail {

inline void check_targets(const SubsystemLayout& layout, const std::vector<std::size_t>& targets) {
    if (targets.empty()) fail(error_code::invalid_index, "no target subsystems");
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] >= layout.subsystems())
            fail(error_code::invalid_index, "target subsystem " + std::to_string(targets[i]) +
                                                " out of range");
        for (std::size_t j = 0; j < i; ++j)
            if (targets[j] == targets[i]) fail(error_code::invalid_index, "duplicate target subsystem");
    }
}

/// Flat offsets of every joint target configuration (row-major over targets).
inline std::vector<std::size_t> target_offsets(const SubsystemLayout& layout,
                                               const std::vector<std::size_t>& targets) {
    std::size_t sub = 1;
    for (std::size_t t : targets) sub *= layout.dim(t);
    std::vector<std::size_t> offsets(sub);
    for (std::size_t k = 0; k < sub; ++k) {
        std::size_t rem = k;
        std::size_t off = 0;
        for (std::size_t j = targets.size(); j-- > 0;) {
            const std::size_t d = layout.dim(targets[j]);
            off += (rem % d) * layout.stride(targets[j]);
            rem /= d;
        }
        offsets[k] = off;
    }
    return offsets;
}

/// Digits of a flat index that is stepped through 0, 1, 2, ... without division.
class Odometer {
public:
    explicit Odometer(const SubsystemLayout& layout) : layout_(layout), digits_(layout.subsystems(), 0) {}

    std::size_t operator[](std::size_t subsystem) const { return digits_[subsystem]; }

    void advance() {
        for (std::size_t s = digits_.size(); s-- > 0;) {
            if (++digits_[s] < layout_.dim(s)) return;
            digits_[s] = 0;
        }
    }

private:
    const SubsystemLayout& layout_;
    std::vector<std::size_t> digits_;
};

/// Flat indices whose target digits are all zero.
inline std::vector<std::size_t> target_bases(const SubsystemLayout& layout,
                                             const std::vector<std::size_t>& targets) {
    std::vector<std::size_t> bases;
    Odometer digits(layout);
    for (std::size_t i = 0; i < layout.total(); ++i, digits.advance()) {
        bool zero = true;
        for (std::size_t t : targets)
            if (digits[t] != 0) {
                zero = false;
                break;
            }
        if (zero) bases.push_back(i);
    }
    return bases;
}

/// Product without the NaN/inf recovery of operator*, which dominates inner loops.
inline complex cmul(const complex& a, const complex& b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

inline void apply_in_place(std::vector<complex>& amps, const Matrix& m,
                           const std::vector<std::size_t>& offsets,
                           const std::vector<std::size_t>& bases) {
    const std::size_t sub = offsets.size();
    std::vector<complex> in(sub);
    for (std::size_t base : bases) {
        for (std::size_t k = 0; k < sub; ++k) in[k] = amps[base + offsets[k]];
        for (std::size_t r = 0; r < sub; ++r) {
            complex acc{};
            for (std::size_t c = 0; c < sub; ++c) acc += cmul(m(r, c), in[c]);
            amps[base + offsets[r]] = acc;
        }
    }
}

}  // namespace detail

/// Applies `matrix` to the ordered `targets`, identity elsewhere.
inline StateVector apply_unitary(const StateVector& state, const Matrix& matrix,
                                 const std::vector<std::size_t>& targets) {
    const auto& layout = state.layout();
    detail::check_targets(layout, targets);
    std::size_t sub = 1;
    for (std::size_t t : targets) sub *= layout.dim(t);
    if (!matrix.is_square() || matrix.rows() != sub)
        fail(error_code::dimension_mismatch, "matrix is " + std::to_string(matrix.rows()) + "x" +
                                                 std::to_string(matrix.cols()) +
                                                 ", targets span dimension " + std::to_string(sub));
    if (unitarity_defect(matrix) > unitary_admission_tolerance)
        fail(error_code::not_unitary, "matrix fails unitarity check");
    StateBuilder out(state);
    detail::apply_in_place(out.amplitudes(), matrix, detail::target_offsets(layout, targets),
                           detail::target_bases(layout, targets));
    return std::move(out).finish();
}

/// Marginal probabilities over the joint configuration of `targets`.
inline std::vector<double> position_distribution(const StateVector& state,
                                                 const std::vector<std::size_t>& targets) {
    const auto& layout = state.layout();
    detail::check_targets(layout, targets);
    std::size_t sub = 1;
    for (std::size_t t : targets) sub *= layout.dim(t);
    std::vector<double> probs(sub, 0.0);
    for (std::size_t i = 0; i < state.size(); ++i) {
        std::size_t k = 0;
        for (std::size_t t : targets) k = k * layout.dim(t) + layout.digit(i, t);
        probs[k] += std::norm(state[i]);
    }
    return probs;
}

struct MeasurementResult {
    std::vector<std::size_t> outcomes;  // one per target, in target order
    StateVector collapsed;
};

/// Projective measurement of `targets`. Fourier-basis measurement rotates each
/// target by F^dagger, measures computationally, then rotates back with F so the
/// collapsed state is the measured Fourier eigenstate.
inline MeasurementResult measure(const StateVector& state, const std::vector<std::size_t>& targets,
                                 Basis basis, Rng& rng) {
    const auto& layout = state.layout();
    detail::check_targets(layout, targets);
    const double sq = [&] {
        double acc = 0.0;
        for (const auto& a : state.amplitudes()) acc += std::norm(a);
        return acc;
    }();
    if (sq < 1e-20) fail(error_code::degenerate_state, "cannot measure a zero-norm state");

    StateBuilder work(state);
    auto& amps = work.amplitudes();
    if (basis == Basis::fourier) {
        for (std::size_t t : targets) {
            const Matrix f_dag = fourier_matrix(layout.dim(t)).adjoint();
            detail::apply_in_place(amps, f_dag, detail::target_offsets(layout, {t}),
                                   detail::target_bases(layout, {t}));
        }
    }

    std::size_t sub = 1;
    for (std::size_t t : targets) sub *= layout.dim(t);
    std::vector<double> probs(sub, 0.0);
    std::vector<std::size_t> key(amps.size());
    detail::Odometer digits(layout);
    for (std::size_t i = 0; i < amps.size(); ++i, digits.advance()) {
        std::size_t k = 0;
        for (std::size_t t : targets) k = k * layout.dim(t) + digits[t];
        key[i] = k;
        probs[k] += std::norm(amps[i]);
    }

    const double u = rng.uniform() * sq;
    std::size_t chosen = sub;
    double cumulative = 0.0;
    std::size_t last_nonzero = 0;
    for (std::size_t k = 0; k < sub; ++k) {
        if (probs[k] > 0.0) last_nonzero = k;
        cumulative += probs[k];
        if (chosen == sub && u < cumulative && probs[k] > 0.0) chosen = k;
    }
    if (chosen == sub) chosen = last_nonzero;

    const double inv = 1.0 / std::sqrt(probs[chosen]);
    for (std::size_t i = 0; i < amps.size(); ++i) amps[i] = key[i] == chosen ? amps[i] * inv : complex{};

    MeasurementResult result;
    result.outcomes.resize(targets.size());
    std::size_t rem = chosen;
    for (std::size_t j = targets.size(); j-- > 0;) {
        const std::size_t d = layout.dim(targets[j]);
        result.outcomes[j] = rem % d;
        rem /= d;
    }

    if (basis == Basis::fourier) {
        // Every target now holds |k_t>, so F maps amplitude i to
        // F(digit_t(i), k_t) times the amplitude with digit t reset to k_t.
        std::vector<std::vector<complex>> columns;
        for (std::size_t j = 0; j < targets.size(); ++j) {
            const std::size_t d = layout.dim(targets[j]);
            std::vector<complex> col(d);
            for (std::size_t r = 0; r < d; ++r)
                col[r] = std::polar(1.0 / std::sqrt(static_cast<double>(d)),
                                    2.0 * std::numbers::pi * static_cast<double>((r * result.outcomes[j]) % d) /
                                        static_cast<double>(d));
            columns.push_back(std::move(col));
        }
        std::vector<complex> rotated(amps.size());
        detail::Odometer at(layout);
        for (std::size_t i = 0; i < amps.size(); ++i, at.advance()) {
            std::size_t src = i;
            complex factor = 1.0;
            for (std::size_t j = 0; j < targets.size(); ++j) {
                const std::size_t t = targets[j];
                const std::size_t digit = at[t];
                src = src - digit * layout.stride(t) + result.outcomes[j] * layout.stride(t);
                factor = detail::cmul(factor, columns[j][digit]);
            }
            rotated[i] = detail::cmul(factor, amps[src]);
        }
        amps = std::move(rotated);
    }

    result.collapsed = std::move(work).finish();
    return result;
}

}  // namespace qwchain
