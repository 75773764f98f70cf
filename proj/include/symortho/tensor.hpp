#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "symortho/error.hpp"

namespace symortho {

using Complex = std::complex<double>;

enum class Field { Real, Complex };

std::string_view to_string(Field field);

template <typename S> struct field_of;
template <> struct field_of<double> {
    static constexpr Field value = Field::Real;
};
template <> struct field_of<Complex> {
    static constexpr Field value = Field::Complex;
};

template <typename S> using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S> using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Vector<double>;
using Mat = Matrix<double>;

/**
 * Dense order-d tensor with explicit dimensions.
 *
 * Entries are stored flat in row-major order (last index fastest). The order
 * is at least one; an order-1 tensor is a plain vector. Values are immutable
 * in spirit: every operation in this module returns a new tensor.
 */
template <typename S> class BasicTensor {
public:
    using scalar_type = S;

    /// A length-one zero vector. Exists so tensors can live in containers.
    BasicTensor();
    /// Zero tensor of the given dimensions.
    explicit BasicTensor(std::vector<std::size_t> dims);
    BasicTensor(std::vector<std::size_t> dims, std::vector<S> data);

    static constexpr Field field() { return field_of<S>::value; }

    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t order() const { return dims_.size(); }
    std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
    std::size_t size() const { return data_.size(); }
    bool is_cubical() const;

    std::span<const S> data() const { return data_; }
    std::span<S> data() { return data_; }

    S& operator[](std::size_t flat) { return data_[flat]; }
    const S& operator[](std::size_t flat) const { return data_[flat]; }

    S& at(std::span<const std::size_t> index) { return data_[offset(index)]; }
    const S& at(std::span<const std::size_t> index) const { return data_[offset(index)]; }
    S& at(std::initializer_list<std::size_t> index) {
        return at(std::span<const std::size_t>(index.begin(), index.size()));
    }
    const S& at(std::initializer_list<std::size_t> index) const {
        return at(std::span<const std::size_t>(index.begin(), index.size()));
    }

    std::size_t offset(std::span<const std::size_t> index) const;
    /// Inverse of offset(); writes the multi-index of a flat position.
    void unravel(std::size_t flat, std::span<std::size_t> index) const;

    BasicTensor& operator+=(const BasicTensor& other);
    BasicTensor& operator-=(const BasicTensor& other);
    BasicTensor& operator*=(S alpha);

    friend BasicTensor operator+(BasicTensor a, const BasicTensor& b) { return a += b; }
    friend BasicTensor operator-(BasicTensor a, const BasicTensor& b) { return a -= b; }
    friend BasicTensor operator*(S alpha, BasicTensor a) { return a *= alpha; }
    friend BasicTensor operator*(BasicTensor a, S alpha) { return a *= alpha; }
    bool operator==(const BasicTensor& other) const = default;

private:
    std::vector<std::size_t> dims_;
    std::vector<S> data_;
};

using Tensor = BasicTensor<double>;
using ComplexTensor = BasicTensor<Complex>;
using AnyTensor = std::variant<Tensor, ComplexTensor>;
using AnyScalar = std::variant<double, Complex>;

/// One summand sigma * v_1 (x) ... (x) v_d with unit factors.
template <typename S> struct BasicRankOneTerm {
    S sigma{};
    std::vector<Vector<S>> factors;

    std::size_t order() const { return factors.size(); }
    /**
     * Canonical form: the first entry of each factor whose magnitude exceeds
     * 1e-12 is made positive real, the removed phase is pushed into sigma.
     */
    BasicRankOneTerm canonical() const;
};

/// Ordered list of rank-one terms sharing the same dimensions.
template <typename S> struct BasicDecomposition {
    std::vector<std::size_t> dims;
    std::vector<BasicRankOneTerm<S>> terms;

    std::size_t rank() const { return terms.size(); }
    BasicDecomposition canonical() const;
};

using RankOneTerm = BasicRankOneTerm<double>;
using Decomposition = BasicDecomposition<double>;
using ComplexRankOneTerm = BasicRankOneTerm<Complex>;
using ComplexDecomposition = BasicDecomposition<Complex>;

/// Frobenius inner product sum T(i) conj(S(i)).
template <typename S> S inner(const BasicTensor<S>& t, const BasicTensor<S>& s);
/// Runtime-field variant; throws FieldError when the fields differ.
AnyScalar inner(const AnyTensor& t, const AnyTensor& s);

template <typename S> double frobenius_norm(const BasicTensor<S>& t);

/// Vector contraction over `mode` (0-based); the singleton dimension is dropped.
template <typename S>
BasicTensor<S> contract_mode(const BasicTensor<S>& t, std::size_t mode, const Vector<S>& v);

/// Matrix contraction (T x_mode M): mode dimension n becomes M.rows().
template <typename S>
BasicTensor<S> multiply_mode(const BasicTensor<S>& t, std::size_t mode, const Matrix<S>& m);

/**
 * Contracts every mode except `skip` with the matching entry of `factors`
 * (no conjugation) and returns the remaining vector of length n_skip.
 * factors[skip] is ignored.
 */
template <typename S>
Vector<S> contract_except(const BasicTensor<S>& t, std::span<const Vector<S>> factors,
                          std::size_t skip);

/// Bilinear full contraction sum T(i) v_1(i_1) ... v_d(i_d) (no conjugation).
template <typename S>
S contract_all(const BasicTensor<S>& t, std::span<const Vector<S>> factors);

/// <T, v_1 (x) ... (x) v_d>, i.e. contract_all with conjugated factors.
template <typename S>
S inner_rank_one(const BasicTensor<S>& t, std::span<const Vector<S>> factors);

template <typename S> BasicTensor<S> outer(std::span<const Vector<S>> factors);

/// Mode-j unfolding: rows indexed by i_j, columns by the remaining indices in order.
template <typename S> Matrix<S> unfold(const BasicTensor<S>& t, std::size_t mode);

/// Tensor with modes reordered: result(i_perm[0], ...) convention, result mode k is input mode perm[k].
template <typename S>
BasicTensor<S> permute(const BasicTensor<S>& t, std::span<const std::size_t> perm);

inline constexpr double kSymmetryTol = 1e-12;

/**
 * True iff every permuted entry matches within `tol`. All d! permutations are
 * checked for d <= 4; adjacent transpositions (which generate S_d) otherwise.
 * Throws ShapeError for non-cubical tensors.
 */
template <typename S> bool is_symmetric(const BasicTensor<S>& t, double tol = kSymmetryTol);

/// Average over all index permutations. Throws ShapeError for non-cubical tensors.
template <typename S> BasicTensor<S> symmetrize(const BasicTensor<S>& t);

/// Sum of sigma_k * outer(factors_k); the empty decomposition gives the zero tensor.
template <typename S> BasicTensor<S> assemble(const BasicDecomposition<S>& decomposition);

/// Largest singular value over all mode unfoldings' minimum; an upper bound on the spectral norm.
double unfolding_spectral_bound(const Tensor& t);

} // namespace symortho
