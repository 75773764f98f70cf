#include "symortho/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/SVD>

namespace symortho {

namespace {

std::size_t product(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

std::string dims_string(const std::vector<std::size_t>& dims) {
    std::string out = "[";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        out += (i ? "," : "") + std::to_string(dims[i]);
    }
    return out + "]";
}

void require_same_dims(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                       const char* what) {
    if (a != b) {
        throw ShapeError(std::string(what) + ": dimension mismatch " + dims_string(a) + " vs " +
                         dims_string(b));
    }
}

template <typename S> S conj_if(const S& x) {
    if constexpr (std::is_same_v<S, Complex>) {
        return std::conj(x);
    } else {
        return x;
    }
}

std::vector<std::vector<std::size_t>> all_permutations(std::size_t d) {
    std::vector<std::size_t> p(d);
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<std::size_t>> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

} // namespace

std::string_view to_string(Field field) {
    return field == Field::Real ? "real" : "complex";
}

template <typename S> BasicTensor<S>::BasicTensor() : dims_{1}, data_(1, S{}) {}

template <typename S>
BasicTensor<S>::BasicTensor(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) {
        throw ShapeError("tensor order must be at least 1");
    }
    for (auto n : dims_) {
        if (n == 0) {
            throw ShapeError("tensor dimensions must be positive, got " + dims_string(dims_));
        }
    }
    data_.assign(product(dims_), S{});
}

template <typename S>
BasicTensor<S>::BasicTensor(std::vector<std::size_t> dims, std::vector<S> data)
    : BasicTensor(std::move(dims)) {
    if (data.size() != data_.size()) {
        throw ShapeError("data length " + std::to_string(data.size()) + " does not match dims " +
                         dims_string(dims_) + " (expected " + std::to_string(data_.size()) + ")");
    }
    data_ = std::move(data);
}

template <typename S> bool BasicTensor<S>::is_cubical() const {
    return std::all_of(dims_.begin(), dims_.end(), [&](auto n) { return n == dims_.front(); });
}

template <typename S> std::size_t BasicTensor<S>::offset(std::span<const std::size_t> index) const {
    if (index.size() != dims_.size()) {
        throw ShapeError("index has " + std::to_string(index.size()) + " entries, tensor order is " +
                         std::to_string(dims_.size()));
    }
    std::size_t flat = 0;
    for (std::size_t j = 0; j < dims_.size(); ++j) {
        if (index[j] >= dims_[j]) {
            throw ShapeError("index out of range in mode " + std::to_string(j));
        }
        flat = flat * dims_[j] + index[j];
    }
    return flat;
}

template <typename S>
void BasicTensor<S>::unravel(std::size_t flat, std::span<std::size_t> index) const {
    for (std::size_t j = dims_.size(); j-- > 0;) {
        index[j] = flat % dims_[j];
        flat /= dims_[j];
    }
}

template <typename S> BasicTensor<S>& BasicTensor<S>::operator+=(const BasicTensor& other) {
    require_same_dims(dims_, other.dims_, "tensor addition");
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += other.data_[i];
    }
    return *this;
}

template <typename S> BasicTensor<S>& BasicTensor<S>::operator-=(const BasicTensor& other) {
    require_same_dims(dims_, other.dims_, "tensor subtraction");
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] -= other.data_[i];
    }
    return *this;
}

template <typename S> BasicTensor<S>& BasicTensor<S>::operator*=(S alpha) {
    for (auto& x : data_) {
        x *= alpha;
    }
    return *this;
}

template <typename S> BasicRankOneTerm<S> BasicRankOneTerm<S>::canonical() const {
    BasicRankOneTerm out = *this;
    for (auto& v : out.factors) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double mag = std::abs(v(i));
            if (mag > 1e-12) {
                const S phase = v(i) / mag;
                v *= conj_if(phase);
                v(i) = mag;
                out.sigma *= phase;
                break;
            }
        }
    }
    return out;
}

template <typename S> BasicDecomposition<S> BasicDecomposition<S>::canonical() const {
    BasicDecomposition out{dims, {}};
    out.terms.reserve(terms.size());
    for (const auto& term : terms) {
        out.terms.push_back(term.canonical());
    }
    return out;
}

template <typename S> S inner(const BasicTensor<S>& t, const BasicTensor<S>& s) {
    require_same_dims(t.dims(), s.dims(), "inner");
    S acc{};
    const auto a = t.data();
    const auto b = s.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * conj_if(b[i]);
    }
    return acc;
}

AnyScalar inner(const AnyTensor& t, const AnyTensor& s) {
    if (t.index() != s.index()) {
        throw FieldError("inner: field mismatch between real and complex tensors");
    }
    if (const auto* tr = std::get_if<Tensor>(&t)) {
        return inner(*tr, std::get<Tensor>(s));
    }
    return inner(std::get<ComplexTensor>(t), std::get<ComplexTensor>(s));
}

template <typename S> double frobenius_norm(const BasicTensor<S>& t) {
    double acc = 0.0;
    for (const auto& x : t.data()) {
        acc += std::norm(x);
    }
    return std::sqrt(acc);
}

template <typename S>
BasicTensor<S> contract_mode(const BasicTensor<S>& t, std::size_t mode, const Vector<S>& v) {
    if (mode >= t.order()) {
        throw ShapeError("contract_mode: mode " + std::to_string(mode) + " out of range for order " +
                         std::to_string(t.order()));
    }
    if (t.order() == 1) {
        throw ShapeError("contract_mode: cannot contract an order-1 tensor to order 0");
    }
    if (static_cast<std::size_t>(v.size()) != t.dim(mode)) {
        throw ShapeError("contract_mode: vector length " + std::to_string(v.size()) +
                         " does not match mode dimension " + std::to_string(t.dim(mode)));
    }
    std::vector<std::size_t> out_dims;
    for (std::size_t j = 0; j < t.order(); ++j) {
        if (j != mode) {
            out_dims.push_back(t.dim(j));
        }
    }
    // View the data as [outer, n, inner].
    std::size_t outer_size = 1;
    for (std::size_t j = 0; j < mode; ++j) {
        outer_size *= t.dim(j);
    }
    const std::size_t n = t.dim(mode);
    const std::size_t inner_size = t.size() / (outer_size * n);
    BasicTensor<S> out(std::move(out_dims));
    auto src = t.data();
    auto dst = out.data();
    for (std::size_t o = 0; o < outer_size; ++o) {
        for (std::size_t i = 0; i < n; ++i) {
            const S w = v(static_cast<Eigen::Index>(i));
            const S* row = &src[(o * n + i) * inner_size];
            S* target = &dst[o * inner_size];
            for (std::size_t q = 0; q < inner_size; ++q) {
                target[q] += w * row[q];
            }
        }
    }
    return out;
}

template <typename S>
BasicTensor<S> multiply_mode(const BasicTensor<S>& t, std::size_t mode, const Matrix<S>& m) {
    if (mode >= t.order()) {
        throw ShapeError("multiply_mode: mode out of range");
    }
    if (static_cast<std::size_t>(m.cols()) != t.dim(mode)) {
        throw ShapeError("multiply_mode: matrix columns do not match mode dimension");
    }
    auto out_dims = t.dims();
    out_dims[mode] = static_cast<std::size_t>(m.rows());
    std::size_t outer_size = 1;
    for (std::size_t j = 0; j < mode; ++j) {
        outer_size *= t.dim(j);
    }
    const std::size_t n = t.dim(mode);
    const std::size_t inner_size = t.size() / (outer_size * n);
    const auto rows = static_cast<std::size_t>(m.rows());
    BasicTensor<S> out(std::move(out_dims));
    auto src = t.data();
    auto dst = out.data();
    for (std::size_t o = 0; o < outer_size; ++o) {
        for (std::size_t a = 0; a < rows; ++a) {
            S* target = &dst[(o * rows + a) * inner_size];
            for (std::size_t i = 0; i < n; ++i) {
                const S w = m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i));
                if (w == S{}) {
                    continue;
                }
                const S* row = &src[(o * n + i) * inner_size];
                for (std::size_t q = 0; q < inner_size; ++q) {
                    target[q] += w * row[q];
                }
            }
        }
    }
    return out;
}

template <typename S>
Vector<S> contract_except(const BasicTensor<S>& t, std::span<const Vector<S>> factors,
                          std::size_t skip) {
    const std::size_t d = t.order();
    if (factors.size() != d) {
        throw ShapeError("contract_except: expected " + std::to_string(d) + " factors, got " +
                         std::to_string(factors.size()));
    }
    if (skip >= d) {
        throw ShapeError("contract_except: mode out of range");
    }
    for (std::size_t j = 0; j < d; ++j) {
        if (j != skip && static_cast<std::size_t>(factors[j].size()) != t.dim(j)) {
            throw ShapeError("contract_except: factor length mismatch in mode " + std::to_string(j));
        }
    }
    // Trailing modes first: each step is a matrix-vector product on the row-major layout.
    std::vector<S> buffer(t.data().begin(), t.data().end());
    std::size_t len = buffer.size();
    for (std::size_t j = d; j-- > skip + 1;) {
        const std::size_t n = t.dim(j);
        const std::size_t rows = len / n;
        const auto& v = factors[j];
        for (std::size_t a = 0; a < rows; ++a) {
            S acc{};
            const S* row = &buffer[a * n];
            for (std::size_t i = 0; i < n; ++i) {
                acc += row[i] * v(static_cast<Eigen::Index>(i));
            }
            buffer[a] = acc;
        }
        len = rows;
    }
    // Leading modes: contract the first remaining index.
    for (std::size_t j = 0; j < skip; ++j) {
        const std::size_t n = t.dim(j);
        const std::size_t rest = len / n;
        const auto& v = factors[j];
        for (std::size_t q = 0; q < rest; ++q) {
            S acc{};
            for (std::size_t i = 0; i < n; ++i) {
                acc += v(static_cast<Eigen::Index>(i)) * buffer[i * rest + q];
            }
            buffer[q] = acc;
        }
        len = rest;
    }
    Vector<S> out(static_cast<Eigen::Index>(len));
    for (std::size_t i = 0; i < len; ++i) {
        out(static_cast<Eigen::Index>(i)) = buffer[i];
    }
    return out;
}

template <typename S> S contract_all(const BasicTensor<S>& t, std::span<const Vector<S>> factors) {
    const Vector<S> last = contract_except(t, factors, t.order() - 1);
    const auto& v = factors[t.order() - 1];
    if (v.size() != last.size()) {
        throw ShapeError("contract_all: factor length mismatch in last mode");
    }
    return (last.array() * v.array()).sum();
}

template <typename S>
S inner_rank_one(const BasicTensor<S>& t, std::span<const Vector<S>> factors) {
    if constexpr (std::is_same_v<S, Complex>) {
        std::vector<Vector<S>> conj(factors.begin(), factors.end());
        for (auto& v : conj) {
            v = v.conjugate();
        }
        return contract_all<S>(t, conj);
    } else {
        return contract_all<S>(t, factors);
    }
}

template <typename S> BasicTensor<S> outer(std::span<const Vector<S>> factors) {
    if (factors.empty()) {
        throw ShapeError("outer: empty factor list");
    }
    std::vector<std::size_t> dims;
    for (const auto& v : factors) {
        dims.push_back(static_cast<std::size_t>(v.size()));
    }
    BasicTensor<S> out(dims);
    auto dst = out.data();
    // Build incrementally: data for modes [0, j] is the outer product of the prefix.
    std::vector<S> prefix{S{1}};
    for (const auto& v : factors) {
        std::vector<S> next(prefix.size() * static_cast<std::size_t>(v.size()));
        for (std::size_t a = 0; a < prefix.size(); ++a) {
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                next[a * static_cast<std::size_t>(v.size()) + static_cast<std::size_t>(i)] =
                    prefix[a] * v(i);
            }
        }
        prefix = std::move(next);
    }
    std::copy(prefix.begin(), prefix.end(), dst.begin());
    return out;
}

template <typename S> Matrix<S> unfold(const BasicTensor<S>& t, std::size_t mode) {
    if (mode >= t.order()) {
        throw ShapeError("unfold: mode out of range");
    }
    const auto rows = t.dim(mode);
    const auto cols = t.size() / rows;
    Matrix<S> m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::vector<std::size_t> index(t.order());
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
        t.unravel(flat, index);
        std::size_t col = 0;
        for (std::size_t j = 0; j < t.order(); ++j) {
            if (j != mode) {
                col = col * t.dim(j) + index[j];
            }
        }
        m(static_cast<Eigen::Index>(index[mode]), static_cast<Eigen::Index>(col)) = t[flat];
    }
    return m;
}

template <typename S>
BasicTensor<S> permute(const BasicTensor<S>& t, std::span<const std::size_t> perm) {
    const std::size_t d = t.order();
    if (perm.size() != d) {
        throw ShapeError("permute: permutation length does not match order");
    }
    std::vector<std::size_t> out_dims(d);
    for (std::size_t k = 0; k < d; ++k) {
        out_dims[k] = t.dim(perm[k]);
    }
    BasicTensor<S> out(out_dims);
    std::vector<std::size_t> src(d), dst(d);
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
        out.unravel(flat, dst);
        for (std::size_t k = 0; k < d; ++k) {
            src[perm[k]] = dst[k];
        }
        out[flat] = t.at(std::span<const std::size_t>(src));
    }
    return out;
}

template <typename S> bool is_symmetric(const BasicTensor<S>& t, double tol) {
    if (!t.is_cubical()) {
        throw ShapeError("is_symmetric: tensor is not cubical");
    }
    const std::size_t d = t.order();
    std::vector<std::vector<std::size_t>> perms;
    if (d <= 4) {
        perms = all_permutations(d);
    } else {
        for (std::size_t j = 0; j + 1 < d; ++j) {
            std::vector<std::size_t> p(d);
            std::iota(p.begin(), p.end(), 0);
            std::swap(p[j], p[j + 1]);
            perms.push_back(std::move(p));
        }
    }
    std::vector<std::size_t> index(d), moved(d);
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
        t.unravel(flat, index);
        for (const auto& p : perms) {
            for (std::size_t k = 0; k < d; ++k) {
                moved[k] = index[p[k]];
            }
            if (std::abs(t[flat] - t.at(std::span<const std::size_t>(moved))) > tol) {
                return false;
            }
        }
    }
    return true;
}

template <typename S> BasicTensor<S> symmetrize(const BasicTensor<S>& t) {
    if (!t.is_cubical()) {
        throw ShapeError("symmetrize: tensor is not cubical");
    }
    const auto perms = all_permutations(t.order());
    BasicTensor<S> out(t.dims());
    for (const auto& p : perms) {
        out += permute(t, p);
    }
    out *= S{1.0 / static_cast<double>(perms.size())};
    return out;
}

template <typename S> BasicTensor<S> assemble(const BasicDecomposition<S>& decomposition) {
    BasicTensor<S> out(decomposition.dims);
    for (const auto& term : decomposition.terms) {
        if (term.factors.size() != decomposition.dims.size()) {
            throw ShapeError("assemble: term order does not match decomposition dims");
        }
        for (std::size_t j = 0; j < term.factors.size(); ++j) {
            if (static_cast<std::size_t>(term.factors[j].size()) != decomposition.dims[j]) {
                throw ShapeError("assemble: factor length mismatch in mode " + std::to_string(j));
            }
        }
        out += term.sigma * outer<S>(term.factors);
    }
    return out;
}

double unfolding_spectral_bound(const Tensor& t) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < t.order(); ++j) {
        const Mat m = unfold(t, j);
        Eigen::JacobiSVD<Mat> svd(m);
        best = std::min(best, svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
    }
    return best;
}

#define SYMORTHO_INSTANTIATE(S)                                                                    \
    template class BasicTensor<S>;                                                                 \
    template struct BasicRankOneTerm<S>;                                                           \
    template struct BasicDecomposition<S>;                                                         \
    template S inner<S>(const BasicTensor<S>&, const BasicTensor<S>&);                             \
    template double frobenius_norm<S>(const BasicTensor<S>&);                                      \
    template BasicTensor<S> contract_mode<S>(const BasicTensor<S>&, std::size_t, const Vector<S>&); \
    template BasicTensor<S> multiply_mode<S>(const BasicTensor<S>&, std::size_t, const Matrix<S>&); \
    template Vector<S> contract_except<S>(const BasicTensor<S>&, std::span<const Vector<S>>,        \
                                          std::size_t);                                            \
    template S contract_all<S>(const BasicTensor<S>&, std::span<const Vector<S>>);                 \
    template S inner_rank_one<S>(const BasicTensor<S>&, std::span<const Vector<S>>);               \
    template BasicTensor<S> outer<S>(std::span<const Vector<S>>);                                  \
    template Matrix<S> unfold<S>(const BasicTensor<S>&, std::size_t);                              \
    template BasicTensor<S> permute<S>(const BasicTensor<S>&, std::span<const std::size_t>);       \
    template bool is_symmetric<S>(const BasicTensor<S>&, double);                                  \
    template BasicTensor<S> symmetrize<S>(const BasicTensor<S>&);                                  \
    template BasicTensor<S> assemble<S>(const BasicDecomposition<S>&);

SYMORTHO_INSTANTIATE(double)
SYMORTHO_INSTANTIATE(Complex)

#undef SYMORTHO_INSTANTIATE

} // namespace symortho
