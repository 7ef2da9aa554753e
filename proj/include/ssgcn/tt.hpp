#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "ssgcn/rng.hpp"

namespace ssgcn {

/// Shape of a tensor-train matrix.
///
/// A (b_pad x c_pad) matrix with b_pad = prod(in_factors) and
/// c_pad = prod(out_factors) is represented by d cores; core k has shape
/// (ranks[k], in_factors[k], out_factors[k], ranks[k+1]). Row and column
/// indices flatten their factor tuples row-major: i = sum_k i_k * prod_{t>k} b_t.
struct TtLayout {
    Eigen::Index in_dim = 0;   // logical rows b
    Eigen::Index out_dim = 0;  // logical columns c
    std::vector<Eigen::Index> in_factors;
    std::vector<Eigen::Index> out_factors;
    std::vector<Eigen::Index> ranks;  // d + 1 entries, ranks.front() == ranks.back() == 1

    std::size_t num_cores() const noexcept { return in_factors.size(); }
    Eigen::Index padded_in() const;
    Eigen::Index padded_out() const;
    Eigen::Index max_rank() const;
    /// Rows of core k's matrix form: ranks[k] * in_factors[k].
    Eigen::Index core_rows(std::size_t k) const { return ranks[k] * in_factors[k]; }
    /// Columns of core k's matrix form: out_factors[k] * ranks[k+1].
    Eigen::Index core_cols(std::size_t k) const { return out_factors[k] * ranks[k + 1]; }
    /// sum_k r_{k-1} b_k c_k r_k
    std::int64_t param_count() const;

    /// Throws std::invalid_argument when the invariants do not hold.
    void validate() const;

    friend bool operator==(const TtLayout&, const TtLayout&) = default;
};

/// Pads b (and c) to the smallest product of d factors that stays balanced:
/// each factor lies in [2, min(64, 2 * ceil(b^(1/d)))]. Among factorizations
/// of that product the one with the smallest largest factor wins, ties going
/// to the lexicographically smallest sorted tuple. Dimensions below 2^d that
/// admit no such product may use factors of 1 (a dimension of 1 maps to
/// all-ones factors). Ranks are (1, r_max, ..., r_max, 1). Throws
/// std::invalid_argument if no product within 2b exists.
TtLayout plan_factorization(Eigen::Index b, Eigen::Index c, int d, Eigen::Index r_max);

/// Factor tuple chosen for a single dimension (see plan_factorization).
std::vector<Eigen::Index> plan_dimension(Eigen::Index dim, int d);

/// (b * c) / sum_k r_{k-1} b_k c_k r_k with logical b, c.
double compression_ratio(const TtLayout& layout);

/// Chain of TT cores. Core k is stored as a row-major
/// (ranks[k] * b_k) x (c_k * ranks[k+1]) matrix, i.e. its data() is the
/// row-major flattening of the 4-way (r, b, c, r') tensor.
template <typename Scalar>
class TtCores {
    static_assert(std::is_floating_point_v<Scalar>, "TtCores needs a floating point scalar");

public:
    using CoreMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    TtCores() = default;
    explicit TtCores(TtLayout layout) : layout_(std::move(layout)) {
        layout_.validate();
        cores_.reserve(layout_.num_cores());
        for (std::size_t k = 0; k < layout_.num_cores(); ++k)
            cores_.push_back(CoreMatrix::Zero(layout_.core_rows(k), layout_.core_cols(k)));
    }

    const TtLayout& layout() const noexcept { return layout_; }
    std::size_t num_cores() const noexcept { return cores_.size(); }
    CoreMatrix& core(std::size_t k) { return cores_[k]; }
    const CoreMatrix& core(std::size_t k) const { return cores_[k]; }

    /// G_k[a, i, j, b]
    Scalar& at(std::size_t k, Eigen::Index a, Eigen::Index i, Eigen::Index j, Eigen::Index b) {
        return cores_[k](a * layout_.in_factors[k] + i, j * layout_.ranks[k + 1] + b);
    }
    Scalar at(std::size_t k, Eigen::Index a, Eigen::Index i, Eigen::Index j, Eigen::Index b) const {
        return cores_[k](a * layout_.in_factors[k] + i, j * layout_.ranks[k + 1] + b);
    }

    std::int64_t param_count() const { return layout_.param_count(); }

    bool all_finite() const {
        for (const auto& c : cores_)
            if (!c.allFinite()) return false;
        return true;
    }

private:
    TtLayout layout_;
    std::vector<CoreMatrix> cores_;
};

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Gaussian cores scaled so the reconstructed matrix has entry variance
/// 2 / (b + c): every core uses std (var / prod(interior ranks))^(1/(2d)).
template <typename Scalar>
void glorot_init(TtCores<Scalar>& tt, Rng& rng) {
    const auto& layout = tt.layout();
    const double target_var = 2.0 / static_cast<double>(layout.in_dim + layout.out_dim);
    double rank_product = 1.0;
    for (std::size_t k = 1; k + 1 < layout.ranks.size(); ++k) rank_product *= static_cast<double>(layout.ranks[k]);
    const double d = static_cast<double>(layout.num_cores());
    const double core_std = std::pow(target_var / rank_product, 1.0 / (2.0 * d));
    for (std::size_t k = 0; k < tt.num_cores(); ++k) {
        auto& core = tt.core(k);
        for (Eigen::Index i = 0; i < core.size(); ++i) core.data()[i] = static_cast<Scalar>(core_std * rng.normal());
    }
}

/// Dense b_pad x c_pad matrix, computed entry by entry as the product of core
/// slices. Intended as a reference, not for the hot path.
template <typename Scalar>
DenseMatrix<Scalar> tt_reconstruct_dense(const TtCores<Scalar>& tt) {
    const auto& layout = tt.layout();
    const auto d = layout.num_cores();
    const Eigen::Index rows = layout.padded_in();
    const Eigen::Index cols = layout.padded_out();
    DenseMatrix<Scalar> w(rows, cols);

    std::vector<Eigen::Index> i_idx(d), j_idx(d);
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> chain, next;
    for (Eigen::Index i = 0; i < rows; ++i) {
        Eigen::Index rem = i;
        for (std::size_t k = d; k-- > 0;) {
            i_idx[k] = rem % layout.in_factors[k];
            rem /= layout.in_factors[k];
        }
        for (Eigen::Index j = 0; j < cols; ++j) {
            Eigen::Index remj = j;
            for (std::size_t k = d; k-- > 0;) {
                j_idx[k] = remj % layout.out_factors[k];
                remj /= layout.out_factors[k];
            }
            chain = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Ones(1);
            for (std::size_t k = 0; k < d; ++k) {
                next = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Zero(layout.ranks[k + 1]);
                for (Eigen::Index a = 0; a < layout.ranks[k]; ++a)
                    for (Eigen::Index b = 0; b < layout.ranks[k + 1]; ++b)
                        next(b) += chain(a) * tt.at(k, a, i_idx[k], j_idx[k], b);
                chain.swap(next);
            }
            w(i, j) = chain(0);
        }
    }
    return w;
}

/// Left partial contractions cached by tt_forward for the backward pass.
/// partials[k] is the input of core k laid out as [prefix][r_k * b_k][suffix].
template <typename Scalar>
struct TtTape {
    Eigen::Index batch = 0;
    std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> partials;
};

template <typename Scalar>
struct TtGradients {
    std::vector<typename TtCores<Scalar>::CoreMatrix> cores;
    DenseMatrix<Scalar> input;  // batch x b (logical)
};

namespace detail {

template <typename Scalar>
using RowMap = Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename Scalar>
using ConstRowMap = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

struct StepShape {
    Eigen::Index prefix;  // batch * prod_{t<k} c_t
    Eigen::Index inner;   // r_k * b_k
    Eigen::Index outer;   // c_k * r_{k+1}
    Eigen::Index suffix;  // prod_{t>k} b_t
};

inline StepShape step_shape(const TtLayout& layout, Eigen::Index batch, std::size_t k) {
    StepShape s{batch, layout.core_rows(k), layout.core_cols(k), 1};
    for (std::size_t t = 0; t < k; ++t) s.prefix *= layout.out_factors[t];
    for (std::size_t t = k + 1; t < layout.num_cores(); ++t) s.suffix *= layout.in_factors[t];
    return s;
}

} // namespace detail

/// H (batch x b) times the TT matrix, returning batch x c. The dense matrix is
/// never formed: cores are contracted one at a time against the reshaped
/// input. Inputs narrower than b_pad are zero padded; output columns beyond c
/// are dropped. When tape is non-null the per-core inputs are kept for
/// tt_backward.
template <typename Scalar, typename Derived>
DenseMatrix<Scalar> tt_forward(const TtCores<Scalar>& tt, const Eigen::MatrixBase<Derived>& h,
                               TtTape<Scalar>* tape = nullptr) {
    const auto& layout = tt.layout();
    if (h.cols() != layout.in_dim)
        throw std::invalid_argument("tt_forward: input has " + std::to_string(h.cols()) + " columns, expected " +
                                    std::to_string(layout.in_dim));
    const Eigen::Index batch = h.rows();
    const Eigen::Index b_pad = layout.padded_in();

    using Buffer = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    Buffer current = Buffer::Zero(batch * b_pad);
    {
        detail::RowMap<Scalar> in(current.data(), batch, b_pad);
        in.leftCols(layout.in_dim) = h.template cast<Scalar>();
    }
    if (tape) {
        tape->batch = batch;
        tape->partials.clear();
    }

    for (std::size_t k = 0; k < layout.num_cores(); ++k) {
        const auto s = detail::step_shape(layout, batch, k);
        Buffer next(s.prefix * s.outer * s.suffix);
        const auto& core = tt.core(k);
        if (s.suffix == 1) {
            detail::ConstRowMap<Scalar> in(current.data(), s.prefix, s.inner);
            detail::RowMap<Scalar> out(next.data(), s.prefix, s.outer);
            out.noalias() = in * core;
        } else {
            for (Eigen::Index p = 0; p < s.prefix; ++p) {
                detail::ConstRowMap<Scalar> in(current.data() + p * s.inner * s.suffix, s.inner, s.suffix);
                detail::RowMap<Scalar> out(next.data() + p * s.outer * s.suffix, s.outer, s.suffix);
                out.noalias() = core.transpose() * in;
            }
        }
        if (tape)
            tape->partials.push_back(std::move(current));
        current = std::move(next);
    }

    detail::ConstRowMap<Scalar> result(current.data(), batch, layout.padded_out());
    return result.leftCols(layout.out_dim);
}

/// Gradients of sum(grad_out .* tt_forward(tt, H)) with respect to every core
/// and to H, using the cached left partials and propagating the right-hand
/// adjoint backwards through the chain (linear in d). With input_gradient
/// false the H gradient is left empty.
template <typename Scalar, typename Derived>
TtGradients<Scalar> tt_backward(const TtCores<Scalar>& tt, const TtTape<Scalar>& tape,
                                const Eigen::MatrixBase<Derived>& grad_out, bool input_gradient = true) {
    const auto& layout = tt.layout();
    const Eigen::Index batch = tape.batch;
    if (grad_out.rows() != batch || grad_out.cols() != layout.out_dim)
        throw std::invalid_argument("tt_backward: upstream gradient shape mismatch");
    if (tape.partials.size() != layout.num_cores()) throw std::invalid_argument("tt_backward: tape does not match cores");

    using Buffer = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    Buffer adjoint = Buffer::Zero(batch * layout.padded_out());
    {
        detail::RowMap<Scalar> g(adjoint.data(), batch, layout.padded_out());
        g.leftCols(layout.out_dim) = grad_out.template cast<Scalar>();
    }

    TtGradients<Scalar> grads;
    grads.cores.resize(layout.num_cores());
    for (std::size_t k = layout.num_cores(); k-- > 0;) {
        const auto s = detail::step_shape(layout, batch, k);
        const auto& core = tt.core(k);
        const auto& input = tape.partials[k];
        auto& dcore = grads.cores[k];
        dcore = TtCores<Scalar>::CoreMatrix::Zero(s.inner, s.outer);
        const bool propagate = k > 0 || input_gradient;
        Buffer previous(propagate ? s.prefix * s.inner * s.suffix : 0);
        if (s.suffix == 1) {
            detail::ConstRowMap<Scalar> in(input.data(), s.prefix, s.inner);
            detail::ConstRowMap<Scalar> dout(adjoint.data(), s.prefix, s.outer);
            dcore.noalias() = in.transpose() * dout;
            if (propagate) {
                detail::RowMap<Scalar> din(previous.data(), s.prefix, s.inner);
                din.noalias() = dout * core.transpose();
            }
        } else {
            for (Eigen::Index p = 0; p < s.prefix; ++p) {
                detail::ConstRowMap<Scalar> in(input.data() + p * s.inner * s.suffix, s.inner, s.suffix);
                detail::ConstRowMap<Scalar> dout(adjoint.data() + p * s.outer * s.suffix, s.outer, s.suffix);
                dcore.noalias() += in * dout.transpose();
                if (propagate) {
                    detail::RowMap<Scalar> din(previous.data() + p * s.inner * s.suffix, s.inner, s.suffix);
                    din.noalias() = core * dout;
                }
            }
        }
        adjoint = std::move(previous);
    }
    if (!input_gradient) return grads;
    detail::ConstRowMap<Scalar> dinput(adjoint.data(), batch, layout.padded_in());
    grads.input = dinput.leftCols(layout.in_dim);
    return grads;
}

template <typename Scalar, typename DerivedH, typename DerivedG>
TtGradients<Scalar> tt_backward(const TtCores<Scalar>& tt, const Eigen::MatrixBase<DerivedH>& h,
                                const Eigen::MatrixBase<DerivedG>& grad_out) {
    TtTape<Scalar> tape;
    tt_forward(tt, h, &tape);
    return tt_backward(tt, tape, grad_out);
}

/// Text checkpoint: layout header (logical dims, factors, ranks, flattening
/// tag) followed by each core's row-major values in shortest round-trip form.
void write_tt(const TtCores<double>& tt, std::ostream& out);
TtCores<double> read_tt(std::istream& in);

} // namespace ssgcn
