#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fnet/basis.hpp"

namespace fnet::ad {

struct TensorData {
    std::vector<int> shape;
    std::vector<double> value;
    std::vector<double> grad;   // sized with value iff requires_grad
    bool requires_grad = false;
};

// Shared handle to a dense row-major f64 tensor (1-D or 2-D here).
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor from_vector(std::vector<int> shape, std::vector<double> data,
                              bool requires_grad = false);
    static Tensor scalar(double v, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const std::vector<int>& shape() const { return impl_->shape; }
    std::int64_t numel() const { return static_cast<std::int64_t>(impl_->value.size()); }
    int rows() const { return impl_->shape.at(0); }
    int cols() const { return impl_->shape.size() > 1 ? impl_->shape[1] : 1; }

    double* data() { return impl_->value.data(); }
    const double* data() const { return impl_->value.data(); }
    std::vector<double>& values() { return impl_->value; }
    const std::vector<double>& values() const { return impl_->value; }

    bool requires_grad() const { return impl_->requires_grad; }
    double* grad() { return impl_->grad.data(); }
    const double* grad() const { return impl_->grad.data(); }
    std::vector<double>& grad_vector() { return impl_->grad; }
    void zero_grad();

    double value() const;  // scalar tensors only

    std::shared_ptr<TensorData> impl_;
};

// Reverse-mode tape: backward closures recorded in forward order, replayed
// in exact reverse. One tape per training step, single-threaded.
class Tape {
public:
    void record(std::function<void()> backward_fn) { nodes_.push_back(std::move(backward_fn)); }
    std::size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

    // Seeds d(loss) = 1, replays the closures in reverse, then clears the
    // tape. Throws std::invalid_argument when loss is not scalar or was not
    // produced on this tape (detached).
    void backward(const Tensor& loss);

private:
    std::vector<std::function<void()>> nodes_;
};

// Ops record onto `tape` when non-null and any input requires grad;
// tape == nullptr gives plain (inference) evaluation.
Tensor matmul(Tape* tape, const Tensor& a, const Tensor& b);
Tensor add(Tape* tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape* tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape* tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape* tape, const Tensor& a, double s);
Tensor add_rowvec(Tape* tape, const Tensor& m, const Tensor& v);   // [N,D] + [D]
Tensor mul_rowvec(Tape* tape, const Tensor& m, const Tensor& v);   // [N,D] * [D]
Tensor mul_colvec(Tape* tape, const Tensor& m, const Tensor& u);   // [N,D] * [N]
Tensor concat_cols(Tape* tape, std::span<const Tensor> parts);
Tensor sum(Tape* tape, const Tensor& a);    // -> [1]
Tensor mean(Tape* tape, const Tensor& a);   // -> [1]
Tensor gather_rows(Tape* tape, const Tensor& a, std::shared_ptr<const std::vector<int>> idx);
Tensor scatter_add_rows(Tape* tape, const Tensor& a,
                        std::shared_ptr<const std::vector<int>> idx, int n_rows);
Tensor activate(Tape* tape, const Tensor& a, ActivationKind kind);
Tensor abs(Tape* tape, const Tensor& a);
// [N,P] x [N,Q] -> [N,P*Q], out[n, p*Q + q] = a[n,p] * b[n,q].
Tensor rowwise_outer(Tape* tape, const Tensor& a, const Tensor& b);

// Batch normalization over the row (atom/edge) dimension, per channel.
// Training mode uses batch statistics and updates the running buffers with
// momentum 0.1; eval mode reads the running buffers.
Tensor batch_norm(Tape* tape, const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  Tensor& running_mean, Tensor& running_var, bool training,
                  double momentum = 0.1, double eps = 1e-5);

// Per-row layer normalization with learnable affine.
Tensor layer_norm(Tape* tape, const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-5);

struct GradCheckResult {
    double max_rel_err = 0.0;        // floored: |a-fd| below 1e-8 absolute is zero
    double max_rel_err_large = 0.0;  // unfloored, over components with scale >= 1e-3
    std::string worst_param;
    int worst_index = -1;
    double analytic = 0.0;
    double numeric = 0.0;
};

// Central finite differences against the tape gradients, component-wise.
// Relative error carries an absolute floor of 1e-8: differences beneath it
// sit below fd resolution (eps*|f|/h) and count as matching.
GradCheckResult check_gradients(const std::function<Tensor(Tape*)>& loss_fn,
                                std::span<const std::pair<std::string, Tensor>> params,
                                double h = 1e-6);

}  // namespace fnet::ad
