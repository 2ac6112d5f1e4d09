#include "fnet/autodiff.hpp"

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace fnet::ad {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<EMat>;
using CMap = Eigen::Map<const EMat>;

std::int64_t shape_numel(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

bool track(Tape* tape, std::initializer_list<const Tensor*> inputs) {
    if (!tape) return false;
    for (const Tensor* t : inputs)
        if ((*t).requires_grad()) return true;
    return false;
}

Tensor make_output(std::vector<int> shape, bool requires_grad) {
    return Tensor::zeros(std::move(shape), requires_grad);
}

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    Tensor t;
    t.impl_ = std::make_shared<TensorData>();
    t.impl_->shape = std::move(shape);
    t.impl_->value.assign(shape_numel(t.impl_->shape), 0.0);
    t.impl_->requires_grad = requires_grad;
    if (requires_grad) t.impl_->grad.assign(t.impl_->value.size(), 0.0);
    return t;
}

Tensor Tensor::from_vector(std::vector<int> shape, std::vector<double> data,
                           bool requires_grad) {
    require(shape_numel(shape) == static_cast<std::int64_t>(data.size()),
            "Tensor::from_vector: shape does not match data length");
    Tensor t;
    t.impl_ = std::make_shared<TensorData>();
    t.impl_->shape = std::move(shape);
    t.impl_->value = std::move(data);
    t.impl_->requires_grad = requires_grad;
    if (requires_grad) t.impl_->grad.assign(t.impl_->value.size(), 0.0);
    return t;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
    return from_vector({1}, {v}, requires_grad);
}

void Tensor::zero_grad() {
    if (impl_->requires_grad) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

double Tensor::value() const {
    require(numel() == 1, "Tensor::value: tensor is not scalar");
    return impl_->value[0];
}

void Tape::backward(const Tensor& loss) {
    require(loss.defined() && loss.numel() == 1, "backward: loss must be a scalar");
    require(loss.requires_grad(), "backward: loss is detached from the tape");
    loss.impl_->grad[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
    nodes_.clear();
}

Tensor matmul(Tape* tape, const Tensor& a, const Tensor& b) {
    require(a.shape().size() == 2 && b.shape().size() == 2, "matmul: inputs must be 2-D");
    require(a.cols() == b.rows(), "matmul: inner dimensions disagree");
    const int n = a.rows(), k = a.cols(), m = b.cols();
    Tensor out = make_output({n, m}, track(tape, {&a, &b}));
    Map(out.data(), n, m).noalias() = CMap(a.data(), n, k) * CMap(b.data(), k, m);
    if (out.requires_grad()) {
        auto ai = a.impl_, bi = b.impl_, oi = out.impl_;
        tape->record([ai, bi, oi, n, k, m] {
            CMap dout(oi->grad.data(), n, m);
            if (ai->requires_grad)
                Map(ai->grad.data(), n, k).noalias() +=
                    dout * CMap(bi->value.data(), k, m).transpose();
            if (bi->requires_grad)
                Map(bi->grad.data(), k, m).noalias() +=
                    CMap(ai->value.data(), n, k).transpose() * dout;
        });
    }
    return out;
}

Tensor add(Tape* tape, const Tensor& a, const Tensor& b) {
    require(a.shape() == b.shape(), "add: shapes disagree");
    Tensor out = make_output(a.shape(), track(tape, {&a, &b}));
    const std::int64_t n = a.numel();
    for (std::int64_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] + b.data()[i];
    if (out.requires_grad()) {
        auto ai = a.impl_, bi = b.impl_, oi = out.impl_;
        tape->record([ai, bi, oi, n] {
            if (ai->requires_grad)
                for (std::int64_t i = 0; i < n; ++i) ai->grad[i] += oi->grad[i];
            if (bi->requires_grad)
                for (std::int64_t i = 0; i < n; ++i) bi->grad[i] += oi->grad[i];
        });
    }
    return out;
}

Tensor sub(Tape* tape, const Tensor& a, const Tensor& b) {
    require(a.shape() == b.shape(), "sub: shapes disagree");
    Tensor out = make_output(a.shape(), track(tape, {&a, &b}));
    const std::int64_t n = a.numel();
    for (std::int64_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] - b.data()[i];
    if (out.requires_grad()) {
        auto ai = a.impl_, bi = b.impl_, oi = out.impl_;
        tape->record([ai, bi, oi, n] {
            if (ai->requires_grad)
                for (std::int64_t i = 0; i < n; ++i) ai->grad[i] += oi->grad[i];
            if (bi->requires_grad)
                for (std::int64_t i = 0; i < n; ++i) bi->grad[i] -= oi->grad[i];
        });
    }
    return out;
}

Tensor mul(Tape* tape, const Tensor& a, const Tensor& b) {
    require(a.shape() == b.shape(), "mul: shapes disagree");
    Tensor out = make_output(a.shape(), track(tape, {&a, &b}));
    const std::int64_t n = a.numel();
    for (std::int64_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] * b.data()[i];
    if (out.requires_grad()) {
        auto ai = a.impl_, bi = b.impl_, oi = out.impl_;
        tape->record([ai, bi, oi, n] {
            if (ai->requires_grad)
                for (std::int64_t i = 0; i < n; ++i) ai->grad[i] += oi->grad[i] * bi->value[i];
            if (bi->requires_grad)
                for (std::int64_t i = 0; i < n; ++i) bi->grad[i] += oi->grad[i] * ai->value[i];
        });
    }
    return out;
}

Tensor scale(Tape* tape, const Tensor& a, double s) {
    Tensor out = make_output(a.shape(), track(tape, {&a}));
    const std::int64_t n = a.numel();
    for (std::int64_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] * s;
    if (out.requires_grad()) {
        auto ai = a.impl_, oi = out.impl_;
        tape->record([ai, oi, s, n] {
            for (std::int64_t i = 0; i < n; ++i) ai->grad[i] += s * oi->grad[i];
        });
    }
    return out;
}

Tensor add_rowvec(Tape* tape, const Tensor& m, const Tensor& v) {
    require(m.shape().size() == 2 && v.numel() == m.cols(), "add_rowvec: shapes disagree");
    const int n = m.rows(), d = m.cols();
    Tensor out = make_output(m.shape(), track(tape, {&m, &v}));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) out.data()[i * d + j] = m.data()[i * d + j] + v.data()[j];
    if (out.requires_grad()) {
        auto mi = m.impl_, vi = v.impl_, oi = out.impl_;
        tape->record([mi, vi, oi, n, d] {
            if (mi->requires_grad)
                for (std::int64_t i = 0; i < static_cast<std::int64_t>(n) * d; ++i)
                    mi->grad[i] += oi->grad[i];
            if (vi->requires_grad)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < d; ++j) vi->grad[j] += oi->grad[i * d + j];
        });
    }
    return out;
}

Tensor mul_rowvec(Tape* tape, const Tensor& m, const Tensor& v) {
    require(m.shape().size() == 2 && v.numel() == m.cols(), "mul_rowvec: shapes disagree");
    const int n = m.rows(), d = m.cols();
    Tensor out = make_output(m.shape(), track(tape, {&m, &v}));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) out.data()[i * d + j] = m.data()[i * d + j] * v.data()[j];
    if (out.requires_grad()) {
        auto mi = m.impl_, vi = v.impl_, oi = out.impl_;
        tape->record([mi, vi, oi, n, d] {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j) {
                    if (mi->requires_grad)
                        mi->grad[i * d + j] += oi->grad[i * d + j] * vi->value[j];
                    if (vi->requires_grad)
                        vi->grad[j] += oi->grad[i * d + j] * mi->value[i * d + j];
                }
        });
    }
    return out;
}

Tensor mul_colvec(Tape* tape, const Tensor& m, const Tensor& u) {
    require(m.shape().size() == 2 && u.numel() == m.rows(), "mul_colvec: shapes disagree");
    const int n = m.rows(), d = m.cols();
    Tensor out = make_output(m.shape(), track(tape, {&m, &u}));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) out.data()[i * d + j] = m.data()[i * d + j] * u.data()[i];
    if (out.requires_grad()) {
        auto mi = m.impl_, ui = u.impl_, oi = out.impl_;
        tape->record([mi, ui, oi, n, d] {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j) {
                    if (mi->requires_grad)
                        mi->grad[i * d + j] += oi->grad[i * d + j] * ui->value[i];
                    if (ui->requires_grad)
                        ui->grad[i] += oi->grad[i * d + j] * mi->value[i * d + j];
                }
        });
    }
    return out;
}

Tensor concat_cols(Tape* tape, std::span<const Tensor> parts) {
    require(!parts.empty(), "concat_cols: no inputs");
    const int n = parts[0].rows();
    int total = 0;
    bool needs_grad = false;
    for (const Tensor& p : parts) {
        require(p.shape().size() == 2 && p.rows() == n, "concat_cols: row counts disagree");
        total += p.cols();
        needs_grad = needs_grad || (tape && p.requires_grad());
    }
    Tensor out = make_output({n, total}, needs_grad);
    int col = 0;
    for (const Tensor& p : parts) {
        const int d = p.cols();
        for (int i = 0; i < n; ++i)
            std::copy_n(p.data() + static_cast<std::size_t>(i) * d, d,
                        out.data() + static_cast<std::size_t>(i) * total + col);
        col += d;
    }
    if (out.requires_grad()) {
        std::vector<std::shared_ptr<TensorData>> inputs;
        for (const Tensor& p : parts) inputs.push_back(p.impl_);
        auto oi = out.impl_;
        tape->record([inputs, oi, n, total] {
            int col = 0;
            for (const auto& pi : inputs) {
                const int d = pi->shape[1];
                if (pi->requires_grad)
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < d; ++j)
                            pi->grad[i * d + j] += oi->grad[i * total + col + j];
                col += d;
            }
        });
    }
    return out;
}

Tensor sum(Tape* tape, const Tensor& a) {
    Tensor out = make_output({1}, track(tape, {&a}));
    double acc = 0.0;
    const std::int64_t n = a.numel();
    for (std::int64_t i = 0; i < n; ++i) acc += a.data()[i];
    out.data()[0] = acc;
    if (out.requires_grad()) {
        auto ai = a.impl_, oi = out.impl_;
        tape->record([ai, oi, n] {
            const double g = oi->grad[0];
            for (std::int64_t i = 0; i < n; ++i) ai->grad[i] += g;
        });
    }
    return out;
}

Tensor mean(Tape* tape, const Tensor& a) {
    Tensor out = sum(tape, a);
    return scale(tape, out, 1.0 / static_cast<double>(a.numel()));
}

Tensor gather_rows(Tape* tape, const Tensor& a, std::shared_ptr<const std::vector<int>> idx) {
    require(a.shape().size() == 2, "gather_rows: input must be 2-D");
    const int d = a.cols(), m = static_cast<int>(idx->size());
    Tensor out = make_output({m, d}, track(tape, {&a}));
    for (int i = 0; i < m; ++i) {
        const int r = (*idx)[i];
        std::copy_n(a.data() + static_cast<std::size_t>(r) * d, d,
                    out.data() + static_cast<std::size_t>(i) * d);
    }
    if (out.requires_grad()) {
        auto ai = a.impl_, oi = out.impl_;
        tape->record([ai, oi, idx, m, d] {
            for (int i = 0; i < m; ++i) {
                const int r = (*idx)[i];
                for (int j = 0; j < d; ++j) ai->grad[r * d + j] += oi->grad[i * d + j];
            }
        });
    }
    return out;
}

Tensor scatter_add_rows(Tape* tape, const Tensor& a,
                        std::shared_ptr<const std::vector<int>> idx, int n_rows) {
    require(a.shape().size() == 2, "scatter_add_rows: input must be 2-D");
    require(static_cast<int>(idx->size()) == a.rows(), "scatter_add_rows: index size disagrees");
    const int m = a.rows(), d = a.cols();
    Tensor out = make_output({n_rows, d}, track(tape, {&a}));
    for (int i = 0; i < m; ++i) {
        const int r = (*idx)[i];
        require(r >= 0 && r < n_rows, "scatter_add_rows: index out of range");
        for (int j = 0; j < d; ++j) out.data()[r * d + j] += a.data()[i * d + j];
    }
    if (out.requires_grad()) {
        auto ai = a.impl_, oi = out.impl_;
        tape->record([ai, oi, idx, m, d] {
            for (int i = 0; i < m; ++i) {
                const int r = (*idx)[i];
                for (int j = 0; j < d; ++j) ai->grad[i * d + j] += oi->grad[r * d + j];
            }
        });
    }
    return out;
}

Tensor activate(Tape* tape, const Tensor& a, ActivationKind kind) {
    Tensor out = make_output(a.shape(), track(tape, {&a}));
    const std::int64_t n = a.numel();
    for (std::int64_t i = 0; i < n; ++i) out.data()[i] = activation(kind, a.data()[i]);
    if (out.requires_grad()) {
        auto ai = a.impl_, oi = out.impl_;
        tape->record([ai, oi, kind, n] {
            for (std::int64_t i = 0; i < n; ++i)
                ai->grad[i] += activation_grad(kind, ai->value[i]) * oi->grad[i];
        });
    }
    return out;
}

Tensor abs(Tape* tape, const Tensor& a) {
    Tensor out = make_output(a.shape(), track(tape, {&a}));
    const std::int64_t n = a.numel();
    for (std::int64_t i = 0; i < n; ++i) out.data()[i] = std::abs(a.data()[i]);
    if (out.requires_grad()) {
        auto ai = a.impl_, oi = out.impl_;
        tape->record([ai, oi, n] {
            for (std::int64_t i = 0; i < n; ++i) {
                const double x = ai->value[i];
                const double s = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
                ai->grad[i] += s * oi->grad[i];
            }
        });
    }
    return out;
}

Tensor rowwise_outer(Tape* tape, const Tensor& a, const Tensor& b) {
    require(a.shape().size() == 2 && b.shape().size() == 2 && a.rows() == b.rows(),
            "rowwise_outer: inputs must be 2-D with equal row counts");
    const int n = a.rows(), p = a.cols(), q = b.cols();
    Tensor out = make_output({n, p * q}, track(tape, {&a, &b}));
    for (int i = 0; i < n; ++i)
        for (int x = 0; x < p; ++x) {
            const double av = a.data()[i * p + x];
            for (int y = 0; y < q; ++y)
                out.data()[(static_cast<std::size_t>(i) * p + x) * q + y] =
                    av * b.data()[i * q + y];
        }
    if (out.requires_grad()) {
        auto ai = a.impl_, bi = b.impl_, oi = out.impl_;
        tape->record([ai, bi, oi, n, p, q] {
            for (int i = 0; i < n; ++i)
                for (int x = 0; x < p; ++x)
                    for (int y = 0; y < q; ++y) {
                        const double g = oi->grad[(static_cast<std::size_t>(i) * p + x) * q + y];
                        if (ai->requires_grad) ai->grad[i * p + x] += g * bi->value[i * q + y];
                        if (bi->requires_grad) bi->grad[i * q + y] += g * ai->value[i * p + x];
                    }
        });
    }
    return out;
}

Tensor batch_norm(Tape* tape, const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  Tensor& running_mean, Tensor& running_var, bool training, double momentum,
                  double eps) {
    require(x.shape().size() == 2, "batch_norm: input must be 2-D");
    const int n = x.rows(), d = x.cols();
    require(gamma.numel() == d && beta.numel() == d, "batch_norm: affine shapes disagree");
    require(running_mean.numel() == d && running_var.numel() == d,
            "batch_norm: running-stat shapes disagree");
    Tensor out = make_output(x.shape(), track(tape, {&x, &gamma, &beta}));
    if (n == 0) return out;

    std::vector<double> mu(d), ivar(d);
    if (training) {
        std::vector<double> var(d, 0.0);
        for (int j = 0; j < d; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += x.data()[i * d + j];
            mu[j] = acc / n;
        }
        for (int j = 0; j < d; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                const double c = x.data()[i * d + j] - mu[j];
                acc += c * c;
            }
            var[j] = acc / n;
            ivar[j] = 1.0 / std::sqrt(var[j] + eps);
        }
        const double unbias = n > 1 ? static_cast<double>(n) / (n - 1) : 1.0;
        for (int j = 0; j < d; ++j) {
            running_mean.data()[j] = (1.0 - momentum) * running_mean.data()[j] + momentum * mu[j];
            running_var.data()[j] =
                (1.0 - momentum) * running_var.data()[j] + momentum * unbias * var[j];
        }
    } else {
        for (int j = 0; j < d; ++j) {
            mu[j] = running_mean.data()[j];
            ivar[j] = 1.0 / std::sqrt(running_var.data()[j] + eps);
        }
    }

    std::vector<double> xhat(static_cast<std::size_t>(n) * d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
            xhat[i * d + j] = (x.data()[i * d + j] - mu[j]) * ivar[j];
            out.data()[i * d + j] = gamma.data()[j] * xhat[i * d + j] + beta.data()[j];
        }

    if (out.requires_grad()) {
        auto xi = x.impl_, gi = gamma.impl_, bi = beta.impl_, oi = out.impl_;
        tape->record([xi, gi, bi, oi, xhat = std::move(xhat), ivar = std::move(ivar), n, d,
                      training] {
            for (int j = 0; j < d; ++j) {
                double sum_dy = 0.0, sum_dy_xhat = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double dy = oi->grad[i * d + j];
                    sum_dy += dy;
                    sum_dy_xhat += dy * xhat[i * d + j];
                }
                if (gi->requires_grad) gi->grad[j] += sum_dy_xhat;
                if (bi->requires_grad) bi->grad[j] += sum_dy;
                if (xi->requires_grad) {
                    const double g = gi->value[j] * ivar[j];
                    if (training) {
                        const double mean_dy = sum_dy / n;
                        const double mean_dy_xhat = sum_dy_xhat / n;
                        for (int i = 0; i < n; ++i)
                            xi->grad[i * d + j] +=
                                g * (oi->grad[i * d + j] - mean_dy -
                                     xhat[i * d + j] * mean_dy_xhat);
                    } else {
                        for (int i = 0; i < n; ++i) xi->grad[i * d + j] += g * oi->grad[i * d + j];
                    }
                }
            }
        });
    }
    return out;
}

Tensor layer_norm(Tape* tape, const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps) {
    require(x.shape().size() == 2, "layer_norm: input must be 2-D");
    const int n = x.rows(), d = x.cols();
    require(gamma.numel() == d && beta.numel() == d, "layer_norm: affine shapes disagree");
    Tensor out = make_output(x.shape(), track(tape, {&x, &gamma, &beta}));

    std::vector<double> xhat(static_cast<std::size_t>(n) * d), ivar(n);
    for (int i = 0; i < n; ++i) {
        double mu = 0.0;
        for (int j = 0; j < d; ++j) mu += x.data()[i * d + j];
        mu /= d;
        double var = 0.0;
        for (int j = 0; j < d; ++j) {
            const double c = x.data()[i * d + j] - mu;
            var += c * c;
        }
        var /= d;
        ivar[i] = 1.0 / std::sqrt(var + eps);
        for (int j = 0; j < d; ++j) {
            xhat[i * d + j] = (x.data()[i * d + j] - mu) * ivar[i];
            out.data()[i * d + j] = gamma.data()[j] * xhat[i * d + j] + beta.data()[j];
        }
    }

    if (out.requires_grad()) {
        auto xi = x.impl_, gi = gamma.impl_, bi = beta.impl_, oi = out.impl_;
        tape->record([xi, gi, bi, oi, xhat = std::move(xhat), ivar = std::move(ivar), n, d] {
            for (int i = 0; i < n; ++i) {
                double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
                for (int j = 0; j < d; ++j) {
                    const double dxhat = oi->grad[i * d + j] * gi->value[j];
                    mean_dxhat += dxhat;
                    mean_dxhat_xhat += dxhat * xhat[i * d + j];
                }
                mean_dxhat /= d;
                mean_dxhat_xhat /= d;
                for (int j = 0; j < d; ++j) {
                    const double dy = oi->grad[i * d + j];
                    if (gi->requires_grad) gi->grad[j] += dy * xhat[i * d + j];
                    if (bi->requires_grad) bi->grad[j] += dy;
                    if (xi->requires_grad) {
                        const double dxhat = dy * gi->value[j];
                        xi->grad[i * d + j] +=
                            ivar[i] * (dxhat - mean_dxhat - xhat[i * d + j] * mean_dxhat_xhat);
                    }
                }
            }
        });
    }
    return out;
}

GradCheckResult check_gradients(const std::function<Tensor(Tape*)>& loss_fn,
                                std::span<const std::pair<std::string, Tensor>> params,
                                double h) {
    for (const auto& [name, p] : params) {
        Tensor t = p;  // shared handle
        t.zero_grad();
    }
    Tape tape;
    Tensor loss = loss_fn(&tape);
    tape.backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& [name, p] : params) analytic.push_back(p.impl_->grad);

    GradCheckResult result;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor p = params[pi].second;
        for (std::int64_t i = 0; i < p.numel(); ++i) {
            const double saved = p.data()[i];
            p.data()[i] = saved + h;
            const double fp = loss_fn(nullptr).value();
            p.data()[i] = saved - h;
            const double fm = loss_fn(nullptr).value();
            p.data()[i] = saved;
            const double fd = (fp - fm) / (2.0 * h);
            const double a = analytic[pi][i];
            // Differences below the 1e-8 absolute floor are beneath central-
            // difference resolution (noise ~ eps*|f|/h) and do not register;
            // a genuinely wrong gradient of any magnitude above the floor
            // still produces an error of its own scale and is caught.
            const double denom = std::max({std::abs(a), std::abs(fd), 1e-8});
            const double rel = std::max(0.0, std::abs(a - fd) - 1e-8) / denom;
            if (rel > result.max_rel_err) {
                result.max_rel_err = rel;
                result.worst_param = params[pi].first;
                result.worst_index = static_cast<int>(i);
                result.analytic = a;
                result.numeric = fd;
            }
            if (denom >= 1e-3)
                result.max_rel_err_large =
                    std::max(result.max_rel_err_large, std::abs(a - fd) / denom);
        }
    }
    return result;
}

}  // namespace fnet::ad
