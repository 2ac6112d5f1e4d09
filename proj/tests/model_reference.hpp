#pragma once

// Independent dense re-implementation of the two network forwards (eval
// mode), written with plain loops on top of the separately-tested geometry
// and basis functions. Used as the layer-by-layer oracle for the graph
// forward passes.

#include <cmath>
#include <string>
#include <vector>

#include "fnet/basis.hpp"
#include "fnet/elements.hpp"
#include "fnet/graph.hpp"
#include "fnet/model.hpp"

namespace model_reference {

using fnet::AtomicStructure;
using fnet::Vec3;

using Matrix = std::vector<std::vector<double>>;  // row-major dense

inline Matrix linear(const Matrix& x, const fnet::ad::Tensor& w, const fnet::ad::Tensor& b) {
    const int in = w.rows(), out = w.cols();
    Matrix y(x.size(), std::vector<double>(out, 0.0));
    for (std::size_t i = 0; i < x.size(); ++i)
        for (int o = 0; o < out; ++o) {
            double acc = b.defined() ? b.data()[o] : 0.0;
            for (int k = 0; k < in; ++k) acc += x[i][k] * w.data()[k * out + o];
            y[i][o] = acc;
        }
    return y;
}

inline void apply_activation(Matrix& x, fnet::ActivationKind act) {
    for (auto& row : x)
        for (auto& v : row) v = fnet::activation(act, v);
}

inline void bn_eval(Matrix& x, const fnet::ad::Tensor& gamma, const fnet::ad::Tensor& beta,
                    const fnet::ad::Tensor& rm, const fnet::ad::Tensor& rv) {
    for (auto& row : x)
        for (std::size_t j = 0; j < row.size(); ++j)
            row[j] = gamma.data()[j] * (row[j] - rm.data()[j]) /
                         std::sqrt(rv.data()[j] + 1e-5) +
                     beta.data()[j];
}

inline void ln(Matrix& x, const fnet::ad::Tensor& gamma, const fnet::ad::Tensor& beta) {
    for (auto& row : x) {
        double mu = 0.0;
        for (double v : row) mu += v;
        mu /= row.size();
        double var = 0.0;
        for (double v : row) var += (v - mu) * (v - mu);
        var /= row.size();
        const double ivar = 1.0 / std::sqrt(var + 1e-5);
        for (std::size_t j = 0; j < row.size(); ++j)
            row[j] = gamma.data()[j] * (row[j] - mu) * ivar + beta.data()[j];
    }
}

inline std::vector<Vec3> forward_reference(fnet::Model& model, const AtomicStructure& s,
                                           const fnet::RadiiTable& radii) {
    const fnet::ModelConfig& cfg = model.config();
    const fnet::ParameterStore& ps = model.params();
    const fnet::BasisConfig basis = cfg.effective_basis();
    const int n = s.size();
    const fnet::RadiusGraph graph = fnet::build_radius_graph(s, cfg.cutoff);
    const auto feats7 =
        fnet::compute_edge_features(graph, s.atomic_numbers, radii, cfg.cutoff);
    const int n_edges = static_cast<int>(graph.edges.size());

    // edge features after ablation slicing
    const int edge_dim = cfg.edge_feature_dim();
    Matrix e(n_edges, std::vector<double>(edge_dim));
    std::vector<double> alpha(n_edges);
    for (int k = 0; k < n_edges; ++k) {
        const auto& f = feats7[k];
        if (cfg.ablation == fnet::Ablation::OnlyDist)
            e[k] = {f[3], f[4], f[5], f[6]};
        else if (cfg.ablation == fnet::Ablation::NoAtomicRadii)
            e[k] = {f[0], f[1], f[2], f[3]};
        else
            e[k].assign(f.begin(), f.end());
        const double r = graph.edges[k].disp.norm();
        alpha[k] = r >= cfg.cutoff ? 0.0 : std::cos(M_PI * r / (2.0 * cfg.cutoff));
    }

    // per-edge basis
    Matrix b(n_edges);
    {
        fnet::BasisParams bp;
        std::vector<double> w_lin, b_lin, w_rad_t, b_rad;
        if (basis.kind == fnet::BasisKind::LinearAct) {
            const auto& w = ps.at("edge_basis.weight");  // [E, linact]
            const auto& bb = ps.at("edge_basis.bias");
            w_lin.resize(static_cast<std::size_t>(basis.linact_dim) * edge_dim);
            for (int o = 0; o < basis.linact_dim; ++o)
                for (int i = 0; i < edge_dim; ++i)
                    w_lin[o * edge_dim + i] = w.data()[i * basis.linact_dim + o];
            b_lin.assign(bb.data(), bb.data() + basis.linact_dim);
            bp.W = w_lin.data();
            bp.b = b_lin.data();
        }
        if (basis.kind == fnet::BasisKind::Spherical) {
            const auto& w = ps.at("rad.weight");  // [(edge_dim-3)*J, S]
            const auto& bb = ps.at("rad.bias");
            const int in = (edge_dim - 3) * basis.J;
            w_rad_t.resize(static_cast<std::size_t>(basis.S) * in);
            for (int ss = 0; ss < basis.S; ++ss)
                for (int i = 0; i < in; ++i) w_rad_t[ss * in + i] = w.data()[i * basis.S + ss];
            b_rad.assign(bb.data(), bb.data() + basis.S);
            bp.W_rad = w_rad_t.data();
            bp.b_rad = b_rad.data();
        }
        const int n_dir = cfg.direction_components();
        for (int k = 0; k < n_edges; ++k)
            b[k] = fnet::basis_apply(basis, {e[k].data(), e[k].size()}, n_dir, bp,
                                     cfg.activation);
    }

    // F_b projection (shared), unless the basis is bypassed entirely
    Matrix fb;
    if (basis.kind == fnet::BasisKind::None)
        fb = b;
    else
        fb = linear(b, ps.at("F_b.weight"), ps.at("F_b.bias"));

    // node encoding
    Matrix h(n);
    {
        const fnet::BasisKind nk = cfg.node_basis_kind();
        Matrix nf(n);
        for (int i = 0; i < n; ++i) {
            const auto f = fnet::node_features(s.atomic_numbers[i]);
            if (nk == fnet::BasisKind::Gaussian || nk == fnet::BasisKind::Sine) {
                nf[i].resize(static_cast<std::size_t>(fnet::kNodeFeatureDim) * basis.J);
                for (int d = 0; d < fnet::kNodeFeatureDim; ++d) {
                    if (nk == fnet::BasisKind::Gaussian)
                        fnet::gaussian_basis(f[d], basis.J, nf[i].data() + d * basis.J);
                    else
                        fnet::sine_basis(f[d], basis.J, nf[i].data() + d * basis.J);
                }
            } else {
                nf[i].assign(f.begin(), f.end());
            }
        }
        if (cfg.variant == fnet::ModelVariant::ForceNet &&
            nk == fnet::BasisKind::LinearAct) {
            nf = linear(nf, ps.at("node_basis.weight"), ps.at("node_basis.bias"));
            apply_activation(nf, cfg.activation);
        }
        h = linear(nf, ps.at("encoder.weight"), fnet::ad::Tensor{});
    }

    const int D = cfg.hidden_dim;
    if (cfg.variant == fnet::ModelVariant::ForceNet) {
        for (int layer = 0; layer < cfg.num_layers; ++layer) {
            const std::string p = "layer" + std::to_string(layer);
            Matrix fd = linear(h, ps.at(p + ".Fd.weight"), ps.at(p + ".Fd.bias"));

            Matrix fe_in(n_edges);
            for (int k = 0; k < n_edges; ++k) {
                if (cfg.ablation == fnet::Ablation::NoNodeEmb) {
                    fe_in[k] = fb[k];
                } else {
                    fe_in[k] = h[graph.edges[k].src];
                    fe_in[k].insert(fe_in[k].end(), fb[k].begin(), fb[k].end());
                    const auto& ht = h[graph.edges[k].dst];
                    fe_in[k].insert(fe_in[k].end(), ht.begin(), ht.end());
                }
            }
            Matrix fe;
            if (cfg.ablation == fnet::Ablation::EdgeLinearBn) {
                fe = linear(fe_in, ps.at(p + ".Fe.l0.weight"), ps.at(p + ".Fe.l0.bias"));
                bn_eval(fe, ps.at(p + ".Fe.bn.gamma"), ps.at(p + ".Fe.bn.beta"),
                        ps.at(p + ".Fe.bn.running_mean"), ps.at(p + ".Fe.bn.running_var"));
            } else {
                fe = linear(fe_in, ps.at(p + ".Fe.l0.weight"), ps.at(p + ".Fe.l0.bias"));
                apply_activation(fe, cfg.activation);
                fe = linear(fe, ps.at(p + ".Fe.l1.weight"), ps.at(p + ".Fe.l1.bias"));
                apply_activation(fe, cfg.activation);
                fe = linear(fe, ps.at(p + ".Fe.l2.weight"), ps.at(p + ".Fe.l2.bias"));
            }

            Matrix agg(n, std::vector<double>(D, 0.0));
            for (int k = 0; k < n_edges; ++k) {
                const int src = graph.edges[k].src, dst = graph.edges[k].dst;
                for (int j = 0; j < D; ++j) {
                    double m = alpha[k] * fe[k][j];
                    if (cfg.ablation != fnet::Ablation::OnlyFc) m *= fd[src][j];
                    agg[dst][j] += m;
                }
            }
            if (cfg.ablation != fnet::Ablation::OnlyFc &&
                cfg.ablation != fnet::Ablation::NoSelfMessage) {
                const auto& v = ps.at(p + ".v");
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < D; ++j) agg[i][j] += v.data()[j] * fd[i][j];
            }

            Matrix fn;
            if (cfg.ablation == fnet::Ablation::NodeLinearBn) {
                fn = linear(agg, ps.at(p + ".Fn.l0.weight"), ps.at(p + ".Fn.l0.bias"));
                bn_eval(fn, ps.at(p + ".Fn.bn.gamma"), ps.at(p + ".Fn.bn.beta"),
                        ps.at(p + ".Fn.bn.running_mean"), ps.at(p + ".Fn.bn.running_var"));
            } else {
                fn = linear(agg, ps.at(p + ".Fn.l0.weight"), ps.at(p + ".Fn.l0.bias"));
                bn_eval(fn, ps.at(p + ".Fn.bn.gamma"), ps.at(p + ".Fn.bn.beta"),
                        ps.at(p + ".Fn.bn.running_mean"), ps.at(p + ".Fn.bn.running_var"));
                apply_activation(fn, cfg.activation);
                fn = linear(fn, ps.at(p + ".Fn.l1.weight"), ps.at(p + ".Fn.l1.bias"));
            }
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < D; ++j) h[i][j] = fn[i][j] + h[i][j];
        }

        Matrix d = linear(h, ps.at("dec.l0.weight"), ps.at("dec.l0.bias"));
        bn_eval(d, ps.at("dec.bn.gamma"), ps.at("dec.bn.beta"), ps.at("dec.bn.running_mean"),
                ps.at("dec.bn.running_var"));
        apply_activation(d, cfg.activation);
        d = linear(d, ps.at("dec.l1.weight"), ps.at("dec.l1.bias"));
        std::vector<Vec3> out(n);
        for (int i = 0; i < n; ++i) out[i] = {d[i][0], d[i][1], d[i][2]};
        return out;
    }

    // GNS
    for (int layer = 0; layer < cfg.num_layers; ++layer) {
        const std::string p = "layer" + std::to_string(layer);
        Matrix msg_in(n_edges);
        for (int k = 0; k < n_edges; ++k) {
            msg_in[k] = h[graph.edges[k].dst];
            msg_in[k].insert(msg_in[k].end(), e[k].begin(), e[k].end());
            const auto& hs = h[graph.edges[k].src];
            msg_in[k].insert(msg_in[k].end(), hs.begin(), hs.end());
        }
        Matrix hidden = linear(msg_in, ps.at(p + ".msg.l0.weight"), ps.at(p + ".msg.l0.bias"));
        ln(hidden, ps.at(p + ".msg.ln.gamma"), ps.at(p + ".msg.ln.beta"));
        apply_activation(hidden, cfg.activation);
        Matrix msg = linear(hidden, ps.at(p + ".msg.l1.weight"), ps.at(p + ".msg.l1.bias"));

        Matrix agg(n, std::vector<double>(D, 0.0));
        for (int k = 0; k < n_edges; ++k)
            for (int j = 0; j < D; ++j) agg[graph.edges[k].dst][j] += msg[k][j];

        Matrix upd = linear(agg, ps.at(p + ".node.weight"), ps.at(p + ".node.bias"));
        bn_eval(upd, ps.at(p + ".node.bn.gamma"), ps.at(p + ".node.bn.beta"),
                ps.at(p + ".node.bn.running_mean"), ps.at(p + ".node.bn.running_var"));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < D; ++j) h[i][j] = upd[i][j] + h[i][j];
    }
    Matrix d = linear(h, ps.at("dec.l0.weight"), ps.at("dec.l0.bias"));
    apply_activation(d, cfg.activation);
    d = linear(d, ps.at("dec.l1.weight"), ps.at("dec.l1.bias"));
    std::vector<Vec3> out(n);
    for (int i = 0; i < n; ++i) out[i] = {d[i][0], d[i][1], d[i][2]};
    return out;
}

}  // namespace model_reference
