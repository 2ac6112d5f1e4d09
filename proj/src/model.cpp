#include "fnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace fnet {

namespace {

constexpr double kPi = 3.14159265358979323846;

double envelope(double r, double cutoff) {
    if (r >= cutoff) return 0.0;
    return std::cos(kPi * r / (2.0 * cutoff));
}

}  // namespace

std::string to_string(ModelVariant v) {
    return v == ModelVariant::ForceNet ? "forcenet" : "gns";
}

std::string to_string(Ablation a) {
    switch (a) {
        case Ablation::None: return "none";
        case Ablation::OnlyDist: return "only_dist";
        case Ablation::NoAtomicRadii: return "no_atomic_radii";
        case Ablation::NoNodeEmb: return "no_node_emb";
        case Ablation::OnlyFc: return "only_fc";
        case Ablation::EdgeLinearBn: return "edge_linear_bn";
        case Ablation::NodeLinearBn: return "node_linear_bn";
        case Ablation::NoSelfMessage: return "no_self_message";
    }
    return "?";
}

ModelVariant variant_from_string(const std::string& s) {
    if (s == "forcenet") return ModelVariant::ForceNet;
    if (s == "gns") return ModelVariant::GNS;
    throw std::invalid_argument("unknown model variant: " + s);
}

Ablation ablation_from_string(const std::string& s) {
    if (s == "none") return Ablation::None;
    if (s == "only_dist") return Ablation::OnlyDist;
    if (s == "no_atomic_radii") return Ablation::NoAtomicRadii;
    if (s == "no_node_emb") return Ablation::NoNodeEmb;
    if (s == "only_fc") return Ablation::OnlyFc;
    if (s == "edge_linear_bn") return Ablation::EdgeLinearBn;
    if (s == "node_linear_bn") return Ablation::NodeLinearBn;
    if (s == "no_self_message" || s == "no_mt") return Ablation::NoSelfMessage;
    throw std::invalid_argument("unknown ablation: " + s);
}

int ModelConfig::edge_feature_dim() const {
    if (ablation == Ablation::OnlyDist || ablation == Ablation::NoAtomicRadii) return 4;
    return kEdgeFeatureDim;
}

int ModelConfig::direction_components() const {
    return ablation == Ablation::OnlyDist ? 0 : 3;
}

BasisConfig ModelConfig::effective_basis() const {
    BasisConfig b = basis;
    if (ablation == Ablation::OnlyDist && b.kind == BasisKind::Spherical)
        b.kind = BasisKind::Sine;
    return b;
}

BasisKind ModelConfig::node_basis_kind() const {
    switch (effective_basis().kind) {
        case BasisKind::Spherical: return BasisKind::Sine;
        case BasisKind::None: return BasisKind::Identity;
        default: return effective_basis().kind;
    }
}

void ModelConfig::validate() const {
    if (hidden_dim < 1) throw std::invalid_argument("ModelConfig: hidden_dim must be >= 1");
    if (num_layers < 1) throw std::invalid_argument("ModelConfig: num_layers must be >= 1");
    if (!(cutoff > 0.0)) throw std::invalid_argument("ModelConfig: cutoff must be positive");
    basis.validate();
}

ad::Tensor ParameterStore::add_parameter(const std::string& name, std::vector<int> shape) {
    if (contains(name)) throw std::invalid_argument("duplicate parameter: " + name);
    ad::Tensor t = ad::Tensor::zeros(std::move(shape), /*requires_grad=*/true);
    params_.emplace_back(name, t);
    return t;
}

ad::Tensor ParameterStore::add_buffer(const std::string& name, std::vector<int> shape,
                                      double fill) {
    if (contains(name)) throw std::invalid_argument("duplicate buffer: " + name);
    ad::Tensor t = ad::Tensor::zeros(std::move(shape), /*requires_grad=*/false);
    std::fill(t.values().begin(), t.values().end(), fill);
    buffers_.emplace_back(name, t);
    return t;
}

ad::Tensor& ParameterStore::at(const std::string& name) {
    for (auto& [n, t] : params_)
        if (n == name) return t;
    for (auto& [n, t] : buffers_)
        if (n == name) return t;
    throw std::out_of_range("no such parameter: " + name);
}

const ad::Tensor& ParameterStore::at(const std::string& name) const {
    return const_cast<ParameterStore*>(this)->at(name);
}

bool ParameterStore::contains(const std::string& name) const {
    for (const auto& [n, t] : params_)
        if (n == name) return true;
    for (const auto& [n, t] : buffers_)
        if (n == name) return true;
    return false;
}

void ParameterStore::zero_grad() {
    for (auto& [n, t] : params_) t.zero_grad();
}

std::int64_t ParameterStore::parameter_count() const {
    std::int64_t n = 0;
    for (const auto& [name, t] : params_) n += t.numel();
    return n;
}

GraphBatch make_batch(std::span<const AtomicStructure> structures, const ModelConfig& config,
                      const RadiiTable& radii) {
    const BasisConfig basis = config.effective_basis();
    const int edge_dim = config.edge_feature_dim();
    const int n_dir = config.direction_components();
    const int J = basis.J, L = basis.L;

    GraphBatch batch;
    batch.n_structures = static_cast<int>(structures.size());
    batch.src = std::make_shared<std::vector<int>>();
    batch.dst = std::make_shared<std::vector<int>>();

    std::vector<double> node_feat, edge_feat, alpha, targets;
    std::vector<double> sph_y, sph_rad;

    int atom_offset = 0;
    for (int si = 0; si < batch.n_structures; ++si) {
        const AtomicStructure& s = structures[si];
        s.validate();
        const RadiusGraph graph = build_radius_graph(s, config.cutoff);
        const auto feats = compute_edge_features(graph, s.atomic_numbers, radii, config.cutoff);

        for (int a = 0; a < s.size(); ++a) {
            const auto f = node_features(s.atomic_numbers[a]);
            node_feat.insert(node_feat.end(), f.begin(), f.end());
            batch.fixed.push_back(s.fixed_mask[a]);
            batch.structure_of.push_back(si);
            if (s.forces) {
                const Vec3& t = (*s.forces)[a];
                targets.insert(targets.end(), {t.x, t.y, t.z});
            } else {
                targets.insert(targets.end(), {0.0, 0.0, 0.0});
            }
        }
        if (s.forces) batch.has_targets = true;

        for (std::size_t e = 0; e < graph.edges.size(); ++e) {
            const Edge& edge = graph.edges[e];
            batch.src->push_back(edge.src + atom_offset);
            batch.dst->push_back(edge.dst + atom_offset);
            alpha.push_back(envelope(edge.disp.norm(), config.cutoff));

            const auto& f7 = feats[e];
            // Ablation slicing: OnlyDist keeps the four scaled distances,
            // NoAtomicRadii keeps direction + |d|/c.
            if (config.ablation == Ablation::OnlyDist)
                edge_feat.insert(edge_feat.end(), {f7[3], f7[4], f7[5], f7[6]});
            else if (config.ablation == Ablation::NoAtomicRadii)
                edge_feat.insert(edge_feat.end(), {f7[0], f7[1], f7[2], f7[3]});
            else
                edge_feat.insert(edge_feat.end(), f7.begin(), f7.end());

            if (basis.kind == BasisKind::Spherical) {
                const double nz = std::clamp(f7[2], -1.0, 1.0);
                const double theta = std::acos(nz);
                const double phi = std::atan2(f7[1], f7[0]);
                std::vector<double> y(static_cast<std::size_t>(L) * L);
                spherical_harmonics(L, theta, phi, y.data());
                sph_y.insert(sph_y.end(), y.begin(), y.end());

                const double* p = edge_feat.data() + edge_feat.size() - edge_dim + 3;
                std::vector<double> sj(J);
                for (int d = 0; d < edge_dim - 3; ++d) {
                    sine_basis(p[d], J, sj.data());
                    sph_rad.insert(sph_rad.end(), sj.begin(), sj.end());
                }
            }
        }
        atom_offset += s.size();
    }

    batch.n_atoms = atom_offset;
    batch.n_edges = static_cast<int>(batch.src->size());
    batch.node_features =
        ad::Tensor::from_vector({batch.n_atoms, kNodeFeatureDim}, std::move(node_feat));
    batch.edge_features =
        ad::Tensor::from_vector({batch.n_edges, edge_dim}, std::move(edge_feat));
    batch.alpha = ad::Tensor::from_vector({batch.n_edges}, std::move(alpha));
    batch.targets = ad::Tensor::from_vector({batch.n_atoms, 3}, std::move(targets));

    // Parameter-free basis encodings become constants of the batch.
    switch (basis.kind) {
        case BasisKind::None:
        case BasisKind::Identity:
        case BasisKind::LinearAct:
            batch.basis_const = batch.edge_features;
            break;
        case BasisKind::Gaussian:
        case BasisKind::Sine: {
            std::vector<double> enc(static_cast<std::size_t>(batch.n_edges) * J * edge_dim);
            std::vector<double> bj(J);
            for (int e = 0; e < batch.n_edges; ++e)
                for (int d = 0; d < edge_dim; ++d) {
                    const double x = normalize_edge_component(
                        batch.edge_features.data()[e * edge_dim + d], d < n_dir);
                    if (basis.kind == BasisKind::Gaussian)
                        gaussian_basis(x, J, bj.data());
                    else
                        sine_basis(x, J, bj.data());
                    std::copy(bj.begin(), bj.end(),
                              enc.begin() + (static_cast<std::size_t>(e) * edge_dim + d) * J);
                }
            batch.basis_const =
                ad::Tensor::from_vector({batch.n_edges, J * edge_dim}, std::move(enc));
            break;
        }
        case BasisKind::Spherical:
            batch.sph_harmonics =
                ad::Tensor::from_vector({batch.n_edges, L * L}, std::move(sph_y));
            batch.sph_radial_in = ad::Tensor::from_vector(
                {batch.n_edges, (edge_dim - 3) * J}, std::move(sph_rad));
            break;
    }

    // Node-feature encoding for the encoder input.
    const BasisKind node_kind = config.node_basis_kind();
    if (node_kind == BasisKind::Gaussian || node_kind == BasisKind::Sine) {
        std::vector<double> enc(static_cast<std::size_t>(batch.n_atoms) * J * kNodeFeatureDim);
        std::vector<double> bj(J);
        for (int a = 0; a < batch.n_atoms; ++a)
            for (int d = 0; d < kNodeFeatureDim; ++d) {
                const double x = batch.node_features.data()[a * kNodeFeatureDim + d];
                if (node_kind == BasisKind::Gaussian)
                    gaussian_basis(x, J, bj.data());
                else
                    sine_basis(x, J, bj.data());
                std::copy(bj.begin(), bj.end(),
                          enc.begin() + (static_cast<std::size_t>(a) * kNodeFeatureDim + d) * J);
            }
        batch.node_basis_const =
            ad::Tensor::from_vector({batch.n_atoms, J * kNodeFeatureDim}, std::move(enc));
    } else {
        // identity and linact both start from the raw 9 features
        batch.node_basis_const = batch.node_features;
    }
    return batch;
}

Model::Model(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
    config_.validate();
    std::mt19937_64 rng(seed);
    auto xavier = [&](const std::string& name, int fan_in, int fan_out,
                      std::vector<int> shape) {
        ad::Tensor t = store_.add_parameter(name, std::move(shape));
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (auto& v : t.values()) v = dist(rng);
        return t;
    };
    auto lin = [&](const std::string& prefix, int in, int out) {
        xavier(prefix + ".weight", in, out, {in, out});
        store_.add_parameter(prefix + ".bias", {out});
    };
    auto bn_block = [&](const std::string& prefix, int dim) {
        store_.add_parameter(prefix + ".gamma", {dim});
        auto& g = store_.at(prefix + ".gamma");
        std::fill(g.values().begin(), g.values().end(), 1.0);
        store_.add_parameter(prefix + ".beta", {dim});
        store_.add_buffer(prefix + ".running_mean", {dim}, 0.0);
        store_.add_buffer(prefix + ".running_var", {dim}, 1.0);
    };

    const int D = config_.hidden_dim;
    const int E = config_.edge_feature_dim();
    const BasisConfig basis = config_.effective_basis();
    const int B = basis_output_dim(basis, E);
    const int J = basis.J;

    if (config_.variant == ModelVariant::ForceNet) {
        // node encoder (plain linear projection, parameters for the linact
        // node basis when that family is selected)
        int node_in = kNodeFeatureDim;
        if (config_.node_basis_kind() == BasisKind::Gaussian ||
            config_.node_basis_kind() == BasisKind::Sine)
            node_in = kNodeFeatureDim * J;
        else if (config_.node_basis_kind() == BasisKind::LinearAct) {
            lin("node_basis", kNodeFeatureDim, basis.linact_dim);
            node_in = basis.linact_dim;
        }
        xavier("encoder.weight", node_in, D, {node_in, D});

        if (basis.kind == BasisKind::LinearAct) lin("edge_basis", E, basis.linact_dim);
        if (basis.kind == BasisKind::Spherical) lin("rad", (E - 3) * J, basis.S);
        if (basis.kind != BasisKind::None) lin("F_b", B, D);  // shared across layers

        const int fb_dim = basis.kind == BasisKind::None ? E : D;
        for (int k = 0; k < config_.num_layers; ++k) {
            const std::string p = "layer" + std::to_string(k);
            lin(p + ".Fd", D, D);
            const int fe_in = config_.ablation == Ablation::NoNodeEmb ? fb_dim : 2 * D + fb_dim;
            if (config_.ablation == Ablation::EdgeLinearBn) {
                lin(p + ".Fe.l0", fe_in, D);
                bn_block(p + ".Fe.bn", D);
            } else {
                lin(p + ".Fe.l0", fe_in, D);
                lin(p + ".Fe.l1", D, D);
                lin(p + ".Fe.l2", D, D);
            }
            if (config_.ablation != Ablation::OnlyFc &&
                config_.ablation != Ablation::NoSelfMessage)
                xavier(p + ".v", D, D, {D});
            if (config_.ablation == Ablation::NodeLinearBn) {
                lin(p + ".Fn.l0", D, D);
                bn_block(p + ".Fn.bn", D);
            } else {
                lin(p + ".Fn.l0", D, D);
                bn_block(p + ".Fn.bn", D);
                lin(p + ".Fn.l1", D, D);
            }
        }
        lin("dec.l0", D, D);
        bn_block("dec.bn", D);
        lin("dec.l1", D, 3);
    } else {
        xavier("encoder.weight", kNodeFeatureDim, D, {kNodeFeatureDim, D});
        for (int k = 0; k < config_.num_layers; ++k) {
            const std::string p = "layer" + std::to_string(k);
            lin(p + ".msg.l0", 2 * D + E, D);
            store_.add_parameter(p + ".msg.ln.gamma", {D});
            auto& g = store_.at(p + ".msg.ln.gamma");
            std::fill(g.values().begin(), g.values().end(), 1.0);
            store_.add_parameter(p + ".msg.ln.beta", {D});
            lin(p + ".msg.l1", D, D);
            lin(p + ".node", D, D);
            bn_block(p + ".node.bn", D);
        }
        lin("dec.l0", D, D);
        lin("dec.l1", D, 3);
    }
}

ad::Tensor Model::linear(ad::Tape* tape, const ad::Tensor& x, const std::string& w,
                         const std::string& b) {
    return ad::add_rowvec(tape, ad::matmul(tape, x, store_.at(w)), store_.at(b));
}

ad::Tensor Model::bn(ad::Tape* tape, const ad::Tensor& x, const std::string& prefix,
                     bool training) {
    return ad::batch_norm(tape, x, store_.at(prefix + ".gamma"), store_.at(prefix + ".beta"),
                          store_.at(prefix + ".running_mean"), store_.at(prefix + ".running_var"),
                          training);
}

ad::Tensor Model::edge_basis_projected(ad::Tape* tape, const GraphBatch& batch) {
    const BasisConfig basis = config_.effective_basis();
    ad::Tensor b_out;
    switch (basis.kind) {
        case BasisKind::None:
            return batch.basis_const;  // raw features concatenated into messages
        case BasisKind::Identity:
        case BasisKind::Gaussian:
        case BasisKind::Sine:
            b_out = batch.basis_const;
            break;
        case BasisKind::LinearAct:
            b_out = ad::activate(tape, linear(tape, batch.edge_features, "edge_basis.weight",
                                              "edge_basis.bias"),
                                 config_.activation);
            break;
        case BasisKind::Spherical: {
            ad::Tensor radial = linear(tape, batch.sph_radial_in, "rad.weight", "rad.bias");
            b_out = ad::rowwise_outer(tape, batch.sph_harmonics, radial);
            break;
        }
    }
    return linear(tape, b_out, "F_b.weight", "F_b.bias");
}

ad::Tensor Model::encode_nodes(ad::Tape* tape, const GraphBatch& batch) {
    ad::Tensor x = batch.node_basis_const;
    if (config_.variant == ModelVariant::ForceNet &&
        config_.node_basis_kind() == BasisKind::LinearAct)
        x = ad::activate(tape, linear(tape, x, "node_basis.weight", "node_basis.bias"),
                         config_.activation);
    return ad::matmul(tape, x, store_.at("encoder.weight"));
}

ad::Tensor Model::forward(ad::Tape* tape, const GraphBatch& batch, bool training) {
    return config_.variant == ModelVariant::ForceNet ? forward_forcenet(tape, batch, training)
                                                     : forward_gns(tape, batch, training);
}

ad::Tensor Model::forward_forcenet(ad::Tape* tape, const GraphBatch& batch, bool training) {
    const ActivationKind act = config_.activation;
    ad::Tensor h = encode_nodes(tape, batch);
    ad::Tensor fb = edge_basis_projected(tape, batch);

    for (int k = 0; k < config_.num_layers; ++k) {
        const std::string p = "layer" + std::to_string(k);
        ad::Tensor fd_all = linear(tape, h, p + ".Fd.weight", p + ".Fd.bias");

        ad::Tensor fe_in;
        if (config_.ablation == Ablation::NoNodeEmb) {
            fe_in = fb;
        } else {
            ad::Tensor h_src = ad::gather_rows(tape, h, batch.src);
            ad::Tensor h_dst = ad::gather_rows(tape, h, batch.dst);
            const ad::Tensor parts[] = {h_src, fb, h_dst};
            fe_in = ad::concat_cols(tape, parts);
        }

        ad::Tensor fe;
        if (config_.ablation == Ablation::EdgeLinearBn) {
            fe = this->bn(tape, linear(tape, fe_in, p + ".Fe.l0.weight", p + ".Fe.l0.bias"),
                          p + ".Fe.bn", training);
        } else {
            fe = ad::activate(tape, linear(tape, fe_in, p + ".Fe.l0.weight", p + ".Fe.l0.bias"),
                              act);
            fe = ad::activate(tape, linear(tape, fe, p + ".Fe.l1.weight", p + ".Fe.l1.bias"),
                              act);
            fe = linear(tape, fe, p + ".Fe.l2.weight", p + ".Fe.l2.bias");
        }
        ad::Tensor fc = ad::mul_colvec(tape, fe, batch.alpha);

        ad::Tensor m_st = fc;
        if (config_.ablation != Ablation::OnlyFc) {
            ad::Tensor fd_src = ad::gather_rows(tape, fd_all, batch.src);
            m_st = ad::mul(tape, fc, fd_src);
        }

        ad::Tensor agg = ad::scatter_add_rows(tape, m_st, batch.dst, batch.n_atoms);
        if (config_.ablation != Ablation::OnlyFc &&
            config_.ablation != Ablation::NoSelfMessage) {
            ad::Tensor m_t = ad::mul_rowvec(tape, fd_all, store_.at(p + ".v"));
            agg = ad::add(tape, agg, m_t);
        }

        ad::Tensor fn;
        if (config_.ablation == Ablation::NodeLinearBn) {
            fn = this->bn(tape, linear(tape, agg, p + ".Fn.l0.weight", p + ".Fn.l0.bias"),
                          p + ".Fn.bn", training);
        } else {
            fn = this->bn(tape, linear(tape, agg, p + ".Fn.l0.weight", p + ".Fn.l0.bias"),
                          p + ".Fn.bn", training);
            fn = ad::activate(tape, fn, act);
            fn = linear(tape, fn, p + ".Fn.l1.weight", p + ".Fn.l1.bias");
        }
        h = ad::add(tape, fn, h);
    }

    ad::Tensor d = this->bn(tape, linear(tape, h, "dec.l0.weight", "dec.l0.bias"), "dec.bn",
                            training);
    d = ad::activate(tape, d, act);
    return linear(tape, d, "dec.l1.weight", "dec.l1.bias");
}

ad::Tensor Model::forward_gns(ad::Tape* tape, const GraphBatch& batch, bool training) {
    const ActivationKind act = config_.activation;
    ad::Tensor h = encode_nodes(tape, batch);

    for (int k = 0; k < config_.num_layers; ++k) {
        const std::string p = "layer" + std::to_string(k);
        ad::Tensor h_src = ad::gather_rows(tape, h, batch.src);
        ad::Tensor h_dst = ad::gather_rows(tape, h, batch.dst);
        const ad::Tensor parts[] = {h_dst, batch.edge_features, h_src};
        ad::Tensor msg_in = ad::concat_cols(tape, parts);

        ad::Tensor hidden = linear(tape, msg_in, p + ".msg.l0.weight", p + ".msg.l0.bias");
        hidden = ad::layer_norm(tape, hidden, store_.at(p + ".msg.ln.gamma"),
                                store_.at(p + ".msg.ln.beta"));
        hidden = ad::activate(tape, hidden, act);
        ad::Tensor msg = linear(tape, hidden, p + ".msg.l1.weight", p + ".msg.l1.bias");

        ad::Tensor agg = ad::scatter_add_rows(tape, msg, batch.dst, batch.n_atoms);
        ad::Tensor upd = this->bn(tape, linear(tape, agg, p + ".node.weight", p + ".node.bias"),
                                  p + ".node.bn", training);
        h = ad::add(tape, upd, h);
    }

    ad::Tensor d = ad::activate(tape, linear(tape, h, "dec.l0.weight", "dec.l0.bias"), act);
    return linear(tape, d, "dec.l1.weight", "dec.l1.bias");
}

std::vector<Vec3> Model::predict(const AtomicStructure& s, const RadiiTable& radii) {
    const AtomicStructure* one = &s;
    GraphBatch batch = make_batch({one, 1}, config_, radii);
    ad::Tensor out = forward(nullptr, batch, /*training=*/false);
    std::vector<Vec3> forces(s.size());
    for (int i = 0; i < s.size(); ++i)
        forces[i] = {out.data()[i * 3], out.data()[i * 3 + 1], out.data()[i * 3 + 2]};
    return forces;
}

}  // namespace fnet
