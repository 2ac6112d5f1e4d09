#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fnet/autodiff.hpp"
#include "fnet/basis.hpp"
#include "fnet/graph.hpp"
#include "fnet/structure.hpp"

namespace fnet {

enum class ModelVariant { ForceNet, GNS };

enum class Ablation {
    None,
    OnlyDist,       // edge feature = scaled distances only (rotation-invariant)
    NoAtomicRadii,  // edge feature = direction + |d|/c
    NoNodeEmb,      // conditional filter sees edge features only
    OnlyFc,         // message = filter itself, no self message
    EdgeLinearBn,   // F_e -> linear + batch norm
    NodeLinearBn,   // F_n -> linear + batch norm
    NoSelfMessage,
};

std::string to_string(ModelVariant v);
std::string to_string(Ablation a);
ModelVariant variant_from_string(const std::string& s);
Ablation ablation_from_string(const std::string& s);

struct ModelConfig {
    int hidden_dim = 512;
    int num_layers = 5;
    BasisConfig basis;
    ActivationKind activation = ActivationKind::Swish;
    double cutoff = 6.0;
    ModelVariant variant = ModelVariant::ForceNet;
    Ablation ablation = Ablation::None;

    int edge_feature_dim() const;     // 7; 4 under OnlyDist / NoAtomicRadii
    int direction_components() const; // 3; 0 under OnlyDist
    // OnlyDist removes the angles the spherical basis needs; it degrades to
    // the sine family over the remaining distance features.
    BasisConfig effective_basis() const;
    BasisKind node_basis_kind() const;  // spherical -> sine, none -> identity
    void validate() const;
};

// Named parameters (grad-bearing) and buffers (batch-norm running stats).
// Creation order is deterministic and is the checkpoint layout contract.
class ParameterStore {
public:
    ad::Tensor add_parameter(const std::string& name, std::vector<int> shape);
    ad::Tensor add_buffer(const std::string& name, std::vector<int> shape, double fill = 0.0);

    ad::Tensor& at(const std::string& name);
    const ad::Tensor& at(const std::string& name) const;
    bool contains(const std::string& name) const;

    std::span<const std::pair<std::string, ad::Tensor>> parameters() const { return params_; }
    std::span<const std::pair<std::string, ad::Tensor>> buffers() const { return buffers_; }

    void zero_grad();
    std::int64_t parameter_count() const;

private:
    std::vector<std::pair<std::string, ad::Tensor>> params_;
    std::vector<std::pair<std::string, ad::Tensor>> buffers_;
};

// Disjoint union of structures with all model inputs precomputed. Everything
// here is constant with respect to the learnable parameters.
struct GraphBatch {
    int n_atoms = 0;
    int n_edges = 0;
    int n_structures = 0;
    std::shared_ptr<std::vector<int>> src;  // edge source atom (global index)
    std::shared_ptr<std::vector<int>> dst;  // edge target atom
    ad::Tensor node_features;               // [N, 9]
    ad::Tensor edge_features;               // [E, edge_dim] after ablation slicing
    ad::Tensor alpha;                       // [E] distance envelope, 0 at r >= c
    ad::Tensor targets;                     // [N, 3]
    bool has_targets = false;
    std::vector<std::uint8_t> fixed;        // per atom
    std::vector<int> structure_of;          // atom -> structure index
    ad::Tensor basis_const;                 // [E, B] identity/gaussian/sine; raw for none
    ad::Tensor sph_harmonics;               // [E, L^2]
    ad::Tensor sph_radial_in;               // [E, (edge_dim-3) * J]
    ad::Tensor node_basis_const;            // [N, node encoder input dim]
};

GraphBatch make_batch(std::span<const AtomicStructure> structures, const ModelConfig& config,
                      const RadiiTable& radii);

class Model {
public:
    // Xavier-uniform initialization, deterministic in `seed`.
    Model(ModelConfig config, std::uint64_t seed);

    const ModelConfig& config() const { return config_; }
    ParameterStore& params() { return store_; }
    const ParameterStore& params() const { return store_; }

    // Per-atom forces [N, 3]. `training` selects batch-norm batch statistics
    // (and updates the running buffers); eval mode reads the running stats.
    ad::Tensor forward(ad::Tape* tape, const GraphBatch& batch, bool training);

    // Eval-mode prediction for one structure.
    std::vector<Vec3> predict(const AtomicStructure& s, const RadiiTable& radii);

private:
    ad::Tensor forward_forcenet(ad::Tape* tape, const GraphBatch& batch, bool training);
    ad::Tensor forward_gns(ad::Tape* tape, const GraphBatch& batch, bool training);
    ad::Tensor edge_basis_projected(ad::Tape* tape, const GraphBatch& batch);
    ad::Tensor encode_nodes(ad::Tape* tape, const GraphBatch& batch);
    ad::Tensor linear(ad::Tape* tape, const ad::Tensor& x, const std::string& w,
                      const std::string& b);
    ad::Tensor bn(ad::Tape* tape, const ad::Tensor& x, const std::string& prefix, bool training);

    ModelConfig config_;
    ParameterStore store_;
};

}  // namespace fnet
