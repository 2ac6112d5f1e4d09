#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fnet/model.hpp"
#include "fnet/structure.hpp"

namespace fnet {

struct TrainConfig {
    double lr0 = 5e-4;
    std::int64_t total_iters = 20000;   // paper scale: 500K
    std::int64_t warm_iters = -1;       // constant-lr phase; default total/2 (paper: 250K)
    std::int64_t halve_every = -1;      // default total/10 (paper: 50K)
    int batch_size = 8;                 // paper scale: 256
    double fixed_atom_weight = 0.05;
    bool rotation_augment = true;
    std::uint64_t seed = 0;
    std::int64_t val_every = -1;        // default total/20
    int max_val_structures = 512;       // validation cost cap

    void finalize();      // fills the -1 defaults from total_iters
    void validate() const;
};

double lr_schedule(std::int64_t iter, const TrainConfig& config);

struct AdamState {
    std::vector<std::vector<double>> m, v;  // one slot per parameter tensor
    std::int64_t t = 0;
    std::int64_t skipped_steps = 0;

    void initialize(std::span<const std::pair<std::string, ad::Tensor>> params);
    bool initialized() const { return !m.empty(); }
};

// Standard Adam (beta1 0.9, beta2 0.999, eps 1e-8, bias correction) applied
// to the accumulated gradients. A non-finite gradient skips the whole step
// and bumps skipped_steps.
void adam_step(std::span<const std::pair<std::string, ad::Tensor>> params, AdamState& state,
               double lr);

// Weighted MAE over atoms x components; fixed atoms contribute with weight
// lambda and the divisor is (sum of weights) * 3. Throws NumericalError on
// non-finite predictions or targets.
ad::Tensor force_loss(ad::Tape* tape, const ad::Tensor& pred, const GraphBatch& batch,
                      double fixed_weight);

// Each structure independently rotated about z by Uniform[0, 2pi) together
// with its cell and target forces.
void augment_rotation_z(std::span<AtomicStructure> batch, std::mt19937_64& rng);

struct Dataset {
    std::vector<AtomicStructure> train;
    std::vector<AtomicStructure> val_id;
    std::vector<AtomicStructure> val_ood;
};

struct TrainState {
    AdamState adam;
    std::int64_t iter = 0;  // next iteration to run
    double best_val_mae = -1.0;
    std::string rng_state;  // engine snapshot, informational
};

struct TrainResult {
    double best_val_mae = 0.0;
    std::int64_t best_iter = -1;
    double final_train_loss = 0.0;
    std::int64_t skipped_steps = 0;
};

// Shuffled mini-batches, optional z-rotation augmentation, Adam with the
// halving schedule, periodic validation on val_id. Writes metrics.csv and
// checkpoint_best.bin / checkpoint_last.bin under out_dir (pass "" for
// in-memory runs, e.g. tests). Bit-reproducible for a fixed (seed, config);
// resuming from a saved TrainState reproduces the uninterrupted run.
TrainResult train(Model& model, const Dataset& data, const TrainConfig& config,
                  const std::string& out_dir, const RadiiTable& radii,
                  TrainState* state = nullptr);

// Eval-mode free-atom force MAE of the model over a set of structures.
double evaluate_force_mae(Model& model, std::span<const AtomicStructure> structures,
                          const RadiiTable& radii, int max_structures = -1);

}  // namespace fnet
