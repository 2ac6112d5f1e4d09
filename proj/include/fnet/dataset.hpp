#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fnet/oracle.hpp"
#include "fnet/relax.hpp"
#include "fnet/train.hpp"

namespace fnet {

struct GenerateOptions {
    int n_systems = 80;   // training trajectories
    int n_val_id = 10;    // held-out systems, training adsorbate compositions
    int n_val_ood = 10;   // held-out adsorbate compositions
    int n_relax = 50;     // initial/reference pairs for relaxation scoring
    std::uint64_t seed = 0;
    LennardJonesOracle::Config oracle;
    RelaxConfig relax;
};

struct GenerateSummary {
    int train_frames = 0;
    int val_id_frames = 0;
    int val_ood_frames = 0;
    int relax_pairs = 0;
    int skipped_systems = 0;
};

// Random fcc(100)-style slabs (bottom layers fixed) with a 1..5 atom
// adsorbate, jittered and randomly rotated about z, then relaxed with the
// pair-potential oracle. Every relaxation frame becomes one example with the
// oracle forces attached. Writes train.xyz, val_id.xyz, val_ood.xyz,
// relax_initial.xyz, relax_reference.xyz, and meta.json under out_dir.
// Deterministic in the seed; systems whose relaxation fails to converge are
// retried with fresh sub-seeds and skipped (with a log line) if stubborn.
GenerateSummary generate_synthetic_dataset(const std::string& out_dir,
                                           const GenerateOptions& options);

// Reads train.xyz / val_id.xyz / val_ood.xyz from a dataset directory.
Dataset load_dataset(const std::string& dir);

// Reads the relaxation evaluation pairs.
std::vector<AtomicStructure> load_relax_initial(const std::string& dir);
std::vector<AtomicStructure> load_relax_reference(const std::string& dir);

}  // namespace fnet
