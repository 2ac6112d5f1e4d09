#include "fnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "fnet/config_json.hpp"
#include "fnet/errors.hpp"
#include "fnet/graph.hpp"
#include "fnet/io.hpp"
#include "fnet/rng.hpp"

namespace fnet {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kLjMinFactor = 1.122462048309373;  // 2^(1/6)

const int kSlabElements[] = {13, 26, 28, 29, 46, 47, 78, 79};  // Al Fe Ni Cu Pd Ag Pt Au

// adsorbate compositions by atomic number; the OOD pool is held out of training
const std::vector<std::vector<int>> kIdCompositions = {
    {1}, {8}, {6}, {1, 1}, {6, 8}, {8, 1}, {6, 1, 1}, {8, 8, 1}, {6, 6, 1, 1}};
const std::vector<std::vector<int>> kOodCompositions = {{7}, {7, 1}, {16}, {7, 7}, {16, 1, 1}};

struct SlabDims { int nx, ny, nz; };
const SlabDims kSlabDims[] = {{3, 3, 2}, {3, 3, 3}, {3, 3, 4}, {3, 4, 2},
                              {3, 4, 3}, {3, 4, 4}, {4, 4, 2}, {4, 4, 3}};

// Minimum-image distance to the nearest existing atom.
double nearest_distance(const AtomicStructure& s, const Vec3& p) {
    double best = 1e30;
    for (int i = 0; i < s.size(); ++i)
        best = std::min(best,
                        minimum_image_displacement(s.positions[i], p, s.cell, s.pbc).norm());
    return best;
}

AtomicStructure build_system(std::mt19937_64& rng, const std::vector<int>& adsorbate,
                             const RadiiTable& radii) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    const int slab_z = kSlabElements[rng() % std::size(kSlabElements)];
    int slab_z2 = slab_z;
    if (uni(rng) < 0.3) slab_z2 = kSlabElements[rng() % std::size(kSlabElements)];
    const SlabDims dims = kSlabDims[rng() % std::size(kSlabDims)];

    const double a_mean = 0.5 * (radii.radius(slab_z) + radii.radius(slab_z2));
    const double d = kLjMinFactor * 2.0 * a_mean * 0.97;  // slightly compressed lattice
    const double dz = d / std::sqrt(2.0);

    AtomicStructure s;
    s.pbc = {true, true, false};
    s.cell = Mat3::from_rows({dims.nx * d, 0.0, 0.0}, {0.0, dims.ny * d, 0.0},
                             {0.0, 0.0, (dims.nz - 1) * dz + 20.0});

    const int fixed_layers = std::max(1, dims.nz - 2);
    for (int lz = 0; lz < dims.nz; ++lz) {
        const double off = (lz % 2) * 0.5 * d;  // fcc(100) stacking
        for (int ix = 0; ix < dims.nx; ++ix)
            for (int iy = 0; iy < dims.ny; ++iy) {
                s.atomic_numbers.push_back((ix + iy + lz) % 2 == 0 ? slab_z : slab_z2);
                s.positions.push_back({ix * d + off, iy * d + off, 2.0 + lz * dz});
                s.fixed_mask.push_back(lz < fixed_layers);
                s.tags.push_back(lz == dims.nz - 1 ? 1 : 0);
            }
    }
    const double top_z = 2.0 + (dims.nz - 1) * dz;

    // adsorbate chain above a random surface point
    Vec3 prev{uni(rng) * dims.nx * d, uni(rng) * dims.ny * d, top_z};
    int prev_z = slab_z;
    for (std::size_t k = 0; k < adsorbate.size(); ++k) {
        const int z = adsorbate[k];
        const double bond = 0.95 * kLjMinFactor * (radii.radius(prev_z) + radii.radius(z));
        Vec3 placed;
        double best_clearance = -1.0;
        for (int attempt = 0; attempt < 64; ++attempt) {
            Vec3 dir{uni(rng) * 2.0 - 1.0, uni(rng) * 2.0 - 1.0, 0.2 + 0.8 * uni(rng)};
            dir = dir.normalized();
            Vec3 cand = k == 0 ? Vec3{prev.x, prev.y, prev.z + bond} + Vec3{(uni(rng) - 0.5) * d,
                                                                            (uni(rng) - 0.5) * d,
                                                                            0.0}
                               : prev + dir * bond;
            const double clearance = nearest_distance(s, cand) /
                                     (radii.radius(z) + radii.radius(prev_z));
            if (clearance > best_clearance) {
                best_clearance = clearance;
                placed = cand;
            }
            if (clearance > 0.8) break;
        }
        s.atomic_numbers.push_back(z);
        s.positions.push_back(placed);
        s.fixed_mask.push_back(false);
        s.tags.push_back(2);
        prev = placed;
        prev_z = z;
    }

    // jitter the free atoms so frames start off-equilibrium
    std::normal_distribution<double> noise(0.0, 0.03 + 0.07 * uni(rng));
    for (int i = 0; i < s.size(); ++i)
        if (!s.fixed_mask[i]) {
            s.positions[i].x += noise(rng);
            s.positions[i].y += noise(rng);
            s.positions[i].z += noise(rng);
        }

    // random surface orientation about the vertical axis
    return rotate_structure(s, uni(rng) * kTwoPi, {0.0, 0.0, 1.0});
}

}  // namespace

GenerateSummary generate_synthetic_dataset(const std::string& out_dir,
                                           const GenerateOptions& options) {
    if (options.n_systems < 1) throw UsageError("generate: n_systems must be >= 1");
    std::filesystem::create_directories(out_dir);

    const RadiiTable& radii = default_radii();
    const LennardJonesOracle oracle(options.oracle);
    const ForceProvider provider = oracle.provider();

    GenerateSummary summary;

    // role stream bases keep train/val/relax draws independent
    constexpr std::uint64_t kTrainRole = 0, kValIdRole = 1'000'000, kValOodRole = 2'000'000,
                            kRelaxRole = 3'000'000;

    enum PoolMode { kIdPool, kOodPool, kMixedPool };
    auto make_trajectories = [&](std::uint64_t role, int count, PoolMode mode) {
        std::vector<RelaxationTrajectory> trajectories;
        for (int i = 0; i < count; ++i) {
            bool done = false;
            for (int attempt = 0; attempt < 6 && !done; ++attempt) {
                auto rng = make_engine(options.seed, role + static_cast<std::uint64_t>(i) * 8 +
                                                        attempt);
                const bool use_ood =
                    mode == kOodPool || (mode == kMixedPool && rng() % 2 == 1);
                const auto& pool = use_ood ? kOodCompositions : kIdCompositions;
                const auto& comp = pool[rng() % pool.size()];
                AtomicStructure sys = build_system(rng, comp, radii);
                try {
                    RelaxationTrajectory traj = lbfgs_relax(sys, provider, options.relax);
                    if (traj.converged()) {
                        trajectories.push_back(std::move(traj));
                        done = true;
                    }
                } catch (const NumericalError&) {
                    // overlapping start; retry with the next sub-seed
                }
            }
            if (!done) {
                ++summary.skipped_systems;
                std::fprintf(stderr, "generate: system %d (role %llu) failed to relax, skipped\n",
                             i, static_cast<unsigned long long>(role));
            }
        }
        return trajectories;
    };

    auto frames_of = [](const std::vector<RelaxationTrajectory>& trajs) {
        std::vector<AtomicStructure> frames;
        for (const auto& t : trajs)
            for (const auto& step : t.steps) frames.push_back(step.structure);
        return frames;
    };

    const auto train_trajs = make_trajectories(kTrainRole, options.n_systems, kIdPool);
    const auto val_id_trajs = make_trajectories(kValIdRole, options.n_val_id, kIdPool);
    const auto val_ood_trajs = make_trajectories(kValOodRole, options.n_val_ood, kOodPool);

    const auto train_frames = frames_of(train_trajs);
    const auto val_id_frames = frames_of(val_id_trajs);
    const auto val_ood_frames = frames_of(val_ood_trajs);
    summary.train_frames = static_cast<int>(train_frames.size());
    summary.val_id_frames = static_cast<int>(val_id_frames.size());
    summary.val_ood_frames = static_cast<int>(val_ood_frames.size());

    std::vector<AtomicStructure> relax_initial, relax_reference;
    {
        const auto relax_trajs = make_trajectories(kRelaxRole, options.n_relax, kMixedPool);
        for (std::size_t i = 0; i < relax_trajs.size(); ++i) {
            relax_initial.push_back(relax_trajs[i].steps.front().structure);
            relax_reference.push_back(relax_trajs[i].final_structure());
        }
        summary.relax_pairs = static_cast<int>(relax_initial.size());
    }

    write_structures(train_frames, out_dir + "/train.xyz");
    write_structures(val_id_frames, out_dir + "/val_id.xyz");
    write_structures(val_ood_frames, out_dir + "/val_ood.xyz");
    write_structures(relax_initial, out_dir + "/relax_initial.xyz");
    write_structures(relax_reference, out_dir + "/relax_reference.xyz");

    nlohmann::json meta;
    meta["seed"] = options.seed;
    meta["n_systems"] = options.n_systems;
    meta["n_val_id"] = options.n_val_id;
    meta["n_val_ood"] = options.n_val_ood;
    meta["n_relax"] = options.n_relax;
    meta["oracle"] = to_json(options.oracle);
    meta["relax"] = to_json(options.relax);
    meta["frames"] = {{"train", summary.train_frames},
                      {"val_id", summary.val_id_frames},
                      {"val_ood", summary.val_ood_frames},
                      {"relax_pairs", summary.relax_pairs},
                      {"skipped_systems", summary.skipped_systems}};
    atomic_write_file(out_dir + "/meta.json", meta.dump(2) + "\n");
    return summary;
}

Dataset load_dataset(const std::string& dir) {
    Dataset d;
    d.train = parse_structures(dir + "/train.xyz");
    d.val_id = parse_structures(dir + "/val_id.xyz");
    d.val_ood = parse_structures(dir + "/val_ood.xyz");
    return d;
}

std::vector<AtomicStructure> load_relax_initial(const std::string& dir) {
    return parse_structures(dir + "/relax_initial.xyz");
}

std::vector<AtomicStructure> load_relax_reference(const std::string& dir) {
    return parse_structures(dir + "/relax_reference.xyz");
}

}  // namespace fnet
