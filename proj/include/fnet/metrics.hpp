#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fnet/model.hpp"
#include "fnet/oracle.hpp"
#include "fnet/relax.hpp"
#include "fnet/structure.hpp"

namespace fnet {

// Free-atom force MAE over atoms x 3 components. Throws NumericalError when
// no free atom is in scope (undefined metric).
double force_mae(std::span<const Vec3> pred, std::span<const Vec3> target,
                 std::span<const std::uint8_t> fixed_mask);

// Pools |error| over several structures before dividing (whole-split MAE).
class MaeAccumulator {
public:
    void add(std::span<const Vec3> pred, std::span<const Vec3> target,
             std::span<const std::uint8_t> fixed_mask);
    double value() const;  // throws NumericalError when empty
    std::int64_t free_atom_count() const { return count_ / 3; }

private:
    double abs_sum_ = 0.0;
    std::int64_t count_ = 0;
};

// Per-component median of the free-atom training forces (the constant
// predictor baseline).
Vec3 median_baseline(std::span<const AtomicStructure> training);

// Free-atom MAE of the constant predictor over a split.
double median_baseline_mae(const Vec3& baseline, std::span<const AtomicStructure> split);

// Draws n_rot z-rotations per structure, predicts on each rotated copy,
// rotates the predictions back, and averages the per-(free atom, component)
// standard deviation across rotations over components, atoms, structures.
using ForcePredictor = std::function<std::vector<Vec3>(const AtomicStructure&)>;
double rotation_instability(const ForcePredictor& predictor,
                            std::span<const AtomicStructure> structures, int n_rot,
                            std::uint64_t seed);
double rotation_instability(Model& model, std::span<const AtomicStructure> structures,
                            int n_rot, std::uint64_t seed, const RadiiTable& radii);

std::vector<double> default_adwt_thresholds();  // 0.01..0.5 A in steps of 0.01
std::vector<double> default_afbt_thresholds();  // geometric, 0.01..0.4 eV/A, 10 values

// Mean over thresholds of the fraction of structures whose mean free-atom
// minimum-image distance to the reference is below the threshold, x100.
double adwt(std::span<const AtomicStructure> predicted,
            std::span<const AtomicStructure> reference, std::span<const double> thresholds);

// Mean over thresholds of the fraction of terminal structures whose
// reference-calculator max free-atom force norm is below the threshold,
// x100. Oracle failures score as failing every threshold.
double afbt(std::span<const AtomicStructure> terminal, const ForceProvider& oracle,
            std::span<const double> thresholds);

struct SplitScore {
    double mae = 0.0;
    std::int64_t structures = 0;
    std::int64_t free_atoms = 0;
};

struct EvalReport {
    std::vector<std::pair<std::string, SplitScore>> splits;
    double average_mae = 0.0;
    std::optional<double> median_baseline_average_mae;
    std::optional<double> rotation_instability;
    std::optional<double> afbt;
    std::optional<double> adwt;
    std::vector<double> afbt_thresholds;
    std::vector<double> adwt_thresholds;

    std::string to_json() const;   // exact doubles, deterministic key order
    std::string to_table() const;  // human-readable summary
};

}  // namespace fnet
