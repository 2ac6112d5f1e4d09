#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fnet/oracle.hpp"
#include "fnet/structure.hpp"

namespace fnet {

struct RelaxConfig {
    double fmax = 0.01;       // eV/A, max free-atom force norm at convergence
    int max_steps = 200;
    int history_size = 50;    // L-BFGS curvature pairs kept
    double maxstep = 0.04;    // angstrom, per-atom displacement clamp

    void validate() const;
};

enum class RelaxTermination { Converged, MaxSteps, ProviderFailure };

struct RelaxStep {
    AtomicStructure structure;      // snapshot with the evaluated forces
    double max_force = 0.0;         // max per-atom force norm over free atoms
    std::optional<double> energy;
};

struct RelaxationTrajectory {
    std::vector<RelaxStep> steps;
    RelaxTermination termination = RelaxTermination::MaxSteps;
    std::string error;  // provider failure message when truncated

    const AtomicStructure& final_structure() const { return steps.back().structure; }
    bool converged() const { return termination == RelaxTermination::Converged; }
};

// Two-loop-recursion L-BFGS on the free-atom coordinates, gradient = -forces.
// No line search; the whole step is rescaled so no atom moves farther than
// maxstep. Fixed atoms never move. Terminates when the max free-atom force
// norm drops below fmax or after max_steps position updates.
// Throws std::invalid_argument when the structure has no free atom.
RelaxationTrajectory lbfgs_relax(const AtomicStructure& initial, const ForceProvider& provider,
                                 const RelaxConfig& config);

// Independent relaxations; per-structure provider failures are isolated in
// the returned trajectories rather than thrown.
std::vector<RelaxationTrajectory> relax_dataset(std::span<const AtomicStructure> structures,
                                                const ForceProvider& provider,
                                                const RelaxConfig& config);

}  // namespace fnet
