#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "fnet/elements.hpp"
#include "fnet/structure.hpp"

namespace fnet {

struct ForceEval {
    std::vector<Vec3> forces;       // eV/angstrom, all atoms (fixed ones included)
    std::optional<double> energy;   // eV; absent for force-only providers
};

using ForceProvider = std::function<ForceEval(const AtomicStructure&)>;

// Pairwise shifted-force Lennard-Jones over every periodic image within the
// cutoff: sigma_ij = a_i + a_j from the Slater radii, eps_ij = sqrt(eps_i
// eps_j). Both energy and forces are continuous at the cutoff and forces are
// the exact analytic gradient. Stands in for the reference calculator when
// generating and scoring synthetic data.
class LennardJonesOracle {
public:
    struct Config {
        double cutoff = 6.0;               // angstrom
        double default_epsilon = 0.1;      // eV
        std::map<int, double> epsilon_by_z;
    };

    LennardJonesOracle() : LennardJonesOracle(Config{}) {}
    explicit LennardJonesOracle(Config config, const RadiiTable* radii = nullptr);

    // Throws NumericalError on overlapping atoms (pair distance < 1e-6 A).
    ForceEval evaluate(const AtomicStructure& s) const;
    ForceProvider provider() const;

    double epsilon(int z) const;
    const Config& config() const { return config_; }

    // Bare pair terms, exposed for direct checks.
    static double pair_energy_raw(double r, double sigma, double eps);
    static double pair_energy_shifted(double r, double sigma, double eps, double cutoff);
    static double pair_dedr_shifted(double r, double sigma, double eps, double cutoff);

private:
    Config config_;
    const RadiiTable* radii_;
};

}  // namespace fnet
