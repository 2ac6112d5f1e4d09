#include "fnet/oracle.hpp"

#include <cmath>

#include "fnet/errors.hpp"
#include "fnet/graph.hpp"

namespace fnet {

namespace {

double lj_raw(double r, double sigma, double eps) {
    const double sr6 = std::pow(sigma / r, 6);
    return 4.0 * eps * (sr6 * sr6 - sr6);
}

double lj_dedr(double r, double sigma, double eps) {
    const double sr6 = std::pow(sigma / r, 6);
    return 4.0 * eps * (-12.0 * sr6 * sr6 + 6.0 * sr6) / r;
}

}  // namespace

LennardJonesOracle::LennardJonesOracle(Config config, const RadiiTable* radii)
    : config_(std::move(config)), radii_(radii ? radii : &default_radii()) {}

double LennardJonesOracle::epsilon(int z) const {
    auto it = config_.epsilon_by_z.find(z);
    return it == config_.epsilon_by_z.end() ? config_.default_epsilon : it->second;
}

double LennardJonesOracle::pair_energy_raw(double r, double sigma, double eps) {
    return lj_raw(r, sigma, eps);
}

double LennardJonesOracle::pair_energy_shifted(double r, double sigma, double eps,
                                               double cutoff) {
    return lj_raw(r, sigma, eps) - lj_raw(cutoff, sigma, eps) -
           (r - cutoff) * lj_dedr(cutoff, sigma, eps);
}

double LennardJonesOracle::pair_dedr_shifted(double r, double sigma, double eps,
                                             double cutoff) {
    return lj_dedr(r, sigma, eps) - lj_dedr(cutoff, sigma, eps);
}

ForceEval LennardJonesOracle::evaluate(const AtomicStructure& s) const {
    s.validate();
    const RadiusGraph graph = build_radius_graph(s, config_.cutoff);

    ForceEval out;
    out.forces.assign(s.size(), Vec3{});
    double energy = 0.0;
    for (const Edge& e : graph.edges) {
        const double r = e.disp.norm();
        if (r < 1e-6)
            throw NumericalError("LennardJonesOracle: overlapping atoms " +
                                 std::to_string(e.src) + " and " + std::to_string(e.dst));
        const double sigma = radii_->radius(s.atomic_numbers[e.src]) +
                             radii_->radius(s.atomic_numbers[e.dst]);
        const double eps =
            std::sqrt(epsilon(s.atomic_numbers[e.src]) * epsilon(s.atomic_numbers[e.dst]));
        // each undirected pair contributes two directed edges
        energy += 0.5 * pair_energy_shifted(r, sigma, eps, config_.cutoff);
        const double dedr = pair_dedr_shifted(r, sigma, eps, config_.cutoff);
        out.forces[e.dst] -= e.disp * (dedr / r);
    }
    out.energy = energy;
    return out;
}

ForceProvider LennardJonesOracle::provider() const {
    return [oracle = *this](const AtomicStructure& s) { return oracle.evaluate(s); };
}

}  // namespace fnet
