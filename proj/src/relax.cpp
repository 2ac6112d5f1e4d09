#include "fnet/relax.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace fnet {

void RelaxConfig::validate() const {
    if (!(fmax > 0.0)) throw std::invalid_argument("RelaxConfig: fmax must be positive");
    if (max_steps < 1) throw std::invalid_argument("RelaxConfig: max_steps must be >= 1");
    if (history_size < 1) throw std::invalid_argument("RelaxConfig: history_size must be >= 1");
    if (!(maxstep > 0.0)) throw std::invalid_argument("RelaxConfig: maxstep must be positive");
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double max_free_force(const std::vector<Vec3>& forces,
                      const std::vector<std::uint8_t>& fixed) {
    double m = 0.0;
    for (std::size_t i = 0; i < forces.size(); ++i)
        if (!fixed[i]) m = std::max(m, forces[i].norm());
    return m;
}

}  // namespace

RelaxationTrajectory lbfgs_relax(const AtomicStructure& initial, const ForceProvider& provider,
                                 const RelaxConfig& config) {
    config.validate();
    initial.validate();
    std::vector<int> free_atoms;
    for (int i = 0; i < initial.size(); ++i)
        if (!initial.fixed_mask[i]) free_atoms.push_back(i);
    if (free_atoms.empty())
        throw std::invalid_argument("lbfgs_relax: structure has no free atom");

    const int n = static_cast<int>(free_atoms.size()) * 3;
    const double kInitialHessianScale = 1.0 / 70.0;  // A^2/eV, first-step H0

    RelaxationTrajectory traj;
    AtomicStructure current = initial;

    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;
    std::vector<double> prev_x, prev_g;
    bool have_prev = false;
    // |s.y|/y.y of the latest rejected pair: negative-curvature regions would
    // otherwise creep at the fixed initial scale with an empty history
    double fallback_scale = 0.0;

    for (int step = 0; step <= config.max_steps; ++step) {
        ForceEval eval;
        try {
            eval = provider(current);
        } catch (const std::exception& ex) {
            traj.termination = RelaxTermination::ProviderFailure;
            traj.error = ex.what();
            if (traj.steps.empty()) {
                current.forces.reset();
                traj.steps.push_back({current, 0.0, std::nullopt});
            }
            return traj;
        }
        current.forces = eval.forces;
        current.energy = eval.energy;
        const double maxf = max_free_force(eval.forces, current.fixed_mask);
        traj.steps.push_back({current, maxf, eval.energy});

        if (maxf < config.fmax) {
            traj.termination = RelaxTermination::Converged;
            return traj;
        }
        if (step == config.max_steps) break;

        std::vector<double> x(n), g(n);
        for (std::size_t i = 0; i < free_atoms.size(); ++i) {
            const Vec3& p = current.positions[free_atoms[i]];
            const Vec3& f = eval.forces[free_atoms[i]];
            x[3 * i] = p.x;
            x[3 * i + 1] = p.y;
            x[3 * i + 2] = p.z;
            g[3 * i] = -f.x;
            g[3 * i + 1] = -f.y;
            g[3 * i + 2] = -f.z;
        }

        if (have_prev) {
            std::vector<double> s(n), y(n);
            for (int i = 0; i < n; ++i) {
                s[i] = x[i] - prev_x[i];
                y[i] = g[i] - prev_g[i];
            }
            const double sy = dot(s, y);
            if (sy > 1e-10) {  // skip non-positive curvature pairs
                s_hist.push_back(std::move(s));
                y_hist.push_back(std::move(y));
                rho_hist.push_back(1.0 / sy);
                if (static_cast<int>(s_hist.size()) > config.history_size) {
                    s_hist.pop_front();
                    y_hist.pop_front();
                    rho_hist.pop_front();
                }
            }
        }

        // Two-loop recursion for d = -H g.
        std::vector<double> q = g;
        const int m = static_cast<int>(s_hist.size());
        std::vector<double> alpha_coef(m);
        for (int i = m - 1; i >= 0; --i) {
            alpha_coef[i] = rho_hist[i] * dot(s_hist[i], q);
            for (int j = 0; j < n; ++j) q[j] -= alpha_coef[i] * y_hist[i][j];
        }
        double h0 = kInitialHessianScale;
        if (m > 0) {
            const double yy = dot(y_hist[m - 1], y_hist[m - 1]);
            if (yy > 0.0) h0 = 1.0 / (rho_hist[m - 1] * yy);  // gamma_k = s.y / y.y
        }
        for (int j = 0; j < n; ++j) q[j] *= h0;
        for (int i = 0; i < m; ++i) {
            const double beta = rho_hist[i] * dot(y_hist[i], q);
            for (int j = 0; j < n; ++j) q[j] += (alpha_coef[i] - beta) * s_hist[i][j];
        }
        for (int j = 0; j < n; ++j) q[j] = -q[j];  // descent direction

        // Per-atom displacement clamp: rescale the whole step.
        double longest = 0.0;
        for (std::size_t i = 0; i < free_atoms.size(); ++i) {
            const double len = std::sqrt(q[3 * i] * q[3 * i] + q[3 * i + 1] * q[3 * i + 1] +
                                         q[3 * i + 2] * q[3 * i + 2]);
            longest = std::max(longest, len);
        }
        if (longest > config.maxstep) {
            const double scalefac = config.maxstep / longest;
            for (int j = 0; j < n; ++j) q[j] *= scalefac;
        }

        for (std::size_t i = 0; i < free_atoms.size(); ++i) {
            Vec3& p = current.positions[free_atoms[i]];
            p.x += q[3 * i];
            p.y += q[3 * i + 1];
            p.z += q[3 * i + 2];
        }
        prev_x = std::move(x);
        prev_g = std::move(g);
        have_prev = true;
    }

    traj.termination = RelaxTermination::MaxSteps;
    return traj;
}

std::vector<RelaxationTrajectory> relax_dataset(std::span<const AtomicStructure> structures,
                                                const ForceProvider& provider,
                                                const RelaxConfig& config) {
    std::vector<RelaxationTrajectory> out;
    out.reserve(structures.size());
    for (const AtomicStructure& s : structures) {
        try {
            out.push_back(lbfgs_relax(s, provider, config));
        } catch (const std::exception& ex) {
            RelaxationTrajectory t;
            t.termination = RelaxTermination::ProviderFailure;
            t.error = ex.what();
            t.steps.push_back({s, 0.0, std::nullopt});
            out.push_back(std::move(t));
        }
    }
    return out;
}

}  // namespace fnet
