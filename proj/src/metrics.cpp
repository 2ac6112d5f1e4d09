#include "fnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fnet/errors.hpp"
#include "fnet/graph.hpp"
#include "fnet/io.hpp"
#include "fnet/rng.hpp"

namespace fnet {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
}

double force_mae(std::span<const Vec3> pred, std::span<const Vec3> target,
                 std::span<const std::uint8_t> fixed_mask) {
    MaeAccumulator acc;
    acc.add(pred, target, fixed_mask);
    return acc.value();
}

void MaeAccumulator::add(std::span<const Vec3> pred, std::span<const Vec3> target,
                         std::span<const std::uint8_t> fixed_mask) {
    if (pred.size() != target.size() || pred.size() != fixed_mask.size())
        throw std::invalid_argument("force_mae: shapes disagree");
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (fixed_mask[i]) continue;
        abs_sum_ += std::abs(pred[i].x - target[i].x) + std::abs(pred[i].y - target[i].y) +
                    std::abs(pred[i].z - target[i].z);
        count_ += 3;
    }
}

double MaeAccumulator::value() const {
    if (count_ == 0) throw NumericalError("force_mae: no free atoms, metric undefined");
    return abs_sum_ / static_cast<double>(count_);
}

Vec3 median_baseline(std::span<const AtomicStructure> training) {
    std::vector<double> comp[3];
    for (const AtomicStructure& s : training) {
        if (!s.forces) continue;
        for (int i = 0; i < s.size(); ++i) {
            if (s.fixed_mask[i]) continue;
            for (int c = 0; c < 3; ++c) comp[c].push_back((*s.forces)[i][c]);
        }
    }
    if (comp[0].empty()) throw DataError("median_baseline: no free-atom forces in training set");
    Vec3 med;
    for (int c = 0; c < 3; ++c) {
        auto& v = comp[c];
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        med[c] = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }
    return med;
}

double median_baseline_mae(const Vec3& baseline, std::span<const AtomicStructure> split) {
    MaeAccumulator acc;
    for (const AtomicStructure& s : split) {
        if (!s.forces) continue;
        std::vector<Vec3> pred(s.size(), baseline);
        acc.add(pred, *s.forces, s.fixed_mask);
    }
    return acc.value();
}

double rotation_instability(Model& model, std::span<const AtomicStructure> structures,
                            int n_rot, std::uint64_t seed, const RadiiTable& radii) {
    return rotation_instability(
        [&](const AtomicStructure& s) { return model.predict(s, radii); }, structures, n_rot,
        seed);
}

double rotation_instability(const ForcePredictor& predictor,
                            std::span<const AtomicStructure> structures, int n_rot,
                            std::uint64_t seed) {
    if (n_rot < 2) throw std::invalid_argument("rotation_instability: n_rot must be >= 2");
    double std_sum = 0.0;
    std::int64_t std_count = 0;

    for (std::size_t si = 0; si < structures.size(); ++si) {
        const AtomicStructure& s = structures[si];
        auto rng = make_engine(seed, si);
        std::uniform_real_distribution<double> angle_dist(0.0, kTwoPi);

        std::vector<int> free_atoms;
        for (int i = 0; i < s.size(); ++i)
            if (!s.fixed_mask[i]) free_atoms.push_back(i);
        if (free_atoms.empty()) continue;

        // back-rotated predictions: [rotation][free atom * 3]
        std::vector<std::vector<double>> samples(
            n_rot, std::vector<double>(free_atoms.size() * 3));
        for (int r = 0; r < n_rot; ++r) {
            const double angle = angle_dist(rng);
            const AtomicStructure rotated = rotate_structure(s, angle, {0.0, 0.0, 1.0});
            const std::vector<Vec3> pred = predictor(rotated);
            const Mat3 back = rotation_about_z(-angle);
            for (std::size_t k = 0; k < free_atoms.size(); ++k) {
                const Vec3 f = rotate(back, pred[free_atoms[k]]);
                samples[r][3 * k] = f.x;
                samples[r][3 * k + 1] = f.y;
                samples[r][3 * k + 2] = f.z;
            }
        }
        for (std::size_t j = 0; j < free_atoms.size() * 3; ++j) {
            double mean = 0.0;
            for (int r = 0; r < n_rot; ++r) mean += samples[r][j];
            mean /= n_rot;
            double var = 0.0;
            for (int r = 0; r < n_rot; ++r) {
                const double d = samples[r][j] - mean;
                var += d * d;
            }
            std_sum += std::sqrt(var / n_rot);
            ++std_count;
        }
    }
    if (std_count == 0) throw NumericalError("rotation_instability: no free atoms");
    return std_sum / static_cast<double>(std_count);
}

std::vector<double> default_adwt_thresholds() {
    std::vector<double> t;
    for (int i = 1; i <= 50; ++i) t.push_back(0.01 * i);
    return t;
}

std::vector<double> default_afbt_thresholds() {
    std::vector<double> t;
    const double lo = 0.01, hi = 0.4;
    for (int i = 0; i < 10; ++i) t.push_back(lo * std::pow(hi / lo, i / 9.0));
    return t;
}

double adwt(std::span<const AtomicStructure> predicted,
            std::span<const AtomicStructure> reference, std::span<const double> thresholds) {
    if (predicted.size() != reference.size() || predicted.empty())
        throw std::invalid_argument("adwt: structure lists disagree");
    if (thresholds.empty()) throw std::invalid_argument("adwt: no thresholds");

    std::vector<double> mean_dist;
    mean_dist.reserve(predicted.size());
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const AtomicStructure& p = predicted[i];
        const AtomicStructure& r = reference[i];
        if (p.size() != r.size()) throw std::invalid_argument("adwt: atom counts disagree");
        double sum = 0.0;
        int n_free = 0;
        for (int a = 0; a < p.size(); ++a) {
            if (r.fixed_mask[a]) continue;
            sum += minimum_image_displacement(p.positions[a], r.positions[a], r.cell, r.pbc)
                       .norm();
            ++n_free;
        }
        if (n_free == 0) throw NumericalError("adwt: structure without free atoms");
        mean_dist.push_back(sum / n_free);
    }

    double acc = 0.0;
    for (double beta : thresholds) {
        int pass = 0;
        for (double d : mean_dist) pass += (d < beta);
        acc += static_cast<double>(pass) / static_cast<double>(mean_dist.size());
    }
    return 100.0 * acc / static_cast<double>(thresholds.size());
}

double afbt(std::span<const AtomicStructure> terminal, const ForceProvider& oracle,
            std::span<const double> thresholds) {
    if (terminal.empty()) throw std::invalid_argument("afbt: no structures");
    if (thresholds.empty()) throw std::invalid_argument("afbt: no thresholds");

    std::vector<double> max_force;
    max_force.reserve(terminal.size());
    for (std::size_t i = 0; i < terminal.size(); ++i) {
        try {
            const ForceEval eval = oracle(terminal[i]);
            double m = 0.0;
            for (int a = 0; a < terminal[i].size(); ++a)
                if (!terminal[i].fixed_mask[a]) m = std::max(m, eval.forces[a].norm());
            max_force.push_back(m);
        } catch (const std::exception& ex) {
            std::fprintf(stderr, "afbt: oracle failed on structure %zu: %s\n", i, ex.what());
            max_force.push_back(std::numeric_limits<double>::infinity());
        }
    }

    double acc = 0.0;
    for (double beta : thresholds) {
        int pass = 0;
        for (double m : max_force) pass += (m < beta);
        acc += static_cast<double>(pass) / static_cast<double>(max_force.size());
    }
    return 100.0 * acc / static_cast<double>(thresholds.size());
}

std::string EvalReport::to_json() const {
    std::ostringstream os;
    os << "{\n  \"splits\": {";
    bool first = true;
    for (const auto& [name, score] : splits) {
        os << (first ? "\n" : ",\n");
        first = false;
        os << "    \"" << name << "\": {\"force_mae\": " << format_double(score.mae)
           << ", \"structures\": " << score.structures
           << ", \"free_atoms\": " << score.free_atoms << "}";
    }
    os << "\n  },\n  \"average_force_mae\": " << format_double(average_mae);
    if (median_baseline_average_mae)
        os << ",\n  \"median_baseline_average_mae\": "
           << format_double(*median_baseline_average_mae);
    if (rotation_instability)
        os << ",\n  \"rotation_instability\": " << format_double(*rotation_instability);
    if (afbt) {
        os << ",\n  \"afbt_percent\": " << format_double(*afbt) << ",\n  \"afbt_thresholds\": [";
        for (std::size_t i = 0; i < afbt_thresholds.size(); ++i)
            os << (i ? ", " : "") << format_double(afbt_thresholds[i]);
        os << "]";
    }
    if (adwt) {
        os << ",\n  \"adwt_percent\": " << format_double(*adwt) << ",\n  \"adwt_thresholds\": [";
        for (std::size_t i = 0; i < adwt_thresholds.size(); ++i)
            os << (i ? ", " : "") << format_double(adwt_thresholds[i]);
        os << "]";
    }
    os << "\n}\n";
    return os.str();
}

std::string EvalReport::to_table() const {
    std::ostringstream os;
    os << "split            force MAE (eV/A)   structures   free atoms\n";
    char buf[128];
    for (const auto& [name, score] : splits) {
        std::snprintf(buf, sizeof buf, "%-16s %16.6f %12lld %12lld\n", name.c_str(), score.mae,
                      static_cast<long long>(score.structures),
                      static_cast<long long>(score.free_atoms));
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "%-16s %16.6f\n", "average", average_mae);
    os << buf;
    if (median_baseline_average_mae) {
        std::snprintf(buf, sizeof buf, "%-16s %16.6f\n", "median baseline",
                      *median_baseline_average_mae);
        os << buf;
    }
    if (rotation_instability) {
        std::snprintf(buf, sizeof buf, "%-16s %16.6f\n", "rot instability",
                      *rotation_instability);
        os << buf;
    }
    if (afbt) {
        std::snprintf(buf, sizeof buf, "%-16s %15.2f%%\n", "AFbT", *afbt);
        os << buf;
    }
    if (adwt) {
        std::snprintf(buf, sizeof buf, "%-16s %15.2f%%\n", "ADwT", *adwt);
        os << buf;
    }
    return os.str();
}

}  // namespace fnet
