#include "fnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fnet/checkpoint.hpp"
#include "fnet/errors.hpp"
#include "fnet/io.hpp"
#include "fnet/metrics.hpp"
#include "fnet/rng.hpp"

namespace fnet {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
constexpr std::uint64_t kShuffleStream = 0x5348464cULL;   // epoch permutations
constexpr std::uint64_t kAugmentStream = 0x41554700ULL;   // per-iter rotations
}  // namespace

void TrainConfig::finalize() {
    if (warm_iters < 0) warm_iters = total_iters / 2;
    if (halve_every <= 0) halve_every = std::max<std::int64_t>(1, total_iters / 10);
    if (val_every <= 0) val_every = std::max<std::int64_t>(1, total_iters / 20);
}

void TrainConfig::validate() const {
    if (!(lr0 > 0.0)) throw std::invalid_argument("TrainConfig: lr0 must be positive");
    if (total_iters < 1) throw std::invalid_argument("TrainConfig: total_iters must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (fixed_atom_weight < 0.0 || fixed_atom_weight > 1.0)
        throw std::invalid_argument("TrainConfig: fixed_atom_weight must be in [0,1]");
    if (halve_every <= 0) throw std::invalid_argument("TrainConfig: halve_every must be > 0");
}

double lr_schedule(std::int64_t iter, const TrainConfig& config) {
    if (iter < config.warm_iters) return config.lr0;
    const std::int64_t halvings = 1 + (iter - config.warm_iters) / config.halve_every;
    return config.lr0 * std::pow(0.5, static_cast<double>(halvings));
}

void AdamState::initialize(std::span<const std::pair<std::string, ad::Tensor>> params) {
    m.clear();
    v.clear();
    for (const auto& [name, p] : params) {
        m.emplace_back(p.numel(), 0.0);
        v.emplace_back(p.numel(), 0.0);
    }
    t = 0;
    skipped_steps = 0;
}

void adam_step(std::span<const std::pair<std::string, ad::Tensor>> params, AdamState& state,
               double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    if (!state.initialized()) state.initialize(params);

    for (const auto& [name, p] : params)
        for (std::int64_t i = 0; i < p.numel(); ++i)
            if (!std::isfinite(p.grad()[i])) {
                ++state.skipped_steps;
                return;
            }

    ++state.t;
    const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        ad::Tensor p = params[pi].second;
        const double* g = p.grad();
        double* m = state.m[pi].data();
        double* v = state.v[pi].data();
        double* w = p.data();
        for (std::int64_t i = 0; i < p.numel(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            const double mhat = m[i] / corr1;
            const double vhat = v[i] / corr2;
            w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

ad::Tensor force_loss(ad::Tape* tape, const ad::Tensor& pred, const GraphBatch& batch,
                      double fixed_weight) {
    for (double x : pred.values())
        if (!std::isfinite(x)) throw NumericalError("force_loss: non-finite prediction");
    for (double x : batch.targets.values())
        if (!std::isfinite(x)) throw NumericalError("force_loss: non-finite target force");

    std::vector<double> w(static_cast<std::size_t>(batch.n_atoms) * 3);
    double weight_sum = 0.0;
    for (int i = 0; i < batch.n_atoms; ++i) {
        const double wi = batch.fixed[i] ? fixed_weight : 1.0;
        weight_sum += wi;
        w[3 * i] = w[3 * i + 1] = w[3 * i + 2] = wi;
    }
    ad::Tensor weights = ad::Tensor::from_vector({batch.n_atoms, 3}, std::move(w));

    ad::Tensor err = ad::abs(tape, ad::sub(tape, pred, batch.targets));
    ad::Tensor weighted = ad::mul(tape, err, weights);
    return ad::scale(tape, ad::sum(tape, weighted), 1.0 / (3.0 * weight_sum));
}

void augment_rotation_z(std::span<AtomicStructure> batch, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle_dist(0.0, kTwoPi);
    for (AtomicStructure& s : batch) {
        const double angle = angle_dist(rng);
        s = rotate_structure(s, angle, {0.0, 0.0, 1.0});
    }
}

double evaluate_force_mae(Model& model, std::span<const AtomicStructure> structures,
                          const RadiiTable& radii, int max_structures) {
    const std::size_t n = max_structures > 0
                              ? std::min<std::size_t>(structures.size(), max_structures)
                              : structures.size();
    MaeAccumulator acc;
    for (std::size_t i = 0; i < n; ++i) {
        const AtomicStructure& s = structures[i];
        if (!s.forces) throw DataError("evaluate_force_mae: structure has no reference forces");
        acc.add(model.predict(s, radii), *s.forces, s.fixed_mask);
    }
    return acc.value();
}

TrainResult train(Model& model, const Dataset& data, const TrainConfig& config_in,
                  const std::string& out_dir, const RadiiTable& radii, TrainState* state_io) {
    TrainConfig config = config_in;
    config.finalize();
    config.validate();
    if (data.train.empty()) throw DataError("train: empty training set");
    for (const AtomicStructure& s : data.train)
        if (!s.forces) throw DataError("train: training structure without forces");

    const bool persist = !out_dir.empty();
    if (persist) std::filesystem::create_directories(out_dir);

    TrainState local_state;
    TrainState& state = state_io ? *state_io : local_state;
    if (!state.adam.initialized()) state.adam.initialize(model.params().parameters());

    const std::int64_t batches_per_epoch =
        (static_cast<std::int64_t>(data.train.size()) + config.batch_size - 1) /
        config.batch_size;

    std::ofstream log;
    if (persist) {
        log.open(out_dir + "/metrics.csv", std::ios::app);
        if (state.iter == 0) log << "iter,lr,train_loss,val_mae\n";
    }

    TrainResult result;
    result.best_val_mae = state.best_val_mae >= 0 ? state.best_val_mae
                                                  : std::numeric_limits<double>::infinity();
    double initial_loss = -1.0;
    int high_loss_streak = 0;
    std::vector<int> perm;

    for (std::int64_t iter = state.iter; iter < config.total_iters; ++iter) {
        const std::int64_t epoch = iter / batches_per_epoch;
        const std::int64_t slot = iter % batches_per_epoch;
        if (slot == 0 || perm.empty()) {
            perm.resize(data.train.size());
            std::iota(perm.begin(), perm.end(), 0);
            auto rng = make_engine(config.seed, kShuffleStream + static_cast<std::uint64_t>(epoch));
            std::shuffle(perm.begin(), perm.end(), rng);
        }

        const std::size_t begin = static_cast<std::size_t>(slot) * config.batch_size;
        const std::size_t end = std::min(begin + config.batch_size, data.train.size());
        std::vector<AtomicStructure> structures;
        structures.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) structures.push_back(data.train[perm[i]]);

        if (config.rotation_augment) {
            auto rng = make_engine(config.seed, kAugmentStream + static_cast<std::uint64_t>(iter));
            augment_rotation_z(structures, rng);
        }

        GraphBatch batch = make_batch(structures, model.config(), radii);
        model.params().zero_grad();
        ad::Tape tape;
        ad::Tensor pred = model.forward(&tape, batch, /*training=*/true);
        ad::Tensor loss = force_loss(&tape, pred, batch, config.fixed_atom_weight);
        const double loss_value = loss.value();
        tape.backward(loss);
        adam_step(model.params().parameters(), state.adam, lr_schedule(iter, config));
        result.final_train_loss = loss_value;

        if (initial_loss < 0.0) initial_loss = std::max(loss_value, 1e-12);
        if (loss_value > 10.0 * initial_loss) {
            if (++high_loss_streak >= 500)
                throw NumericalError("train: loss diverged (>10x initial for 500 iterations) at iter " +
                                     std::to_string(iter));
        } else {
            high_loss_streak = 0;
        }

        const bool last = iter + 1 == config.total_iters;
        if ((iter + 1) % config.val_every == 0 || last) {
            double val_mae = std::numeric_limits<double>::quiet_NaN();
            if (!data.val_id.empty()) {
                val_mae = evaluate_force_mae(model, data.val_id, radii, config.max_val_structures);
                if (val_mae < result.best_val_mae) {
                    result.best_val_mae = val_mae;
                    result.best_iter = iter + 1;
                    if (persist) {
                        TrainState snap = state;
                        snap.iter = iter + 1;
                        snap.best_val_mae = result.best_val_mae;
                        save_checkpoint(out_dir + "/checkpoint_best.bin", model, &snap);
                    }
                }
            }
            if (persist) {
                log << iter + 1 << ',' << format_double(lr_schedule(iter, config)) << ','
                    << format_double(loss_value) << ',' << format_double(val_mae) << '\n';
                log.flush();
            }
        }
    }

    state.iter = config.total_iters;
    state.best_val_mae = result.best_val_mae;
    result.skipped_steps = state.adam.skipped_steps;
    if (persist) save_checkpoint(out_dir + "/checkpoint_last.bin", model, &state);
    return result;
}

}  // namespace fnet
