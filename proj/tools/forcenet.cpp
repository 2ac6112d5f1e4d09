#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>

#include "fnet/checkpoint.hpp"
#include "fnet/config_json.hpp"
#include "fnet/dataset.hpp"
#include "fnet/errors.hpp"
#include "fnet/io.hpp"
#include "fnet/metrics.hpp"
#include "fnet/rng.hpp"

namespace {

using namespace fnet;

// 5-atom random cluster for the finite-difference gate.
AtomicStructure gradcheck_structure(std::uint64_t seed) {
    auto rng = make_engine(seed, 0xFD);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int elements[] = {1, 6, 8, 29, 78};
    AtomicStructure s;
    s.pbc = {true, true, false};
    s.cell = Mat3::from_rows({7.0, 0.0, 0.0}, {0.0, 7.0, 0.0}, {0.0, 0.0, 18.0});
    for (int i = 0; i < 5; ++i) {
        s.atomic_numbers.push_back(elements[i]);
        s.positions.push_back({uni(rng) * 6.0, uni(rng) * 6.0, 4.0 + uni(rng) * 3.0});
        s.fixed_mask.push_back(i == 0);  // one fixed atom exercises the loss weighting
        s.tags.push_back(i < 2 ? 1 : 2);
        // keep the cluster loosely packed
        for (int j = 0; j < i; ++j) {
            const double r =
                minimum_image_displacement(s.positions[j], s.positions[i], s.cell, s.pbc).norm();
            if (r < 1.6) {
                s.positions[i].z += 1.8;
                break;
            }
        }
    }
    std::vector<Vec3> forces;
    std::normal_distribution<double> gauss(0.0, 0.5);
    for (int i = 0; i < 5; ++i) forces.push_back({gauss(rng), gauss(rng), gauss(rng)});
    s.forces = forces;
    return s;
}

int run_gradcheck(const ModelConfig& config, std::uint64_t seed, double tolerance) {
    Model model(config, seed);
    const AtomicStructure s = gradcheck_structure(seed);
    const AtomicStructure* one = &s;
    const GraphBatch batch = make_batch({one, 1}, model.config(), default_radii());

    auto loss_fn = [&](ad::Tape* tape) {
        ad::Tensor pred = model.forward(tape, batch, /*training=*/true);
        return force_loss(tape, pred, batch, 0.05);
    };
    const auto result = ad::check_gradients(loss_fn, model.params().parameters(), 1e-6);
    std::printf("parameters checked: %lld\n",
                static_cast<long long>(model.params().parameter_count()));
    std::printf("max relative error: %.3e (param %s[%d], analytic %.6e, fd %.6e)\n",
                result.max_rel_err, result.worst_param.c_str(), result.worst_index,
                result.analytic, result.numeric);
    std::printf("unfloored max relative error over gradients >= 1e-3: %.3e\n",
                result.max_rel_err_large);
    if (result.max_rel_err <= tolerance) {
        std::printf("gradcheck PASS (tolerance %.1e)\n", tolerance);
        return 0;
    }
    std::printf("gradcheck FAIL (tolerance %.1e)\n", tolerance);
    return 3;
}

std::vector<AtomicStructure> load_structures_arg(const std::string& path) {
    namespace fs = std::filesystem;
    if (fs::is_directory(path)) {
        std::vector<std::string> files;
        for (const auto& e : fs::directory_iterator(path))
            if (e.path().extension() == ".xyz") files.push_back(e.path().string());
        std::sort(files.begin(), files.end());
        if (files.empty()) throw DataError("no .xyz files in directory: " + path);
        std::vector<AtomicStructure> all;
        for (const auto& f : files) {
            auto part = parse_structures(f);
            all.insert(all.end(), part.begin(), part.end());
        }
        return all;
    }
    return parse_structures(path);
}

ModelConfig model_config_from_file(const std::string& path) {
    const nlohmann::json j = load_json_file(path);
    return model_config_from_json(j.contains("model") ? j.at("model") : j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ForceNet force-field toolkit: synthetic data, training, evaluation, relaxation"};
    app.require_subcommand(1);

    // generate-data
    auto* gen = app.add_subcommand("generate-data", "generate a synthetic slab+adsorbate dataset");
    std::string gen_out;
    GenerateOptions gen_opts;
    std::string gen_oracle_config;
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--systems", gen_opts.n_systems, "training trajectories");
    gen->add_option("--seed", gen_opts.seed, "master seed");
    gen->add_option("--val-id", gen_opts.n_val_id, "in-distribution validation trajectories");
    gen->add_option("--val-ood", gen_opts.n_val_ood, "held-out-composition validation trajectories");
    gen->add_option("--relax-systems", gen_opts.n_relax, "relaxation evaluation pairs");
    gen->add_option("--oracle-config", gen_oracle_config, "oracle config JSON");

    // train
    auto* tr = app.add_subcommand("train", "train a model");
    std::string tr_data, tr_out, tr_config, tr_variant, tr_ablation, tr_resume;
    bool tr_augment = false, tr_no_augment = false;
    double tr_fixed_weight = -1.0;
    std::int64_t tr_iters = -1;
    int tr_batch = -1;
    std::int64_t tr_seed = -1;
    tr->add_option("--data", tr_data, "dataset directory")->required();
    tr->add_option("--out", tr_out, "output directory")->required();
    tr->add_option("--config", tr_config, "JSON config with 'model' and 'train' sections");
    tr->add_flag("--augment", tr_augment, "enable rotation augmentation");
    tr->add_flag("--no-augment", tr_no_augment, "disable rotation augmentation");
    tr->add_option("--fixed-weight", tr_fixed_weight, "loss weight for fixed atoms");
    tr->add_option("--variant", tr_variant, "forcenet|gns");
    tr->add_option("--ablation", tr_ablation, "architecture ablation name");
    tr->add_option("--iters", tr_iters, "total iterations");
    tr->add_option("--batch-size", tr_batch, "batch size");
    tr->add_option("--seed", tr_seed, "training seed");
    tr->add_option("--resume", tr_resume, "checkpoint to resume from");

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    std::string ev_checkpoint, ev_data, ev_report;
    ev->add_option("--checkpoint", ev_checkpoint, "model checkpoint")->required();
    ev->add_option("--data", ev_data, "dataset directory")->required();
    ev->add_option("--report", ev_report, "output JSON path");

    // relax
    auto* rx = app.add_subcommand("relax", "relax structures with a model or the oracle");
    std::string rx_checkpoint, rx_structures, rx_out, rx_oracle_config;
    bool rx_use_oracle = false;
    RelaxConfig rx_config;
    rx->add_option("--checkpoint", rx_checkpoint, "model checkpoint");
    rx->add_option("--structures", rx_structures, "structure file or directory")->required();
    rx->add_option("--out", rx_out, "output directory")->required();
    rx->add_option("--fmax", rx_config.fmax, "convergence threshold, eV/A");
    rx->add_option("--max-steps", rx_config.max_steps, "step cap");
    rx->add_flag("--oracle", rx_use_oracle, "drive with the pair-potential oracle");
    rx->add_option("--oracle-config", rx_oracle_config, "oracle config JSON");

    // rotation-audit
    auto* ra = app.add_subcommand("rotation-audit", "measure rotation instability");
    std::string ra_checkpoint, ra_data;
    int ra_rotations = 100, ra_structures = 50;
    std::uint64_t ra_seed = 0;
    ra->add_option("--checkpoint", ra_checkpoint, "model checkpoint")->required();
    ra->add_option("--data", ra_data, "dataset directory")->required();
    ra->add_option("--rotations", ra_rotations, "rotations per structure");
    ra->add_option("--structures", ra_structures, "validation structures to sample");
    ra->add_option("--seed", ra_seed, "rotation seed");

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient gate");
    std::string gc_config;
    std::uint64_t gc_seed = 7;
    double gc_tol = 1e-5;
    gc->add_option("--config", gc_config, "model config JSON");
    gc->add_option("--seed", gc_seed, "instance seed");
    gc->add_option("--tolerance", gc_tol, "max relative error allowed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            if (!gen_oracle_config.empty())
                gen_opts.oracle = oracle_config_from_json(load_json_file(gen_oracle_config));
            const GenerateSummary s = generate_synthetic_dataset(gen_out, gen_opts);
            std::printf(
                "wrote %s: %d train / %d val_id / %d val_ood frames, %d relax pairs (%d skipped)\n",
                gen_out.c_str(), s.train_frames, s.val_id_frames, s.val_ood_frames, s.relax_pairs,
                s.skipped_systems);
            return 0;
        }

        if (tr->parsed()) {
            ModelConfig mconfig;
            mconfig.hidden_dim = 64;  // desk-scale default
            mconfig.num_layers = 3;
            TrainConfig tconfig;
            if (!tr_config.empty()) {
                const nlohmann::json j = load_json_file(tr_config);
                if (j.contains("model")) mconfig = model_config_from_json(j.at("model"));
                if (j.contains("train")) tconfig = train_config_from_json(j.at("train"));
            }
            if (!tr_variant.empty()) mconfig.variant = variant_from_string(tr_variant);
            if (!tr_ablation.empty()) mconfig.ablation = ablation_from_string(tr_ablation);
            if (tr_augment) tconfig.rotation_augment = true;
            if (tr_no_augment) tconfig.rotation_augment = false;
            if (tr_fixed_weight >= 0.0) tconfig.fixed_atom_weight = tr_fixed_weight;
            if (tr_iters > 0) tconfig.total_iters = tr_iters;
            if (tr_batch > 0) tconfig.batch_size = tr_batch;
            if (tr_seed >= 0) tconfig.seed = static_cast<std::uint64_t>(tr_seed);

            const Dataset data = load_dataset(tr_data);
            TrainResult result;
            if (!tr_resume.empty()) {
                LoadedCheckpoint loaded = load_checkpoint(tr_resume);
                if (!loaded.training)
                    throw DataError("checkpoint has no training state: " + tr_resume);
                TrainState state = *loaded.training;
                result = train(loaded.model, data, tconfig, tr_out, default_radii(), &state);
            } else {
                Model model(mconfig, tconfig.seed);
                result = train(model, data, tconfig, tr_out, default_radii());
            }
            std::printf("best val MAE %.6f at iter %lld; final train loss %.6f\n",
                        result.best_val_mae, static_cast<long long>(result.best_iter),
                        result.final_train_loss);
            return 0;
        }

        if (ev->parsed()) {
            LoadedCheckpoint loaded = load_checkpoint(ev_checkpoint);
            const Dataset data = load_dataset(ev_data);
            const RadiiTable& radii = default_radii();

            EvalReport report;
            auto score_split = [&](const std::string& name,
                                   const std::vector<AtomicStructure>& split) {
                if (split.empty()) return;
                MaeAccumulator acc;
                for (const AtomicStructure& s : split)
                    acc.add(loaded.model.predict(s, radii), *s.forces, s.fixed_mask);
                report.splits.push_back(
                    {name, {acc.value(), static_cast<std::int64_t>(split.size()),
                            acc.free_atom_count()}});
            };
            score_split("val_id", data.val_id);
            score_split("val_ood", data.val_ood);
            if (report.splits.empty()) throw DataError("eval: no validation splits in " + ev_data);
            double sum = 0.0;
            for (const auto& [name, sc] : report.splits) sum += sc.mae;
            report.average_mae = sum / static_cast<double>(report.splits.size());

            const Vec3 baseline = median_baseline(data.train);
            double bl_sum = 0.0;
            for (const auto& [name, sc] : report.splits)
                bl_sum += median_baseline_mae(baseline,
                                              name == "val_id" ? data.val_id : data.val_ood);
            report.median_baseline_average_mae =
                bl_sum / static_cast<double>(report.splits.size());

            std::printf("%s", report.to_table().c_str());
            if (!ev_report.empty()) atomic_write_file(ev_report, report.to_json());
            return 0;
        }

        if (rx->parsed()) {
            rx_config.validate();
            const std::vector<AtomicStructure> structures = load_structures_arg(rx_structures);
            const RadiiTable& radii = default_radii();

            ForceProvider provider;
            std::unique_ptr<Model> model;
            if (rx_use_oracle) {
                LennardJonesOracle::Config oc;
                if (!rx_oracle_config.empty())
                    oc = oracle_config_from_json(load_json_file(rx_oracle_config));
                provider = LennardJonesOracle(oc).provider();
            } else {
                if (rx_checkpoint.empty())
                    throw UsageError("relax: need --checkpoint or --oracle");
                model = std::make_unique<Model>(load_checkpoint(rx_checkpoint).model);
                provider = [&m = *model, &radii](const AtomicStructure& s) {
                    return ForceEval{m.predict(s, radii), std::nullopt};
                };
            }

            const auto trajectories = relax_dataset(structures, provider, rx_config);
            std::filesystem::create_directories(rx_out);
            std::vector<AtomicStructure> terminals;
            int converged = 0;
            for (std::size_t i = 0; i < trajectories.size(); ++i) {
                char name[64];
                std::snprintf(name, sizeof name, "traj_%04zu", i);
                write_trajectory(trajectories[i], rx_out + "/" + name);
                terminals.push_back(trajectories[i].final_structure());
                converged += trajectories[i].converged();
            }
            write_structures(terminals, rx_out + "/relaxed.xyz");
            std::printf("relaxed %zu structures, %d converged (fmax %.3g, max %d steps)\n",
                        trajectories.size(), converged, rx_config.fmax, rx_config.max_steps);
            return 0;
        }

        if (ra->parsed()) {
            LoadedCheckpoint loaded = load_checkpoint(ra_checkpoint);
            const Dataset data = load_dataset(ra_data);
            if (data.val_id.empty()) throw DataError("rotation-audit: empty val_id split");
            const std::size_t n =
                std::min<std::size_t>(data.val_id.size(), static_cast<std::size_t>(ra_structures));
            const double instability = rotation_instability(
                loaded.model, {data.val_id.data(), n}, ra_rotations, ra_seed, default_radii());
            std::printf("rotation instability over %zu structures x %d rotations: %.6f eV/A\n", n,
                        ra_rotations, instability);
            return 0;
        }

        if (gc->parsed()) {
            ModelConfig config;
            config.hidden_dim = 16;
            config.num_layers = 2;
            config.basis.J = 12;
            if (!gc_config.empty()) config = model_config_from_file(gc_config);
            return run_gradcheck(config, gc_seed, gc_tol);
        }
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
