#include "fnet/config_json.hpp"

#include <fstream>
#include <set>

#include "fnet/elements.hpp"
#include "fnet/errors.hpp"

namespace fnet {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const char* what) {
    if (!j.is_object()) throw DataError(std::string(what) + ": expected a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw DataError(std::string(what) + ": unknown key '" + key + "'");
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json to_json(const BasisConfig& c) {
    return {{"kind", to_string(c.kind)},
            {"J", c.J},
            {"L", c.L},
            {"S", c.S},
            {"linact_dim", c.linact_dim}};
}

BasisConfig basis_config_from_json(const json& j) {
    check_keys(j, {"kind", "J", "L", "S", "linact_dim"}, "basis config");
    BasisConfig c;
    if (j.contains("kind")) c.kind = basis_kind_from_string(j.at("kind").get<std::string>());
    get_if(j, "J", c.J);
    get_if(j, "L", c.L);
    get_if(j, "S", c.S);
    get_if(j, "linact_dim", c.linact_dim);
    c.validate();
    return c;
}

json to_json(const ModelConfig& c) {
    return {{"hidden_dim", c.hidden_dim},
            {"num_layers", c.num_layers},
            {"basis", to_json(c.basis)},
            {"activation", to_string(c.activation)},
            {"cutoff", c.cutoff},
            {"variant", to_string(c.variant)},
            {"ablation", to_string(c.ablation)}};
}

ModelConfig model_config_from_json(const json& j) {
    check_keys(j,
               {"hidden_dim", "num_layers", "basis", "activation", "cutoff", "variant",
                "ablation"},
               "model config");
    ModelConfig c;
    get_if(j, "hidden_dim", c.hidden_dim);
    get_if(j, "num_layers", c.num_layers);
    if (j.contains("basis")) c.basis = basis_config_from_json(j.at("basis"));
    if (j.contains("activation"))
        c.activation = activation_from_string(j.at("activation").get<std::string>());
    get_if(j, "cutoff", c.cutoff);
    if (j.contains("variant")) c.variant = variant_from_string(j.at("variant").get<std::string>());
    if (j.contains("ablation"))
        c.ablation = ablation_from_string(j.at("ablation").get<std::string>());
    c.validate();
    return c;
}

json to_json(const TrainConfig& c) {
    return {{"lr0", c.lr0},
            {"total_iters", c.total_iters},
            {"warm_iters", c.warm_iters},
            {"halve_every", c.halve_every},
            {"batch_size", c.batch_size},
            {"fixed_atom_weight", c.fixed_atom_weight},
            {"rotation_augment", c.rotation_augment},
            {"seed", c.seed},
            {"val_every", c.val_every},
            {"max_val_structures", c.max_val_structures}};
}

TrainConfig train_config_from_json(const json& j) {
    check_keys(j,
               {"lr0", "total_iters", "warm_iters", "halve_every", "batch_size",
                "fixed_atom_weight", "rotation_augment", "seed", "val_every",
                "max_val_structures"},
               "train config");
    TrainConfig c;
    get_if(j, "lr0", c.lr0);
    get_if(j, "total_iters", c.total_iters);
    get_if(j, "warm_iters", c.warm_iters);
    get_if(j, "halve_every", c.halve_every);
    get_if(j, "batch_size", c.batch_size);
    get_if(j, "fixed_atom_weight", c.fixed_atom_weight);
    get_if(j, "rotation_augment", c.rotation_augment);
    get_if(j, "seed", c.seed);
    get_if(j, "val_every", c.val_every);
    get_if(j, "max_val_structures", c.max_val_structures);
    return c;
}

json to_json(const RelaxConfig& c) {
    return {{"fmax", c.fmax},
            {"max_steps", c.max_steps},
            {"history_size", c.history_size},
            {"maxstep", c.maxstep}};
}

RelaxConfig relax_config_from_json(const json& j) {
    check_keys(j, {"fmax", "max_steps", "history_size", "maxstep"}, "relax config");
    RelaxConfig c;
    get_if(j, "fmax", c.fmax);
    get_if(j, "max_steps", c.max_steps);
    get_if(j, "history_size", c.history_size);
    get_if(j, "maxstep", c.maxstep);
    c.validate();
    return c;
}

json to_json(const LennardJonesOracle::Config& c) {
    json eps = json::object();
    for (const auto& [z, e] : c.epsilon_by_z) eps[element_symbol(z)] = e;
    return {{"cutoff", c.cutoff}, {"default_epsilon", c.default_epsilon}, {"epsilon", eps}};
}

LennardJonesOracle::Config oracle_config_from_json(const json& j) {
    check_keys(j, {"cutoff", "default_epsilon", "epsilon"}, "oracle config");
    LennardJonesOracle::Config c;
    get_if(j, "cutoff", c.cutoff);
    get_if(j, "default_epsilon", c.default_epsilon);
    if (j.contains("epsilon")) {
        for (const auto& [symbol, value] : j.at("epsilon").items()) {
            const int z = element_from_symbol(symbol);
            if (z == 0) throw DataError("oracle config: unknown element '" + symbol + "'");
            c.epsilon_by_z[z] = value.get<double>();
        }
    }
    return c;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& ex) {
        throw DataError("invalid JSON in " + path + ": " + ex.what());
    }
}

}  // namespace fnet
