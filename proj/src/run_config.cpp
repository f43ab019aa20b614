#include "fkmc/run_config.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "fkmc/errors.hpp"

namespace fkmc {

using nlohmann::json;

json default_config_json() {
    json j;
    j["schema_version"] = 1;
    j["model"] = {
        {"kind", "nelson"},      // nelson | polaron
        {"d", 3},                // spatial dimension, 2 or 3
        {"g", 1.0},              // coupling
        {"lambda", 1.0},         // infrared cutoff
        {"epsilon", 1.0},        // ultraviolet regularization (0 = removed)
        {"total_momentum", json::array({0.0, 0.0, 0.0})},
    };
    j["grid"] = {
        {"horizon", 1.0},  // T: paths on [-T, T] (nelson) or [0, T] (polaron)
        {"n_half", 64},    // steps per unit half-interval; dt = T / n_half
    };
    j["mc"] = {
        {"n_paths", 10000},
        {"master_seed", 1},
        {"log_weight_cap", 700.0},
        {"r_min", -1.0},              // polaron eps=0 collision floor; < 0 = 1e-6 sqrt(T)
        {"mode", "renormalized"},     // direct | renormalized (nelson weight)
        {"tau", 0.0},                 // renormalized window; <= 0 = 2T
        {"n_workers", 1},
    };
    j["quadrature"] = {
        {"abs_tol", 1e-11},
        {"rel_tol", 1e-9},
        {"panel_order", 24},
        {"table",
         {
             {"n_r", 256},
             {"n_t", 256},
             {"requested_error_bound", 1e-4},
             {"n_validation_probes", 1000},
             {"validation_seed", 0x7ab1e5eedull},
             {"r_min", 0.0},  // 0 = derive the hull from the grid
             {"r_max", 0.0},
             {"t_min", 0.0},
             {"t_max", 0.0},
         }},
    };
    j["sweep"] = {
        {"parameter", "none"},  // none|epsilon|lambda|g|horizon|dt|momentum
        {"values", json::array()},
        {"common_random_numbers", true},
    };
    j["output"] = {
        {"directory", "."},
        {"formats", json::array({"json", "csv"})},
    };
    return j;
}

namespace {

const char* type_label(const json& v) {
    if (v.is_object()) return "object";
    if (v.is_array()) return "array";
    if (v.is_string()) return "string";
    if (v.is_boolean()) return "boolean";
    if (v.is_number()) return "number";
    return "null";
}

void merge_into(json& base, const json& user, const std::string& path) {
    if (!user.is_object())
        throw ConfigError("config section '" + (path.empty() ? "<root>" : path) +
                          "' must be an object");
    for (const auto& [key, value] : user.items()) {
        const std::string full = path.empty() ? key : path + "." + key;
        if (!base.contains(key)) throw ConfigError("unknown config key: " + full);
        json& slot = base[key];
        if (slot.is_object()) {
            merge_into(slot, value, full);
            continue;
        }
        const bool both_numbers = slot.is_number() && value.is_number();
        if (!both_numbers && std::strcmp(type_label(slot), type_label(value)) != 0)
            throw ConfigError("config key " + full + " expects " + type_label(slot) + ", got " +
                              type_label(value));
        slot = value;
    }
}

double get_finite(const json& j, const char* key, const std::string& path) {
    const double v = j.at(key).get<double>();
    if (!std::isfinite(v)) throw ConfigError("config key " + path + " must be finite");
    return v;
}

}  // namespace

json merge_config(const json& user) {
    json resolved = default_config_json();
    merge_into(resolved, user, "");
    return resolved;
}

RunConfig interpret_config(const json& resolved) {
    RunConfig cfg;
    cfg.resolved = resolved;

    const int version = resolved.at("schema_version").get<int>();
    if (version != 1)
        throw ConfigError("unsupported schema_version " + std::to_string(version) +
                          " (this build reads version 1)");

    const json& model = resolved.at("model");
    const std::string kind = model.at("kind").get<std::string>();
    if (kind == "nelson")
        cfg.params.model = Model::nelson;
    else if (kind == "polaron")
        cfg.params.model = Model::polaron;
    else
        throw ConfigError("model.kind must be \"nelson\" or \"polaron\", got \"" + kind + "\"");
    cfg.params.d = model.at("d").get<int>();
    cfg.params.g = get_finite(model, "g", "model.g");
    cfg.params.lambda = get_finite(model, "lambda", "model.lambda");
    cfg.params.epsilon = get_finite(model, "epsilon", "model.epsilon");
    const json& mom = model.at("total_momentum");
    if (!mom.is_array() || mom.empty())
        throw ConfigError("model.total_momentum must be a non-empty array");
    cfg.params.total_momentum = Eigen::VectorXd(mom.size());
    for (size_t i = 0; i < mom.size(); ++i)
        cfg.params.total_momentum[static_cast<Eigen::Index>(i)] = mom[i].get<double>();

    const json& grid = resolved.at("grid");
    cfg.grid.horizon = get_finite(grid, "horizon", "grid.horizon");
    cfg.grid.n_half = grid.at("n_half").get<int>();
    cfg.grid.two_sided = cfg.params.model == Model::nelson;
    cfg.params.horizon = cfg.grid.horizon;

    const json& mc = resolved.at("mc");
    cfg.n_paths = mc.at("n_paths").get<int64_t>();
    if (cfg.n_paths < 2) throw ConfigError("mc.n_paths must be >= 2");
    cfg.master_seed = mc.at("master_seed").get<uint64_t>();
    cfg.opts.log_weight_cap = get_finite(mc, "log_weight_cap", "mc.log_weight_cap");
    cfg.opts.collision_floor = mc.at("r_min").get<double>();
    const std::string mode = mc.at("mode").get<std::string>();
    if (mode == "direct")
        cfg.opts.mode = ActionMode::direct;
    else if (mode == "renormalized")
        cfg.opts.mode = ActionMode::renormalized;
    else
        throw ConfigError("mc.mode must be \"direct\" or \"renormalized\", got \"" + mode + "\"");
    cfg.opts.tau = get_finite(mc, "tau", "mc.tau");
    cfg.opts.n_workers = mc.at("n_workers").get<int>();
    if (cfg.opts.n_workers < 1) throw ConfigError("mc.n_workers must be >= 1");

    const json& quad = resolved.at("quadrature");
    cfg.quad.abs_tol = get_finite(quad, "abs_tol", "quadrature.abs_tol");
    cfg.quad.rel_tol = get_finite(quad, "rel_tol", "quadrature.rel_tol");
    cfg.quad.panel_order = quad.at("panel_order").get<int>();
    if (cfg.quad.panel_order < 2) throw ConfigError("quadrature.panel_order must be >= 2");
    const json& table = quad.at("table");
    cfg.table.n_r = table.at("n_r").get<int>();
    cfg.table.n_t = table.at("n_t").get<int>();
    if (cfg.table.n_r < 8 || cfg.table.n_t < 8)
        throw ConfigError("quadrature.table.n_r and n_t must be >= 8");
    cfg.table.requested_error_bound =
        get_finite(table, "requested_error_bound", "quadrature.table.requested_error_bound");
    cfg.table.n_validation_probes = table.at("n_validation_probes").get<int>();
    cfg.table.validation_seed = table.at("validation_seed").get<uint64_t>();
    cfg.table.r_min = table.at("r_min").get<double>();
    cfg.table.r_max = table.at("r_max").get<double>();
    cfg.table.t_min = table.at("t_min").get<double>();
    cfg.table.t_max = table.at("t_max").get<double>();

    const json& sweep = resolved.at("sweep");
    cfg.sweep_parameter = sweep.at("parameter").get<std::string>();
    const bool momentum_sweep = cfg.sweep_parameter == "momentum";
    if (cfg.sweep_parameter != "none" && cfg.sweep_parameter != "epsilon" &&
        cfg.sweep_parameter != "lambda" && cfg.sweep_parameter != "g" &&
        cfg.sweep_parameter != "horizon" && cfg.sweep_parameter != "dt" && !momentum_sweep)
        throw ConfigError("sweep.parameter must be one of none, epsilon, lambda, g, horizon, "
                          "dt, momentum; got \"" +
                          cfg.sweep_parameter + "\"");
    for (const json& v : sweep.at("values")) {
        if (momentum_sweep) {
            if (!v.is_array())
                throw ConfigError("sweep.values entries must be momentum arrays when "
                                  "sweep.parameter is momentum");
            Eigen::VectorXd P(v.size());
            for (size_t i = 0; i < v.size(); ++i)
                P[static_cast<Eigen::Index>(i)] = v[i].get<double>();
            if (!P.allFinite()) throw ConfigError("sweep.values momenta must be finite");
            cfg.sweep_momenta.push_back(std::move(P));
        } else {
            const double x = v.get<double>();
            if (!std::isfinite(x)) throw ConfigError("sweep.values must be finite");
            const bool needs_positive =
                cfg.sweep_parameter == "horizon" || cfg.sweep_parameter == "dt";
            const bool needs_nonneg = cfg.sweep_parameter == "epsilon" ||
                                      cfg.sweep_parameter == "lambda" ||
                                      cfg.sweep_parameter == "g";
            if (needs_positive && !(x > 0.0))
                throw ConfigError("sweep.values for " + cfg.sweep_parameter +
                                  " must be positive");
            if (needs_nonneg && x < 0.0)
                throw ConfigError("sweep.values for " + cfg.sweep_parameter +
                                  " must be >= 0");
            cfg.sweep_values.push_back(x);
        }
    }
    if (cfg.sweep_parameter != "none" && cfg.sweep_values.empty() && cfg.sweep_momenta.empty())
        throw ConfigError("sweep.parameter is set but sweep.values is empty");
    cfg.common_random_numbers = sweep.at("common_random_numbers").get<bool>();

    const json& output = resolved.at("output");
    cfg.out_dir = output.at("directory").get<std::string>();
    cfg.write_json = false;
    cfg.write_csv = false;
    for (const json& f : output.at("formats")) {
        const std::string fmt = f.get<std::string>();
        if (fmt == "json")
            cfg.write_json = true;
        else if (fmt == "csv")
            cfg.write_csv = true;
        else
            throw ConfigError("output.formats entries must be \"json\" or \"csv\", got \"" +
                              fmt + "\"");
    }

    // The all-zero default momentum adapts to d; anything else must match.
    if (cfg.params.total_momentum.size() != cfg.params.d &&
        cfg.params.total_momentum.isZero(0.0))
        cfg.params.total_momentum = Eigen::VectorXd::Zero(cfg.params.d);
    if (cfg.params.total_momentum.size() != cfg.params.d)
        throw ConfigError("model.total_momentum must have d components");

    // Physical validation last, so messages carry the config vocabulary.
    try {
        cfg.params.validate();
        cfg.grid.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const json& user) { return interpret_config(merge_config(user)); }

namespace {

void append_escaped(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

void write_value(std::string& out, const json& v, int indent, int depth) {
    const std::string pad(static_cast<size_t>(indent) * (depth + 1), ' ');
    const std::string close_pad(static_cast<size_t>(indent) * depth, ' ');
    switch (v.type()) {
        case json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            size_t i = 0;
            for (const auto& [key, value] : v.items()) {
                out += pad;
                append_escaped(out, key);
                out += ": ";
                write_value(out, value, indent, depth + 1);
                if (++i < v.size()) out += ',';
                out += '\n';
            }
            out += close_pad + "}";
            return;
        }
        case json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += '[';
            for (size_t i = 0; i < v.size(); ++i) {
                if (i) out += ", ";
                write_value(out, v[i], indent, depth);
            }
            out += ']';
            return;
        }
        case json::value_t::string:
            append_escaped(out, v.get<std::string>());
            return;
        case json::value_t::boolean:
            out += v.get<bool>() ? "true" : "false";
            return;
        case json::value_t::number_integer: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%lld",
                          static_cast<long long>(v.get<int64_t>()));
            out += buf;
            return;
        }
        case json::value_t::number_unsigned: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%llu",
                          static_cast<unsigned long long>(v.get<uint64_t>()));
            out += buf;
            return;
        }
        case json::value_t::number_float: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
            out += buf;
            return;
        }
        default:
            out += "null";
            return;
    }
}

}  // namespace

std::string write_json(const json& value, int indent) {
    std::string out;
    write_value(out, value, indent, 0);
    out += '\n';
    return out;
}

std::vector<SweepPoint> expand_sweep(const RunConfig& base) {
    std::vector<SweepPoint> points;
    if (base.sweep_parameter == "none" || base.sweep_parameter == "momentum") {
        SweepPoint p;
        p.label = base.params.model == Model::nelson ? "nelson" : "polaron";
        p.config = base;
        points.push_back(std::move(p));
        return points;
    }
    for (size_t i = 0; i < base.sweep_values.size(); ++i) {
        const double v = base.sweep_values[i];
        SweepPoint p;
        p.value = v;
        p.config = base;
        if (base.sweep_parameter == "epsilon") {
            p.config.params.epsilon = v;
        } else if (base.sweep_parameter == "lambda") {
            p.config.params.lambda = v;
        } else if (base.sweep_parameter == "g") {
            p.config.params.g = v;
        } else if (base.sweep_parameter == "horizon") {
            p.config.params.horizon = v;
            p.config.grid.horizon = v;
        } else {  // dt: snap to horizon / n_half
            const double n_half = std::llround(base.grid.horizon / v);
            if (n_half < 1)
                throw ConfigError("sweep dt value " + std::to_string(v) +
                                  " exceeds the horizon");
            p.config.grid.n_half = static_cast<int>(n_half);
        }
        if (!base.common_random_numbers) p.config.master_seed = base.master_seed + i;
        char label[64];
        std::snprintf(label, sizeof label, "%s=%.6g", base.sweep_parameter.c_str(), v);
        p.label = label;
        points.push_back(std::move(p));
    }
    return points;
}

}  // namespace fkmc
