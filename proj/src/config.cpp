#include "sphparvi/config.hpp"

#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace sphparvi {

using nlohmann::json;

namespace {

// Reads the fields of one JSON object and remembers which keys were used,
// so whatever is left over can be reported as unknown.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(name_or_root() + " must be a JSON object");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    const json* find(const std::string& key) {
        seen_.insert(key);
        if (!has(key)) return nullptr;
        return &j_.at(key);
    }

    const json& require(const std::string& key) {
        const json* v = find(key);
        if (!v) throw ConfigError("missing required key '" + key_path(key) + "'");
        return *v;
    }

    double number(const std::string& key, double fallback) {
        const json* v = find(key);
        return v ? as_number(*v, key) : fallback;
    }

    double as_number(const json& v, const std::string& key) const {
        if (!v.is_number()) throw ConfigError(key_path(key) + " must be a number");
        return v.get<double>();
    }

    long long integer(const std::string& key, long long fallback) {
        const json* v = find(key);
        return v ? as_integer(*v, key) : fallback;
    }

    long long as_integer(const json& v, const std::string& key) const {
        if (!v.is_number_integer()) throw ConfigError(key_path(key) + " must be an integer");
        return v.get<long long>();
    }

    bool boolean(const std::string& key, bool fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw ConfigError(key_path(key) + " must be true or false");
        return v->get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_string()) throw ConfigError(key_path(key) + " must be a string");
        return v->get<std::string>();
    }

    Vec vector(const std::string& key, const Vec& fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_array()) throw ConfigError(key_path(key) + " must be an array of numbers");
        Vec out;
        for (const auto& x : *v) {
            if (!x.is_number()) throw ConfigError(key_path(key) + " must be an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    Fields object(const std::string& key) { return Fields(require(key), key_path(key)); }

    std::optional<Fields> maybe_object(const std::string& key) {
        const json* v = find(key);
        if (!v) return std::nullopt;
        return Fields(*v, key_path(key));
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key())) throw ConfigError("unknown key '" + key_path(item.key()) + "'");
    }

private:
    std::string name_or_root() const { return path_.empty() ? "config" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

// Enum parsers report their own key; this re-tags the message with the
// full path when the value sits somewhere else in the tree.
template <typename Parse>
auto parse_enum(Fields& f, const std::string& key, const std::string& fallback, Parse parse) {
    const std::string s = f.string(key, fallback);
    try {
        return parse(s);
    } catch (const ConfigError&) {
        throw ConfigError(f.key_path(key) + ": unknown value '" + s + "'");
    }
}

GaussianComponent read_component(Fields f, bool with_weight) {
    GaussianComponent c;
    if (with_weight) c.weight = f.number("weight", 1.0);
    if (!f.has("mean")) throw ConfigError("missing required key '" + f.key_path("mean") + "'");
    if (!f.has("var")) throw ConfigError("missing required key '" + f.key_path("var") + "'");
    c.mean = f.vector("mean", {});
    c.var = f.vector("var", {});
    f.finish();
    return c;
}

TargetSpec read_target(Fields f) {
    TargetSpec t;
    const std::string type = f.string("type", "gaussian");
    if (type == "gaussian") {
        t.type = TargetSpec::Type::Gaussian;
        GaussianComponent c;
        if (!f.has("mean")) throw ConfigError("missing required key 'target.mean'");
        if (!f.has("var")) throw ConfigError("missing required key 'target.var'");
        c.mean = f.vector("mean", {});
        c.var = f.vector("var", {});
        t.components = {c};
    } else if (type == "mixture") {
        t.type = TargetSpec::Type::Mixture;
        const json& comps = f.require("components");
        if (!comps.is_array() || comps.empty())
            throw ConfigError("target.components must be a non-empty array");
        for (std::size_t k = 0; k < comps.size(); ++k)
            t.components.push_back(read_component(Fields(comps[k], "target.components[" + std::to_string(k) + "]"), true));
    } else {
        throw ConfigError("target.type: unknown value '" + type + "' (expected gaussian or mixture)");
    }
    f.finish();
    for (const auto& c : t.components)
        if (c.mean.size() != c.var.size()) throw ConfigError("target: mean and var lengths differ");
    return t;
}

FluidParams read_fluid(Fields f) {
    FluidParams p;
    p.c0 = f.number("c0", p.c0);
    p.rho0 = f.number("rho0", p.rho0);
    p.gamma = f.number("gamma", p.gamma);
    p.viscosity_mode = parse_enum(f, "viscosity_mode", to_string(p.viscosity_mode), parse_viscosity_mode);
    p.mu = f.number("mu", p.mu);
    p.visc_alpha = f.number("visc_alpha", p.visc_alpha);
    p.a_d = f.number("a_d", p.a_d);
    p.alpha_scale = f.number("alpha_scale", p.alpha_scale);
    p.eps_p = f.number("eps_p", p.eps_p);
    p.eps_sing = f.number("eps_sing", p.eps_sing);
    p.gravity = f.vector("gravity", p.gravity);
    p.regularization = f.boolean("regularization", p.regularization);
    p.rho_min = f.number("rho_min", 1e-6 * p.rho0);
    p.internal_pressure_weight = f.number("internal_pressure_weight", p.internal_pressure_weight);
    p.external_pressure = parse_enum(f, "external_pressure", to_string(p.external_pressure), parse_external_pressure);
    p.external_force = parse_enum(f, "external_force", to_string(p.external_force), parse_external_force);
    p.log_shift = f.number("log_shift", p.log_shift);
    p.density_mode = parse_enum(f, "density_mode", to_string(p.density_mode), parse_density_mode);
    if (f.has("viscosity_kernel")) p.viscosity_kernel = parse_enum(f, "viscosity_kernel", "", parse_kernel_kind);
    f.find("viscosity_kernel");
    f.finish();
    return p;
}

HSchedule read_schedule(Fields f) {
    HSchedule s;
    const std::string type = f.string("type", "constant");
    if (type == "constant")
        s.type = HSchedule::Type::Constant;
    else if (type == "linear")
        s.type = HSchedule::Type::Linear;
    else if (type == "reciprocal")
        s.type = HSchedule::Type::Reciprocal;
    else
        throw ConfigError("h_schedule.type: unknown value '" + type + "' (expected constant, linear or reciprocal)");
    s.h_start = f.number("h_start", s.h_start);
    s.h_end = f.number("h_end", s.h_start);
    f.finish();
    return s;
}

Proposal read_proposal(Fields f, int d) {
    Proposal p;
    const std::string type = f.string("type", "gaussian");
    const std::size_t ud = static_cast<std::size_t>(std::max(d, 0));
    if (type == "gaussian") {
        p.type = Proposal::Type::Gaussian;
        p.mean = f.vector("mean", Vec(ud, 0.0));
        p.sd = f.vector("sd", Vec(ud, 1.0));
    } else if (type == "uniform") {
        p.type = Proposal::Type::Uniform;
        if (!f.has("low")) throw ConfigError("missing required key 'init.low'");
        if (!f.has("high")) throw ConfigError("missing required key 'init.high'");
        p.low = f.vector("low", {});
        p.high = f.vector("high", {});
    } else {
        throw ConfigError("init.type: unknown value '" + type + "' (expected gaussian or uniform)");
    }
    f.finish();
    return p;
}

json component_json(const GaussianComponent& c) { return {{"weight", c.weight}, {"mean", c.mean}, {"var", c.var}}; }

std::string schedule_name(HSchedule::Type t) {
    switch (t) {
    case HSchedule::Type::Constant: return "constant";
    case HSchedule::Type::Linear: return "linear";
    case HSchedule::Type::Reciprocal: return "reciprocal";
    }
    return "";
}

}  // namespace

RunConfig config_from_json(const json& j) {
    Fields f(j, "");
    RunConfig cfg;
    f.require("mode");
    cfg.mode = parse_enum(f, "mode", "", parse_sampling_mode);
    cfg.target = read_target(f.object("target"));
    cfg.M = static_cast<int>(f.as_integer(f.require("M"), "M"));
    cfg.T = static_cast<int>(f.as_integer(f.require("T"), "T"));
    cfg.d = static_cast<int>(f.integer("d", cfg.target.dim()));

    if (const json* dt = f.find("dt")) {
        if (dt->is_string()) {
            if (dt->get<std::string>() != "auto") throw ConfigError("dt must be a positive number or \"auto\"");
        } else {
            cfg.dt = f.as_number(*dt, "dt");
        }
    }
    cfg.integrator = parse_enum(f, "integrator", to_string(cfg.integrator), parse_integrator);
    cfg.kernel = parse_enum(f, "kernel", to_string(cfg.kernel), parse_kernel_kind);
    if (auto s = f.maybe_object("h_schedule")) cfg.h_schedule = read_schedule(*s);
    if (auto s = f.maybe_object("init")) {
        cfg.init = read_proposal(*s, cfg.d);
    } else {
        cfg.init.mean = Vec(static_cast<std::size_t>(std::max(cfg.d, 0)), 0.0);
        cfg.init.sd = Vec(static_cast<std::size_t>(std::max(cfg.d, 0)), 1.0);
    }

    if (const json* s = f.find("seed")) {
        if (!s->is_number_integer() || (!s->is_number_unsigned() && s->get<long long>() < 0))
            throw ConfigError("seed must be a non-negative integer");
        cfg.seed = s->get<std::uint64_t>();
    }
    cfg.snapshot_stride = static_cast<int>(f.integer("snapshot_stride", cfg.snapshot_stride));
    if (const json* m = f.find("mass")) cfg.mass = f.as_number(*m, "mass");
    if (auto s = f.maybe_object("fluid")) cfg.fluid = read_fluid(*s);
    if (auto s = f.maybe_object("diagnostics")) {
        cfg.hist_bins = static_cast<int>(s->integer("bins", cfg.hist_bins));
        cfg.kde_points = static_cast<int>(s->integer("kde_points", cfg.kde_points));
        s->finish();
    }
    f.finish();
    cfg.validate();
    return cfg;
}

json config_to_json(const RunConfig& cfg) {
    json target;
    if (cfg.target.type == TargetSpec::Type::Gaussian && cfg.target.components.size() == 1) {
        target = {{"type", "gaussian"}, {"mean", cfg.target.components[0].mean}, {"var", cfg.target.components[0].var}};
    } else {
        json comps = json::array();
        for (const auto& c : cfg.target.components) comps.push_back(component_json(c));
        target = {{"type", "mixture"}, {"components", comps}};
    }

    json init;
    if (cfg.init.type == Proposal::Type::Gaussian)
        init = {{"type", "gaussian"}, {"mean", cfg.init.mean}, {"sd", cfg.init.sd}};
    else
        init = {{"type", "uniform"}, {"low", cfg.init.low}, {"high", cfg.init.high}};

    const FluidParams& p = cfg.fluid;
    json fluid = {
        {"c0", p.c0},
        {"rho0", p.rho0},
        {"gamma", p.gamma},
        {"viscosity_mode", to_string(p.viscosity_mode)},
        {"mu", p.mu},
        {"visc_alpha", p.visc_alpha},
        {"a_d", p.a_d},
        {"alpha_scale", p.alpha_scale},
        {"eps_p", p.eps_p},
        {"eps_sing", p.eps_sing},
        {"gravity", p.gravity},
        {"regularization", p.regularization},
        {"rho_min", p.rho_min},
        {"internal_pressure_weight", p.internal_pressure_weight},
        {"external_pressure", to_string(p.external_pressure)},
        {"external_force", to_string(p.external_force)},
        {"log_shift", p.log_shift},
        {"density_mode", to_string(p.density_mode)},
        {"viscosity_kernel", p.viscosity_kernel ? json(to_string(*p.viscosity_kernel)) : json(nullptr)},
    };

    return {
        {"mode", to_string(cfg.mode)},
        {"M", cfg.M},
        {"d", cfg.d},
        {"T", cfg.T},
        {"dt", cfg.dt ? json(*cfg.dt) : json("auto")},
        {"integrator", to_string(cfg.integrator)},
        {"kernel", to_string(cfg.kernel)},
        {"h_schedule",
         {{"type", schedule_name(cfg.h_schedule.type)},
          {"h_start", cfg.h_schedule.h_start},
          {"h_end", cfg.h_schedule.h_end}}},
        {"init", init},
        {"seed", cfg.seed},
        {"snapshot_stride", cfg.snapshot_stride},
        {"mass", cfg.mass ? json(*cfg.mass) : json(nullptr)},
        {"fluid", fluid},
        {"target", target},
        {"diagnostics", {{"bins", cfg.hist_bins}, {"kde_points", cfg.kde_points}}},
    };
}

void apply_overrides(json& j, const std::vector<std::string>& overrides) {
    for (const std::string& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not of the form key=value");
        const std::string path = o.substr(0, eq);
        const std::string text = o.substr(eq + 1);

        json value = json::parse(text, nullptr, false);
        if (value.is_discarded()) value = text;

        json* node = &j;
        std::stringstream keys(path);
        std::string key;
        std::vector<std::string> parts;
        while (std::getline(keys, key, '.')) {
            if (key.empty()) throw ConfigError("override '" + o + "' has an empty key segment");
            parts.push_back(key);
        }
        for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
            if (!node->is_object()) throw ConfigError("override '" + path + "': '" + parts[k] + "' is not an object");
            node = &(*node)[parts[k]];
            if (node->is_null()) *node = json::object();
        }
        if (!node->is_object()) throw ConfigError("override '" + path + "': parent is not an object");
        (*node)[parts.back()] = value;
    }
}

RunConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file '" + path.string() + "' is not valid JSON");
    apply_overrides(j, overrides);
    return config_from_json(j);
}

}  // namespace sphparvi
