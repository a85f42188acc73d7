#pragma once
// Run configuration: strict JSON schema, command-line overrides, and dispatch
// of the configured experiment.
//
// Every frequency in a config is ordinary Hz. Integrator dt / t_final are
// dimensionless, in units of 1 / rate_scale chosen by the experiment (recorded
// in the report).

#include "chiralspin/experiments.hpp"

#include <fstream>
#include <sstream>

namespace chiralspin {

inline constexpr int config_schema_version = 1;

struct MaterialConfig {
    std::string name = "alpha-SiO2";
    std::optional<materials::MaterialParams> params; ///< inline parameters replace the built-in table

    materials::MaterialParams resolve() const { return params ? *params : materials::lookup_material(name); }
};

struct SpinConfig {
    std::string kind = "electron";
    double s = 0.5;
    double delta_hz = 1e4; ///< spin frequency above the (+k_z,+L) mode
    std::vector<double> positions_m{0.0, 1e-6};
};

struct ModeConfig {
    std::string coupling = "rotating"; ///< or "counter_rotating"
    int momentum_sign = 1;
    double detuning_hz = 0.0;
    double g_hz = 0.0;
    int cutoff = 1;
};

struct CascadeConfig {
    double gamma_hz = 0.0;
    double gamma_prime_hz = 0.0;
    double kd_rad = 0.0;
};

struct OutputConfig {
    std::string directory = "out";
    std::vector<std::string> formats{"json", "csv"};

    bool wants(std::string_view f) const { return std::find(formats.begin(), formats.end(), f) != formats.end(); }
};

struct RunConfig {
    int schema_version = config_schema_version;
    std::optional<MaterialConfig> material;
    std::optional<materials::ResonatorGeometry> geometry;
    std::optional<SpinConfig> spin;
    bool modes_auto = false;
    std::optional<std::vector<ModeConfig>> modes;
    std::optional<CascadeConfig> cascade;
    IntegratorOverrides integrator;
    std::string experiment;
    json params = json::object();
    OutputConfig output;
};

namespace detail {

inline void check_keys(const json& obj, const std::string& where, const std::vector<std::string_view>& allowed) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : obj.items())
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw ConfigError("unknown key '" + k + "' in " + where);
}

inline double number(const json& obj, const std::string& key, const std::string& where) {
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
    return v.get<double>();
}

inline double number_or(const json& obj, const std::string& key, const std::string& where, double fallback) {
    return obj.contains(key) ? number(obj, key, where) : fallback;
}

inline long long integer(const json& obj, const std::string& key, const std::string& where) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
    return v.get<long long>();
}

inline std::string string(const json& obj, const std::string& key, const std::string& where) {
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
    return v.get<std::string>();
}

inline std::vector<double> numbers(const json& obj, const std::string& key, const std::string& where) {
    const auto& v = obj.at(key);
    if (!v.is_array()) throw ConfigError(where + "." + key + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(where + "." + key + " must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

inline void require(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing required key '" + key + "' in " + where);
}

struct ExperimentSchema {
    std::string_view name;
    std::vector<std::string_view> params;
};

inline const std::vector<ExperimentSchema>& experiment_schemas() {
    static const std::vector<ExperimentSchema> s{
        {"elimination_validation", {"g_hz", "delta_over_g", "cutoff"}},
        {"transfer_asymmetry", {"t_final_rate"}},
        {"reciprocity_sweep", {"ratios", "t_final_rate"}},
        {"cascade_chain", {"n", "t_final_rate"}},
        {"decoherence_budget", {"gamma0_hz", "drive_u"}},
        {"coupling_budget", {"mode_index", "drive_u", "g_prime_hz"}},
        {"simulate", {"model", "n", "initial", "observables"}},
    };
    return s;
}

/// Type checks for experiment parameters; value ranges are left to the experiments.
inline void check_params(const std::string& name, const json& p) {
    const auto& schemas = experiment_schemas();
    const auto it = std::find_if(schemas.begin(), schemas.end(), [&](const auto& s) { return s.name == name; });
    if (it == schemas.end()) throw ConfigError("unknown experiment '" + name + "'");
    const std::string where = "experiment.params";
    check_keys(p, where, it->params);
    for (const auto& [k, v] : p.items()) {
        if (k == "delta_over_g" || k == "ratios" || k == "initial") {
            numbers(p, k, where);
        } else if (k == "drive_u") {
            if (!v.is_number()) numbers(p, k, where);
        } else if (k == "cutoff" || k == "n" || k == "mode_index") {
            integer(p, k, where);
        } else if (k == "model") {
            string(p, k, where);
        } else if (k == "observables") {
            if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_string(); }))
                throw ConfigError(where + ".observables must be an array of strings");
        } else {
            number(p, k, where);
        }
    }
}

} // namespace detail

inline RunConfig parse_config(const json& j) {
    using namespace detail;
    check_keys(j, "config",
               {"schema_version", "material", "geometry", "spin", "modes", "cascade", "integrator", "experiment",
                "output"});
    RunConfig c;
    require(j, "schema_version", "config");
    c.schema_version = static_cast<int>(integer(j, "schema_version", "config"));
    if (c.schema_version != config_schema_version)
        throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version) + " (expected " +
                          std::to_string(config_schema_version) + ")");

    if (j.contains("material")) {
        const auto& m = j["material"];
        MaterialConfig mc;
        if (m.is_string()) {
            mc.name = m.get<std::string>();
            materials::lookup_material(mc.name); // unknown names fail here
        } else {
            const std::string w = "material";
            check_keys(m, w, {"name", "density_kg_m3", "v_plus_m_s", "v_minus_m_s", "xi_S_hz", "xi_I_hz"});
            for (const char* k : {"name", "density_kg_m3", "v_plus_m_s", "v_minus_m_s", "xi_S_hz", "xi_I_hz"})
                require(m, k, w);
            mc.name = string(m, "name", w);
            mc.params = materials::MaterialParams{mc.name,
                                                  number(m, "density_kg_m3", w),
                                                  number(m, "v_plus_m_s", w),
                                                  number(m, "v_minus_m_s", w),
                                                  number(m, "xi_S_hz", w),
                                                  number(m, "xi_I_hz", w),
                                                  "inline"};
            mc.params->validate();
        }
        c.material = mc;
    }
    if (j.contains("geometry")) {
        const auto& g = j["geometry"];
        check_keys(g, "geometry", {"l_m", "w_m", "h_m"});
        for (const char* k : {"l_m", "w_m", "h_m"}) require(g, k, "geometry");
        c.geometry = materials::ResonatorGeometry{number(g, "l_m", "geometry"), number(g, "w_m", "geometry"),
                                                  number(g, "h_m", "geometry")};
        c.geometry->validate();
    }
    if (j.contains("spin")) {
        const auto& s = j["spin"];
        check_keys(s, "spin", {"kind", "s", "delta_hz", "positions_m"});
        SpinConfig sc;
        if (s.contains("kind")) sc.kind = string(s, "kind", "spin");
        materials::parse_spin_kind(sc.kind);
        sc.s = number_or(s, "s", "spin", sc.s);
        Factor::spin(sc.s);
        sc.delta_hz = number_or(s, "delta_hz", "spin", sc.delta_hz);
        if (s.contains("positions_m")) sc.positions_m = numbers(s, "positions_m", "spin");
        for (std::size_t k = 1; k < sc.positions_m.size(); ++k)
            if (!(sc.positions_m[k] > sc.positions_m[k - 1]))
                throw ConfigError("spin.positions_m must be strictly increasing");
        c.spin = sc;
    }
    if (j.contains("modes")) {
        const auto& m = j["modes"];
        if (m.is_string()) {
            if (m.get<std::string>() != "auto-from-geometry")
                throw ConfigError("modes must be a list or \"auto-from-geometry\"");
            c.modes_auto = true;
        } else if (m.is_array()) {
            std::vector<ModeConfig> list;
            for (const auto& e : m) {
                const std::string w = "modes[]";
                check_keys(e, w, {"coupling", "momentum_sign", "detuning_hz", "g_hz", "cutoff"});
                ModeConfig mc;
                if (e.contains("coupling")) mc.coupling = string(e, "coupling", w);
                if (mc.coupling != "rotating" && mc.coupling != "counter_rotating")
                    throw ConfigError("modes[].coupling must be 'rotating' or 'counter_rotating'");
                if (e.contains("momentum_sign")) mc.momentum_sign = static_cast<int>(integer(e, "momentum_sign", w));
                require(e, "detuning_hz", w);
                require(e, "g_hz", w);
                mc.detuning_hz = number(e, "detuning_hz", w);
                mc.g_hz = number(e, "g_hz", w);
                if (e.contains("cutoff")) mc.cutoff = static_cast<int>(integer(e, "cutoff", w));
                if (mc.momentum_sign != 1 && mc.momentum_sign != -1) throw ConfigError("modes[].momentum_sign must be +-1");
                if (!(mc.g_hz >= 0.0)) throw ConfigError("modes[].g_hz must be >= 0");
                if (mc.cutoff < 1) throw ConfigError("modes[].cutoff must be >= 1");
                list.push_back(mc);
            }
            if (list.empty()) throw ConfigError("modes list is empty");
            c.modes = list;
        } else {
            throw ConfigError("modes must be a list or \"auto-from-geometry\"");
        }
    }
    if (j.contains("cascade")) {
        const auto& k = j["cascade"];
        check_keys(k, "cascade", {"gamma_hz", "gamma_prime_hz", "kd_rad"});
        require(k, "gamma_hz", "cascade");
        CascadeConfig cc;
        cc.gamma_hz = number(k, "gamma_hz", "cascade");
        cc.gamma_prime_hz = number_or(k, "gamma_prime_hz", "cascade", 0.0);
        cc.kd_rad = number_or(k, "kd_rad", "cascade", 0.0);
        if (!(cc.gamma_hz >= 0.0) || !(cc.gamma_prime_hz >= 0.0)) throw ConfigError("cascade rates must be >= 0");
        c.cascade = cc;
    }
    if (j.contains("integrator")) {
        const auto& i = j["integrator"];
        check_keys(i, "integrator", {"dt", "t_final", "tolerance", "sample_every"});
        if (i.contains("dt")) c.integrator.dt = number(i, "dt", "integrator");
        if (i.contains("t_final")) c.integrator.t_final = number(i, "t_final", "integrator");
        if (i.contains("tolerance")) c.integrator.tolerance = number(i, "tolerance", "integrator");
        if (i.contains("sample_every")) {
            const auto n = integer(i, "sample_every", "integrator");
            if (n < 1) throw ConfigError("integrator.sample_every must be >= 1");
            c.integrator.sample_every = static_cast<std::size_t>(n);
        }
        try {
            c.integrator.apply(IntegratorConfig{});
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
    }
    require(j, "experiment", "config");
    const auto& e = j["experiment"];
    check_keys(e, "experiment", {"name", "params"});
    require(e, "name", "experiment");
    c.experiment = string(e, "name", "experiment");
    if (e.contains("params")) c.params = e["params"];
    check_params(c.experiment, c.params);

    if (j.contains("output")) {
        const auto& o = j["output"];
        check_keys(o, "output", {"directory", "formats"});
        if (o.contains("directory")) c.output.directory = string(o, "directory", "output");
        if (o.contains("formats")) {
            const auto& f = o["formats"];
            if (!f.is_array()) throw ConfigError("output.formats must be an array");
            c.output.formats.clear();
            for (const auto& x : f) {
                if (!x.is_string() || (x != "json" && x != "csv"))
                    throw ConfigError("output.formats entries must be \"json\" or \"csv\"");
                c.output.formats.push_back(x.get<std::string>());
            }
        }
    }
    return c;
}

inline json to_json(const RunConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    if (c.material) {
        if (c.material->params) {
            const auto& m = *c.material->params;
            j["material"] = {{"name", m.name},        {"density_kg_m3", m.density}, {"v_plus_m_s", m.v_plus},
                             {"v_minus_m_s", m.v_minus}, {"xi_S_hz", m.xi_S},       {"xi_I_hz", m.xi_I}};
        } else {
            j["material"] = c.material->name;
        }
    }
    if (c.geometry) j["geometry"] = {{"l_m", c.geometry->l}, {"w_m", c.geometry->w}, {"h_m", c.geometry->h}};
    if (c.spin)
        j["spin"] = {{"kind", c.spin->kind},
                     {"s", c.spin->s},
                     {"delta_hz", c.spin->delta_hz},
                     {"positions_m", c.spin->positions_m}};
    if (c.modes_auto) {
        j["modes"] = "auto-from-geometry";
    } else if (c.modes) {
        json list = json::array();
        for (const auto& m : *c.modes)
            list.push_back({{"coupling", m.coupling},
                            {"momentum_sign", m.momentum_sign},
                            {"detuning_hz", m.detuning_hz},
                            {"g_hz", m.g_hz},
                            {"cutoff", m.cutoff}});
        j["modes"] = list;
    }
    if (c.cascade)
        j["cascade"] = {{"gamma_hz", c.cascade->gamma_hz},
                        {"gamma_prime_hz", c.cascade->gamma_prime_hz},
                        {"kd_rad", c.cascade->kd_rad}};
    json integ = json::object();
    if (c.integrator.dt) integ["dt"] = *c.integrator.dt;
    if (c.integrator.t_final) integ["t_final"] = *c.integrator.t_final;
    if (c.integrator.tolerance) integ["tolerance"] = *c.integrator.tolerance;
    if (c.integrator.sample_every) integ["sample_every"] = *c.integrator.sample_every;
    j["integrator"] = integ;
    j["experiment"] = {{"name", c.experiment}, {"params", c.params}};
    j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
    return j;
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(parse_json_text(ss.str(), path));
}

/**
 * Applies "a.b.c=value" overrides to a validated config and validates the result.
 * The value is read as JSON when it parses (numbers, arrays, true/false) and as a
 * plain string otherwise.
 */
inline RunConfig apply_overrides(const RunConfig& base, const std::vector<std::string>& overrides) {
    json j = to_json(base);
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not key=value");
        const std::string path = o.substr(0, eq), text = o.substr(eq + 1);
        json value;
        try {
            value = json::parse(text);
        } catch (const json::parse_error&) {
            value = text;
        }
        json* node = &j;
        std::size_t pos = 0;
        while (true) {
            const auto dot = path.find('.', pos);
            const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
            if (key.empty()) throw ConfigError("override '" + o + "' has an empty key segment");
            if (!node->is_object()) throw ConfigError("override '" + o + "' descends into a non-object");
            if (dot == std::string::npos) {
                (*node)[key] = value;
                break;
            }
            node = &(*node)[key];
            if (node->is_null()) *node = json::object();
            pos = dot + 1;
        }
    }
    return parse_config(j);
}

// ---------------------------------------------------------------------------
// dispatch

namespace detail {

inline materials::MaterialParams config_material(const RunConfig& c) {
    return c.material ? c.material->resolve() : materials::lookup_material("alpha-SiO2");
}

inline materials::SpinKind config_spin_kind(const RunConfig& c) {
    return materials::parse_spin_kind(c.spin ? c.spin->kind : "electron");
}

/// Cascade rates: the cascade section, else the coupling budget of material + geometry.
inline CascadeConfig config_cascade(const RunConfig& c) {
    if (c.cascade) return *c.cascade;
    if (!c.geometry)
        throw ConfigError("experiment '" + c.experiment + "' needs a cascade section or a geometry for the budget");
    const auto b = materials::coupling_table(config_material(c), *c.geometry, config_spin_kind(c),
                                             c.spin ? c.spin->delta_hz : 1e4);
    return {b.gamma(), b.gamma_prime(), 0.0};
}

inline std::vector<ModeSpec> config_modes(const RunConfig& c, int default_cutoff) {
    std::vector<ModeSpec> out;
    if (c.modes_auto) {
        if (!c.geometry) throw ConfigError("modes \"auto-from-geometry\" needs a geometry section");
        const auto b = materials::coupling_table(config_material(c), *c.geometry, config_spin_kind(c),
                                                 c.spin ? c.spin->delta_hz : 1e4);
        // the two excitation-conserving rows; counter-rotating rows are only a suppression estimate
        out.push_back(ModeSpec::rotating(hz_to_rad(b.rows[0].detuning_hz), hz_to_rad(b.rows[0].g_hz), default_cutoff, +1));
        out.push_back(ModeSpec::rotating(hz_to_rad(b.rows[1].detuning_hz), hz_to_rad(b.rows[1].g_hz), default_cutoff, -1));
    } else if (c.modes) {
        for (const auto& m : *c.modes) {
            const double det = hz_to_rad(m.detuning_hz), g = hz_to_rad(m.g_hz);
            out.push_back(m.coupling == "rotating" ? ModeSpec::rotating(det, g, m.cutoff, m.momentum_sign)
                                                   : ModeSpec::counter_rotating(det, g, m.cutoff, m.momentum_sign));
        }
    } else {
        throw ConfigError("the full model needs a modes section");
    }
    return out;
}

/// Observables addressable by name: P<j> (spin j excited), n<m> (mode m quanta), N (excitations).
inline Observable named_observable(const HilbertSpace& space, std::size_t n_spins, const std::string& label) {
    auto index = [&](std::size_t prefix) -> std::size_t {
        try {
            const auto k = std::stoul(label.substr(prefix));
            if (std::to_string(k) != label.substr(prefix) || k < 1) throw std::invalid_argument(label);
            return k - 1;
        } catch (const std::exception&) {
            throw ConfigError("unknown observable '" + label + "'");
        }
    };
    if (label == "N") return {label, excitation_number(space)};
    if (label.size() > 1 && label[0] == 'P') {
        const auto j = index(1);
        if (j >= n_spins) throw ConfigError("observable '" + label + "' names a missing spin");
        return {label, spin_population(space, j)};
    }
    if (label.size() > 1 && label[0] == 'n') {
        const auto m = index(1);
        if (n_spins + m >= space.size()) throw ConfigError("observable '" + label + "' names a missing mode");
        const auto b = site_boson(space, n_spins + m);
        return {label, b.a_dagger * b.a};
    }
    throw ConfigError("unknown observable '" + label + "'");
}

inline ExperimentReport run_simulate(const RunConfig& c) {
    const json& p = c.params;
    const std::string model_name = p.value("model", std::string("forward"));
    const double s = c.spin ? c.spin->s : 0.5;

    LindbladModel model;
    std::size_t n_spins = 2;
    double rate_hz = 0.0;
    ExcitationCheck check = ExcitationCheck::non_increasing;
    if (model_name == "forward" || model_name == "backward" || model_name == "bidirectional" || model_name == "chain") {
        const auto cc = config_cascade(c);
        if (model_name == "chain") {
            n_spins = static_cast<std::size_t>(p.value("n", 3));
            if (n_spins < 2 || n_spins > 12) throw ConfigError("simulate chain length must be in 2..12");
        }
        CascadeSpec spec{hz_to_rad(cc.gamma_hz), hz_to_rad(cc.gamma_prime_hz), cc.kd_rad, {}};
        for (std::size_t j = 0; j < n_spins; ++j)
            spec.sites.push_back({s, static_cast<double>(j), std::string(1, static_cast<char>('A' + j))});
        if (model_name == "forward") model = build_cascaded_model(spec, Direction::forward);
        if (model_name == "backward") model = build_cascaded_model(spec, Direction::backward);
        if (model_name == "bidirectional") model = build_bidirectional_model(spec);
        if (model_name == "chain") model = build_chain_model(spec);
        rate_hz = std::max(cc.gamma_hz, model_name == "forward" || model_name == "chain" ? 0.0 : cc.gamma_prime_hz);
        if (model_name == "backward") rate_hz = cc.gamma_prime_hz;
    } else if (model_name == "full") {
        const auto modes = config_modes(c, 1);
        const auto pos = c.spin ? c.spin->positions_m : std::vector<double>{0.0, 1e-6};
        if (pos.size() != 2) throw ConfigError("the full model takes exactly two spin positions");
        model = build_full_model({{s, pos[0], "A"}, {s, pos[1], "B"}}, modes);
        for (const auto& m : modes) rate_hz = std::max({rate_hz, std::abs(m.detuning), m.g});
        rate_hz /= materials::two_pi;
        const bool all_rotating = std::all_of(modes.begin(), modes.end(), [](const ModeSpec& m) {
            return m.coupling_class == CouplingClass::rotating;
        });
        check = all_rotating ? ExcitationCheck::conserved : ExcitationCheck::none;
    } else {
        throw ConfigError("simulate model must be forward, backward, bidirectional, chain or full");
    }
    if (!(rate_hz > 0.0)) throw ConfigError("simulate needs a non-zero rate to set the time scale");

    std::vector<std::size_t> digits(model.space.size(), 0);
    for (std::size_t k = 0; k < model.space.size(); ++k)
        digits[k] = k < n_spins ? (k == 0 ? 0 : model.space[k].dim - 1) : 0;
    if (p.contains("initial")) {
        const auto init = p["initial"];
        if (init.size() != digits.size())
            throw ConfigError("simulate initial must list one basis index per factor (" +
                              std::to_string(digits.size()) + ")");
        for (std::size_t k = 0; k < digits.size(); ++k) {
            if (!init[k].is_number_integer() || init[k].get<long long>() < 0 ||
                static_cast<std::size_t>(init[k].get<long long>()) >= model.space[k].dim)
                throw ConfigError("simulate initial index out of range at factor " + std::to_string(k));
            digits[k] = static_cast<std::size_t>(init[k].get<long long>());
        }
    }

    std::vector<std::string> labels;
    if (p.contains("observables")) {
        for (const auto& x : p["observables"]) labels.push_back(x.get<std::string>());
    } else {
        for (std::size_t j = 0; j < n_spins; ++j) labels.push_back("P" + std::to_string(j + 1));
        for (std::size_t m = n_spins; m < model.space.size(); ++m) labels.push_back("n" + std::to_string(m - n_spins + 1));
        labels.push_back("N");
    }
    std::vector<Observable> watch;
    for (const auto& l : labels) watch.push_back(named_observable(model.space, n_spins, l));

    IntegratorConfig cfg;
    cfg.rate_scale = hz_to_rad(rate_hz);
    cfg.t_final = 10.0;
    cfg = c.integrator.apply(cfg);
    // refuse runs that would take an absurd number of fixed steps (stiff mode tables)
    const double norm = effective_hamiltonian(model).max_abs() / cfg.rate_scale + 1.0;
    const double dt = cfg.dt ? *cfg.dt : 1e-3 / norm;
    if (cfg.t_final / dt > 5e7)
        throw ConfigError("simulation would need more than 5e7 steps; shorten integrator.t_final or rescale");

    auto r = simulate(model_name, model, DensityMatrix::basis(model.space, digits), cfg, watch, check);
    r.parameters["model"] = model_name;
    r.parameters["initial"] = digits;
    r.parameters["observables"] = labels;
    return r;
}

} // namespace detail

/// Runs the configured experiment. Worker count only changes wall time.
inline ExperimentReport run_experiment(const RunConfig& c, std::size_t threads = 1) {
    using namespace detail;
    ExperimentOptions opt;
    opt.threads = threads;
    opt.integrator = c.integrator;
    const json& p = c.params;
    const std::string& name = c.experiment;

    ExperimentReport r;
    if (name == "elimination_validation") {
        EliminationParams e;
        e.g_hz = p.value("g_hz", e.g_hz);
        if (p.contains("delta_over_g")) e.delta_over_g = p["delta_over_g"].get<std::vector<double>>();
        e.cutoff = p.value("cutoff", e.cutoff);
        r = elimination_validation(e, opt);
    } else if (name == "transfer_asymmetry") {
        const auto cc = config_cascade(c);
        TransferParams t{cc.gamma_hz, cc.gamma_prime_hz, cc.kd_rad, 8.0};
        t.t_final_rate = p.value("t_final_rate", t.t_final_rate);
        r = transfer_asymmetry(t, opt);
    } else if (name == "reciprocity_sweep") {
        const auto cc = config_cascade(c);
        SweepParams s;
        s.gamma_hz = cc.gamma_hz;
        s.kd = cc.kd_rad;
        if (p.contains("ratios")) s.ratios = p["ratios"].get<std::vector<double>>();
        s.t_final_rate = p.value("t_final_rate", s.t_final_rate);
        r = reciprocity_sweep(s, opt);
    } else if (name == "cascade_chain") {
        const auto cc = config_cascade(c);
        ChainParams ch;
        ch.n = static_cast<std::size_t>(p.value("n", 3));
        ch.gamma_hz = cc.gamma_hz;
        ch.kd = cc.kd_rad;
        ch.t_final_rate = p.value("t_final_rate", ch.t_final_rate);
        r = cascade_chain(ch, opt);
    } else if (name == "decoherence_budget") {
        DecoherenceParams d;
        d.gamma0_hz = p.value("gamma0_hz", d.gamma0_hz);
        if (p.contains("drive_u"))
            d.drive_u = p["drive_u"].is_number() ? std::vector<double>{p["drive_u"].get<double>()}
                                                  : p["drive_u"].get<std::vector<double>>();
        if (c.spin) d.delta_hz = c.spin->delta_hz;
        if (c.geometry) d.geometry = *c.geometry;
        r = decoherence_budget(d, config_material(c));
    } else if (name == "coupling_budget") {
        if (!c.geometry) throw ConfigError("coupling_budget needs a geometry section");
        materials::BudgetOptions o;
        o.n = static_cast<int>(p.value("mode_index", 1));
        if (p.contains("drive_u")) o.drive_u = p["drive_u"].get<double>();
        if (p.contains("g_prime_hz")) o.g_prime_hz = p["g_prime_hz"].get<double>();
        r = coupling_budget(config_material(c), *c.geometry, config_spin_kind(c), c.spin ? c.spin->delta_hz : 1e4,
                            o);
    } else if (name == "simulate") {
        r = run_simulate(c);
    } else {
        throw ConfigError("unknown experiment '" + name + "'");
    }
    // the run is reproducible from the report alone (output location excluded)
    json echo = to_json(c);
    echo.erase("output");
    r.parameters["config"] = echo;
    return r;
}

} // namespace chiralspin
