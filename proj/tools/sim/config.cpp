#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace relsim::cli {

using nlohmann::json;

namespace {

constexpr double c_cgs = 2.99792458e10;

/// Reads members of one JSON object and rejects keys nobody asked for.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) {
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
        }
    }

    [[nodiscard]] std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key)
    {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    std::optional<double> number(const std::string& key)
    {
        const json* v = find(key);
        if (!v) {
            return std::nullopt;
        }
        if (!v->is_number()) {
            throw ConfigError(at(key), "expected a number");
        }
        const double x = v->get<double>();
        if (!std::isfinite(x)) {
            throw ConfigError(at(key), "must be finite");
        }
        return x;
    }

    double number_or(const std::string& key, double fallback) { return number(key).value_or(fallback); }

    double required_number(const std::string& key)
    {
        if (auto v = number(key)) {
            return *v;
        }
        throw ConfigError(at(key), "missing required number");
    }

    std::optional<long long> integer(const std::string& key)
    {
        const json* v = find(key);
        if (!v) {
            return std::nullopt;
        }
        if (!v->is_number_integer()) {
            throw ConfigError(at(key), "expected an integer");
        }
        return v->get<long long>();
    }

    std::optional<bool> boolean(const std::string& key)
    {
        const json* v = find(key);
        if (!v) {
            return std::nullopt;
        }
        if (!v->is_boolean()) {
            throw ConfigError(at(key), "expected true or false");
        }
        return v->get<bool>();
    }

    std::optional<std::string> string(const std::string& key)
    {
        const json* v = find(key);
        if (!v) {
            return std::nullopt;
        }
        if (!v->is_string()) {
            throw ConfigError(at(key), "expected a string");
        }
        return v->get<std::string>();
    }

    Vec3 vec3(const std::string& key, std::optional<Vec3> fallback = std::nullopt)
    {
        const json* v = find(key);
        if (!v) {
            if (fallback) {
                return *fallback;
            }
            throw ConfigError(at(key), "missing required 3-vector");
        }
        if (!v->is_array() || v->size() != 3) {
            throw ConfigError(at(key), "expected an array of 3 numbers");
        }
        Vec3 out;
        for (std::size_t i = 0; i < 3; ++i) {
            const json& e = (*v)[i];
            if (!e.is_number() || !std::isfinite(e.get<double>())) {
                throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a finite number");
            }
            out[i] = e.get<double>();
        }
        return out;
    }

    void finish() const
    {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.contains(key)) {
                throw ConfigError(at(key), "unknown key");
            }
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class T>
T pick(const std::string& path, const std::string& value, std::initializer_list<std::pair<const char*, T>> options)
{
    std::string names;
    for (const auto& [name, v] : options) {
        if (value == name) {
            return v;
        }
        names += names.empty() ? "" : ", ";
        names += name;
    }
    throw ConfigError(path, "'" + value + "' is not one of " + names);
}

void require(bool ok, const std::string& path, const std::string& what)
{
    if (!ok) {
        throw ConfigError(path, what);
    }
}

struct Preset {
    double c;
    double K;
    bool charge_is_mass;
};

Preset preset_named(const std::string& path, const std::string& name)
{
    return pick<Preset>(path, name,
                        {{"em_gaussian", {c_cgs, 1.0, false}}, {"gravity_si", {constants::c_si, -constants::G, true}}});
}

void parse_constants(Fields& root, RunConfig& cfg, const std::optional<Preset>& preset)
{
    Coupling& cpl = cfg.sim.coupling;
    if (preset) {
        cpl.c = preset->c;
        cpl.K = preset->K;
        cpl.sign = SignConvention::coulomb_consistent;
    }
    const json* node = root.find("constants");
    if (!node) {
        require(preset.has_value(), "constants", "missing; give constants or a preset");
        return;
    }
    Fields f(*node, "constants");
    if (auto c = f.number("c")) {
        cpl.c = *c;
    } else {
        require(preset.has_value(), f.at("c"), "missing required number");
    }
    if (auto k = f.number("K")) {
        cpl.K = *k;
    } else {
        require(preset.has_value(), f.at("K"), "missing required number");
    }
    if (auto s = f.string("sign_convention")) {
        cpl.sign = pick<SignConvention>(f.at("sign_convention"), *s,
                                        {{"coulomb_consistent", SignConvention::coulomb_consistent},
                                         {"paper_literal", SignConvention::paper_literal}});
    }
    cpl.tol.length_scale = f.number_or("length_scale", 1.0);
    f.finish();
    require(cpl.c > 0.0, f.at("c"), "must be positive");
    require(cpl.tol.length_scale > 0.0, f.at("length_scale"), "must be positive");
}

void parse_integrator(Fields& root, RunConfig& cfg)
{
    const json* node = root.find("integrator");
    require(node != nullptr, "integrator", "missing required object");
    Fields f(*node, "integrator");
    cfg.sim.dt = f.required_number("dt");
    cfg.sim.t_end = f.required_number("t_end");
    cfg.initial.t = f.number_or("t_start", 0.0);
    if (auto s = f.integer("output_stride")) {
        require(*s >= 1, f.at("output_stride"), "must be at least 1");
        cfg.sim.output_stride = static_cast<std::size_t>(*s);
    }
    if (auto p = f.string("prehistory")) {
        cfg.sim.prehistory = pick<PrehistoryPolicy>(f.at("prehistory"), *p,
                                                    {{"inertial", PrehistoryPolicy::inertial},
                                                     {"none", PrehistoryPolicy::none}});
    }
    if (auto d = f.boolean("row_diagnostics")) {
        cfg.sim.row_diagnostics = *d;
    }
    f.finish();
    require(cfg.sim.dt > 0.0, f.at("dt"), "must be positive");
    require(cfg.sim.t_end >= cfg.initial.t, f.at("t_end"), "must not precede t_start");
}

void parse_particles(Fields& root, RunConfig& cfg, bool charge_is_mass)
{
    const json* node = root.find("particles");
    require(node != nullptr && node->is_array() && !node->empty(), "particles", "expected a non-empty array");
    std::set<std::string> labels;
    const double c = cfg.sim.coupling.c;
    for (std::size_t i = 0; i < node->size(); ++i) {
        Fields f((*node)[i], "particles[" + std::to_string(i) + "]");
        Particle p;
        p.label = f.string("label").value_or("p" + std::to_string(i));
        require(!p.label.empty(), f.at("label"), "must not be empty");
        require(p.label.find_first_of(",\n\r\"") == std::string::npos, f.at("label"),
                "must not contain commas, quotes or newlines");
        require(labels.insert(p.label).second, f.at("label"), "duplicate label '" + p.label + "'");
        p.m = f.required_number("m");
        require(p.m > 0.0, f.at("m"), "mass must be positive");
        if (auto q = f.number("q")) {
            require(!charge_is_mass || *q == p.m, f.at("q"), "the gravity_si preset sets q = m");
            p.q = *q;
        } else if (charge_is_mass) {
            p.q = p.m;
        }
        p.is_test = f.boolean("test").value_or(false);
        if (auto r = f.number("qm_ratio")) {
            require(p.is_test, f.at("qm_ratio"), "only test particles take a charge-to-mass ratio");
            p.qm_ratio = *r;
        } else if (p.is_test) {
            p.qm_ratio = p.q / p.m;
        }
        if (auto m = f.string("motion")) {
            p.motion = pick<Motion>(f.at("motion"), *m,
                                    {{"dynamic", Motion::dynamic}, {"prescribed", Motion::prescribed}});
        }
        const Vec3 pos = f.vec3("pos");
        const Vec3 vel = f.vec3("vel", Vec3{});
        f.finish();
        const double speed = norm(vel);
        if (!(speed < c)) {
            std::ostringstream os;
            os << "speed " << speed << " is not below c = " << c;
            throw ConfigError(f.at("vel"), os.str());
        }
        cfg.particles.push_back(p);
        cfg.initial.particles.push_back({pos, u_from_velocity(ThreeVelocity(vel, c))});
        cfg.velocities.push_back(vel);
    }
}

void parse_output(Fields& root, RunConfig& cfg)
{
    const json* node = root.find("output");
    if (!node) {
        return;
    }
    Fields f(*node, "output");
    if (auto d = f.string("directory")) {
        require(!d->empty(), f.at("directory"), "must not be empty");
        cfg.output.directory = *d;
    }
    if (const json* formats = f.find("formats")) {
        require(formats->is_array(), f.at("formats"), "expected an array of strings");
        cfg.output.csv = false;
        cfg.output.json = false;
        for (std::size_t i = 0; i < formats->size(); ++i) {
            const std::string path = f.at("formats") + "[" + std::to_string(i) + "]";
            require((*formats)[i].is_string(), path, "expected a string");
            const std::string name = (*formats)[i].get<std::string>();
            *pick<bool*>(path, name, {{"csv", &cfg.output.csv}, {"json", &cfg.output.json}}) = true;
        }
    }
    f.finish();
}

int positive_int(Fields& f, const std::string& key, int fallback)
{
    if (auto v = f.integer(key)) {
        require(*v >= 1 && *v <= 100000000, f.at(key), "must be a positive integer");
        return static_cast<int>(*v);
    }
    return fallback;
}

void parse_scenario(Fields& root, RunConfig& cfg)
{
    const json* node = root.find("scenario");
    if (!node) {
        return;
    }
    if (node->is_string()) {
        cfg.scenario = pick<ScenarioKind>("scenario", node->get<std::string>(),
                                          {{"trajectory", ScenarioKind::trajectory},
                                           {"mercury", ScenarioKind::mercury},
                                           {"nonrel_limit", ScenarioKind::nonrel_limit}});
        return;
    }
    Fields f(*node, "scenario");
    const auto name = f.string("name");
    require(name.has_value(), f.at("name"), "missing scenario name");
    cfg.scenario = pick<ScenarioKind>(f.at("name"), *name,
                                      {{"trajectory", ScenarioKind::trajectory},
                                       {"mercury", ScenarioKind::mercury},
                                       {"nonrel_limit", ScenarioKind::nonrel_limit}});
    if (cfg.scenario == ScenarioKind::mercury) {
        MercuryConfig& m = cfg.mercury;
        m.orbits = positive_int(f, "orbits", m.orbits);
        m.steps_per_orbit = positive_int(f, "steps_per_orbit", m.steps_per_orbit);
        m.extrapolate = f.boolean("extrapolate").value_or(m.extrapolate);
        OrbitSpec& o = m.orbit;
        o.amplify = f.number_or("amplify", o.amplify);
        o.a = f.number_or("a", o.a);
        o.e = f.number_or("e", o.e);
        o.central_mass = f.number_or("central_mass", o.central_mass);
        o.period_days = f.number_or("period_days", o.period_days);
        o.G = f.number_or("G", o.G);
        if (auto c = f.number("c")) {
            o.c_override = *c;
        }
        try {
            o.validate();
        } catch (const DomainError& e) {
            throw ConfigError("scenario", e.what());
        }
    } else if (cfg.scenario == ScenarioKind::nonrel_limit) {
        NonrelConfig& n = cfg.nonrel;
        if (const json* betas = f.find("betas")) {
            require(betas->is_array() && betas->size() >= 2, f.at("betas"), "expected at least two numbers");
            n.betas.clear();
            for (std::size_t i = 0; i < betas->size(); ++i) {
                const json& b = (*betas)[i];
                const std::string path = f.at("betas") + "[" + std::to_string(i) + "]";
                require(b.is_number(), path, "expected a number");
                require(b.get<double>() > 0.0 && b.get<double>() < 1.0, path, "must lie in (0, 1)");
                n.betas.push_back(b.get<double>());
            }
        }
        n.orbits = f.number_or("orbits", n.orbits);
        require(n.orbits > 0.0, f.at("orbits"), "must be positive");
        n.steps_per_orbit = positive_int(f, "steps_per_orbit", n.steps_per_orbit);
        n.mass_ratio = f.number_or("mass_ratio", n.mass_ratio);
        require(n.mass_ratio >= 1.0, f.at("mass_ratio"), "must be at least 1");
        n.speed_factor = f.number_or("speed_factor", n.speed_factor);
        require(n.speed_factor > 0.0 && n.speed_factor < 1.0, f.at("speed_factor"), "must lie in (0, 1)");
    }
    f.finish();
}

} // namespace

std::string to_string(ScenarioKind k)
{
    switch (k) {
    case ScenarioKind::trajectory:
        return "trajectory";
    case ScenarioKind::mercury:
        return "mercury";
    case ScenarioKind::nonrel_limit:
        return "nonrel_limit";
    }
    return "trajectory";
}

RunConfig parse_config(const json& doc)
{
    RunConfig cfg;
    Fields root(doc, "");
    parse_scenario(root, cfg);
    parse_output(root, cfg);

    if (cfg.scenario != ScenarioKind::trajectory) {
        for (const char* key : {"constants", "preset", "integrator", "particles"}) {
            require(!root.has(key), key, "not used by scenario '" + to_string(cfg.scenario) + "'");
        }
        root.finish();
        return cfg;
    }

    std::optional<Preset> preset;
    if (auto name = root.string("preset")) {
        preset = preset_named("preset", *name);
    }
    parse_constants(root, cfg, preset);
    parse_integrator(root, cfg);
    parse_particles(root, cfg, preset && preset->charge_is_mass);
    root.finish();

    try {
        cfg.sim.validate();
        for (const auto& p : cfg.particles) {
            p.validate();
        }
    } catch (const DomainError& e) {
        throw ConfigError("", e.what());
    }
    return cfg;
}

RunConfig parse_config_text(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // locate the byte offset as line:column
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col),
                          "invalid JSON (" + std::string(e.what()) + ")");
    }
    return parse_config(doc);
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(path.string(), "cannot open configuration file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

namespace {

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

} // namespace

json to_json(const RunConfig& cfg)
{
    json doc;
    json formats = json::array();
    if (cfg.output.csv) {
        formats.push_back("csv");
    }
    if (cfg.output.json) {
        formats.push_back("json");
    }
    doc["output"] = {{"directory", cfg.output.directory}, {"formats", formats}};

    if (cfg.scenario == ScenarioKind::mercury) {
        const MercuryConfig& m = cfg.mercury;
        json s = {{"name", "mercury"},
                  {"orbits", m.orbits},
                  {"steps_per_orbit", m.steps_per_orbit},
                  {"extrapolate", m.extrapolate},
                  {"amplify", m.orbit.amplify},
                  {"a", m.orbit.a},
                  {"e", m.orbit.e},
                  {"central_mass", m.orbit.central_mass},
                  {"period_days", m.orbit.period_days},
                  {"G", m.orbit.G}};
        if (m.orbit.c_override) {
            s["c"] = *m.orbit.c_override;
        }
        doc["scenario"] = s;
        return doc;
    }
    if (cfg.scenario == ScenarioKind::nonrel_limit) {
        const NonrelConfig& n = cfg.nonrel;
        doc["scenario"] = {{"name", "nonrel_limit"},
                           {"betas", n.betas},
                           {"orbits", n.orbits},
                           {"steps_per_orbit", n.steps_per_orbit},
                           {"mass_ratio", n.mass_ratio},
                           {"speed_factor", n.speed_factor}};
        return doc;
    }

    const Coupling& cpl = cfg.sim.coupling;
    doc["scenario"] = {{"name", "trajectory"}};
    doc["constants"] = {{"c", cpl.c},
                        {"K", cpl.K},
                        {"sign_convention",
                         cpl.sign == SignConvention::coulomb_consistent ? "coulomb_consistent" : "paper_literal"},
                        {"length_scale", cpl.tol.length_scale}};
    doc["integrator"] = {{"dt", cfg.sim.dt},
                         {"t_end", cfg.sim.t_end},
                         {"t_start", cfg.initial.t},
                         {"output_stride", cfg.sim.output_stride},
                         {"prehistory", cfg.sim.prehistory == PrehistoryPolicy::inertial ? "inertial" : "none"},
                         {"row_diagnostics", cfg.sim.row_diagnostics}};
    json parts = json::array();
    for (std::size_t i = 0; i < cfg.particles.size(); ++i) {
        const Particle& p = cfg.particles[i];
        const ParticleState& s = cfg.initial.particles[i];
        json jp = {{"label", p.label},
                   {"m", p.m},
                   {"q", p.q},
                   {"test", p.is_test},
                   {"motion", p.motion == Motion::dynamic ? "dynamic" : "prescribed"},
                   {"pos", vec_json(s.pos)},
                   {"vel", vec_json(cfg.velocities[i])}};
        if (p.is_test) {
            jp["qm_ratio"] = p.qm_ratio;
        }
        parts.push_back(jp);
    }
    doc["particles"] = parts;
    return doc;
}

} // namespace relsim::cli
