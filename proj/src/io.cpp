#include "schouten/io.hpp"

#include "schouten/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace schouten {

namespace fs = std::filesystem;

namespace {

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ArgumentError("config section '" + where + "' must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.count(key)) throw ArgumentError("unknown config key '" + where + "." + key + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ArgumentError("config key '" + where + "." + key + "': " + e.what());
    }
}

// "perturbed(hemisphere_warped)" -> ("perturbed", "hemisphere_warped")
std::pair<std::string, std::string> split_recipe(const std::string& s) {
    const auto open = s.find('(');
    if (open == std::string::npos) return {s, ""};
    if (s.back() != ')') throw ArgumentError("malformed recipe '" + s + "'");
    return {s.substr(0, open), s.substr(open + 1, s.size() - open - 2)};
}

bool warped_recipe(const std::string& name) {
    return name == "round_sphere_warped" || name == "sphere" || name == "hemisphere_warped" || name == "hemisphere";
}

}  // namespace

std::vector<double> FProfile::evaluate(const GridChart& c) const {
    std::vector<double> f(c.node_count(), value);
    if (kind == "constant") return f;
    for (std::size_t node = 0; node < f.size(); ++node) {
        const auto idx = c.multi_index(node);
        double s = 1.0;
        for (int a = 0; a < c.axes(); ++a) {
            const double x = c.coordinate(a, idx[a]) - (c.backend == Backend::warped ? c.r_min : 0.0);
            const double L = c.length(a);
            s *= c.periodic(a) ? std::cos(2.0 * std::numbers::pi * mode * x / L) : std::cos(std::numbers::pi * mode * x / L);
        }
        f[node] = value * (1.0 + amplitude * s);
    }
    return f;
}

MetricRecipe RunConfig::metric_recipe() const {
    const auto [head, base] = split_recipe(recipe);
    if (head == "perturbed") {
        MetricRecipe r;
        r.kind = MetricRecipe::Kind::perturbed;
        r.base = MetricRecipe::parse(base.empty() ? "flat" : base).kind;
        r.amplitude = recipe_amplitude;
        r.mode = recipe_mode;
        return r;
    }
    if (!base.empty()) throw ArgumentError("only 'perturbed' takes a base recipe: '" + recipe + "'");
    return MetricRecipe::parse(head);
}

GridChart RunConfig::chart(int resolution_override) const {
    const int N = resolution_override > 0 ? resolution_override : resolution;
    const Backend b = backend_from_string(backend);
    switch (b) {
        case Backend::torus: return GridChart::torus(n, N, length);
        case Backend::slab: return GridChart::slab(n, N, length);
        case Backend::warped: {
            const auto r = metric_recipe();
            const auto base = r.kind == MetricRecipe::Kind::perturbed ? r.base : r.kind;
            const double r_max = base == MetricRecipe::Kind::round_sphere_warped ? std::numbers::pi : 0.5 * std::numbers::pi;
            return GridChart::warped(n, N, 0.0, r_max);
        }
    }
    throw ArgumentError("unknown backend");
}

SymFuncSpec RunConfig::function() const {
    if (family == "ricci_det") return SymFuncSpec::ricci_det(n);
    if (family == "sigma_k_root" || family == "sigma_k") return SymFuncSpec::sigma_k_root(n, k);
    throw ArgumentError("unknown function family '" + family + "'");
}

void validate(const RunConfig& c) {
    if (c.n < 3) throw ArgumentError("manifold.n must be >= 3");
    if (c.resolution < 8) throw ArgumentError("manifold.resolution must be >= 8");
    if (!(c.length > 0.0)) throw ArgumentError("manifold.length must be positive");
    const Backend b = backend_from_string(c.backend);
    const auto [head, base] = split_recipe(c.recipe);
    const bool warped = warped_recipe(head) || warped_recipe(base);
    if (warped != (b == Backend::warped))
        throw ArgumentError("recipe '" + c.recipe + "' does not match backend '" + c.backend + "'");
    c.metric_recipe();
    if (c.family == "sigma_k_root" || c.family == "sigma_k") {
        if (c.k < 1 || c.k > c.n)
            throw ArgumentError("function.k=" + std::to_string(c.k) + " must lie in [1, n=" + std::to_string(c.n) + "]");
    } else if (c.family != "ricci_det") {
        throw ArgumentError("unknown function family '" + c.family + "'");
    }
    if (c.f.kind != "constant" && c.f.kind != "cosine") throw ArgumentError("f.kind must be constant or cosine");
    if (!(c.f.value > 0.0)) throw ArgumentError("f must be positive everywhere (f.value <= 0)");
    if (c.f.kind == "cosine" && !(std::abs(c.f.amplitude) < 1.0))
        throw ArgumentError("f must be positive everywhere (|f.amplitude| >= 1)");
    if (!(c.ramp_end > 0.0 && c.ramp_end <= 1.0)) throw ArgumentError("schedule.ramp_end must lie in (0, 1]");
    const auto& s = c.solver;
    if (!(s.newton_tol > 0.0) || !(s.safeguard_margin > 0.0) || !(s.dt_min > 0.0) || !(s.dt_initial > 0.0) ||
        !(s.dt_max >= s.dt_min) || s.max_newton_iters < 1 || !(s.min_step_fraction > 0.0) || s.max_steps < 1)
        throw ArgumentError("solver tolerances and step bounds must be positive");
    if (c.verify_samples < 1) throw ArgumentError("verify.samples must be positive");
    if (c.curvature_resolutions.size() != 2 || c.curvature_resolutions[0] < 8 ||
        c.curvature_resolutions[1] <= c.curvature_resolutions[0])
        throw ArgumentError("curvature_check.resolutions must be two increasing resolutions");
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    reject_unknown(j, "", {"manifold", "function", "f", "schedule", "solver", "outputs", "seed", "verify",
                           "curvature_check", "blowup"});
    if (j.contains("manifold")) {
        const auto& m = j["manifold"];
        reject_unknown(m, "manifold", {"backend", "n", "resolution", "recipe", "recipe_params", "length"});
        read(m, "backend", c.backend, "manifold");
        read(m, "n", c.n, "manifold");
        read(m, "resolution", c.resolution, "manifold");
        read(m, "recipe", c.recipe, "manifold");
        read(m, "length", c.length, "manifold");
        if (m.contains("recipe_params")) {
            const auto& p = m["recipe_params"];
            reject_unknown(p, "manifold.recipe_params", {"amplitude", "mode"});
            read(p, "amplitude", c.recipe_amplitude, "manifold.recipe_params");
            read(p, "mode", c.recipe_mode, "manifold.recipe_params");
        }
    }
    if (j.contains("function")) {
        const auto& f = j["function"];
        reject_unknown(f, "function", {"family", "k"});
        read(f, "family", c.family, "function");
        read(f, "k", c.k, "function");
    }
    if (j.contains("f")) {
        const auto& f = j["f"];
        reject_unknown(f, "f", {"kind", "value", "amplitude", "mode"});
        read(f, "kind", c.f.kind, "f");
        read(f, "value", c.f.value, "f");
        read(f, "amplitude", c.f.amplitude, "f");
        read(f, "mode", c.f.mode, "f");
    }
    if (j.contains("schedule")) {
        reject_unknown(j["schedule"], "schedule", {"ramp_end"});
        read(j["schedule"], "ramp_end", c.ramp_end, "schedule");
    }
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        reject_unknown(s, "solver", {"newton_tol", "max_newton_iters", "safeguard_margin", "min_step_fraction",
                                     "dt_initial", "dt_min", "dt_max", "shrink", "grow", "easy_iters",
                                     "blowup_threshold", "max_steps", "secant_predictor"});
        auto& o = c.solver;
        read(s, "newton_tol", o.newton_tol, "solver");
        read(s, "max_newton_iters", o.max_newton_iters, "solver");
        read(s, "safeguard_margin", o.safeguard_margin, "solver");
        read(s, "min_step_fraction", o.min_step_fraction, "solver");
        read(s, "dt_initial", o.dt_initial, "solver");
        read(s, "dt_min", o.dt_min, "solver");
        read(s, "dt_max", o.dt_max, "solver");
        read(s, "shrink", o.shrink, "solver");
        read(s, "grow", o.grow, "solver");
        read(s, "easy_iters", o.easy_iters, "solver");
        read(s, "blowup_threshold", o.blowup_threshold, "solver");
        read(s, "max_steps", o.max_steps, "solver");
        read(s, "secant_predictor", o.secant_predictor, "solver");
    }
    if (j.contains("outputs")) {
        reject_unknown(j["outputs"], "outputs", {"directory", "dump_fields"});
        read(j["outputs"], "directory", c.output_dir, "outputs");
        read(j["outputs"], "dump_fields", c.dump_fields, "outputs");
    }
    read(j, "seed", c.seed, "");
    if (j.contains("verify")) {
        reject_unknown(j["verify"], "verify", {"samples"});
        read(j["verify"], "samples", c.verify_samples, "verify");
    }
    if (j.contains("curvature_check")) {
        reject_unknown(j["curvature_check"], "curvature_check", {"resolutions"});
        read(j["curvature_check"], "resolutions", c.curvature_resolutions, "curvature_check");
    }
    if (j.contains("blowup")) {
        reject_unknown(j["blowup"], "blowup", {"threshold"});
        read(j["blowup"], "threshold", c.blowup_threshold_analysis, "blowup");
    }
    validate(c);
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ArgumentError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

json to_json(const RunConfig& c) {
    const auto& s = c.solver;
    return json{
        {"manifold",
         {{"backend", c.backend},
          {"n", c.n},
          {"resolution", c.resolution},
          {"recipe", c.recipe},
          {"recipe_params", {{"amplitude", c.recipe_amplitude}, {"mode", c.recipe_mode}}},
          {"length", c.length}}},
        {"function", {{"family", c.family}, {"k", c.k}}},
        {"f", {{"kind", c.f.kind}, {"value", c.f.value}, {"amplitude", c.f.amplitude}, {"mode", c.f.mode}}},
        {"schedule", {{"ramp_end", c.ramp_end}}},
        {"solver",
         {{"newton_tol", s.newton_tol},
          {"max_newton_iters", s.max_newton_iters},
          {"safeguard_margin", s.safeguard_margin},
          {"min_step_fraction", s.min_step_fraction},
          {"dt_initial", s.dt_initial},
          {"dt_min", s.dt_min},
          {"dt_max", s.dt_max},
          {"shrink", s.shrink},
          {"grow", s.grow},
          {"easy_iters", s.easy_iters},
          {"blowup_threshold", s.blowup_threshold},
          {"max_steps", s.max_steps},
          {"secant_predictor", s.secant_predictor}}},
        {"outputs", {{"directory", c.output_dir}, {"dump_fields", c.dump_fields}}},
        {"seed", c.seed},
        {"verify", {{"samples", c.verify_samples}}},
        {"curvature_check", {{"resolutions", c.curvature_resolutions}}},
        {"blowup", {{"threshold", c.blowup_threshold_analysis}}},
    };
}

fs::path output_directory(const RunConfig& c) {
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return fs::path(env);
    return fs::path(c.output_dir);
}

Problem build_problem(const RunConfig& c, int resolution_override) {
    const GridChart chart = c.chart(resolution_override);
    MetricField metric = build_metric(chart, c.metric_recipe());
    PsiSchedule psi;
    psi.ramp_end = c.ramp_end;
    return make_problem(std::move(metric), c.function(), c.f.evaluate(chart), psi);
}

json to_json(const ConditionReport& r) {
    auto cond = [](const ConditionResult& c) { return json{{"pass", c.pass}, {"worst", c.worst}}; };
    return json{{"samples", r.samples},
                {"C1_positive", cond(r.c1_positive)},
                {"C2_concave", cond(r.c2_concave)},
                {"C3_symmetric", cond(r.c3_symmetric)},
                {"C4_homogeneous", cond(r.c4_homogeneous)},
                {"C5_gradient", cond(r.c5_gradient)},
                {"C6_maclaurin", cond(r.c6_maclaurin)},
                {"epsilon", r.epsilon},
                {"rho", r.rho},
                {"f_at_ones", r.f_at_ones},
                {"all_pass", r.all_pass()}};
}

json to_json(const ContinuationState& s, bool with_field) {
    json j{{"t", s.t},
           {"residual_max", s.residual_max},
           {"residual_l2", s.residual_l2},
           {"newton_iters", s.newton_iters},
           {"margin", s.margin},
           {"margin_node", s.margin_node},
           {"integral_value", s.integral_value},
           {"min_u", s.min_u},
           {"max_u", s.max_u},
           {"dt", s.dt}};
    if (with_field) j["u"] = s.u;
    return j;
}

json to_json(const BlowupReport& r) {
    json chain = json::array();
    for (const auto& d : r.descent_chain) chain.push_back({{"node", d.node}, {"u", d.u}});
    json profile = json::array();
    for (const auto& p : r.profile) profile.push_back({p.r, p.w_hat});
    return json{{"blowup", r.blowup},
                {"min_u", r.min_u},
                {"point", {{"node", r.point}, {"coordinates", r.coordinates}}},
                {"v_max", r.v_max},
                {"descent_chain", chain},
                {"certified_radius", r.certified_radius},
                {"certificate_holds", r.certificate_holds},
                {"truncated_ball", r.truncated},
                {"fit_window", {r.fit_lo, r.fit_hi}},
                {"fitted_slope", r.fit.slope},
                {"intercept", r.fit.intercept},
                {"residual_of_fit", r.fit.rms},
                {"fit_samples", r.fit.samples},
                {"monitor", {{"radii", r.monitor_radii}, {"ratios", r.monitor_ratios}}},
                {"profile", profile}};
}

json to_json(const MonitorReport& r) {
    return json{{"constant", r.constant}, {"center", r.center},     {"point", r.point},
                {"radius", r.radius},     {"radii", r.radii},       {"per_radius", r.per_radius}};
}

void write_json(const fs::path& path, const json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void write_history(const fs::path& path, const std::vector<ContinuationState>& history, bool with_fields) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write " + path.string());
    for (const auto& s : history) out << to_json(s, with_fields).dump() << '\n';
}

std::vector<ContinuationState> read_history(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open history " + path.string());
    std::vector<ContinuationState> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            ContinuationState s;
            s.t = j.at("t").get<double>();
            s.residual_max = j.value("residual_max", 0.0);
            s.residual_l2 = j.value("residual_l2", 0.0);
            s.newton_iters = j.value("newton_iters", 0);
            s.margin = j.value("margin", 0.0);
            s.margin_node = j.value("margin_node", std::size_t{0});
            s.integral_value = j.value("integral_value", 0.0);
            s.min_u = j.value("min_u", 0.0);
            s.max_u = j.value("max_u", 0.0);
            s.dt = j.value("dt", 0.0);
            if (j.contains("u")) s.u = j["u"].get<std::vector<double>>();
            out.push_back(std::move(s));
        } catch (const json::exception& e) {
            throw ArgumentError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void write_field(const fs::path& path, const GridChart& c, std::span<const double> u) {
    if (u.size() != c.node_count()) throw ArgumentError("field size does not match the chart");
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write " + path.string());
    out.precision(17);
    out << "node";
    if (c.backend == Backend::warped) {
        out << ",r";
    } else {
        for (int a = 0; a < c.axes(); ++a) out << ",x" << a;
    }
    out << ",u\n";
    for (std::size_t node = 0; node < u.size(); ++node) {
        const auto idx = c.multi_index(node);
        out << node;
        for (int a = 0; a < c.axes(); ++a) out << ',' << c.coordinate(a, idx[a]);
        out << ',' << u[node] << '\n';
    }
}

std::vector<double> read_field(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open field " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ArgumentError("empty field file " + path.string());
    std::vector<double> u;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos) throw ArgumentError("malformed field row '" + line + "'");
        const std::size_t node = std::stoul(line.substr(0, line.find(',')));
        if (node != u.size()) throw ArgumentError("field rows out of order at node " + std::to_string(node));
        u.push_back(std::stod(line.substr(comma + 1)));
    }
    return u;
}

void write_profile(const fs::path& path, std::span<const RadialSample> profile) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write " + path.string());
    out.precision(17);
    out << "r,w_hat,2*log r\n";
    for (const auto& p : profile) out << p.r << ',' << p.w_hat << ',' << (p.r > 0.0 ? 2.0 * std::log(p.r) : -INFINITY) << '\n';
}

}  // namespace schouten
