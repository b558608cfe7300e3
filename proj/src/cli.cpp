#include <curvbc/cli.h>

#include <curvbc/analytic_geometry.h>
#include <curvbc/errors.h>
#include <curvbc/mesh_io.h>
#include <curvbc/report.h>
#include <curvbc/tolman.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace curvbc::cli {

namespace {

using json = nlohmann::ordered_json;

const std::set<std::string> commands{"mesh-check", "gradcheck", "solve", "tolman", "verify"};

std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    if (!obj.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

double get_number(const json& obj, const char* key, const std::string& where, double fallback)
{
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return v.get<double>();
}

int get_int(const json& obj, const char* key, const std::string& where, int fallback)
{
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return v.get<int>();
}

std::string get_string(const json& obj, const char* key, const std::string& where, std::string fallback)
{
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

double to_double(const std::string& text, const std::string& what)
{
    try {
        size_t used = 0;
        const double x = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(what + ": '" + text + "' is not a number");
    }
}

int to_int(const std::string& text, const std::string& what)
{
    const double x = to_double(text, what);
    if (x != std::floor(x) || std::abs(x) > 1e6) throw ConfigError(what + ": '" + text + "' is not an integer");
    return static_cast<int>(x);
}

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) out.push_back(item);
    if (!text.empty() && text.back() == sep) out.emplace_back();
    return out;
}

LagrangianSpec parse_lagrangian(const json& obj, const char* name_key, const std::string& where)
{
    check_keys(obj, {name_key, "parameters"}, where);
    LagrangianSpec spec;
    spec.name = get_string(obj, name_key, where, "");
    if (spec.name.empty()) throw ConfigError(where + "." + name_key + ": required");
    if (obj.contains("parameters")) {
        const auto& p = obj.at("parameters");
        if (!p.is_object()) throw ConfigError(where + ".parameters: expected an object");
        for (const auto& [key, value] : p.items()) {
            if (!value.is_number()) throw ConfigError(where + ".parameters." + key + ": expected a number");
            spec.parameters[key] = value.get<double>();
        }
    }
    return spec;
}

json lagrangian_json(const LagrangianSpec& spec, const char* name_key)
{
    json params = json::object();
    for (const auto& [k, v] : spec.parameters) params[k] = v;
    return json{{name_key, spec.name}, {"parameters", params}};
}

/// Positional parameter names of the "name:a,b,..." flag syntax.
std::vector<std::string> positional_names(const std::string& kind, const std::string& name, size_t count)
{
    if (kind == "bulk") {
        if (name == "poisson_source") return {"f"};
        if (name == "linear_elastic") return {"lambda", "mu"};
        return {};
    }
    if (name == "isotropic") return {"sigma", "tau"};
    if (name == "robin") return {"beta"};
    if (name == "neumann") return count == 3 ? std::vector<std::string>{"gx", "gy", "gz"} : std::vector<std::string>{"g"};
    if (name == "restricted") return {"bar", "hat", "chi", "kappa"};
    return {};
}

json lagrangian_flag(const std::string& text, const std::string& kind, const char* name_key)
{
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    json params = json::object();
    if (colon != std::string::npos) {
        const auto values = split(text.substr(colon + 1), ',');
        const auto names = positional_names(kind, name, values.size());
        if (values.size() > names.size()) {
            throw ConfigError("--" + kind + " " + text + ": too many parameters");
        }
        for (size_t i = 0; i < values.size(); ++i) {
            params[names[i]] = to_double(values[i], "--" + kind + " " + text);
        }
    }
    return json{{name_key, name}, {"parameters", params}};
}


std::map<std::string, double> with_defaults(const LagrangianSpec& spec, const std::map<std::string, double>& defaults,
    const std::string& where)
{
    std::map<std::string, double> out = defaults;
    for (const auto& [k, v] : spec.parameters) {
        if (!defaults.count(k)) throw ConfigError(where + ": unknown parameter '" + k + "'");
        out[k] = v;
    }
    return out;
}

// Subcommands -------------------------------------------------------------------------------

struct Output
{
    std::filesystem::path dir;
    std::string provenance;

    std::filesystem::path write(const std::string& name, const std::string& body) const
    {
        const auto path = dir / name;
        write_output_file(path, provenance, body);
        return path;
    }
};

bool non_increasing(const std::vector<double>& values)
{
    for (size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[i - 1] && values[i] > 1e-12) return false;
    }
    return true;
}

int run_mesh_check(const RunConfig& config, const Output& out, std::ostream& log)
{
    const auto& g = config.geometry;
    const std::string kind = g.kind.empty() ? "sphere" : g.kind;
    std::ostringstream csv;
    csv << "level,vertices,faces,mean_edge_length,identity_residual,h_error\n";

    if (kind == "file") {
        const TriangleMesh mesh = read_mesh(g.path);
        const double identity = curvature_identity_residual(mesh);
        csv << "0," << mesh.num_vertices() << ',' << mesh.num_faces() << ',' << fmt(mesh.mean_edge_length()) << ','
            << fmt(identity) << ",\n";
        out.write("mesh_check.csv", csv.str());
        log << "mesh " << g.path << ": identity residual " << fmt(identity) << '\n';
        return 0;
    }

    if (kind != "sphere" && kind != "torus") {
        throw ConfigError("geometry.kind: mesh-check takes sphere, torus or a mesh file");
    }
    // Mesh and exact H per vertex at one refinement level.
    auto fixture = [&](int level) -> std::pair<TriangleMesh, Eigen::VectorXd> {
        if (kind == "sphere") {
            TriangleMesh mesh = build_icosphere(g.radius, level);
            const auto n = mesh.num_vertices();
            return {std::move(mesh), Eigen::VectorXd::Constant(n, 1.0 / g.radius)};
        }
        const int res = 3 << level;
        SampledSurface sampled = sample_mesh(AnalyticSurface::torus(g.radius, g.minor_radius), 2 * res, res);
        Eigen::VectorXd exact(sampled.mesh.num_vertices());
        for (int v = 0; v < exact.size(); ++v) exact(v) = sampled.jets[v]->mean_curvature;
        return {std::move(sampled.mesh), exact};
    };

    std::vector<double> identity, h_error;
    bool level4_ok = true;
    for (int level = g.level_min; level <= g.level_max; ++level) {
        const auto [mesh, exact] = fixture(level);
        const Eigen::VectorXd H = compute_mean_curvature(mesh);
        const double err = (H - exact).lpNorm<Eigen::Infinity>() / exact.lpNorm<Eigen::Infinity>();
        identity.push_back(curvature_identity_residual(mesh));
        h_error.push_back(err);
        if (kind == "sphere" && level == 4 && err > 0.02) level4_ok = false;
        csv << level << ',' << mesh.num_vertices() << ',' << mesh.num_faces() << ',' << fmt(mesh.mean_edge_length())
            << ',' << fmt(identity.back()) << ',' << fmt(err) << '\n';
        log << "level " << level << ": identity residual " << fmt(identity.back()) << ", H error " << fmt(err)
            << '\n';
    }
    const auto path = out.write("mesh_check.csv", csv.str());
    const bool ok = non_increasing(identity) && non_increasing(h_error) && level4_ok;
    log << (ok ? "PASS" : "FAIL") << " curvature convergence (" << path.string() << ")\n";
    return ok ? 0 : 1;
}

TetMesh ball_mesh(const RunConfig& config, int default_level, int default_layers)
{
    const auto& g = config.geometry;
    if (!g.kind.empty() && g.kind != "ball") {
        throw ConfigError("geometry.kind: " + config.command + " runs on a ball");
    }
    return build_ball_tetmesh(g.radius, g.level.value_or(default_level), g.layers.value_or(default_layers));
}

int run_gradcheck(const RunConfig& config, const Output& out, std::ostream& log)
{
    const BulkLagrangian bulk = make_bulk(config.bulk);
    const SurfaceLagrangian surf = make_surface(config.surface, bulk.components());
    const TetMesh mesh = ball_mesh(config, 1, 2);
    const double tol = config.checks.tolerance;

    std::ostringstream csv;
    csv << "check,trial,seed,max_relative_deviation,tolerance,status\n";
    bool ok = true;
    double worst = 0.0;
    auto row = [&](const std::string& check, int trial, std::uint64_t seed, double dev) {
        const bool pass = dev <= tol;
        ok = ok && pass;
        csv << check << ',' << trial << ',' << seed << ',' << fmt(dev) << ',' << fmt(tol) << ','
            << (pass ? "pass" : "fail") << '\n';
    };
    for (int t = 0; t < config.checks.trials; ++t) {
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(t);
        const FieldState state = random_state(mesh.num_vertices(), bulk.components(), seed);
        const GradientCheckReport r = gradient_check(mesh, bulk, surf, state);
        worst = std::max(worst, r.max_relative_deviation);
        row("action_gradient", t, seed, r.max_relative_deviation);
    }
    const int partial_trials = std::max(config.checks.trials, 20);
    row("bulk_partials", partial_trials, config.seed, check_partials(*bulk.density, partial_trials, config.seed).max_deviation());
    row("surface_partials", partial_trials, config.seed, check_partials(surf, partial_trials, config.seed).max_deviation());

    const auto path = out.write("gradcheck.csv", csv.str());
    log << bulk.name << " x " << surf.name << " on " << mesh.num_vertices() << " vertices: max relative deviation "
        << fmt(worst) << " over " << config.checks.trials << " states\n";
    log << (ok ? "PASS" : "FAIL") << " gradient check (" << path.string() << ")\n";
    return ok ? 0 : 1;
}

int run_solve(const RunConfig& config, const Output& out, std::ostream& log)
{
    const BulkLagrangian bulk = make_bulk(config.bulk);
    const int k = bulk.components();
    const SurfaceLagrangian surf = make_surface(config.surface, k);
    const TetMesh mesh = ball_mesh(config, default_ball_level, default_ball_layers);

    const SolveResult result = solve_stationary(mesh, bulk, surf, FieldState::zeros(mesh.num_vertices(), k), config.solver);
    const ResidualReport residuals = residual_report(mesh, bulk, surf, result.state);

    std::vector<VertexColumn> columns;
    for (int c = 0; c < k; ++c) {
        columns.push_back({"phi_" + std::to_string(c), result.state.values.col(c)});
    }
    std::ostringstream field;
    write_vertex_csv(field, mesh.vertices(), columns);
    const auto field_path = out.write("solve_field.csv", field.str());

    const auto& b = residuals.boundary;
    std::vector<VertexColumn> bcols;
    for (int c = 0; c < k; ++c) {
        const std::string s = "_" + std::to_string(c);
        bcols.push_back({"flux" + s, b.flux.col(c)});
        bcols.push_back({"rhs" + s, b.rhs.col(c)});
        bcols.push_back({"residual" + s, b.values.col(c)});
    }
    std::ostringstream boundary;
    write_vertex_csv(boundary, mesh.boundary().vertices(), bcols);
    out.write("solve_boundary.csv", boundary.str());

    json report;
    report["bulk"] = bulk.name;
    report["surface"] = surf.name;
    report["vertices"] = mesh.num_vertices();
    report["tetrahedra"] = mesh.num_tets();
    report["iterations"] = result.iterations;
    report["linear_iterations"] = result.linear_iterations;
    report["gradient_max_norm"] = result.gradient_max_norm;
    report["null_modes"] = result.null_modes;
    report["interior_residual"] = {{"l2", residuals.interior.l2_norm}, {"max", residuals.interior.max_norm}};
    report["boundary_residual"] = {{"l2", b.l2_norm}, {"max", b.max_norm}};
    report["log"] = result.log;
    out.write("solve_report.json", report.dump(2) + "\n");

    for (const auto& line : result.log) log << line << '\n';
    log << "boundary residual l2 " << fmt(b.l2_norm) << " max " << fmt(b.max_norm) << "; interior residual l2 "
        << fmt(residuals.interior.l2_norm) << " max " << fmt(residuals.interior.max_norm) << '\n';
    log << "PASS converged (" << field_path.string() << ")\n";
    return 0;
}

int run_tolman(const RunConfig& config, const Output& out, std::ostream& log)
{
    if (config.tolman.radii.empty()) throw ConfigError("tolman.radii: required");
    IsotropicSurfaceParams params;
    try {
        params = IsotropicSurfaceParams::make(config.tolman.sigma, config.tolman.tau);
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("tolman: ") + e.what());
    }
    TolmanCurve curve;
    try {
        curve = tolman_curve(params, config.tolman.radii);
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("tolman.radii: ") + e.what());
    }
    const auto path = out.write("tolman.csv", curve.to_csv());
    log << curve.rows.size() << " radii, delta = " << fmt(params.delta()) << " (" << path.string() << ")\n";
    return 0;
}

int run_verify(const RunConfig& config, const Output& out, std::ostream& log)
{
    ReductionOptions options;
    options.samples = config.checks.samples;
    options.seed = config.seed;
    options.discrete_level = config.geometry.level.value_or(options.discrete_level);
    const ReductionReport report = verify_reductions(options);
    out.write("verify.json", report.to_json() + "\n");
    out.write("verify.txt", report.to_text());
    log << report.to_text();
    log << (report.passed() ? "PASS" : "FAIL") << " reduction equivalences\n";
    return report.passed() ? 0 : 1;
}

} // namespace

// Config ------------------------------------------------------------------------------------

std::vector<double> parse_radii(const std::string& text)
{
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw ConfigError("radii '" + text + "': expected a:b:n");
        const double a = to_double(parts[0], "radii");
        const double b = to_double(parts[1], "radii");
        const int n = to_int(parts[2], "radii");
        if (n < 1) throw ConfigError("radii '" + text + "': need at least one value");
        std::vector<double> out(n);
        for (int i = 0; i < n; ++i) {
            out[i] = (i == n - 1 && n > 1) ? b : a + (b - a) * i / std::max(1, n - 1);
        }
        return out;
    }
    std::vector<double> out;
    for (const auto& item : split(text, ',')) out.push_back(to_double(item, "radii"));
    return out;
}

std::pair<int, int> parse_levels(const std::string& text)
{
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        const int l = to_int(text, "levels");
        return {l, l};
    }
    const int a = to_int(text.substr(0, dots), "levels");
    const int b = to_int(text.substr(dots + 2), "levels");
    if (a > b) throw ConfigError("levels '" + text + "': empty range");
    return {a, b};
}

RunConfig parse_config(const std::string& json_text)
{
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(root, {"command", "seed", "output_dir", "geometry", "bulk", "surface", "solver", "tolman", "checks"},
        "config");

    RunConfig c;
    c.command = get_string(root, "command", "config", "");
    if (!commands.count(c.command)) throw ConfigError("config.command: unknown command '" + c.command + "'");
    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned()) throw ConfigError("config.seed: expected a non-negative integer");
        c.seed = root["seed"].get<std::uint64_t>();
    }
    if (root.contains("output_dir")) c.output_dir = get_string(root, "output_dir", "config", "");

    if (root.contains("geometry")) {
        const auto& g = root["geometry"];
        const std::string w = "geometry";
        check_keys(g, {"kind", "radius", "minor_radius", "level", "levels", "layers", "path"}, w);
        c.geometry.kind = get_string(g, "kind", w, "");
        if (!c.geometry.kind.empty() && c.geometry.kind != "sphere" && c.geometry.kind != "torus"
            && c.geometry.kind != "ball" && c.geometry.kind != "file") {
            throw ConfigError("geometry.kind: unknown kind '" + c.geometry.kind + "'");
        }
        c.geometry.radius = get_number(g, "radius", w, c.geometry.radius);
        c.geometry.minor_radius = get_number(g, "minor_radius", w, c.geometry.minor_radius);
        if (g.contains("level")) c.geometry.level = get_int(g, "level", w, 0);
        if (g.contains("layers")) c.geometry.layers = get_int(g, "layers", w, 0);
        if (g.contains("levels")) {
            std::tie(c.geometry.level_min, c.geometry.level_max) = parse_levels(get_string(g, "levels", w, ""));
        }
        c.geometry.path = get_string(g, "path", w, "");
        if (c.geometry.kind == "file" && c.geometry.path.empty()) throw ConfigError("geometry.path: required");
    }
    if (root.contains("bulk")) c.bulk = parse_lagrangian(root["bulk"], "name", "bulk");
    if (root.contains("surface")) c.surface = parse_lagrangian(root["surface"], "form", "surface");
    if (root.contains("solver")) {
        const auto& s = root["solver"];
        check_keys(s, {"tolerance", "max_iterations", "gauge"}, "solver");
        c.solver.tolerance = get_number(s, "tolerance", "solver", c.solver.tolerance);
        c.solver.max_iterations = get_int(s, "max_iterations", "solver", c.solver.max_iterations);
        if (s.contains("gauge")) {
            if (!s["gauge"].is_boolean()) throw ConfigError("solver.gauge: expected a boolean");
            c.solver.gauge = s["gauge"].get<bool>();
        }
        if (!(c.solver.tolerance > 0.0) || c.solver.max_iterations < 1) {
            throw ConfigError("solver: tolerance and max_iterations must be positive");
        }
    }
    if (root.contains("tolman")) {
        const auto& t = root["tolman"];
        check_keys(t, {"sigma", "tau", "radii"}, "tolman");
        c.tolman.sigma = get_number(t, "sigma", "tolman", c.tolman.sigma);
        c.tolman.tau = get_number(t, "tau", "tolman", c.tolman.tau);
        if (t.contains("radii")) {
            const auto& r = t["radii"];
            if (r.is_string()) {
                c.tolman.radii = parse_radii(r.get<std::string>());
            } else if (r.is_array()) {
                for (const auto& x : r) {
                    if (!x.is_number()) throw ConfigError("tolman.radii: expected numbers");
                    c.tolman.radii.push_back(x.get<double>());
                }
            } else {
                throw ConfigError("tolman.radii: expected a string or an array");
            }
        }
    }
    if (root.contains("checks")) {
        const auto& k = root["checks"];
        check_keys(k, {"trials", "tolerance", "samples"}, "checks");
        c.checks.trials = get_int(k, "trials", "checks", c.checks.trials);
        c.checks.tolerance = get_number(k, "tolerance", "checks", c.checks.tolerance);
        c.checks.samples = get_int(k, "samples", "checks", c.checks.samples);
        if (c.checks.trials < 1 || c.checks.samples < 1 || !(c.checks.tolerance > 0.0)) {
            throw ConfigError("checks: trials, samples and tolerance must be positive");
        }
    }
    return c;
}

std::string RunConfig::canonical_json() const
{
    json g;
    g["kind"] = geometry.kind;
    g["radius"] = geometry.radius;
    g["minor_radius"] = geometry.minor_radius;
    g["level"] = geometry.level ? json(*geometry.level) : json(nullptr);
    g["levels"] = std::to_string(geometry.level_min) + ".." + std::to_string(geometry.level_max);
    g["layers"] = geometry.layers ? json(*geometry.layers) : json(nullptr);
    g["path"] = geometry.path;

    json j;
    j["command"] = command;
    j["seed"] = seed;
    j["geometry"] = g;
    j["bulk"] = lagrangian_json(bulk, "name");
    j["surface"] = lagrangian_json(surface, "form");
    j["solver"] = {{"tolerance", solver.tolerance}, {"max_iterations", solver.max_iterations}, {"gauge", solver.gauge}};
    j["tolman"] = {{"sigma", tolman.sigma}, {"tau", tolman.tau}, {"radii", tolman.radii}};
    j["checks"] = {{"trials", checks.trials}, {"tolerance", checks.tolerance}, {"samples", checks.samples}};
    return j.dump();
}

std::uint64_t RunConfig::hash() const
{
    return fnv1a(canonical_json());
}

BulkLagrangian make_bulk(const LagrangianSpec& spec)
{
    try {
        return builtin_bulk(spec.name, spec.parameters);
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("bulk: ") + e.what());
    }
}

SurfaceLagrangian make_surface(const LagrangianSpec& spec, int components)
{
    const std::string where = "surface " + spec.name;
    try {
        if (spec.name == "isotropic") {
            const auto p = with_defaults(spec, {{"sigma", 1.0}, {"tau", 0.0}}, where);
            return make_isotropic_surface(p.at("sigma"), p.at("tau"), components);
        }
        if (spec.name == "robin") {
            const auto p = with_defaults(spec, {{"beta", 1.0}}, where);
            return make_robin_surface(p.at("beta"), components);
        }
        if (spec.name == "free") {
            with_defaults(spec, {}, where);
            return make_free_surface(components);
        }
        if (spec.name == "neumann") {
            Eigen::VectorXd g(components);
            if (components == 1) {
                g(0) = with_defaults(spec, {{"g", 0.0}}, where).at("g");
            } else {
                const auto p = with_defaults(spec, {{"gx", 0.0}, {"gy", 0.0}, {"gz", 0.0}}, where);
                g << p.at("gx"), p.at("gy"), p.at("gz");
            }
            return make_neumann_surface(g);
        }
        if (spec.name == "restricted") {
            const auto p = with_defaults(spec, {{"bar", 0.0}, {"hat", 0.0}, {"chi", 0.0}, {"kappa", 0.0}}, where);
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(components, components);
            const Eigen::VectorXd zero = Eigen::VectorXd::Zero(components);
            auto channel = [&](double potential, double stress) {
                RestrictedChannel ch;
                ch.potential = ScalarPotential::quadratic(potential * I, zero);
                ch.channel_potential = ScalarPotential::zero(components);
                if (stress != 0.0) {
                    AffineTangentField f = AffineTangentField::rotation(Vec3::UnitZ());
                    f.linear *= stress;
                    ch.stress.assign(static_cast<size_t>(components), f);
                }
                return ch;
            };
            RestrictedForm form;
            form.components = components;
            form.base = channel(p.at("bar"), p.at("chi"));
            form.curvature = channel(p.at("hat"), p.at("kappa"));
            return make_restricted_surface(form);
        }
    } catch (const ParameterError& e) {
        throw ConfigError(where + ": " + e.what());
    } catch (const DimensionError& e) {
        throw ConfigError(where + ": " + e.what());
    }
    throw ConfigError("surface.form: unknown form '" + spec.name + "'");
}

int execute(const RunConfig& config, std::ostream& log)
{
    Output out{config.output_dir.value_or(default_output_dir()), provenance_line(config.hash(), config.seed)};
    if (config.command == "mesh-check") return run_mesh_check(config, out, log);
    if (config.command == "gradcheck") return run_gradcheck(config, out, log);
    if (config.command == "solve") return run_solve(config, out, log);
    if (config.command == "tolman") return run_tolman(config, out, log);
    if (config.command == "verify") return run_verify(config, out, log);
    throw ConfigError("unknown command '" + config.command + "'");
}

int run(int argc, char** argv)
{
    CLI::App app{"curvbc: natural boundary conditions with curvature-dependent surface Lagrangians"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    std::optional<std::string> config_path, out_dir;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_dir, "output directory (default $CURVBC_OUT or the working directory)");
    app.add_option("--seed", seed, "seed of randomized trials (default 0)");

    std::optional<std::string> bulk, surface, levels, mesh, radii;
    std::optional<double> radius, minor_radius, tolerance, sigma, tau;
    std::optional<int> level, layers, trials, max_iterations, samples;
    bool gauge = false;

    auto* mesh_check = app.add_subcommand("mesh-check", "curvature identity and convergence table");
    mesh_check->add_option("--surface", surface, "sphere or torus");
    mesh_check->add_option("--radius", radius, "sphere radius or torus major radius");
    mesh_check->add_option("--minor-radius", minor_radius, "torus minor radius");
    mesh_check->add_option("--levels", levels, "refinement levels, e.g. 2..5");
    mesh_check->add_option("--mesh", mesh, "OFF/OBJ file instead of an analytic surface");

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the action gradient");
    auto* solve = app.add_subcommand("solve", "stationary solve with residual report");
    for (auto* sub : {gradcheck, solve}) {
        sub->add_option("--bulk", bulk, "bulk Lagrangian, e.g. poisson_source:6");
        sub->add_option("--surface", surface, "surface Lagrangian, e.g. isotropic:1,0.1 or robin:1");
        sub->add_option("--ball", radius, "ball radius");
        sub->add_option("--level", level, "icosphere level of the ball surface");
        sub->add_option("--layers", layers, "radial shells of the ball");
    }
    gradcheck->add_option("--trials", trials, "random states");
    gradcheck->add_option("--tolerance", tolerance, "pass threshold of the relative deviation");
    solve->add_option("--tolerance", tolerance, "gradient max-norm tolerance");
    solve->add_option("--max-iterations", max_iterations, "Newton iterations");
    solve->add_flag("--gauge", gauge, "pin constant and rigid null modes");

    auto* tolman = app.add_subcommand("tolman", "Tolman pressure curve");
    tolman->add_option("--sigma", sigma, "surface tension");
    tolman->add_option("--tau", tau, "curvature coefficient");
    tolman->add_option("--radii", radii, "a:b:n or a comma separated list");

    auto* verify = app.add_subcommand("verify", "reduction equivalence report");
    verify->add_option("--samples", samples, "sample points per fixture");
    verify->add_option("--level", level, "icosphere level of the discrete row");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    RunConfig config;
    try {
        json root = json::object();
        if (config_path) {
            std::ifstream in(*config_path);
            if (!in) throw ConfigError("cannot read config " + *config_path);
            std::stringstream buf;
            buf << in.rdbuf();
            try {
                root = json::parse(buf.str());
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("config is not valid JSON: ") + e.what());
            }
            if (!root.is_object()) throw ConfigError("config: expected an object");
        }
        if (!app.get_subcommands().empty()) {
            root["command"] = app.get_subcommands().front()->get_name();
        } else if (!root.contains("command") || !root["command"].is_string()) {
            throw ConfigError("no command: give a subcommand or a config with \"command\"");
        }
        const std::string command = root["command"].get<std::string>();
        auto section = [&](const char* key) -> json& {
            if (!root.contains(key)) root[key] = json::object();
            return root[key];
        };
        if (seed) root["seed"] = *seed;
        if (out_dir) root["output_dir"] = *out_dir;
        if (command == "mesh-check") {
            if (surface) section("geometry")["kind"] = *surface;
            if (mesh) {
                section("geometry")["kind"] = "file";
                section("geometry")["path"] = *mesh;
            }
            if (levels) section("geometry")["levels"] = *levels;
        } else if (command == "gradcheck" || command == "solve") {
            if (bulk) root["bulk"] = lagrangian_flag(*bulk, "bulk", "name");
            if (surface) root["surface"] = lagrangian_flag(*surface, "surface", "form");
            if (radius) section("geometry")["kind"] = "ball";
        }
        if (radius) section("geometry")["radius"] = *radius;
        if (minor_radius) section("geometry")["minor_radius"] = *minor_radius;
        if (level) section("geometry")["level"] = *level;
        if (layers) section("geometry")["layers"] = *layers;
        if (trials) section("checks")["trials"] = *trials;
        if (samples) section("checks")["samples"] = *samples;
        if (tolerance) section(command == "solve" ? "solver" : "checks")["tolerance"] = *tolerance;
        if (max_iterations) section("solver")["max_iterations"] = *max_iterations;
        if (gauge) section("solver")["gauge"] = true;
        if (sigma) section("tolman")["sigma"] = *sigma;
        if (tau) section("tolman")["tau"] = *tau;
        if (radii) section("tolman")["radii"] = *radii;
        config = parse_config(root.dump());
        if (config.command == "gradcheck" || config.command == "solve") {
            make_surface(config.surface, make_bulk(config.bulk).components());
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    try {
        return execute(config, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n' << e.log();
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace curvbc::cli
