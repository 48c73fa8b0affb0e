// grh: command-line front end for metric queries, suites and slice grids.
//
// Exit codes: 0 ok, 2 domain/point error, 3 config error, 4 suite failure.

#include "grhilbert/grhilbert.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using grh::Json;
using grh::Matrix;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 2;
constexpr int kExitConfig = 3;
constexpr int kExitSuite = 4;

struct Options {
    std::string config_path;
    std::string config_inline;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "json";
    double budget_scale = 1.0;
    double tol_scale = 1.0;
    bool timing = false;
};

struct SuiteFailure : grh::Error {
    using grh::Error::Error;
};

Json load_config(const Options& o)
{
    std::string text = o.config_inline;
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw grh::DescriptorError("cannot read config " + o.config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    if (text.empty()) throw grh::DescriptorError("no config given (--config PATH or --json TEXT)");
    try {
        Json j = Json::parse(text);
        if (!j.is_object()) throw grh::DescriptorError("config must be a JSON object");
        return j;
    } catch (const Json::parse_error& e) {
        throw grh::DescriptorError(std::string("malformed config JSON: ") + e.what());
    }
}

int scaled(int n, double s) { return std::max(1, static_cast<int>(std::lround(n * s))); }

std::uint64_t resolve_seed(const Options& o, const Json& cfg)
{
    if (o.seed) return *o.seed;
    if (cfg.contains("seed")) {
        if (!cfg["seed"].is_number_unsigned()) throw grh::DescriptorError("seed must be a nonnegative integer");
        return cfg["seed"].get<std::uint64_t>();
    }
    return 1;
}

grh::MetricBudget metric_budget(const Json& cfg, const Options& o, std::uint64_t seed)
{
    grh::MetricBudget b;
    if (cfg.contains("budget")) {
        const Json& j = cfg["budget"];
        grh::reject_unknown(j, {"max_segments", "grid", "golden_iterations", "sweeps", "passes", "restarts"}, "budget");
        b.max_segments = grh::int_field(j, "max_segments", "budget", b.max_segments);
        b.grid = grh::int_field(j, "grid", "budget", b.grid);
        b.golden_iterations = grh::int_field(j, "golden_iterations", "budget", b.golden_iterations);
        b.sweeps = grh::int_field(j, "sweeps", "budget", b.sweeps);
        b.passes = grh::int_field(j, "passes", "budget", b.passes);
        b.restarts = grh::int_field(j, "restarts", "budget", b.restarts);
    }
    b.grid = scaled(b.grid, o.budget_scale);
    b.golden_iterations = scaled(b.golden_iterations, o.budget_scale);
    b.restarts = static_cast<int>(std::lround(b.restarts * o.budget_scale));
    b.seed = seed;
    return b;
}

grh::RProperBudget rproper_budget(const Options& o, std::uint64_t seed, double extra = 1.0)
{
    grh::RProperBudget b;
    b.random_starts = scaled(b.random_starts, o.budget_scale * extra);
    b.local_iterations = scaled(b.local_iterations, o.budget_scale * extra);
    b.seed = seed;
    return b;
}

grh::ExtremeBudget extreme_budget(const Options& o, std::uint64_t seed)
{
    grh::ExtremeBudget b;
    b.samples = scaled(b.samples, o.budget_scale);
    b.descent_iterations = scaled(b.descent_iterations, o.budget_scale);
    b.seed = seed + 10;
    return b;
}

double tol_field(const Json& cfg, const char* key, double fallback, const Options& o)
{
    double v = fallback;
    if (cfg.contains("tolerances")) {
        const Json& t = cfg["tolerances"];
        if (t.contains(key)) v = grh::real_from_json(t[key], key);
    }
    return v * o.tol_scale;
}

Json envelope(const std::string& command, const Json& cfg, std::uint64_t seed)
{
    Json j;
    j["tool"] = "grh";
    j["version"] = GRHILBERT_VERSION;
    j["command"] = command;
    j["seed"] = seed;
    j["config"] = cfg;
    return j;
}

void write_output(const Options& o, const std::string& text)
{
    if (o.out.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    const std::filesystem::path target(o.out);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw grh::DescriptorError("cannot write " + tmp.string());
        f << text;
        if (!f) throw grh::DescriptorError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

// ---------------------------------------------------------------------------

int cmd_metric(const Options& o)
{
    const Json cfg = load_config(o);
    grh::reject_unknown(cfg, {"domain", "x", "y", "seed", "budget", "tolerances"}, "metric config");
    const std::uint64_t seed = resolve_seed(o, cfg);
    const grh::BodyPtr body = grh::parse_body(grh::required(cfg, "domain", "metric config"));
    const Matrix x = grh::chart_matrix_from_json(grh::required(cfg, "x", "metric config"), body->shape, "x");
    const Matrix y = grh::chart_matrix_from_json(grh::required(cfg, "y", "metric config"), body->shape, "y");
    const grh::MetricBudget budget = metric_budget(cfg, o, seed);

    const auto start = std::chrono::steady_clock::now();
    const grh::MetricEstimate est = grh::k_estimate(*body, x, y, budget);
    const double lower = grh::hilbert_lower_bound(*body, x, y);
    const grh::RhoValue r = grh::rho(*body, x, y);

    Json out = envelope("metric", cfg, seed);
    out["domain"] = grh::body_json(*body);
    Json res = grh::estimate_json(est);
    res["hilbert_lower_bound"] = grh::number_json(lower);
    res["rho"] = grh::number_json(r.value);
    out["result"] = std::move(res);
    if (o.timing) out["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_output(o, grh::dump_json(out));
    return kExitOk;
}

struct SuiteOutcome {
    Json report;
    std::string csv;
    std::string failure;  // first failed invariant, empty when all hold
};

std::vector<Matrix> points_field(const Json& cfg, const char* key, grh::ChartShape shape)
{
    const Json& arr = grh::required(cfg, key, "suite config");
    if (!arr.is_array() || arr.empty()) throw grh::DescriptorError(std::string(key) + " must be a nonempty array");
    std::vector<Matrix> pts;
    for (const auto& j : arr) pts.push_back(grh::chart_matrix_from_json(j, shape, key));
    return pts;
}

std::vector<double> reals_field(const Json& cfg, const char* key, std::vector<double> fallback)
{
    if (!cfg.contains(key)) return fallback;
    const Json& arr = cfg[key];
    if (!arr.is_array() || arr.empty()) throw grh::DescriptorError(std::string(key) + " must be a nonempty array");
    std::vector<double> v;
    for (const auto& e : arr) v.push_back(grh::real_from_json(e, key));
    return v;
}

SuiteOutcome suite_rproper(const Json& cfg, const Options& o, std::uint64_t seed)
{
    grh::reject_unknown(cfg, {"domain", "expect", "seed", "budget", "tolerances"}, "rproper config");
    const grh::BodyPtr body = grh::parse_body(grh::required(cfg, "domain", "rproper config"));
    const grh::RProperVerdict v = grh::is_r_proper(*body, rproper_budget(o, seed));
    SuiteOutcome s;
    s.report = grh::verdict_json(v);
    s.csv = grh::csv_row({"status", "candidates_tested", "best_score"}) +
            grh::csv_row({grh::to_string(v.status), std::to_string(v.candidates_tested), grh::format_number(v.best_score)});
    if (cfg.contains("expect")) {
        const std::string want = cfg["expect"].get<std::string>();
        if (want != "NoViolationFound" && want != "ViolationWitness") throw grh::DescriptorError("expect must name a verdict");
        if (want != grh::to_string(v.status)) s.failure = "verdict " + std::string(grh::to_string(v.status)) + " differs from expected " + want;
    }
    return s;
}

SuiteOutcome suite_extreme(const Json& cfg, const Options& o, std::uint64_t seed)
{
    grh::reject_unknown(cfg, {"domain", "points", "expect", "seed", "budget", "tolerances"}, "extreme config");
    const grh::BodyPtr body = grh::parse_body(grh::required(cfg, "domain", "extreme config"));
    const auto pts = points_field(cfg, "points", body->shape);
    grh::ExtremeSuiteBudget b;
    b.rproper = rproper_budget(o, seed);
    b.extreme = extreme_budget(o, seed);
    b.adjacency_random_directions = scaled(b.adjacency_random_directions, o.budget_scale);
    const auto rows = grh::extreme_equivalence_suite(body, pts, b);
    SuiteOutcome s;
    Json arr = Json::array();
    for (const auto& r : rows) arr.push_back(grh::extreme_row_json(r));
    s.report["rows"] = std::move(arr);
    s.csv = grh::extreme_csv(rows);
    for (std::size_t i = 0; i < rows.size() && s.failure.empty(); ++i)
        if (!rows[i].consistent()) s.failure = "row " + std::to_string(i) + " has inconsistent verdicts";
    if (cfg.contains("expect")) {
        const Json& e = cfg["expect"];
        if (!e.is_array() || e.size() != rows.size()) throw grh::DescriptorError("expect must list one boolean per point");
        for (std::size_t i = 0; i < rows.size() && s.failure.empty(); ++i)
            if (e[i].get<bool>() != rows[i].extreme()) s.failure = "row " + std::to_string(i) + " extreme verdict differs from expected";
    }
    return s;
}

SuiteOutcome suite_converge(const Json& cfg, const Options& o, std::uint64_t seed)
{
    grh::reject_unknown(cfg, {"domain", "mode", "point", "t_grid", "radius", "directions", "probe_count", "lambdas", "seed", "budget",
                              "tolerances"},
                        "converge config");
    const grh::BodyPtr body = grh::parse_body(grh::required(cfg, "domain", "converge config"));
    const std::string mode = cfg.value("mode", std::string("tangent"));
    const grh::MetricBudget budget = metric_budget(cfg, o, seed);
    const int probe_count = grh::int_field(cfg, "probe_count", "converge config", 8);
    SuiteOutcome s;
    if (mode == "tangent") {
        const Matrix e = grh::chart_matrix_from_json(grh::required(cfg, "point", "converge config"), body->shape, "point");
        const auto ts = reals_field(cfg, "t_grid", {0, 1, 2, 3, 4, 5, 6, 7, 8});
        grh::TangentConvergenceOptions opt;
        opt.radius = cfg.contains("radius") ? grh::real_from_json(cfg["radius"], "radius") : 2.0;
        opt.directions = grh::int_field(cfg, "directions", "converge config", 256);
        opt.seed = seed + 6;
        opt.budget = budget;
        const grh::BodyPtr cone = grh::tangent_cone(body, e);
        const Matrix center = e + 0.5 * (body->interior - e);
        const auto probes = grh::default_probe_pairs(*cone, center, probe_count, 2.0, seed + 22);
        const auto rep = grh::tangent_cone_convergence(body, e, ts, probes, opt);
        s.report = grh::convergence_json(rep);
        s.csv = grh::convergence_csv(rep);
        const double tol = tol_field(cfg, "final_hausdorff", 0.05, o);
        for (std::size_t i = 2; i < rep.hausdorff_values.size() && s.failure.empty(); ++i)
            if (rep.hausdorff_values[i] > rep.hausdorff_values[i - 1] * (1.0 + 1e-12))
                s.failure = "hausdorff values increase at t = " + grh::format_number(ts[i]);
        if (s.failure.empty() && rep.hausdorff_values.back() > tol) s.failure = "final hausdorff value above tolerance";
        if (s.failure.empty() && rep.metric_disagreements.back() > tol_field(cfg, "final_metric", 5e-2, o))
            s.failure = "final metric disagreement above tolerance";
    } else if (mode == "nested") {
        const auto lambdas = reals_field(cfg, "lambdas", {2.0, 1.5, 1.25, 1.125, 1.0625});
        const auto probes = grh::default_probe_pairs(*body, body->interior, probe_count, 2.0, seed + 22);
        const auto rep = grh::nested_body_metric_convergence(body, lambdas, probes, budget);
        s.report = grh::convergence_json(rep);
        s.csv = grh::convergence_csv(rep);
        if (rep.verdict != grh::ConvergenceReport::Verdict::ConvergentTrend) s.failure = "metric disagreements show no convergent trend";
    } else {
        throw grh::DescriptorError("mode must be 'tangent' or 'nested'");
    }
    return s;
}

SuiteOutcome suite_pnotq(const Json& cfg, const Options& o, std::uint64_t seed)
{
    grh::reject_unknown(cfg, {"p", "q", "control_budget_factor", "seed", "budget", "tolerances"}, "pnotq config");
    const int p = grh::int_field(cfg, "p", "pnotq config");
    const int q = grh::int_field(cfg, "q", "pnotq config");
    const double factor = p == q ? (cfg.contains("control_budget_factor") ? grh::real_from_json(cfg["control_budget_factor"], "factor") : 10.0) : 1.0;
    const auto res = grh::pnotq_failure_demo(p, q, rproper_budget(o, seed, factor));
    SuiteOutcome s;
    s.report["point"] = grh::matrix_json(res.point);
    s.report["verdict"] = grh::verdict_json(res.verdict);
    s.csv = grh::csv_row({"p", "q", "status"}) + grh::csv_row({std::to_string(p), std::to_string(q), grh::to_string(res.verdict.status)});
    if (p != q && !res.verdict.violated()) s.failure = "no rank-one line found in the tangent cone";
    if (p == q && res.verdict.violated()) s.failure = "control found a rank-one line";
    return s;
}

SuiteOutcome suite_isometry(const Json& cfg, const Options& o, std::uint64_t seed)
{
    grh::reject_unknown(cfg, {"p", "generators", "samples", "pairs", "seed", "budget", "tolerances"}, "isometry config");
    const int p = grh::int_field(cfg, "p", "isometry config", 2);
    const int gens = grh::int_field(cfg, "generators", "isometry config", 5);
    const int samples = grh::int_field(cfg, "samples", "isometry config", 200);
    const int pairs = grh::int_field(cfg, "pairs", "isometry config", 10);
    const double rho_tol = tol_field(cfg, "rho", 1e-8, o);
    const grh::ChartShape shape(p, p);
    const grh::BodyPtr ball = grh::operator_ball(shape);
    grh::Rng rng(seed);

    grh::CheckReport preserved;
    preserved.check = "ball_preserved";
    preserved.p = p;
    grh::CheckReport invariance;
    invariance.check = "rho_invariance";
    invariance.p = p;
    invariance.convention["tolerance"] = grh::format_number(rho_tol);
    for (int g = 0; g < gens; ++g) {
        const auto gen = grh::random_so_pp(p, seed * 1000 + static_cast<std::uint64_t>(g));
        const grh::ProjectiveTransform t(shape, grh::expm(gen.element));
        const auto rep = grh::verify_ball_preserved(t, samples, seed + static_cast<std::uint64_t>(g));
        preserved.samples += rep.samples;
        preserved.violations += rep.violations;
        preserved.max_defect = std::max(preserved.max_defect, rep.max_defect);
        preserved.convention = rep.convention;
        for (int k = 0; k < pairs; ++k) {
            const Matrix x = grh::sample_ball(shape, 1, rng).front() * 0.9;
            Matrix y = x + 0.3 * rng.unit_vector(p) * rng.unit_vector(p).transpose();
            if (!ball->contains(y)) y = x + 0.5 * (y - x);
            if (!ball->contains(y)) continue;
            ++invariance.samples;
            const double d = std::abs(grh::rho(*ball, x, y).value -
                                      grh::rho(*ball, grh::apply_transform(t, x), grh::apply_transform(t, y)).value);
            invariance.max_defect = std::max(invariance.max_defect, d);
            if (d > rho_tol) ++invariance.violations;
        }
    }
    SuiteOutcome s;
    s.report["checks"] = Json::array({grh::check_json(preserved), grh::check_json(invariance)});
    s.csv = grh::csv_row({"check", "samples", "violations", "max_defect"});
    for (const auto* c : {&preserved, &invariance})
        s.csv += grh::csv_row({c->check, std::to_string(c->samples), std::to_string(c->violations), grh::format_number(c->max_defect)});
    if (!preserved.ok()) s.failure = "sampled ball points left the ball";
    else if (!invariance.ok()) s.failure = "rho changed under the action beyond tolerance";
    return s;
}

int cmd_suite(const Options& o, const std::string& name)
{
    const Json cfg = load_config(o);
    const std::uint64_t seed = resolve_seed(o, cfg);
    const auto start = std::chrono::steady_clock::now();
    SuiteOutcome s;
    if (name == "rproper") s = suite_rproper(cfg, o, seed);
    else if (name == "extreme") s = suite_extreme(cfg, o, seed);
    else if (name == "converge") s = suite_converge(cfg, o, seed);
    else if (name == "pnotq") s = suite_pnotq(cfg, o, seed);
    else if (name == "isometry") s = suite_isometry(cfg, o, seed);
    else throw grh::DescriptorError("unknown suite '" + name + "'");

    if (o.format == "csv") {
        write_output(o, s.csv);
    } else {
        Json out = envelope("suite " + name, cfg, seed);
        out["report"] = std::move(s.report);
        out["passed"] = s.failure.empty();
        if (!s.failure.empty()) out["first_failure"] = s.failure;
        if (o.timing) out["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_output(o, grh::dump_json(out));
    }
    if (!s.failure.empty()) {
        std::cerr << "suite " << name << " failed: " << s.failure << '\n';
        return kExitSuite;
    }
    return kExitOk;
}

int cmd_plot_slice(const Options& o)
{
    const Json cfg = load_config(o);
    grh::reject_unknown(cfg, {"domain", "center", "u", "v", "grid", "seed", "budget", "tolerances"}, "plot-slice config");
    const std::uint64_t seed = resolve_seed(o, cfg);
    const grh::BodyPtr body = grh::parse_body(grh::required(cfg, "domain", "plot-slice config"));
    const Matrix c = grh::chart_matrix_from_json(grh::required(cfg, "center", "plot-slice config"), body->shape, "center");
    const Matrix u = grh::chart_matrix_from_json(grh::required(cfg, "u", "plot-slice config"), body->shape, "u");
    const Matrix v = cfg.contains("v") ? grh::chart_matrix_from_json(cfg["v"], body->shape, "v")
                                       : Matrix(Matrix::Zero(body->shape.q, body->shape.p));
    const Json& grid = grh::required(cfg, "grid", "plot-slice config");
    grh::reject_unknown(grid, {"n_u", "n_v", "extent"}, "grid");
    const int nu = grh::int_field(grid, "n_u", "grid");
    const int nv = grh::int_field(grid, "n_v", "grid", 1);
    const double extent = grh::real_from_json(grh::required(grid, "extent", "grid"), "extent");
    if (nu < 1 || nv < 1) throw grh::DescriptorError("grid sizes must be positive");
    if (v.norm() > 0) {
        Matrix both(u.size(), 2);
        both.col(0) = Eigen::Map<const grh::Vector>(u.data(), u.size());
        both.col(1) = Eigen::Map<const grh::Vector>(v.data(), v.size());
        if (grh::numerical_rank(both) < 2) throw grh::DescriptorError("slice directions must be independent");
    }
    if (!body->contains(c)) throw grh::PointOutside("slice center not in " + body->label);
    const grh::MetricBudget budget = metric_budget(cfg, o, seed);

    auto coord = [extent](int i, int n) { return n == 1 ? 0.0 : -extent + 2.0 * extent * i / (n - 1); };
    std::string csv = grh::csv_row({"i", "j", "u", "v", "inside", "k_hat", "h_lower"});
    Json cells = Json::array();
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            const double a = coord(i, nu);
            const double b = coord(j, nv);
            const Matrix y = c + a * u + b * v;
            const bool inside = body->contains(y);
            std::string k, h;
            Json cell;
            cell["i"] = i;
            cell["j"] = j;
            cell["u"] = grh::number_json(a);
            cell["v"] = grh::number_json(b);
            cell["inside"] = inside;
            if (inside) {
                const double kv = grh::k_estimate(*body, c, y, budget).value;
                const double hv = grh::hilbert_lower_bound(*body, c, y);
                k = grh::format_number(kv);
                h = grh::format_number(hv);
                cell["k_hat"] = grh::number_json(kv);
                cell["h_lower"] = grh::number_json(hv);
            }
            csv += grh::csv_row({std::to_string(i), std::to_string(j), grh::format_number(a), grh::format_number(b), inside ? "1" : "0", k, h});
            cells.push_back(std::move(cell));
        }
    }
    if (o.format == "json") {
        Json out = envelope("plot-slice", cfg, seed);
        out["cells"] = std::move(cells);
        write_output(o, grh::dump_json(out));
    } else {
        write_output(o, csv);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Generalized Hilbert metric on Grassmannian convex domains"};
    app.set_version_flag("--version", std::string(GRHILBERT_VERSION));
    Options o;
    std::uint64_t seed_value = 0;
    app.add_option("--config", o.config_path, "JSON config file");
    app.add_option("--json", o.config_inline, "JSON config text (instead of --config)");
    auto* seed_opt = app.add_option("--seed", seed_value, "random seed (overrides the config)");
    app.add_option("--out", o.out, "output path (stdout if omitted)");
    app.add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--budget-scale", o.budget_scale, "multiplier on search budgets")->check(CLI::PositiveNumber);
    app.add_option("--tol-scale", o.tol_scale, "multiplier on pass/fail tolerances")->check(CLI::PositiveNumber);
    app.add_flag("--timing", o.timing, "include wall-clock time in reports");
    app.require_subcommand(1);

    auto* metric = app.add_subcommand("metric", "K-hat, rho and the Hilbert lower bound for a pair of points");
    auto* suite = app.add_subcommand("suite", "run a check suite");
    std::string suite_name;
    suite->add_option("name", suite_name, "rproper | extreme | converge | pnotq | isometry")
        ->required()
        ->check(CLI::IsMember({"rproper", "extreme", "converge", "pnotq", "isometry"}));
    auto* slice = app.add_subcommand("plot-slice", "metric values on a 2-D grid through a center point");
    app.fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    if (*seed_opt) o.seed = seed_value;

    try {
        if (*metric) return cmd_metric(o);
        if (*suite) return cmd_suite(o, suite_name);
        if (*slice) return cmd_plot_slice(o);
    } catch (const grh::DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const grh::DescriptorError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const grh::Error& e) {
        std::cerr << "suite error: " << e.what() << '\n';
        return kExitSuite;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitConfig;
}
