// Command-line runner: one subcommand per experiment type, configured by a
// JSON file. Exit codes: 0 success, 1 failure, 2 blow-up detected, 3 bad input.
#include "schouten/blowup.hpp"
#include "schouten/continuation.hpp"
#include "schouten/errors.hpp"
#include "schouten/io.hpp"
#include "schouten/studies.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace schouten;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitBlowup = 2;
constexpr int kExitInput = 3;

// Timestamps go to a sidecar log so that reports stay byte-identical.
void log_line(const fs::path& dir, const std::string& msg) {
    fs::create_directories(dir);
    std::ofstream log(dir / "run.log", std::ios::app);
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", std::gmtime(&now));
    log << buf << "Z " << msg << '\n';
}

json report_header(const std::string& command, const RunConfig& c) {
    return json{{"command", command}, {"config", to_json(c)}};
}

int cmd_verify_symfunc(const RunConfig& c) {
    const fs::path dir = output_directory(c);
    const SymFuncSpec spec = c.function();
    const ConditionReport r = verify_conditions(spec, c.verify_samples, c.seed);
    json out = report_header("verify-symfunc", c);
    out["function"] = spec.name();
    out["report"] = to_json(r);
    write_json(dir / "verify_symfunc.json", out);
    log_line(dir, "verify-symfunc " + spec.name() + (r.all_pass() ? " pass" : " FAIL"));
    std::cout << spec.name() << ": " << (r.all_pass() ? "pass" : "FAIL") << " (rho bound " << r.rho << ")\n";
    return r.all_pass() ? kExitOk : kExitFail;
}

int cmd_curvature_check(const RunConfig& c) {
    const fs::path dir = output_directory(c);
    const CurvatureStudy s =
        curvature_study([&](int N) { return c.chart(N); }, c.metric_recipe(), c.curvature_resolutions);
    json out = report_header("curvature-check", c);
    out["study"] = json{{"recipe", s.recipe},
                        {"resolutions", s.resolutions},
                        {"spacing", s.spacing},
                        {"oracle_error", s.oracle_error},
                        {"oracle_rms", s.oracle_rms},
                        {"compared_nodes", s.compared_nodes},
                        {"order_checked", s.order_checked},
                        {"order", s.order},
                        {"flat", s.flat},
                        {"flat_residue", s.flat_residue},
                        {"sphere", s.sphere},
                        {"sphere_deviation", s.sphere_deviation},
                        {"sphere_bound", s.sphere_bound},
                        {"pass", s.pass}};
    write_json(dir / "curvature_check.json", out);
    log_line(dir, "curvature-check " + s.recipe + (s.pass ? " pass" : " FAIL"));
    std::cout << s.recipe << ": oracle error";
    for (double e : s.oracle_error) std::cout << ' ' << e;
    if (s.order_checked) std::cout << ", order " << s.order;
    std::cout << (s.pass ? " pass" : " FAIL") << '\n';
    return s.pass ? kExitOk : kExitFail;
}

int cmd_continue(const RunConfig& c) {
    const fs::path dir = output_directory(c);
    const Problem p = build_problem(c);
    log_line(dir, "continue started");
    const RunOutcome o = run_path(p, c.solver);
    write_history(dir / "history.jsonl", o.history, c.dump_fields);
    if (c.dump_fields) write_field(dir / "final_field.csv", p.metric.chart, o.final_state.u);
    json out = report_header("continue", c);
    out["outcome"] = to_string(o.kind);
    out["message"] = o.message;
    out["accepted_states"] = o.history.size();
    out["final_state"] = to_json(o.final_state, false);
    if (o.kind == OutcomeKind::blowup_detected) {
        BlowupReport b = analyze_blowup(o.final_state.u, p.metric.chart, c.blowup_threshold_analysis);
        out["blowup"] = to_json(b);
        write_profile(dir / "blowup_profile.csv", b.profile);
    }
    write_json(dir / "continue_report.json", out);
    log_line(dir, "continue finished: " + to_string(o.kind));
    std::cout << to_string(o.kind) << " at t=" << o.final_state.t << ": " << o.message << '\n';
    switch (o.kind) {
        case OutcomeKind::converged_t1: return kExitOk;
        case OutcomeKind::blowup_detected: return kExitBlowup;
        case OutcomeKind::step_failure: return kExitFail;
    }
    return kExitFail;
}

int cmd_blowup_analyze(const RunConfig& c, const std::string& history, const std::string& field, bool monitor) {
    const fs::path dir = output_directory(c);
    const GridChart chart = c.chart();
    std::vector<double> u;
    if (!field.empty()) {
        u = read_field(field);
    } else {
        const auto states = read_history(history);
        for (auto it = states.rbegin(); it != states.rend(); ++it)
            if (!it->u.empty()) {
                u = it->u;
                break;
            }
        if (u.empty()) throw ArgumentError("history " + history + " holds no dumped fields");
    }
    if (u.size() != chart.node_count()) throw ArgumentError("field does not match the configured chart");
    BlowupReport b = analyze_blowup(u, chart, c.blowup_threshold_analysis);
    if (monitor) {
        const MonitorReport m = estimate_monitor(u, build_problem(c));
        b.monitor_radii = m.radii;
        b.monitor_ratios = m.per_radius;
    }
    json out = report_header("blowup-analyze", c);
    out["source"] = field.empty() ? history : field;
    out["report"] = to_json(b);
    write_json(dir / "blowup_report.json", out);
    write_profile(dir / "blowup_profile.csv", b.profile);
    log_line(dir, std::string("blowup-analyze ") + (b.blowup ? "blow-up" : "no blow-up"));
    std::cout << (b.blowup ? "blow-up" : "no blow-up") << ": min u " << b.min_u << ", slope " << b.fit.slope << '\n';
    return kExitOk;
}

int cmd_double(const RunConfig& c, const std::string& field) {
    const fs::path dir = output_directory(c);
    const GridChart chart = c.chart();
    const auto u = read_field(field);
    if (u.size() != chart.node_count()) throw ArgumentError("field does not match the configured chart");
    const DoubledField d = double_field(chart, u);
    write_field(dir / "doubled_field.csv", d.chart, d.values);
    log_line(dir, "double " + field);
    std::cout << "doubled " << u.size() << " -> " << d.values.size() << " nodes\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prescribed Schouten-curvature solver and diagnostics"};
    app.require_subcommand(1);
    std::string config_path, history, field;
    bool monitor = false;

    auto* verify = app.add_subcommand("verify-symfunc", "Check conditions C1-C6 of the configured curvature function");
    auto* curv = app.add_subcommand("curvature-check", "Compare curvature against the finite-difference oracle");
    auto* cont = app.add_subcommand("continue", "Run the continuation path from t = 0 to t = 1");
    auto* blow = app.add_subcommand("blowup-analyze", "Locate a blow-up point and fit its log profile");
    auto* dbl = app.add_subcommand("double", "Reflect a Neumann field across the boundary");
    for (auto* sub : {verify, curv, cont, blow, dbl})
        sub->add_option("-c,--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
    auto* hist_opt = blow->add_option("--history", history, "history JSONL written by `continue`");
    auto* field_opt = blow->add_option("--field", field, "field CSV instead of a history");
    hist_opt->excludes(field_opt);
    blow->add_flag("--monitor", monitor, "also evaluate the local-estimate monitor");
    dbl->add_option("--field", field, "field CSV")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }
    if (blow->parsed() && history.empty() && field.empty()) {
        std::cerr << "blowup-analyze needs --history or --field\n";
        return kExitInput;
    }

    try {
        const RunConfig c = load_config(config_path);
        if (verify->parsed()) return cmd_verify_symfunc(c);
        if (curv->parsed()) return cmd_curvature_check(c);
        if (cont->parsed()) return cmd_continue(c);
        if (blow->parsed()) return cmd_blowup_analyze(c, history, field, monitor);
        if (dbl->parsed()) return cmd_double(c, field);
    } catch (const ArgumentError& e) {
        std::cerr << "argument error: " << e.what() << '\n';
        return kExitInput;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition failed: " << e.what() << '\n';
        return kExitFail;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFail;
    }
    return kExitInput;
}
