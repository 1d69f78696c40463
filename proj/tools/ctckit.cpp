// ctckit command-line front end.
//
// Exit codes: 0 success, 2 input error, 3 numerical diagnostic or
// non-convergence.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ctckit/ctckit.hpp"

namespace {

using namespace ctckit;
using io::json;

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

// Non-convergence is reported after the output has been written.
struct NotConverged {
    std::string what;
};

struct Options {
    std::string scenario;
    std::string gate;
    std::string rule;
    std::vector<double> coordinates;
    std::vector<double> epsilons;
    std::optional<std::uint64_t> seed;
    std::optional<Index> workers;
    bool resume = false;
    std::string out;
    bool example_gate = false;
    std::string strategy;
    std::string plane = "xz";
    Index resolution = 201;
    std::string config;
    std::string csv;
    Index max_records = 0;
    std::string summary_csv;
    std::optional<double> jump_tol;
    std::optional<Index> max_refinements;
    std::optional<double> sv_tol;
    std::optional<double> residual_tol;
    bool evidence = false;
    std::optional<Index> path_index;
};

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(path);
    if (!os) throw ParseError("cannot write '" + path + "'");
    os << text;
}

void emit_json(const json& j, const std::string& path) { emit(j.dump(2) + "\n", path); }

FixedPointOptions fixed_point_options(const Options& o, FixedPointOptions f = {}) {
    if (o.sv_tol) f.sv_tol = *o.sv_tol;
    if (o.residual_tol) f.residual_tol = *o.residual_tol;
    return f;
}

SelectionRule selection_rule(const Options& o, SelectionRule r = {}) {
    if (!o.rule.empty()) r.kind = parse_selection_kind(o.rule);
    if (!o.coordinates.empty()) r.coordinates = Eigen::Map<const RealVector>(o.coordinates.data(), static_cast<Index>(o.coordinates.size()));
    r.validate();
    return r;
}

Scenario load_scenario(const Options& o) {
    if (o.scenario.empty()) throw ParseError("--scenario is required");
    Scenario s = io::read_scenario(o.scenario);
    s.rule = selection_rule(o, s.rule);
    s.fixed_point = fixed_point_options(o, s.fixed_point);
    return s;
}

// Gate from --gate, else from --scenario, else the example gate with --paper-example.
UnitaryGate load_gate(const Options& o) {
    if (!o.gate.empty()) return io::gate_from_json(io::read_json_file(o.gate));
    if (!o.scenario.empty()) return load_scenario(o).gate;
    if (o.example_gate) return example_discontinuous_gate();
    throw ParseError("a gate is required (--gate, --scenario or --paper-example)");
}

PathStrategy path_strategy(const Options& o) {
    PathStrategy s;
    if (o.example_gate) s.kind = PathStrategyKind::ExampleGate;
    if (!o.strategy.empty()) s.kind = parse_path_strategy(o.strategy);
    if (!o.epsilons.empty()) s.epsilons = o.epsilons;
    if (o.seed) s.seed = *o.seed;
    return s;
}

json selection_report(const SelectionResult& r) {
    json j = io::to_json(r);
    if (r.sigma.dim() == 2) j["sigma_bloch"] = io::to_json(to_bloch(r.sigma));
    return j;
}

int cmd_fixed_points(const Options& o) {
    const Scenario s = load_scenario(o);
    const FixedPointSet f = fixed_point_set(s.gate, s.rho, s.fixed_point);
    json j = io::to_json(f);
    if (f.dim2() == 2) j["particular_bloch"] = io::to_json(to_bloch(f.particular));
    emit_json(j, o.out);
    return 0;
}

int cmd_select(const Options& o) {
    const Scenario s = load_scenario(o);
    const FixedPointSet f = fixed_point_set(s.gate, s.rho, s.fixed_point);
    const SelectionResult r = select_state(f, s.rule);
    emit_json({{"rule", io::to_json(s.rule)}, {"k", f.k()}, {"selection", selection_report(r)}}, o.out);
    if (!r.converged) throw NotConverged{"selection did not converge"};
    return 0;
}

int cmd_evolve(const Options& o) {
    const Scenario s = load_scenario(o);
    const ChannelResult ch = ctc_channel(s.gate, s.rho, s.rule, s.fixed_point);
    emit_json({{"rule", io::to_json(s.rule)},
               {"k", ch.fixed_points.k()},
               {"sigma", io::to_json(ch.selection.sigma)},
               {"entropy", ch.selection.entropy},
               {"converged", ch.selection.converged},
               {"rho_hat", io::to_json(ch.rho_hat)},
               {"selection", selection_report(ch.selection)}},
              o.out);
    if (!ch.selection.converged) throw NotConverged{"selection did not converge"};
    return 0;
}

std::string probe_csv(const ProbeTrace& t) {
    std::ostringstream os;
    write_probe_csv(t, os);
    return os.str();
}

bool trace_converged(const ProbeTrace& t) {
    bool ok = t.centre.error.empty();
    for (const DirectionTrace* d : {&t.a, &t.b})
        for (const auto& p : d->points) ok = ok && p.error.empty() && p.converged;
    return ok;
}

int cmd_probe(const Options& o) {
    const UnitaryGate u = load_gate(o);
    const auto paths = generate_probe_paths(u, path_strategy(o));
    if (paths.empty()) throw InvalidStateError("the probe strategy yields no paths for this gate");
    const Index idx = o.path_index.value_or(0);
    if (idx < 0 || idx >= static_cast<Index>(paths.size()))
        throw ParseError("--path must lie in [0, " + std::to_string(paths.size() - 1) + "]");
    SelectionRule rule = selection_rule(o);
    const ProbeTrace t = probe(u, paths[static_cast<std::size_t>(idx)], rule, fixed_point_options(o));
    emit_json(io::to_json(t), o.out);
    if (!o.csv.empty()) emit(probe_csv(t), o.csv);
    if (!trace_converged(t)) log::warn("probe: some points failed or did not converge");
    return 0;
}

int cmd_classify(const Options& o) {
    const UnitaryGate u = load_gate(o);
    ClassifyOptions c;
    c.strategy = path_strategy(o);
    if (o.jump_tol) c.jump_tol = *o.jump_tol;
    if (o.max_refinements) c.max_refinements = *o.max_refinements;
    c.rule = selection_rule(o);
    c.fixed_point = fixed_point_options(o);
    const GateClassification g = classify(u, c);
    json j = io::to_json(g, o.evidence);
    j["gate"] = io::to_json(u);
    emit_json(j, o.out);
    if (!o.csv.empty()) {
        if (!g.witness) throw InvalidStateError("no witness path: every path was inconclusive");
        emit(probe_csv(*g.witness), o.csv);
    }
    return 0;
}

int cmd_census(const Options& o) {
    CensusConfig c;
    if (!o.config.empty()) c = io::census_config_from_json(io::read_json_file(o.config));
    if (o.workers) c.workers = *o.workers;
    if (!o.out.empty()) c.output = o.out;
    if (o.seed) {
        if (c.mode.kind != CensusMode::Kind::Sample) throw ParseError("--seed applies to sample censuses only");
        c.mode.seed = *o.seed;
    }
    if (!o.strategy.empty()) c.strategy.kind = parse_path_strategy(o.strategy);
    if (!o.epsilons.empty()) c.strategy.epsilons = o.epsilons;
    if (o.jump_tol) c.jump_tol = *o.jump_tol;
    if (o.max_refinements) c.max_refinements = *o.max_refinements;
    c.resume = o.resume;
    c.max_new_records = o.max_records;
    const CensusRunResult r = run_census(c);
    json j{{"output", c.output},
           {"config_hash", config_hash(c)},
           {"new_records", r.new_records},
           {"skipped", r.skipped},
           {"remaining", r.remaining},
           {"summary", io::to_json(r.summary)}};
    std::cout << j.dump(2) << '\n';
    if (!o.summary_csv.empty()) export_summary_csv(r.summary, o.summary_csv);
    return 0;
}

int cmd_bloch_slice(const Options& o) {
    const Scenario s = load_scenario(o);
    const BlochSlice sl = bloch_slice(s.gate, s.rho, parse_bloch_plane(o.plane), o.resolution, s.fixed_point);
    std::ostringstream os;
    write_csv(sl, os);
    emit(os.str(), o.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fixed points, selection and discontinuity analysis for Deutsch's closed-timelike-curve model"};
    app.require_subcommand(1);
    Options o;

    auto scenario = [&](CLI::App* s) { s->add_option("--scenario", o.scenario, "Scenario JSON file")->check(CLI::ExistingFile); };
    auto rule = [&](CLI::App* s) {
        s->add_option("--rule", o.rule, "Selection rule: max-entropy, min-entropy or constant");
        s->add_option("--coordinates", o.coordinates, "Fixed-subspace coordinates for --rule constant")->delimiter(',');
    };
    auto tolerances = [&](CLI::App* s) {
        s->add_option("--sv-tol", o.sv_tol, "Singular-value threshold for fixed directions");
        s->add_option("--residual-tol", o.residual_tol, "Map residual tolerance");
    };
    auto out = [&](CLI::App* s) { s->add_option("--out", o.out, "Write output here instead of stdout"); };
    auto paths = [&](CLI::App* s) {
        s->add_option("--gate", o.gate, "Gate JSON file")->check(CLI::ExistingFile);
        s->add_flag("--paper-example", o.example_gate, "Use the example gate and its two-sided path");
        s->add_option("--strategy", o.strategy, "Probe strategy: paper_example, vertex_pairs or random_seeded");
        s->add_option("--epsilons", o.epsilons, "Comma-separated decreasing epsilon grid")->delimiter(',');
        s->add_option("--seed", o.seed, "Seed for random_seeded paths");
        s->add_option("--csv", o.csv, "Write the per-epsilon probe table to this CSV file");
    };

    auto* fp = app.add_subcommand("fixed-points", "Report the fixed-point set Q_U(rho)");
    scenario(fp), tolerances(fp), out(fp);
    auto* sel = app.add_subcommand("select", "Select a state from Q_U(rho)");
    scenario(sel), rule(sel), tolerances(sel), out(sel);
    auto* ev = app.add_subcommand("evolve", "Selected time-traveller state and output state");
    scenario(ev), rule(ev), tolerances(ev), out(ev);
    auto* pr = app.add_subcommand("probe", "Trace one probe path");
    scenario(pr), rule(pr), tolerances(pr), out(pr), paths(pr);
    pr->add_option("--path", o.path_index, "Index of the path among those the strategy generates (default 0)");
    auto* cl = app.add_subcommand("classify", "Classify a gate as physical, ephemeral or continuous_witnessed_none");
    scenario(cl), rule(cl), tolerances(cl), out(cl), paths(cl);
    cl->add_option("--jump-tol", o.jump_tol, "Trace-distance jump threshold");
    cl->add_option("--max-refinements", o.max_refinements, "Epsilon refinements near the threshold");
    cl->add_flag("--evidence", o.evidence, "Include per-path evidence");
    auto* ce = app.add_subcommand("census", "Classify many permutation gates into a resumable JSONL file");
    ce->add_option("--config", o.config, "Census config JSON file")->check(CLI::ExistingFile);
    ce->add_option("--workers", o.workers, "Worker threads");
    ce->add_flag("--resume", o.resume, "Continue an existing record file");
    ce->add_option("--out", o.out, "Record file (JSONL)");
    ce->add_option("--seed", o.seed, "Sample seed");
    ce->add_option("--strategy", o.strategy, "Probe strategy");
    ce->add_option("--epsilons", o.epsilons, "Comma-separated epsilon grid")->delimiter(',');
    ce->add_option("--jump-tol", o.jump_tol, "Trace-distance jump threshold");
    ce->add_option("--max-refinements", o.max_refinements, "Epsilon refinements near the threshold");
    ce->add_option("--max-records", o.max_records, "Stop after this many new records");
    ce->add_option("--summary-csv", o.summary_csv, "Also write the summary as CSV");
    auto* bs = app.add_subcommand("bloch-slice", "CSV of Q_U(rho) membership over a Bloch-ball plane");
    scenario(bs), tolerances(bs), out(bs);
    bs->add_option("--plane", o.plane, "xz, xy or yz")->check(CLI::IsMember({"xz", "xy", "yz"}));
    bs->add_option("--resolution", o.resolution, "Grid points per axis");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*fp) return cmd_fixed_points(o);
        if (*sel) return cmd_select(o);
        if (*ev) return cmd_evolve(o);
        if (*pr) return cmd_probe(o);
        if (*cl) return cmd_classify(o);
        if (*ce) return cmd_census(o);
        if (*bs) return cmd_bloch_slice(o);
    } catch (const NotConverged& e) {
        log::error(e.what);
        return kExitNumeric;
    } catch (const SolverDiagnostic& e) {
        log::error(e.what());
        return kExitNumeric;
    } catch (const Error& e) {
        log::error(e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        log::error(e.what());
        return kExitInput;
    }
    return kExitInput;
}
