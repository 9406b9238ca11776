#include "densflow/cli.hpp"

#include "densflow/embeddings.hpp"
#include "densflow/errors.hpp"
#include "densflow/record_io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

namespace densflow {

namespace {

using json = nlohmann::ordered_json;

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

json to_json(const RegimeReport& r) {
    json j;
    j["regime"] = r.regime ? json(to_string(*r.regime)) : json(nullptr);
    j["alpha_star"] = r.alpha_star;
    j["sup_decay_exp"] = optional_number(r.sup_decay_exp);
    j["interface_exp"] = optional_number(r.interface_exp);
    j["universal_exp"] = r.universal_exp;
    j["theta_used"] = optional_number(r.theta_used);
    j["alpha_tail"] = optional_number(r.alpha_tail);
    j["notes"] = r.notes;
    return j;
}

json to_json(const DecayFit& f) {
    return json{{"slope", f.slope},   {"exponent", f.exponent}, {"r_squared", f.r_squared},
                {"t_lo", f.t_lo},     {"t_hi", f.t_hi},         {"n_points", f.n_points}};
}

json to_json(const ComparisonReport& c) {
    json j;
    j["experiment"] = c.experiment;
    j["observable"] = c.observable;
    j["measured"] = to_json(c.measured);
    j["measured_value"] = c.measured_value;
    j["predicted"] = c.predicted;
    j["abs_error"] = c.abs_error;
    j["tolerance"] = c.tolerance;
    j["verdict"] = to_string(c.verdict);
    j["notes"] = c.notes;
    return j;
}

json to_json(const AssumptionCheck& c) {
    return json{{"name", c.name},         {"constant", c.constant}, {"cap", c.cap},
                {"pass", c.pass},         {"range_lo", c.range_lo}, {"range_hi", c.range_hi},
                {"note", c.note}};
}

json to_json(const SchemeProperties& s) {
    return json{{"record", "scheme_properties"},
                {"positivity", s.positivity},
                {"sup_monotone", s.sup_monotone},
                {"interface_monotone", s.interface_monotone},
                {"min_value", s.min_value},
                {"interface_drop_cells", s.interface_drop_cells},
                {"verdict", s.all() ? "Pass" : "Fail"}};
}

/// Pass beats nothing, Inconclusive beats Pass, Fail beats both.
Verdict combine(Verdict a, Verdict b) {
    if (a == Verdict::Fail || b == Verdict::Fail) {
        return Verdict::Fail;
    }
    if (a == Verdict::Inconclusive || b == Verdict::Inconclusive) {
        return Verdict::Inconclusive;
    }
    return Verdict::Pass;
}

int exit_for(Verdict v) {
    switch (v) {
    case Verdict::Pass:
        return ExitPass;
    case Verdict::Fail:
        return ExitFail;
    default:
        return ExitInconclusive;
    }
}

class Artifacts {
public:
    explicit Artifacts(const Config& cfg) : dir_(cfg.output_dir), cfg_(cfg) {
        std::filesystem::create_directories(dir_);
        report_.open(path("report.jsonl"), std::ios::binary | std::ios::trunc);
        if (!report_) {
            throw Error("cannot write " + path("report.jsonl"));
        }
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void report(json line) {
        line["config_digest"] = cfg_.run.config_digest;
        report_ << line.dump() << '\n';
    }

    void record(const std::string& stem, RunRecord rec, const RadialGrid& grid,
                const std::vector<double>& field) {
        rec.final_state_path = "field_final" + suffix(stem) + ".csv";
        write_run_csv(path(stem + ".csv"), rec);
        write_run_json(path(stem + ".json"), rec, cfg_.echo);
        write_field_csv(path(rec.final_state_path), grid, field);
    }

    void record(const std::string& stem, const RunRecord& rec) {
        write_run_csv(path(stem + ".csv"), rec);
        write_run_json(path(stem + ".json"), rec, cfg_.echo);
    }

private:
    static std::string suffix(const std::string& stem) {
        return stem == "run" ? "" : stem.substr(3);
    }

    std::filesystem::path dir_;
    const Config& cfg_;
    std::ofstream report_;
};

int run_classify(const Config& cfg, Artifacts& art, std::ostream& out) {
    json j = to_json(classify_regime(*cfg.geometry, *cfg.density, cfg.exps, cfg.classify));
    art.report(j);
    out << j.dump(2) << '\n';
    return ExitPass;
}

int run_solve(const Config& cfg, Artifacts& art, std::ostream& out) {
    const auto x = cfg.experiment_config();
    const RadialGrid grid(x.geometry, x.grid);
    const auto result = run_experiment(x);
    art.record("run", result.record, grid, result.final_state.field);
    const auto audit = mass_conservation_audit(result.record, x.mass_tolerance);
    art.report(json{{"record", "solve"},
                    {"samples", result.record.samples.size()},
                    {"steps", result.final_state.steps},
                    {"flagged", result.record.flagged()},
                    {"mass_max_relative_deviation", audit.max_relative_deviation},
                    {"mass_verdict", to_string(audit.verdict)}});
    out << "solve: " << result.record.samples.size() << " samples, " << result.final_state.steps
        << " steps, t=" << result.final_state.time << '\n';
    return ExitPass;
}

int run_subcritical(const ExperimentConfig& x, Artifacts& art, std::ostream& out) {
    const auto regime = classify_regime(*x.geometry, *x.density, x.exps);
    if (regime.regime != Regime::Subcritical) {
        throw HypothesisError("subcritical experiment on a configuration that is not subcritical");
    }
    const RadialGrid grid(x.geometry, x.grid);
    const auto [result, props] = run_with_audit(x);
    art.record("run", result.record, grid, result.final_state.field);
    const auto decay = decay_report(result.record, x);
    const auto prop = propagation_report(result.record, x);
    const auto mass = mass_conservation_audit(result.record, x.mass_tolerance);
    art.report(to_json(decay));
    art.report(to_json(prop));
    art.report(json{{"record", "mass_audit"},
                    {"max_relative_deviation", mass.max_relative_deviation},
                    {"tolerance", x.mass_tolerance},
                    {"verdict", to_string(mass.verdict)}});
    art.report(to_json(props));
    Verdict v = combine(decay.verdict, prop.verdict);
    v = combine(v, mass.verdict);
    v = combine(v, props.all() ? Verdict::Pass : Verdict::Fail);
    out << "sup exponent " << decay.measured_value << " (predicted " << decay.predicted << ", "
        << to_string(decay.verdict) << ")\n"
        << "interface exponent " << prop.measured_value << " (predicted " << prop.predicted
        << ", " << to_string(prop.verdict) << ")\n"
        << "mass drift " << mass.max_relative_deviation << " (" << to_string(mass.verdict)
        << ")\n"
        << "scheme properties " << (props.all() ? "Pass" : "Fail") << '\n';
    return exit_for(v);
}

int run_universal(const ExperimentConfig& x, Artifacts& art, std::ostream& out) {
    const auto rep = universal_bound_experiment(x);
    art.record("run", rep.base_record);
    art.record("run_heavy", rep.heavy_record);
    art.report(to_json(rep.base));
    art.report(to_json(rep.heavy));
    art.report(json{{"record", "universal_ratio"},
                    {"sup_ratio", rep.sup_ratio},
                    {"ratio_time", rep.ratio_time},
                    {"tolerance", x.ratio_tolerance},
                    {"verdict", to_string(rep.verdict)}});
    art.report(to_json(rep.base_properties));
    art.report(to_json(rep.heavy_properties));
    const bool props = rep.base_properties.all() && rep.heavy_properties.all();
    const Verdict v = combine(rep.verdict, props ? Verdict::Pass : Verdict::Fail);
    out << "sup exponents " << rep.base.measured_value << ", " << rep.heavy.measured_value
        << " (predicted " << rep.base.predicted << ")\n"
        << "late sup ratio " << rep.sup_ratio << " at t=" << rep.ratio_time << '\n'
        << "scheme properties " << (props ? "Pass" : "Fail") << '\n'
        << "verdict " << to_string(v) << '\n';
    return exit_for(v);
}

int run_probe(const ExperimentConfig& x, Artifacts& art, std::ostream& out) {
    const auto rep = blowup_probe(x);
    bool signature = !rep.runs.empty();
    for (const auto& pr : rep.runs) {
        art.report(json{{"record", "blowup_probe_run"},
                        {"r_max", pr.r_max},
                        {"interface_fit", to_json(pr.interface_fit)},
                        {"early_slope", pr.early_slope},
                        {"late_slope", pr.late_slope},
                        {"central_mass_decays", pr.central_mass_decays},
                        {"scheme_properties", to_json(pr.properties)},
                        {"formal_interface_exp", rep.formal_interface_exp}});
        signature = signature && pr.central_mass_decays && pr.late_slope > pr.early_slope &&
                    pr.properties.all();
        out << "R_max " << pr.r_max << ": interface slope " << pr.early_slope << " -> "
            << pr.late_slope << ", central mass "
            << (pr.central_mass_decays ? "decays" : "does not decay") << '\n';
    }
    if (!rep.runs.empty()) {
        art.record("run", rep.runs.back().record);
    }
    art.report(json{{"record", "blowup_probe"},
                    {"label", rep.label},
                    {"verdict", signature ? "Pass" : "Fail"}});
    out << rep.label << '\n';
    return signature ? ExitPass : ExitFail;
}

int run_asymptotics(const Config& cfg, Artifacts& art, std::ostream& out) {
    const auto x = cfg.experiment_config();
    switch (cfg.experiment) {
    case ExperimentKind::Subcritical:
        return run_subcritical(x, art, out);
    case ExperimentKind::Universal:
        return run_universal(x, art, out);
    case ExperimentKind::BlowupProbe:
        return run_probe(x, art, out);
    }
    return ExitInconclusive;
}

int run_embeddings(const Config& cfg, Artifacts& art, std::ostream& out) {
    const auto& em = cfg.embeddings;
    const double p = cfg.exps.p();
    const int n_dim = cfg.exps.n_dim();
    const auto grid = std::make_shared<const RadialGrid>(
        build_grid(cfg.geometry, em.r_max, em.n_cells));
    std::ofstream csv(art.path("embeddings.csv"), std::ios::binary);
    csv << "kind,params,ratio,grid_cells\n";
    bool ok = true;
    const auto row = [&](const std::string& kind, const std::string& params, double ratio) {
        csv << kind << ',' << params << ',' << format_double(ratio) << ',' << em.n_cells << '\n';
        out << kind << ' ' << params << ": " << ratio << '\n';
    };

    const double hardy_cap = std::pow(p / (n_dim - p), p);
    const auto hat = RadialTestFunction::sample(grid, [](double r) {
        return std::max(1.0 - r, 0.0);
    });
    const double hardy = hardy_ratio(hat, p);
    row("Hardy", "f=(1-r)+", hardy);
    const auto suite = random_hardy_suite(grid, p, cfg.seed, em.random_count);
    bool finite = true;
    for (double r : suite.ratios) {
        finite = finite && std::isfinite(r);
    }
    row("HardyRandomMax",
        "count=" + std::to_string(em.random_count) + " seed=" + std::to_string(cfg.seed),
        suite.max_ratio);
    ok = ok && finite && hardy <= hardy_cap && suite.max_ratio <= hardy_cap;
    art.report(json{{"record", "hardy"},
                    {"bump_ratio", hardy},
                    {"random_max", suite.max_ratio},
                    {"random_argmax", suite.argmax},
                    {"all_finite", finite},
                    {"cap", hardy_cap}});

    const auto bump = RadialTestFunction::sample(grid, [&](double r) {
        const double x = r / (0.5 * em.r_max);
        return x < 1.0 ? (1.0 - x * x) * (1.0 - x * x) : 0.0;
    });
    std::vector<EmbeddingKind> kinds{embedding::MomentsAtP{1.0},
                                     embedding::WeightedOmega{em.radius},
                                     embedding::EuclideanWeighted{em.radius}};
    if (n_dim > p) {
        kinds.insert(kinds.begin(), embedding::Moments{n_dim * p / (n_dim - p), 1.0});
    }
    if (em.p1 > 0.0) {
        kinds.push_back(embedding::EuclideanDecay{em.p1});
    }
    for (const auto& kind : kinds) {
        try {
            const double ratio = embedding_ratio(bump, kind, cfg.exps, *cfg.density);
            row(kind_name(kind), kind_params(kind), ratio);
            ok = ok && std::isfinite(ratio);
        } catch (const HypothesisError& e) {
            row(kind_name(kind), kind_params(kind), std::nan(""));
            art.report(json{{"record", "embedding_skipped"},
                            {"kind", kind_name(kind)},
                            {"reason", e.what()}});
        }
    }

    if (cfg.geometry->kind() == ManifoldKind::Euclidean) {
        const auto prof = solve_profile_ode(euclidean_isoperimetric_g_inverse(n_dim), p, em.s_max);
        const bool sandwich =
            prof.derivative_sandwich_holds() && prof.composition_sandwich_holds();
        art.report(json{{"record", "general_profile"},
                        {"a_exponent", prof.fitted_a_exponent()},
                        {"b_exponent", prof.fitted_b_exponent()},
                        {"c_ap", prof.c_ap()},
                        {"sandwich_holds", sandwich},
                        {"b_convexity_violations", prof.b_convexity_violations()}});
        out << "profile exponents A " << prof.fitted_a_exponent() << ", B "
            << prof.fitted_b_exponent() << ", sandwich " << (sandwich ? "holds" : "fails")
            << '\n';
        ok = ok && sandwich;
        try {
            const auto g = general_embedding_check(bump, prof, *cfg.density, em.radius);
            const std::string params = "radius=" + format_double(em.radius);
            row("GenEnergy", params, g.energy);
            row("GenFaberKrahn", params, g.faber_krahn);
            row("GenWeighted", params, g.weighted);
            ok = ok && g.energy <= 1.0 && g.faber_krahn <= 1.0 && g.weighted <= 1.0;
        } catch (const HypothesisError& e) {
            art.report(json{{"record", "embedding_skipped"},
                            {"kind", "General"},
                            {"reason", e.what()}});
        }
    }
    art.report(json{{"record", "verify_embeddings"}, {"verdict", ok ? "Pass" : "Fail"}});
    return ok ? ExitPass : ExitFail;
}

int run_assumptions(const Config& cfg, Artifacts& art, std::ostream& out) {
    const double r_max = cfg.grid.r_max;
    const auto geo = verify_geometry_assumptions(*cfg.geometry, cfg.exps, r_max);
    const auto den = verify_density_assumptions(*cfg.density, *cfg.geometry, cfg.exps, r_max);
    for (const auto* rep : {&geo, &den}) {
        for (const auto& c : rep->checks) {
            art.report(to_json(c));
            out << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.constant << " (cap "
                << c.cap << ")\n";
        }
    }
    return geo.all_pass() && den.all_pass() ? ExitPass : ExitFail;
}

} // namespace

int dispatch(const std::string& subcommand, const Config& cfg, std::ostream& out,
             std::ostream& err) {
    using Handler = int (*)(const Config&, Artifacts&, std::ostream&);
    Handler handler = nullptr;
    if (subcommand == "classify") {
        handler = run_classify;
    } else if (subcommand == "solve") {
        handler = run_solve;
    } else if (subcommand == "asymptotics") {
        handler = run_asymptotics;
    } else if (subcommand == "verify-embeddings") {
        handler = run_embeddings;
    } else if (subcommand == "check-assumptions") {
        handler = run_assumptions;
    } else {
        throw ConfigError("unknown subcommand '" + subcommand + "'");
    }
    try {
        Artifacts art(cfg);
        return handler(cfg, art, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return ExitInconclusive;
    }
}

} // namespace densflow
