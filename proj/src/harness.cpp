#include "densflow/harness.hpp"

#include "densflow/errors.hpp"
#include "densflow/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

namespace densflow {

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::Pass: return "Pass";
    case Verdict::Fail: return "Fail";
    case Verdict::Inconclusive: return "Inconclusive";
    }
    return "Unknown";
}

DecayFit fit_power_law(const std::vector<std::pair<double, double>>& samples, double t_lo,
                       double t_hi) {
    std::vector<double> x;
    std::vector<double> y;
    const double lo = t_lo * (1.0 - 1e-12);
    const double hi = t_hi * (1.0 + 1e-12);
    for (const auto& [t, v] : samples) {
        if (t < lo || t > hi) {
            continue;
        }
        if (!(t > 0.0) || !(v > 0.0)) {
            throw DomainError("power-law fit needs t > 0 and y > 0 in the window");
        }
        x.push_back(std::log(t));
        y.push_back(std::log(v));
    }
    if (x.size() < 6) {
        std::ostringstream msg;
        msg << "power-law fit needs at least 6 points in [" << t_lo << ", " << t_hi << "], got "
            << x.size();
        throw InsufficientDataError(msg.str());
    }
    const auto line = numerics::fit_line(x, y);
    DecayFit fit;
    fit.slope = line.slope;
    fit.exponent = -line.slope;
    fit.r_squared = line.r_squared;
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    fit.n_points = x.size();
    return fit;
}

RunResult run_experiment(const ExperimentConfig& cfg, const SampleObserver& observer) {
    if (!cfg.geometry || !cfg.density) {
        throw ConfigError("experiment needs a geometry and a density");
    }
    RadialGrid grid(cfg.geometry, cfg.grid);
    const Solver solver(std::move(grid), cfg.density, cfg.exps, cfg.solver);
    return run(solver, cfg.run, observer);
}

std::pair<double, double> fit_window(const RunRecord& record) {
    const auto samples = record.unflagged();
    double t_end = 0.0;
    for (const auto& s : samples) {
        if (s.t > 0.0) {
            t_end = s.t;
        }
    }
    if (!(t_end > 0.0)) {
        throw InsufficientDataError("record has no unflagged sample at t > 0");
    }
    return {t_end / 100.0, t_end};
}

namespace {

double subject_alpha(const ExperimentConfig& cfg) {
    return std::clamp(cfg.density->alpha(), 0.0, 1.0 * cfg.exps.n_dim());
}

void require_regime(const ExperimentConfig& cfg, Regime wanted, const char* experiment) {
    const auto rep = classify_regime(*cfg.geometry, *cfg.density, cfg.exps);
    if (rep.regime != wanted) {
        std::ostringstream msg;
        msg << experiment << " needs a " << to_string(wanted) << " configuration, classified as "
            << (rep.regime ? to_string(*rep.regime) : "unknown");
        throw HypothesisError(msg.str());
    }
}

enum class Rate { Decay, Growth };

ComparisonReport compare(const RunRecord& record, const std::string& experiment,
                         const std::string& observable, double predicted, double tolerance,
                         Rate rate, double RunSample::*field) {
    ComparisonReport rep;
    rep.experiment = experiment;
    rep.observable = observable;
    rep.predicted = predicted;
    rep.tolerance = tolerance;
    std::ostringstream notes;
    try {
        const auto [t_lo, t_hi] = fit_window(record);
        std::vector<std::pair<double, double>> series;
        double first_t = 0.0;
        for (const auto& s : record.unflagged()) {
            if (s.t > 0.0) {
                if (first_t == 0.0) {
                    first_t = s.t;
                }
                series.emplace_back(s.t, s.*field);
            }
        }
        rep.measured = fit_power_law(series, t_lo, t_hi);
        rep.measured_value = rate == Rate::Decay ? rep.measured.exponent : rep.measured.slope;
        rep.abs_error = std::abs(rep.measured_value - predicted);
        if (record.flagged()) {
            notes << "interface near the wall from sample " << record.first_flagged
                  << "; fit uses earlier samples. ";
        }
        if (first_t > t_lo * (1.0 + 1e-12)) {
            notes << "unflagged samples span less than two decades. ";
            rep.verdict = Verdict::Inconclusive;
        } else if (rep.measured.r_squared < 0.99) {
            notes << "r^2 below 0.99. ";
            rep.verdict = Verdict::Inconclusive;
        } else {
            rep.verdict = rep.abs_error <= tolerance ? Verdict::Pass : Verdict::Fail;
        }
    } catch (const InsufficientDataError& e) {
        notes << e.what();
        rep.verdict = Verdict::Inconclusive;
    } catch (const DomainError& e) {
        notes << e.what();
        rep.verdict = Verdict::Inconclusive;
    }
    rep.notes = notes.str();
    if (!rep.notes.empty() && rep.notes.back() == ' ') {
        rep.notes.pop_back();
    }
    return rep;
}

} // namespace

ComparisonReport decay_report(const RunRecord& record, const ExperimentConfig& cfg) {
    const auto pred = predicted_exponents(cfg.exps, subject_alpha(cfg));
    if (!pred.sup_decay_exp) {
        throw HypothesisError("no subcritical sup rate for alpha >= alpha_star");
    }
    return compare(record, "decay", "sup", *pred.sup_decay_exp, cfg.sup_tolerance, Rate::Decay,
                   &RunSample::sup);
}

ComparisonReport propagation_report(const RunRecord& record, const ExperimentConfig& cfg) {
    const auto pred = predicted_exponents(cfg.exps, subject_alpha(cfg));
    if (!pred.interface_exp) {
        throw HypothesisError("no interface rate for alpha >= alpha_star");
    }
    return compare(record, "propagation", "interface", *pred.interface_exp,
                   cfg.interface_tolerance, Rate::Growth, &RunSample::interface);
}

ComparisonReport decay_experiment(const ExperimentConfig& cfg) {
    require_regime(cfg, Regime::Subcritical, "decay experiment");
    return decay_report(run_experiment(cfg).record, cfg);
}

ComparisonReport propagation_experiment(const ExperimentConfig& cfg) {
    require_regime(cfg, Regime::Subcritical, "propagation experiment");
    return propagation_report(run_experiment(cfg).record, cfg);
}

UniversalBoundReport universal_bound_experiment(const ExperimentConfig& cfg) {
    require_regime(cfg, Regime::SupercriticalDecay, "universal bound experiment");
    if (!(cfg.mass_factor > 0.0)) {
        throw ConfigError("mass factor must be positive");
    }
    ExperimentConfig heavy = cfg;
    heavy.run.amplitude *= cfg.mass_factor;

    // Independent jobs: each run owns its solver.
    auto pending = std::async(std::launch::async, [&] { return run_with_audit(heavy); });
    UniversalBoundReport rep;
    auto base = run_with_audit(cfg);
    auto other = pending.get();
    rep.base_record = std::move(base.first.record);
    rep.base_properties = base.second;
    rep.heavy_record = std::move(other.first.record);
    rep.heavy_properties = other.second;

    const double universal = 1.0 / cfg.exps.degeneracy();
    rep.base = compare(rep.base_record, "universal", "sup", universal, cfg.universal_tolerance,
                       Rate::Decay, &RunSample::sup);
    rep.heavy = compare(rep.heavy_record, "universal", "sup", universal, cfg.universal_tolerance,
                        Rate::Decay, &RunSample::sup);
    rep.base.observable = "sup_mass_1";
    rep.heavy.observable = "sup_mass_" + [&] {
        std::ostringstream s;
        s << cfg.mass_factor;
        return s.str();
    }();

    const auto a = rep.base_record.unflagged();
    const auto b = rep.heavy_record.unflagged();
    const std::size_t common = std::min(a.size(), b.size());
    if (common == 0 || !(a[common - 1].sup > 0.0)) {
        rep.verdict = Verdict::Inconclusive;
        return rep;
    }
    rep.ratio_time = a[common - 1].t;
    rep.sup_ratio = b[common - 1].sup / a[common - 1].sup;
    const double spread = std::max(rep.sup_ratio, 1.0 / rep.sup_ratio);

    if (rep.base.verdict == Verdict::Inconclusive || rep.heavy.verdict == Verdict::Inconclusive) {
        rep.verdict = Verdict::Inconclusive;
    } else if (rep.base.verdict == Verdict::Pass && rep.heavy.verdict == Verdict::Pass &&
               spread <= cfg.ratio_tolerance) {
        rep.verdict = Verdict::Pass;
    } else {
        rep.verdict = Verdict::Fail;
    }
    return rep;
}

MassAudit mass_conservation_audit(const RunRecord& record, double tolerance) {
    if (record.samples.empty()) {
        throw InsufficientDataError("mass audit of an empty record");
    }
    MassAudit audit;
    const double ref = record.samples.front().mass;
    for (const auto& s : record.samples) {
        const double dev = ref != 0.0 ? std::abs(s.mass - ref) / std::abs(ref)
                                       : std::abs(s.mass - ref);
        audit.max_relative_deviation = std::max(audit.max_relative_deviation, dev);
    }
    if (record.flagged()) {
        audit.verdict = Verdict::Inconclusive;
    } else {
        audit.verdict = audit.max_relative_deviation <= tolerance ? Verdict::Pass : Verdict::Fail;
    }
    return audit;
}

SchemeProperties audit_scheme(const RunRecord& record, const RadialGrid& grid, double min_value) {
    SchemeProperties props;
    props.min_value = min_value;
    props.positivity = min_value >= 0.0;
    for (std::size_t k = 1; k < record.samples.size(); ++k) {
        const auto& prev = record.samples[k - 1];
        const auto& cur = record.samples[k];
        if (cur.sup > prev.sup * (1.0 + 1e-12)) {
            props.sup_monotone = false;
        }
        if (cur.interface < prev.interface) {
            const double cell = grid.cell_width_at(std::min(prev.interface, grid.r_max()));
            const double drop = (prev.interface - cur.interface) / cell;
            props.interface_drop_cells = std::max(props.interface_drop_cells, drop);
            if (drop > 1.0 + 1e-9) {
                props.interface_monotone = false;
            }
        }
    }
    return props;
}

std::pair<RunResult, SchemeProperties> run_with_audit(const ExperimentConfig& cfg) {
    double min_value = std::numeric_limits<double>::infinity();
    auto result = run_experiment(cfg, [&](const SolverState& s, const Observables&, std::size_t) {
        for (double v : s.field) {
            min_value = std::min(min_value, v);
        }
    });
    const RadialGrid grid(cfg.geometry, cfg.grid);
    auto props = audit_scheme(result.record, grid, min_value);
    return {std::move(result), props};
}

ScalingReport scaling_covariance(const ExperimentConfig& cfg, const RunRecord& base) {
    ScalingReport rep;
    rep.lambda = cfg.scaling_lambda;
    const double time_factor = std::pow(cfg.scaling_lambda, cfg.exps.degeneracy());
    ExperimentConfig scaled = cfg;
    scaled.run.amplitude *= cfg.scaling_lambda;
    scaled.run.t_final /= time_factor;
    scaled.run.t0 /= time_factor;
    const auto other = run_experiment(scaled).record;

    const auto a = base.unflagged();
    const auto b = other.unflagged();
    const std::size_t common = std::min(a.size(), b.size());
    for (std::size_t k = 0; k < common; ++k) {
        if (std::abs(a[k].t / time_factor - b[k].t) > 1e-9 * std::max(1.0, b[k].t)) {
            throw ConfigError("scaling companion samples do not line up");
        }
        const double expect = cfg.scaling_lambda * a[k].sup;
        if (expect > 0.0) {
            rep.max_relative_deviation =
                std::max(rep.max_relative_deviation, std::abs(b[k].sup - expect) / expect);
        }
        ++rep.matched_samples;
    }
    if (rep.matched_samples == 0) {
        rep.verdict = Verdict::Inconclusive;
    } else {
        rep.verdict = rep.max_relative_deviation <= cfg.scaling_tolerance ? Verdict::Pass
                                                                         : Verdict::Fail;
    }
    return rep;
}

BlowupProbeReport blowup_probe(const ExperimentConfig& cfg) {
    require_regime(cfg, Regime::InterfaceBlowUp, "blow-up probe");
    BlowupProbeReport rep;
    const int n = cfg.exps.n_dim();
    const double alpha = subject_alpha(cfg);
    rep.formal_interface_exp =
        1.0 / ((n - alpha) * cfg.exps.degeneracy() + cfg.exps.p() - alpha);
    rep.label = "consistency signature only: a finite domain cannot exhibit unbounded support";

    for (int j = 0; j <= cfg.domain_doublings; ++j) {
        ExperimentConfig c = cfg;
        c.grid.r_max = cfg.grid.r_max * std::ldexp(1.0, j);
        if (c.grid.layout == GridLayout::Uniform) {
            c.grid.n_cells = cfg.grid.n_cells << j;
        }
        ProbeRun pr;
        pr.r_max = c.grid.r_max;
        const RadialGrid grid(c.geometry, c.grid);
        const auto centers = grid.centers();
        const auto weights = grid.cell_weights();
        const double r0 = cfg.run.bump_radius;
        double min_value = std::numeric_limits<double>::infinity();
        auto res = run_experiment(c, [&](const SolverState& s, const Observables&, std::size_t) {
            for (double v : s.field) {
                min_value = std::min(min_value, v);
            }
            double m = 0.0;
            for (std::size_t i = 0; i < s.field.size() && centers[i] < r0; ++i) {
                m += c.density->rho(centers[i]) * weights[i] * s.field[i];
            }
            pr.central_mass.emplace_back(s.time, m);
        });
        pr.record = std::move(res.record);
        pr.properties = audit_scheme(pr.record, grid, min_value);

        std::vector<std::pair<double, double>> series;
        for (const auto& s : pr.record.unflagged()) {
            if (s.t > 0.0 && s.interface > 0.0) {
                series.emplace_back(s.t, s.interface);
            }
        }
        try {
            const auto [t_lo, t_hi] = fit_window(pr.record);
            pr.interface_fit = fit_power_law(series, t_lo, t_hi);
            std::vector<std::pair<double, double>> in_window;
            for (const auto& s : series) {
                if (s.first >= t_lo * (1.0 - 1e-12)) {
                    in_window.push_back(s);
                }
            }
            const std::size_t half = in_window.size() / 2;
            const std::vector<std::pair<double, double>> early(in_window.begin(),
                                                               in_window.begin() + half + 1);
            const std::vector<std::pair<double, double>> late(in_window.begin() + half,
                                                              in_window.end());
            if (early.size() >= 6 && late.size() >= 6) {
                pr.early_slope = fit_power_law(early, early.front().first, early.back().first).slope;
                pr.late_slope = fit_power_law(late, late.front().first, late.back().first).slope;
            }
        } catch (const InsufficientDataError&) {
        }

        const auto& cm = pr.central_mass;
        if (cm.size() >= 2 && cm.front().second > 0.0) {
            bool nonincreasing = true;
            for (std::size_t k = cm.size() / 2 + 1; k < cm.size(); ++k) {
                if (cm[k].second > cm[k - 1].second * (1.0 + 1e-12)) {
                    nonincreasing = false;
                }
            }
            pr.central_mass_decays = nonincreasing && cm.back().second < 0.5 * cm.front().second;
        }
        rep.runs.push_back(std::move(pr));
    }
    return rep;
}

} // namespace densflow
