#pragma once

#include "densflow/density.hpp"
#include "densflow/exponents.hpp"
#include "densflow/geometry.hpp"
#include "densflow/grid.hpp"
#include "densflow/regime.hpp"
#include "densflow/solver.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace densflow {

enum class Verdict { Pass, Fail, Inconclusive };

const char* to_string(Verdict v);

/// Least-squares power law over a time window.
struct DecayFit {
    /// Slope of log y against log t.
    double slope = 0.0;
    /// Decay rate, -slope.
    double exponent = 0.0;
    double r_squared = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t n_points = 0;
};

/// Fits the samples with t in [t_lo, t_hi]; throws InsufficientDataError
/// with fewer than 6 usable points and DomainError for nonpositive values.
DecayFit fit_power_law(const std::vector<std::pair<double, double>>& samples, double t_lo,
                       double t_hi);

struct ComparisonReport {
    std::string experiment;
    std::string observable;
    DecayFit measured;
    /// The rate compared with `predicted`: exponent for decays, slope for growth.
    double measured_value = 0.0;
    double predicted = 0.0;
    double abs_error = 0.0;
    double tolerance = 0.0;
    Verdict verdict = Verdict::Inconclusive;
    std::string notes;
};

/// Everything one asymptotic experiment needs.
struct ExperimentConfig {
    ManifoldHandle geometry;
    DensityHandle density;
    Exponents exps{3, 2.0, 2.0};
    GridSpec grid;
    SolverSettings solver;
    RunSpec run;
    double sup_tolerance = 0.05;
    double interface_tolerance = 0.04;
    double universal_tolerance = 0.15;
    double ratio_tolerance = 1.25;
    double mass_tolerance = 1e-9;
    /// Factor between the two initial masses of the universal-bound pair.
    double mass_factor = 10.0;
    /// Number of domain doublings in the blow-up probe.
    int domain_doublings = 3;
    /// Amplitude factor of the scaling-covariance companion run.
    double scaling_lambda = 2.0;
    double scaling_tolerance = 0.01;
};

/// Builds the grid and solver of a configuration and runs it.
RunResult run_experiment(const ExperimentConfig& cfg, const SampleObserver& observer = {});

/// [t_end / 100, t_end] with t_end the last unflagged positive sample time.
std::pair<double, double> fit_window(const RunRecord& record);

/// Sup decay of a finished subcritical run against the closed-form rate.
ComparisonReport decay_report(const RunRecord& record, const ExperimentConfig& cfg);
/// Interface growth of a finished run against the closed-form rate.
ComparisonReport propagation_report(const RunRecord& record, const ExperimentConfig& cfg);

/// Runs the configuration after checking it is subcritical (HypothesisError
/// otherwise) and compares the sup decay.
ComparisonReport decay_experiment(const ExperimentConfig& cfg);
ComparisonReport propagation_experiment(const ExperimentConfig& cfg);

struct SchemeProperties {
    bool positivity = true;
    bool sup_monotone = true;
    bool interface_monotone = true;
    double min_value = 0.0;
    /// Largest drop of the interface between consecutive samples, in cells.
    double interface_drop_cells = 0.0;
    bool all() const { return positivity && sup_monotone && interface_monotone; }
};

struct UniversalBoundReport {
    ComparisonReport base;
    ComparisonReport heavy;
    /// sup of the heavier run over sup of the lighter one at the last sample
    /// both runs have unflagged.
    double sup_ratio = 0.0;
    double ratio_time = 0.0;
    Verdict verdict = Verdict::Inconclusive;
    RunRecord base_record;
    RunRecord heavy_record;
    SchemeProperties base_properties;
    SchemeProperties heavy_properties;
};

/// Two runs with initial masses M and mass_factor M; both sup decays are
/// compared with 1/(p+m-3) and their late ratio with ratio_tolerance.
/// Throws HypothesisError unless the configuration is SupercriticalDecay.
UniversalBoundReport universal_bound_experiment(const ExperimentConfig& cfg);

struct MassAudit {
    double max_relative_deviation = 0.0;
    Verdict verdict = Verdict::Inconclusive;
};

/// Largest relative deviation of the weighted mass from the first sample.
/// Throws InsufficientDataError for an empty record.
MassAudit mass_conservation_audit(const RunRecord& record, double tolerance = 1e-9);

/// Audits a finished run: min value of `fields` (one per sample), sup
/// monotone to 1e-12 relative, interface nondecreasing within one local cell.
SchemeProperties audit_scheme(const RunRecord& record, const RadialGrid& grid,
                              double min_value);

/// Runs the configuration with observers recording the minimum field value.
std::pair<RunResult, SchemeProperties> run_with_audit(const ExperimentConfig& cfg);

struct ScalingReport {
    double lambda = 0.0;
    double max_relative_deviation = 0.0;
    std::size_t matched_samples = 0;
    Verdict verdict = Verdict::Inconclusive;
};

/// Compares the run (A, t_final) with (lambda A, t_final / lambda^{p+m-3}):
/// lambda sup_A(t) against sup_{lambda A}(t / lambda^{p+m-3}) at every sample.
ScalingReport scaling_covariance(const ExperimentConfig& cfg, const RunRecord& base);

struct ProbeRun {
    double r_max = 0.0;
    DecayFit interface_fit;
    /// Interface slope over the first and second half of the fitted samples.
    double early_slope = 0.0;
    double late_slope = 0.0;
    std::vector<std::pair<double, double>> central_mass;
    bool central_mass_decays = false;
    RunRecord record;
    SchemeProperties properties;
};

struct BlowupProbeReport {
    /// The subcritical interface rate evaluated formally at alpha.
    double formal_interface_exp = 0.0;
    std::vector<ProbeRun> runs;
    std::string label;
};

/// Runs on R_max, 2 R_max, ... (domain_doublings doublings), reporting the
/// interface growth and the mass left in B_{R0}. A consistency signature
/// only: a finite domain cannot show unbounded support. Throws
/// HypothesisError unless the configuration is InterfaceBlowUp.
BlowupProbeReport blowup_probe(const ExperimentConfig& cfg);

} // namespace densflow
