#pragma once
/**
 * @file harness.hpp
 * @brief Experiment configuration, sweeps, rate fitting and the CSV,
 * manifest and plot-script outputs behind the command-line tool.
 */

#include "tdpml/freq_solver.hpp"
#include "tdpml/time_solver.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tdpml {

enum class ExperimentKind { SymbolAudit, LayerCheck, FreqSolve, TdRun, Convergence, Parseval };

std::string to_string(ExperimentKind k);
/// "symbol-audit", "layer-check", "freq-solve", "td-run", "convergence", "parseval".
ExperimentKind parse_kind(const std::string& name);

enum class ConvergenceRoute { Mode, Frequency, Time };

struct PmlSettings {
    double sigma0 = 2.0;
    int m = 1;
    double L = 1.0;
};

struct AuditSettings {
    std::vector<double> s1_values{0.1, 1.0};
    double s2_min = -50.0, s2_max = 50.0;
    int s2_count = 201;
    double xi_max = 100.0;
    int xi_count = 401;  ///< 0 plus xi_count - 1 log-spaced points in [1e-3, xi_max]
};

struct LayerSettings {
    std::vector<int> n_values{32, 64, 128, 256};
    double xi = 0.0;
    cplx s{1.0, 0.0};
    double order_target = 2.0, order_tolerance = 0.2;
};

struct FreqSettings {
    std::vector<std::string> variants{"exact_dtn", "pml_dtn", "pml_layer"};
    std::vector<cplx> frequencies{{1.0, 0.0}, {1.0, 10.0}};
    int coercivity_samples = 0;    ///< random fields per variant and s
    bool coercivity_refine = true; ///< repeat on the uniformly refined mesh
    bool write_fields = false;
};

struct TdSettings {
    bool compare_contour = false;
    double contour_s2_max = 0.0;  ///< 0: 40 c / period
    int contour_n_freq = 401;
    double route_tolerance = 0.05;
    bool causality = false;
    double causality_tolerance = 1e-6;
    bool stability = false;  ///< energy envelopes over sweep.mesh_sizes and sweep.sigma0_values
    bool energy_csv = true;
};

struct ConvergenceSettings {
    ConvergenceRoute route = ConvergenceRoute::Time;
    std::string sweep = "L";  ///< "L" or "sigma0"
    double L_ref = 3.0;
    cplx mode_s{1.0, 0.0};
    double mode_xi = 0.0;
    std::vector<cplx> frequencies{{0.5, 0.0}, {0.5, 5.0}, {0.5, 10.0}};
    double min_exponent_fraction = 0.8;  ///< pass needs exponent >= fraction * rate_layer
    double max_residual_fraction = 0.15;
    bool validate_reference = false;  ///< compare the reference run with the exact-DtN contour route
};

struct ParsevalSettings {
    double exp_T_ext = 30.0;
    int exp_intervals = 240000;
    double pulse_T_ext = 14.0;
    int pulse_intervals = 14000;
    double s2_max = 200.0;
    int n_s2 = 4001;
    std::vector<cplx> transform_s{{1.0, 0.0}, {1.0, 1.0}, {0.5, 3.0}};
    double transform_T_ext = 80.0;
    int transform_intervals = 320000;
    double abs_tolerance = 1e-6, rel_tolerance = 1e-5;
};

struct SweepSettings {
    std::vector<double> L_values{0.25, 0.5, 1.0};
    std::vector<double> sigma0_values{1.0, 2.0, 4.0};
    std::vector<double> mesh_sizes{0.05, 0.025};
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::TdRun;
    MediaParams media;
    double period = 1.0;
    double h = 1.0;
    std::string surface = "cosine:0.1,1";
    std::vector<Point2> obstacle{{0.4, 0.4}, {0.6, 0.4}, {0.6, 0.6}, {0.4, 0.6}};
    PmlSettings pml;
    SourceSpec source;  ///< source.horizon mirrors T
    double T = 2.0;
    int steps = 400;
    double mesh_h = 0.05;
    std::vector<Point2> probes{{0.75, 0.6}, {0.25, 0.9}, {0.5, 0.3}};
    SweepSettings sweep;
    AuditSettings audit;
    LayerSettings layer;
    FreqSettings freq;
    TdSettings td;
    ConvergenceSettings convergence;
    ParsevalSettings parseval;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    std::string canonical;  ///< canonical JSON text of the effective configuration

    double s1() const { return 1.0 / T; }
    double dt() const { return T / steps; }
    Geometry geometry() const;
    PmlProfile pml_profile() const;
    PmlProfile pml_profile(double sigma0, double L) const;
    /// Throws ConfigError on any inconsistency relevant to the experiment kind.
    void validate() const;
};

/// Parses JSON text. Nested objects and dotted keys ("pml.sigma0") are
/// equivalent; unknown keys are rejected. Throws ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data);

struct RateFit {
    std::vector<double> abscissas;
    std::vector<double> log_errors;  ///< natural log of the kept errors
    double slope = 0.0, intercept = 0.0;
    double residual = 0.0;           ///< max |log e - fit|
    double residual_fraction = 0.0;  ///< residual / (max log e - min log e)
    int discarded = 0;               ///< points below the floor
    bool monotone = true;
    bool accepted = false;
    std::string diagnostic;

    double exponent() const { return -slope; }
    double predict(double x) const { return std::exp(intercept + slope * x); }
};

/**
 * Least squares on log-error against the abscissa after dropping errors
 * below `floor`. Needs three kept points; a sequence that does not decrease
 * strictly is fitted but not accepted.
 */
RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& errors, double floor = 1e-12);

/// RFC 4180 quoting: fields with a comma, quote or line break are quoted and quotes doubled.
std::string csv_field(const std::string& s);
std::string csv_number(double v);

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& fields);
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::size_t columns_;
    std::ofstream out_;
};

struct RunReport {
    bool pass = true;
    std::vector<std::string> outputs;
    std::vector<std::string> messages;
    std::map<std::string, double> metrics;
    std::optional<RateFit> fit;

    void fail(const std::string& why);
};

RunReport run_symbol_audit(const ExperimentConfig& cfg, int jobs = 1);
RunReport run_layer_check(const ExperimentConfig& cfg, int jobs = 1);
RunReport run_freq_solve(const ExperimentConfig& cfg, int jobs = 1);
RunReport run_td(const ExperimentConfig& cfg, int jobs = 1);
RunReport run_convergence(const ExperimentConfig& cfg, int jobs = 1);
RunReport run_parseval(const ExperimentConfig& cfg, int jobs = 1);
/// Dispatches on cfg.kind; creates cfg.output_dir and writes the manifest
/// and plot script next to the CSVs.
RunReport run_experiment(const ExperimentConfig& cfg, int jobs = 1);

/**
 * Writes a matplotlib script rendering the given CSVs: log-error against the
 * sweep variable with both theory slopes (convergence), gap against |xi| per
 * s (symbol audit) or probe traces. Throws ConfigError for a missing file or
 * a missing column.
 */
void emit_plots(const std::vector<std::string>& csv_paths, const std::string& script_path);

void write_manifest(const ExperimentConfig& cfg, const RunReport& report, int jobs, const std::string& path);

/// 0 pass, 1 failed check or runtime failure, 2 configuration error.
enum ExitCode : int { ExitPass = 0, ExitFail = 1, ExitConfig = 2 };

std::string version();

}  // namespace tdpml
