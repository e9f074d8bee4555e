#pragma once
/**
 * @file time_solver.hpp
 * @brief Time-domain fields by two independent routes: synthesis along the
 * Bromwich line Re s = s1 from frequency solves, and average-acceleration
 * Newmark stepping of the real time-domain PML system.
 */

#include "tdpml/freq_solver.hpp"

#include <limits>
#include <string>
#include <vector>

namespace tdpml {

struct ContourConfig {
    double s1 = 0.5;
    double s2_max = 40.0;
    int n_freq = 401;             ///< odd: symmetric grid including s2 = 0
    std::vector<double> t_grid;   ///< output times

    /// s1 = 1/T, s2_max = 40 c / period, n_freq = 401, n_times + 1 uniform times in [0, T].
    static ContourConfig defaults(double T, double c, double period, int n_times = 400);
    /// Throws ConfigError on s1 <= 0, even or too small n_freq, s2_max <= 0 or negative times.
    void validate() const;
    /// Nonnegative half of the s2 grid.
    std::vector<double> s2_nonnegative() const;
};

/**
 * Inverts samples F(s1 + i s2_k), s2_k >= 0, of the transform of a real
 * signal: f(t) = e^{s1 t}/(2 pi) sum_k w_k e^{i s2_k t} F(s1 + i s2_k) over the
 * symmetric trapezoid grid, folded with F(conj s) = conj F(s).
 */
std::vector<double> contour_invert(const ContourConfig& cfg, const std::vector<cplx>& samples);

struct ContourCheck {
    double max_error = 0.0;     ///< max |reconstruction - w| on the output grid
    double relative_error = 0.0;  ///< max_error / max |w|
    bool sufficient = true;     ///< max_error <= 1e-3
};

/// Reconstructs the pulse from its closed-form transform on cfg.t_grid.
ContourCheck contour_self_check(const ContourConfig& cfg, const Pulse& pulse);

struct ProbeSeries {
    Point2 x;
    std::vector<double> p;       ///< fluid probes
    std::vector<double> u1, u2;  ///< solid probes
    bool solid = false;
};

struct ContourResult {
    std::vector<double> t;
    std::vector<ProbeSeries> probes;
    ContourCheck check;
    std::vector<std::string> warnings;
};

/// Pressure (or displacement) at the probes by frequency solves on the
/// nonnegative s2 grid, run on `jobs` workers.
ContourResult contour_synthesize(const ContourConfig& cfg, const FrequencyDiscretization& disc, const SourceField& src,
                                 const std::vector<Point2>& probes, int jobs = 1);

struct NewmarkConfig {
    double dt = 0.005;
    double T = 2.0;
    std::vector<Point2> probes;
    bool store_fields = false;  ///< keep p at the Omega_h vertices every step
    double source_off_after = std::numeric_limits<double>::infinity();
    std::vector<double> snapshot_times;  ///< full-field snapshots (nearest step)
};

struct StepRecord {
    double t = 0;
    double energy = 0;    ///< conserved quantity of the semi-discrete system
    double power = 0;     ///< dp/dt . f, the energy source
    double work = 0;      ///< trapezoid-consistent cumulative source work; equals energy exactly
    double dt_p = 0;      ///< ||dp/dt||
    double grad_p = 0;    ///< ||grad p||
    double dt_u = 0;      ///< ||du/dt||
    double div_u = 0;     ///< ||div u||
    double grad_u = 0;    ///< ||grad u||_F
};

struct TimeTrajectory {
    double dt = 0;
    std::vector<double> t;
    std::vector<StepRecord> steps;
    std::vector<ProbeSeries> probes;
    std::vector<std::vector<double>> omega_h_p;  ///< per step, if stored
    std::vector<std::pair<double, std::vector<double>>> snapshots;  ///< (t, p per raw vertex)
    double field_max = 0;      ///< max |p| over all vertices and steps
    double sigma0 = 0, horizon = 0;
};

/**
 * Integrates M a + K x = f with x = [p; u],
 *   M = [[M_f, -rho0 C], [0, rho_e M_s]],  K = [[K_f, 0], [C^T, K_s]],
 *   f = [w'(t) int chi/c^2 q; 0],
 * zero initial data and Dirichlet conditions on Gamma_f and Gamma_{h+L}.
 * Throws SolverError if the effective matrix cannot be factorized.
 */
TimeTrajectory newmark_run(const StripMesh& mesh, const MediaParams& media, const SourceField& src,
                           const NewmarkConfig& cfg);

struct EnergyTrace {
    std::vector<double> source_l1;   ///< ||d_t g||_{L1(0,t;L2)} per step
    std::vector<double> fluid_ratio; ///< (||d_t p|| + ||grad p||) / source_l1
    std::vector<double> solid_ratio; ///< (||d_t u|| + ||div u|| + ||grad u||) / source_l1
    double max_fluid = 0, max_solid = 0;
    double max_fluid_pml = 0;  ///< max_fluid / (1 + sigma0 T)
    double max_solid_pml = 0;  ///< max_solid / sqrt(1 + sigma0 T)
};

EnergyTrace energy_trace(const TimeTrajectory& traj, const StripMesh& mesh, const SourceField& src);

/// Largest |p| at a probe strictly before t_arrival, relative to traj.field_max.
double pre_arrival_ratio(const TimeTrajectory& traj, std::size_t probe, double t_arrival);

/// Relative L2(0,T) difference between two sampled series on the same grid.
double relative_l2_difference(const std::vector<double>& a, const std::vector<double>& reference);

/// Writes "t,probe_id,p,u1,u2" rows.
void write_probe_csv(const std::string& path, const std::vector<double>& t, const std::vector<ProbeSeries>& probes);

}  // namespace tdpml
