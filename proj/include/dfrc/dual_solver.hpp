#pragma once

// Majorization-minimization driver and the Lagrange-dual solver of the
// linearized constant-modulus subproblem
//
//   min_x Re{x^H d}  s.t.  Re{h~_m^H x} >= Gamma_m,  |x_n| = sqrt(P_T / N_T).
//
// For fixed multipliers nu the Lagrangian separates per entry and is minimized
// by x(nu) = sqrt(P_T/N_T) exp(j arg(sum_m nu_m h~_m - d)). The multipliers are
// found one at a time by bisection on gbar_m(x(nu)) = Gamma_m - Re{h~_m^H x(nu)}.

#include "dfrc/comm_ci.hpp"
#include "dfrc/core.hpp"
#include "dfrc/majorization.hpp"
#include "dfrc/radar_metrics.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dfrc {

/// Entrywise amp * exp(j arg(v)), with arg(0) taken as 0.
CVector cm_phase_align(const CVector& v, double amplitude);

/// x(nu) for the whole waveform.
CVector solve_inner(const RVector& nu, const CVector& d, const CIConstraintSet& constraints, double amplitude);

/// gbar_m(x) = Gamma_m - Re{h~_m^H x}; feasible iff <= 0.
RVector constraint_values(const CVector& x, const CIConstraintSet& constraints);

/// Lagrangian Re{x^H d} + sum_m nu_m gbar_m(x).
double lagrangian(const CVector& x, const RVector& nu, const CVector& d, const CIConstraintSet& constraints);

struct BisectOutcome {
    double nu = 0.0;
    int evaluations = 0;
    bool bracketed = true;  // false when doubling hit the iteration cap
    bool met_stop_rule = true;
};

/// Multiplier search for one constraint against an arbitrary residual
/// gbar(nu'), following the doubling bracket and the
/// |gbar + eps2/2| < eps2/2 stop rule. max_iters caps the doubling and
/// bisection phases separately.
BisectOutcome bisect_residual(const std::function<double(double)>& residual, double eps2, int max_iters);

/// Updated nu_m with every other multiplier held fixed.
BisectOutcome bisect_multiplier(int m, const RVector& nu, const CVector& d, const CIConstraintSet& constraints,
                                double amplitude, const SolverConfig& cfg);

struct KktReport {
    /// max_m min(nu_m, -gbar_m), clamped at 0.
    double complementarity = 0.0;
    /// max_m gbar_m, clamped at 0.
    double max_violation = 0.0;
};

KktReport kkt_report(const CVector& x, const RVector& nu, const CIConstraintSet& constraints);

struct DualResult {
    CVector x;
    RVector nu;
    std::vector<double> dual_trace;  // ghat after every sweep
    int sweeps = 0;
    long evaluations = 0;
    bool converged = false;
    std::vector<int> unbracketed;  // constraints whose doubling never bracketed a root
};

/// Coordinate ascent over all 2KL multipliers, starting from nu0, until the
/// relative change of ghat drops below eps1 with the iterate primal feasible to
/// feas_tol and complementary to eps2, or a sweep leaves nu unchanged, or
/// max_sweeps is reached.
DualResult dual_ascent(const RVector& nu0, const CVector& d, const CIConstraintSet& constraints, double amplitude,
                       const SolverConfig& cfg);

/// Feasibility-preserving descent on Re{x^H d} over constant-modulus phases.
/// Each step moves one entry to its best phase among the unconstrained
/// optimum and the endpoints of the arcs allowed by its block's constraints,
/// never raising any gbar_m above max(gbar_m(x), 0). A block violated by more
/// than feas_tol is first moved toward feasibility by maximizing its smallest
/// margin entry by entry. Runs up to `sweeps` passes of each stage.
CVector phase_descent(const CVector& x, const CVector& d, const CIConstraintSet& constraints, double amplitude,
                      int sweeps, double feas_tol);

enum class Termination { converged, max_iters, infeasible_warning, non_finite };
std::string_view to_string(Termination t);

struct SolverState {
    CVector x;
    RVector nu;
    double initial_objective = 0.0;        // g(x0)
    std::vector<double> objective_trace;   // g(x_t), t = 1, 2, ...
    std::vector<double> dual_trace;        // ghat per sweep, all MM iterations
    int outer_iterations = 0;
    long sweeps = 0;
    long bisection_evaluations = 0;
    int safeguarded_steps = 0;  // iterations where the dual iterate was replaced
    bool objective_converged = false;
    Termination termination = Termination::max_iters;
    std::vector<std::string> warnings;
};

/// Outer MM loop. `constraints` may be null only in radar_only mode.
/// In dfrc mode the dual iterate is kept when it is feasible and does not
/// raise the linear surrogate above its value at the current point; otherwise
/// the feasible one of {dual iterate, current point} after phase_descent with
/// the lower surrogate is taken, which keeps the objective monotone.
/// `x0` must be constant-modulus with amplitude sqrt(P_T / N_T).
SolverState mm_solve(const RadarScene& scene, const CIConstraintSet* constraints, const Weights& weights,
                     const SolverConfig& cfg, const CVector& x0, double p_total);

/// Random-phase constant-modulus start drawn from the init stream of `seed`.
CVector default_initial_point(const RadarScene& scene, double p_total, std::uint64_t seed);

}  // namespace dfrc
