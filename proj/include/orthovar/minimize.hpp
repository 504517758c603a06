#pragma once

#include "orthovar/common.hpp"
#include "orthovar/curvature.hpp"
#include "orthovar/domain.hpp"
#include "orthovar/mesh.hpp"

#include <string>
#include <vector>

namespace orthovar {

struct MinimizeConfig {
    double p = 2;
    double penalty_boundary = 10;   // weight of sum d_S(x_b)^2 / L^2
    double penalty_ortho = 1;       // weight of sum (1 - <eta_b, nu^S>)^2
    int max_iters = 500;
    double step_init = 1e-2;        // first steepest-descent step, in units of L
    double armijo_c = 1e-4;
    bool regularize_mesh = true;
    int smooth_every = 10;
    double smooth_strength = 0.2;

    double tol_grad = 1e-7;         // max |grad| in nondimensional coordinates
    double tol_boundary = 1e-6;     // max |d_S| / L at boundary vertices
    double tol_ortho_deg = 0.5;
    double area_floor = 1e-4;       // fraction of the initial area
    double quality_floor = 0.02;
    int memory = 8;                 // L-BFGS pairs
    double precondition = 100;      // beta in the initial metric I + beta L^T L; 0 disables
    double fd_step = 1e-6;          // in units of L
    int max_doublings = 30;
    int stall_window = 50;          // iterations over which progress is measured
    double stall_fraction = 1e-2;   // relative decrease below which the descent counts as stalled
    bool throw_on_failure = true;   // false: stop and report the failure in the trace status

    /// Throws InvalidConfig.
    void validate() const;
};

struct MinimizeStep {
    int iter = 0;
    double energy = 0;              // E^p = int |A|^p
    double objective = 0;           // penalized, nondimensional
    double area = 0;
    double boundary_length = 0;
    double ortho_angle_max = 0;     // degrees
    double boundary_dist_max = 0;
    double step = 0;
    double grad_max = 0;
    double penalty_boundary = 0;
    double penalty_ortho = 0;
};

struct MinimizeTrace {
    std::vector<MinimizeStep> steps;
    EnergyReport final_report;
    bool converged = false;
    int doublings = 0;
    std::string status;
};

struct MinimizeResult {
    SurfaceMesh mesh;
    MinimizeTrace trace;
};

/// Penalized L-BFGS descent of E^p with Armijo backtracking. Gradient by
/// local central differences: moving vertex v only changes the fits of its
/// 2-ring. Throws LineSearchFailed, MeshDegenerated, Collapsed.
MinimizeResult minimize(const SurfaceMesh& mesh0, const ImplicitDomain& domain, const MinimizeConfig& config = {});

/// Penalized objective and its finite-difference gradient (3 x V), as used by
/// minimize. Exposed for gradient checks.
struct ObjectiveValue {
    double value = 0;
    double energy = 0;
    double boundary = 0;
    double ortho = 0;
};
ObjectiveValue minimize_objective(const SurfaceMesh& mesh, const ImplicitDomain& domain, const MinimizeConfig& config,
                                  double length_scale);
MatX minimize_gradient(const SurfaceMesh& mesh, const ImplicitDomain& domain, const MinimizeConfig& config,
                       double length_scale);

struct ComparisonOptions {
    int level = 4;
    double lambda_max = 0.5;
};

/// Image of the upper unit hemisphere (z, y), y >= 0, under
/// f(z, y) = (z, u_l(z)) + y nu_l(z), u_l(z) = u(l z) / l,
/// nu_l(z) = (-Du(l z), 1) / sqrt(1 + |Du(l z)|^2). Throws LambdaOutOfRange.
SurfaceMesh build_comparison_surface(const GraphFunction& u, double lambda, const ComparisonOptions& opt = {});

/// Boundary graph of the comparison surface at lambda: u_l.
GraphCap comparison_domain(const GraphFunction& u, double lambda);

/// int |B|^2 of the comparison surface.
double comparison_energy(const GraphFunction& u, double lambda, const ComparisonOptions& opt = {});

/// Central difference of int |B|^2 in lambda at 0 with step h.
double energy_slope_at_zero(const GraphFunction& u, double h = 0.02, const ComparisonOptions& opt = {});

}  // namespace orthovar
