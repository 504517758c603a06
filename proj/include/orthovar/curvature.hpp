#pragma once

#include "orthovar/common.hpp"
#include "orthovar/mesh.hpp"

#include <vector>

namespace orthovar {

class ImplicitDomain;

struct VertexCurvature {
    MatX tangent;                       // n x 2, orthonormal
    MatX normal;                        // n x (n - 2), orthonormal
    std::vector<Eigen::Matrix2d> A;     // A_k(a, b) = <A(tau_a, tau_b), nu_k>
    Tensor3 B;                          // B[i](j, k) = <B(e_i, e_j), e_k>
    VecX H;
    double K = 0;
    double area = 0;

    MatX P() const { return tangent * tangent.transpose(); }
    double A_norm2() const;
    double B_norm2() const;
    VecX trace_B() const;
};

struct CurvatureField {
    std::vector<VertexCurvature> v;
    int size() const { return static_cast<int>(v.size()); }
};

struct CurvatureOptions {
    int rings = 2;
    int frame_iterations = 4;
    int max_degree = 4;  // jet degree used when the stencil supports it
};

/// Fits, per vertex, a quadric to each normal coordinate over the k-ring in
/// the vertex frame, then assembles B from A.
CurvatureField estimate_curvature(const SurfaceMesh& mesh, const CurvatureOptions& opt = {});

/// Fit at a single vertex; exposed for the minimizer's local updates.
VertexCurvature fit_vertex(const SurfaceMesh& mesh, int v, const std::vector<int>& stencil,
                           const CurvatureOptions& opt = {});

/// B(v, w) = A(v^T, w^T) + sum_a <A(v^T, tau_a), w^perp> tau_a.
Tensor3 assemble_B(const MatX& tangent, const MatX& normal, const std::vector<Eigen::Matrix2d>& A);

struct EnergyReport {
    double area = 0;
    double boundary_length = 0;
    int euler_char = 0;
    double p = 2;
    double energy_A_p = 0;
    double energy_B_p = 0;
    double energy_H_2 = 0;
    double gauss_bonnet_residual = 0;
    double ortho_angle_max = 0;  // radians; 0 when no domain is given
};

EnergyReport energy_report(const SurfaceMesh& mesh, const CurvatureField& field, double p,
                           const ImplicitDomain* domain = nullptr);

struct BoundaryCurvature {
    int vertex = -1;
    double intrinsic = 0;  // turning angle per dual length
    double extrinsic = 0;  // h^S(tau, tau)
};

/// Per boundary vertex: discrete turning-angle curvature and h^S(tau, tau).
std::vector<BoundaryCurvature> geodesic_boundary_curvature(const SurfaceMesh& mesh,
                                                           const ImplicitDomain& domain,
                                                           double surface_tol = 1e-8);

/// Discrete turning angle pi - (sum of incident triangle angles) at a boundary vertex.
double boundary_turning_angle(const SurfaceMesh& mesh, int v);

/// Unit boundary tangent at a boundary vertex (central difference along its loop),
/// paired with the loop neighbours.
struct BoundaryStencil {
    int prev = -1, next = -1;
};
std::vector<BoundaryStencil> boundary_stencils(const SurfaceMesh& mesh);

/// Inward co-normal at a boundary vertex from the fitted tangent plane.
Vec3 fitted_conormal(const SurfaceMesh& mesh, const VertexCurvature& c, int v, const BoundaryStencil& s);

/// Largest angle between the co-normal and nu^S over boundary vertices.
double ortho_angle_max(const SurfaceMesh& mesh, const CurvatureField& field, const ImplicitDomain& domain);

}  // namespace orthovar
