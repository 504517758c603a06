#pragma once

#include "orthovar/common.hpp"
#include "orthovar/curvature.hpp"
#include "orthovar/domain.hpp"
#include "orthovar/mesh.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace orthovar {

/// Riemannian metric on an open set: G(x) and DG(x)[k] = dG/dx_k.
struct MetricField {
    std::function<Mat3(const Vec3&)> G;
    std::function<Tensor3(const Vec3&)> DG;
    std::string provenance;
};

/// g_ij = <d_i sigma, d_j sigma> for the reflection across S; DG by central
/// differences of G with step h. Throws PointOutsideTube.
MetricField pullback_metric(DomainPtr domain, double h = 1e-5);
MetricField identity_metric();
/// c^2 I.
MetricField conformal_metric(double c);
/// I + amplitude * sum_k sym(a_k b_k^T) sin(<w_k, x> + c_k), three random modes.
MetricField synthetic_metric(std::uint64_t seed, double amplitude = 0.1);

/// (det G|_P)^(1/2) for a rank-2 projection P.
double metric_jacobian(const Mat3& G, const Mat3& P);
/// g-orthogonal projection onto im P.
Mat3 metric_projection(const Mat3& G, const Mat3& P);

struct MeanCurvatureTerms {
    Vec3 phi1 = Vec3::Zero(), phi2 = Vec3::Zero(), phi3 = Vec3::Zero();
    Vec3 total() const { return phi1 + phi2 + phi3; }
};

/// H_g = phi1 + phi2 + phi3 at (x, P) with curvature B. P-derivatives by
/// central differences along exp(t[N, P]) P exp(-t[N, P]), step hP.
/// Throws MetricNotInvertible.
MeanCurvatureTerms riemannian_mean_curvature(const MetricField& metric, const Vec3& x, const Mat3& P,
                                             const Tensor3& B, double hP = 1e-5);

std::vector<Vec3> H_g_field(const SurfaceMesh& mesh, const CurvatureField& field, const MetricField& metric);

/// Vertex quadrature of JG(x, P) with lumped areas and fitted tangent planes.
double riemannian_mass(const SurfaceMesh& mesh, const CurvatureField& field, const MetricField& metric);

/// H - 2 tr_P(D^2 d) P^perp nu^S + 4 P^perp D^2 d P nu^S at x on S.
Vec3 boundary_mean_curvature(const ImplicitDomain& domain, const Vec3& x, const Mat3& P, const Vec3& H);

/// P_S^T H + tr_P(D^2 d) nu^S at x on S.
Vec3 seam_mean_curvature(const ImplicitDomain& domain, const Vec3& x, const Mat3& P, const Vec3& H);

/// W = V + sigma_# V as a point cloud with triangles; vertices of V on S
/// (|d| < seam_tol) are shared and carry both sheets' weight.
struct ReflectedSurface {
    std::vector<Vec3> points;
    std::vector<Tri> triangles;
    std::vector<Vec3> H;             // H_W per vertex
    std::vector<double> weight;      // mu_W per vertex
    std::vector<int> multiplicity;   // 2 on S, else 1
    std::vector<int> source;         // vertex of V each point comes from
    int sheet_offset = 0;            // first reflected (off-S) vertex
    double seam_consistency = 0;     // max |(H_V + Dsigma H_g)/2 - seam formula| / (1 + |H_W|) on S
    int seam_vertices = 0;

    double energy() const;           // sum weight |H_W|^2
    double mass() const;             // sum weight
};

/// Throws BoundaryNotOnSurface when a boundary vertex is off S.
ReflectedSurface reflect_surface(const SurfaceMesh& mesh, const CurvatureField& field, DomainPtr domain,
                                 double seam_tol = 1e-9, double boundary_tol = 1e-6);

struct ReflectedEnergyRecord {
    double lhs = 0;            // int |H_W|^2 d mu_W
    double twice_H = 0;        // 2 int |H_V|^2
    double B_energy = 0;       // int |B_V|^2
    double mass = 0;           // M(V)
    double eps = 0;            // max |G - I| over the vertices of V
    double Lambda = 0;         // max |DG| over the vertices of V
    double c_min = 0;          // smallest C with lhs <= 2 int|H|^2 + C (eps int|B|^2 + Lambda^2 M / eps)
    double slack = 0;          // rhs - lhs at the given C (c_min when C < 0)
};

ReflectedEnergyRecord reflected_energy_check(const SurfaceMesh& mesh, const CurvatureField& field, DomainPtr domain,
                                             double C = -1);

}  // namespace orthovar
