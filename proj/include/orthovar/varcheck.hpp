#pragma once

#include "orthovar/common.hpp"
#include "orthovar/curvature.hpp"
#include "orthovar/mesh.hpp"

#include <functional>
#include <string>
#include <vector>

namespace orthovar {

class ImplicitDomain;

/// phi(x, P) in R^3 with its x-Jacobian and P-directional derivative.
struct TestFunction {
    std::string tag;
    std::function<Vec3(const Vec3&, const Mat3&)> phi;
    std::function<Mat3(const Vec3&, const Mat3&)> dx;                 // (D_x phi)_ab = d phi_a / d x_b
    std::function<Vec3(const Vec3&, const Mat3&, const Mat3&)> dP;    // d/dt phi(x, P + t M)
    bool depends_on_P = false;
};

using TestFunctionBank = std::vector<TestFunction>;

TestFunction constant_field(const Vec3& c);
TestFunction linear_field(const Mat3& M, const Vec3& x0 = Vec3::Zero());
/// exp(-|x - x0|^2 / s^2) e
TestFunction gaussian_bump(const Vec3& x0, double s, const Vec3& e);
/// exp(-|x - x0|^2 / s^2) P c
TestFunction plane_field(const Vec3& x0, double s, const Vec3& c);

/// Constants, linear maps, coordinate bumps and P-dependent fields.
TestFunctionBank default_bank();
/// The x-only members of the default bank.
TestFunctionBank position_bank();

struct IdentityTerm {
    std::string tag;
    double lhs = 0;       // interior integral
    double rhs = 0;       // boundary integral of <nu^S, phi(x, nu^S ^ Q)>
    double c1_norm = 0;
    double residual = 0;  // |lhs + rhs| / ((1 + |phi|_C1)(M(V) + M(Gamma)))
};

struct IdentityResidual {
    std::vector<IdentityTerm> terms;
    double residual = 0;  // max over terms
    int skipped_edges = 0;
};

IdentityResidual orthogonality_identity_residual(const SurfaceMesh& mesh, const CurvatureField& field,
                                                 const ImplicitDomain& domain, const TestFunctionBank& bank,
                                                 double surface_tol = 1e-6);

/// For x-only phi: delta V(phi) and -int <H, phi> - int <nu^S, phi> on the
/// same quadrature. Returns both.
std::pair<double, double> first_variation_sides(const SurfaceMesh& mesh, const CurvatureField& field,
                                                const ImplicitDomain& domain, const TestFunction& phi);

/// Pointwise interior integrand D_P phi . B + <tr B, phi> + <D_x phi, P>.
double interior_integrand(const TestFunction& f, const Vec3& x, const Mat3& P, const Tensor3& B);

struct MassBounds {
    double mass = 0;            // M(V)
    double boundary_mass = 0;   // M(Gamma)
    double B_L1 = 0;
    double B_Lp_p = 0;
    double p = 2;
    double eps = 1;
    double young = 0;           // (1/p) eps^-p |B|_p^p + ((p-1)/p) eps^(p/(p-1)) M(V)
    double upper_rhs = 0;       // diam(Omega) (M(Gamma) + |B|_1) / m
};

MassBounds mass_bounds_report(const SurfaceMesh& mesh, const CurvatureField& field,
                              const ImplicitDomain& domain, double p, double eps = 1.0);

double kappa_ratio(const SurfaceMesh& mesh, const CurvatureField& field, double p);

}  // namespace orthovar
