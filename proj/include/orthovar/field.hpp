#pragma once

#include "orthovar/common.hpp"

#include <functional>
#include <string>

namespace orthovar {

class ImplicitDomain;

using ScalarField = std::function<double(const Vec3&)>;
using VectorField = std::function<Vec3(const Vec3&)>;

/// g_u(x) = x + u(x) xi(x) on S. An empty xi means xi = nu^S.
struct NormalPerturbation {
    ScalarField u;
    VectorField xi;
    double c2_norm = 0;  // sampled estimate, reported
    std::string description;

    Vec3 direction(const ImplicitDomain& domain, const Vec3& x) const;
    Vec3 displace(const ImplicitDomain& domain, const Vec3& x) const;
};

/// Unit normal of g_u(S) at g_u(y), y on S, oriented like nu^S. Central
/// differences of g_u along T_y S.
Vec3 perturbed_normal(const ImplicitDomain& domain, const NormalPerturbation& pert, const Vec3& y,
                      double h = 1e-6);

/// Surface gradient on S of a scalar field at y, central differences along T_y S.
Vec3 surface_gradient(const ImplicitDomain& domain, const ScalarField& f, const Vec3& y, double h = 1e-6);

}  // namespace orthovar
