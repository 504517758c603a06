#include "orthovar/field.hpp"

#include "orthovar/domain.hpp"

namespace orthovar {

Vec3 NormalPerturbation::direction(const ImplicitDomain& domain, const Vec3& x) const {
    return xi ? xi(x) : domain.surface_normal(x);
}

Vec3 NormalPerturbation::displace(const ImplicitDomain& domain, const Vec3& x) const {
    return x + u(x) * direction(domain, x);
}

Vec3 perturbed_normal(const ImplicitDomain& domain, const NormalPerturbation& pert, const Vec3& y, double h) {
    const Vec3 nu = domain.surface_normal(y);
    const auto t = orthonormal_complement(nu);
    Vec3 q[2];
    for (int i = 0; i < 2; ++i) {
        const Vec3 a = project_to_surface(domain, y + h * t[i]);
        const Vec3 b = project_to_surface(domain, y - h * t[i]);
        q[i] = (pert.displace(domain, a) - pert.displace(domain, b)) / (2 * h);
    }
    Vec3 n = q[0].cross(q[1]).normalized();
    if (n.dot(nu) < 0) n = -n;
    return n;
}

Vec3 surface_gradient(const ImplicitDomain& domain, const ScalarField& f, const Vec3& y, double h) {
    const auto t = orthonormal_complement(domain.surface_normal(y));
    Vec3 g = Vec3::Zero();
    for (int i = 0; i < 2; ++i) {
        const double a = f(project_to_surface(domain, y + h * t[i]));
        const double b = f(project_to_surface(domain, y - h * t[i]));
        g += (a - b) / (2 * h) * t[i];
    }
    return g;
}

}  // namespace orthovar
