#include "orthovar/varcheck.hpp"

#include "orthovar/domain.hpp"

#include <algorithm>
#include <cmath>

namespace orthovar {

TestFunction constant_field(const Vec3& c) {
    TestFunction f;
    f.tag = "const(" + format_double(c.x()) + "," + format_double(c.y()) + "," + format_double(c.z()) + ")";
    f.phi = [c](const Vec3&, const Mat3&) { return c; };
    f.dx = [](const Vec3&, const Mat3&) { return Mat3::Zero().eval(); };
    f.dP = [](const Vec3&, const Mat3&, const Mat3&) { return Vec3::Zero().eval(); };
    return f;
}

TestFunction linear_field(const Mat3& M, const Vec3& x0) {
    TestFunction f;
    f.tag = "linear";
    f.phi = [M, x0](const Vec3& x, const Mat3&) { return (M * (x - x0)).eval(); };
    f.dx = [M](const Vec3&, const Mat3&) { return M; };
    f.dP = [](const Vec3&, const Mat3&, const Mat3&) { return Vec3::Zero().eval(); };
    return f;
}

TestFunction gaussian_bump(const Vec3& x0, double s, const Vec3& e) {
    TestFunction f;
    f.tag = "bump";
    auto psi = [x0, s](const Vec3& x) { return std::exp(-(x - x0).squaredNorm() / (s * s)); };
    f.phi = [psi, e](const Vec3& x, const Mat3&) { return (psi(x) * e).eval(); };
    f.dx = [psi, e, x0, s](const Vec3& x, const Mat3&) {
        const Vec3 g = -2.0 / (s * s) * psi(x) * (x - x0);
        return (e * g.transpose()).eval();
    };
    f.dP = [](const Vec3&, const Mat3&, const Mat3&) { return Vec3::Zero().eval(); };
    return f;
}

TestFunction plane_field(const Vec3& x0, double s, const Vec3& c) {
    TestFunction f;
    f.tag = "plane";
    f.depends_on_P = true;
    auto psi = [x0, s](const Vec3& x) { return std::exp(-(x - x0).squaredNorm() / (s * s)); };
    f.phi = [psi, c](const Vec3& x, const Mat3& P) { return (psi(x) * (P * c)).eval(); };
    f.dx = [psi, c, x0, s](const Vec3& x, const Mat3& P) {
        const Vec3 g = -2.0 / (s * s) * psi(x) * (x - x0);
        return ((P * c) * g.transpose()).eval();
    };
    f.dP = [psi, c](const Vec3& x, const Mat3&, const Mat3& M) { return (psi(x) * (M * c)).eval(); };
    return f;
}

TestFunctionBank position_bank() {
    TestFunctionBank bank;
    for (int k = 0; k < 3; ++k) {
        auto f = constant_field(Vec3::Unit(k));
        f.tag = std::string("const_e") + char('1' + k);
        bank.push_back(f);
    }
    auto id = linear_field(Mat3::Identity());
    id.tag = "position";
    bank.push_back(id);
    Mat3 R;
    R << 0, -1, 0, 1, 0, 0, 0, 0, 0;
    auto rot = linear_field(R);
    rot.tag = "rotation_z";
    bank.push_back(rot);
    Mat3 S;
    S << 1, 0.5, 0, 0.5, -1, 0.25, 0, 0.25, 0.5;
    auto sym = linear_field(S);
    sym.tag = "strain";
    bank.push_back(sym);
    const Vec3 centers[3] = {{0.3, 0.1, 0.0}, {-0.2, 0.4, 0.2}, {0.1, -0.3, -0.1}};
    for (int k = 0; k < 3; ++k) {
        auto b = gaussian_bump(centers[k], 0.7, Vec3::Unit(k));
        b.tag = std::string("bump_e") + char('1' + k);
        bank.push_back(b);
    }
    return bank;
}

TestFunctionBank default_bank() {
    TestFunctionBank bank = position_bank();
    const Vec3 cs[3] = {{1, 0, 0}, {0, 1, 0.5}, {0.3, -0.2, 1}};
    for (int k = 0; k < 3; ++k) {
        auto f = plane_field(Vec3(0.1 * k, -0.1, 0.05), 0.8, cs[k]);
        f.tag = std::string("plane_") + char('1' + k);
        bank.push_back(f);
    }
    return bank;
}

double interior_integrand(const TestFunction& f, const Vec3& x, const Mat3& P, const Tensor3& B) {
    double dPB = 0;
    if (f.depends_on_P) {
        for (int i = 0; i < 3; ++i) dPB += f.dP(x, P, Mat3(B[i].transpose()))[i];
    }
    const Vec3 trB(B[0](0, 0) + B[1](1, 0) + B[2](2, 0), B[0](0, 1) + B[1](1, 1) + B[2](2, 1),
                   B[0](0, 2) + B[1](1, 2) + B[2](2, 2));
    return dPB + trB.dot(f.phi(x, P)) + (f.dx(x, P).cwiseProduct(P)).sum();
}

namespace {

double c1_norm(const TestFunction& f, const SurfaceMesh& mesh, const CurvatureField& field) {
    double best = 0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const Vec3 x = mesh.p3(v);
        const Mat3 P = field.v[v].P().topLeftCorner<3, 3>();
        double dp2 = 0;
        if (f.depends_on_P)
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    Mat3 E = Mat3::Zero();
                    E(a, b) = 1;
                    dp2 += f.dP(x, P, E).squaredNorm();
                }
        best = std::max(best, f.phi(x, P).norm() + f.dx(x, P).norm() + std::sqrt(dp2));
    }
    return best;
}

struct EdgeSample {
    Vec3 y;
    Vec3 nu;
    Mat3 P;
    double length;
};

std::vector<EdgeSample> boundary_samples(const SurfaceMesh& mesh, const ImplicitDomain& domain,
                                         double surface_tol, int& skipped) {
    std::vector<EdgeSample> out;
    skipped = 0;
    for (const auto& loop : mesh.boundary_loops()) {
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const Vec3 a = mesh.p3(loop[i]), b = mesh.p3(loop[(i + 1) % loop.size()]);
            for (const Vec3* p : {&a, &b})
                if (std::abs(domain.distance(*p)) > surface_tol)
                    throw Error(ErrorCode::BoundaryOffSurface, "boundary vertex is off S");
            const double len = (b - a).norm();
            const Vec3 tau = (b - a) / len;
            const Vec3 y = project_to_surface(domain, 0.5 * (a + b));
            const Vec3 nu = -domain.gradient(y).normalized();
            if (std::abs(nu.dot(tau)) > 0.99) {
                ++skipped;
                continue;
            }
            const Vec3 t = (tau - tau.dot(nu) * nu).normalized();
            out.push_back({y, nu, nu * nu.transpose() + t * t.transpose(), len});
        }
    }
    return out;
}

}  // namespace

IdentityResidual orthogonality_identity_residual(const SurfaceMesh& mesh, const CurvatureField& field,
                                                 const ImplicitDomain& domain, const TestFunctionBank& bank,
                                                 double surface_tol) {
    IdentityResidual out;
    const auto edges = boundary_samples(mesh, domain, surface_tol, out.skipped_edges);
    const double scale = mesh.area() + mesh.boundary_length();
    for (const auto& f : bank) {
        IdentityTerm t;
        t.tag = f.tag;
        for (int v = 0; v < mesh.num_vertices(); ++v) {
            const auto& c = field.v[v];
            t.lhs += c.area * interior_integrand(f, mesh.p3(v), c.P().topLeftCorner<3, 3>(), c.B);
        }
        for (const auto& e : edges) t.rhs += e.length * e.nu.dot(f.phi(e.y, e.P));
        t.c1_norm = c1_norm(f, mesh, field);
        t.residual = std::abs(t.lhs + t.rhs) / ((1 + t.c1_norm) * scale);
        out.residual = std::max(out.residual, t.residual);
        out.terms.push_back(t);
    }
    return out;
}

std::pair<double, double> first_variation_sides(const SurfaceMesh& mesh, const CurvatureField& field,
                                                const ImplicitDomain& domain, const TestFunction& f) {
    int skipped = 0;
    const auto edges = boundary_samples(mesh, domain, 1e-6, skipped);
    double dv = 0, rhs = 0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const auto& c = field.v[v];
        const Vec3 x = mesh.p3(v);
        const Mat3 P = c.P().topLeftCorner<3, 3>();
        dv += c.area * (f.dx(x, P).cwiseProduct(P)).sum();
        rhs -= c.area * c.H.head<3>().dot(f.phi(x, P));
    }
    for (const auto& e : edges) rhs -= e.length * e.nu.dot(f.phi(e.y, e.P));
    return {dv, rhs};
}

MassBounds mass_bounds_report(const SurfaceMesh& mesh, const CurvatureField& field,
                              const ImplicitDomain& domain, double p, double eps) {
    if (!(p > 1) || !(eps > 0)) throw Error(ErrorCode::InvalidConfig, "mass bounds need p > 1, eps > 0");
    MassBounds r;
    r.p = p;
    r.eps = eps;
    r.mass = mesh.area();
    r.boundary_mass = mesh.boundary_length();
    for (const auto& c : field.v) {
        const double b = std::sqrt(c.B_norm2());
        r.B_L1 += c.area * b;
        r.B_Lp_p += c.area * std::pow(b, p);
    }
    r.young = std::pow(eps, -p) * r.B_Lp_p / p + (p - 1) / p * std::pow(eps, p / (p - 1)) * r.mass;
    r.upper_rhs = domain.bbox().diameter() * (r.boundary_mass + r.B_L1) / 2.0;
    return r;
}

double kappa_ratio(const SurfaceMesh& mesh, const CurvatureField& field, double p) {
    double e = 0;
    for (const auto& c : field.v) e += c.area * std::pow(c.B_norm2(), 0.5 * p);
    return e / mesh.area();
}

}  // namespace orthovar
