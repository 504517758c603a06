#include "orthovar/curvature.hpp"

#include "orthovar/domain.hpp"

#include <algorithm>
#include <cmath>

namespace orthovar {

double VertexCurvature::A_norm2() const {
    double s = 0;
    for (const auto& a : A) s += a.squaredNorm();
    return s;
}

double VertexCurvature::B_norm2() const {
    double s = 0;
    for (const auto& b : B) s += b.squaredNorm();
    return s;
}

VecX VertexCurvature::trace_B() const {
    VecX t = VecX::Zero(static_cast<Eigen::Index>(B.size()));
    for (std::size_t i = 0; i < B.size(); ++i) t += B[i].row(static_cast<Eigen::Index>(i)).transpose();
    return t;
}

namespace {

MatX normal_complement(const MatX& T) {
    const int n = static_cast<int>(T.rows());
    Eigen::HouseholderQR<MatX> qr(T);
    const MatX Q = qr.householderQ() * MatX::Identity(n, n);
    return Q.rightCols(n - 2);
}

MatX orthonormalize(const MatX& T) {
    MatX Q = T;
    Q.col(0).normalize();
    Q.col(1) -= Q.col(1).dot(Q.col(0)) * Q.col(0);
    Q.col(1).normalize();
    return Q;
}

}  // namespace

Tensor3 assemble_B(const MatX& T, const MatX& N, const std::vector<Eigen::Matrix2d>& A) {
    const int n = static_cast<int>(T.rows());
    const int c = static_cast<int>(N.cols());
    Tensor3 B(n, MatX::Zero(n, n));
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d a = T.row(i).transpose();
        for (int j = 0; j < n; ++j) {
            const Eigen::Vector2d b = T.row(j).transpose();
            VecX v = VecX::Zero(n);
            for (int k = 0; k < c; ++k) {
                v += a.dot(A[k] * b) * N.col(k);
                const Eigen::Vector2d Aa = A[k] * a;  // A_k(a, tau_alpha) for alpha = 0, 1
                v += N(j, k) * (Aa[0] * T.col(0) + Aa[1] * T.col(1));
            }
            B[i].row(j) = v.transpose();
        }
    }
    return B;
}

VertexCurvature fit_vertex(const SurfaceMesh& mesh, int v, const std::vector<int>& stencil,
                           const CurvatureOptions& opt) {
    const int n = mesh.dim();
    const int m = static_cast<int>(stencil.size());
    if (m < 5)
        throw Error(ErrorCode::DegenerateStencil, "vertex " + std::to_string(v) + " has fewer than 5 neighbours");
    const VecX x0 = mesh.point(v);
    MatX D(n, m);
    for (int j = 0; j < m; ++j) D.col(j) = mesh.point(stencil[j]) - x0;

    MatX T(n, 2);
    if (n == 3) {
        Vec3 nsum = Vec3::Zero();
        for (int f : mesh.vertex_faces(v)) {
            const Tri& t = mesh.triangles()[f];
            nsum += (mesh.p3(t[1]) - mesh.p3(t[0])).cross(mesh.p3(t[2]) - mesh.p3(t[0]));
        }
        if (nsum.norm() == 0) throw Error(ErrorCode::DegenerateStencil, "zero vertex normal");
        const auto tb = orthonormal_complement(nsum.normalized());
        T.col(0) = tb[0];
        T.col(1) = tb[1];
    } else {
        Eigen::SelfAdjointEigenSolver<MatX> es(D * D.transpose());
        T = es.eigenvectors().rightCols(2);
    }

    const double scale = std::sqrt(D.colwise().squaredNorm().mean());
    std::vector<Eigen::Matrix2d> A(n - 2);
    MatX N;
    for (int it = 0; it < std::max(1, opt.frame_iterations); ++it) {
        N = normal_complement(T);
        const MatX U = T.transpose() * D / scale;
        const MatX W = N.transpose() * D / scale;
        // Highest jet degree the stencil supports; A is read off the quadratic part.
        int top = 2;
        if (opt.max_degree >= 4 && m >= 18) top = 4;
        else if (opt.max_degree >= 3 && m >= 12) top = 3;
        MatX L(n - 2, 2);
        for (int deg = top; deg >= 2; --deg) {
            const int ncoef = deg == 2 ? 5 : (deg == 3 ? 9 : 14);
            MatX M(m, ncoef);
            for (int j = 0; j < m; ++j) {
                const double u1 = U(0, j), u2 = U(1, j);
                M.row(j).head<5>() << u1, u2, 0.5 * u1 * u1, u1 * u2, 0.5 * u2 * u2;
                if (deg >= 3) M.row(j).segment<4>(5) << u1 * u1 * u1, u1 * u1 * u2, u1 * u2 * u2, u2 * u2 * u2;
                if (deg >= 4)
                    M.row(j).segment<5>(9) << u1 * u1 * u1 * u1, u1 * u1 * u1 * u2, u1 * u1 * u2 * u2,
                        u1 * u2 * u2 * u2, u2 * u2 * u2 * u2;
            }
            Eigen::ColPivHouseholderQR<MatX> qr(M);
            qr.setThreshold(deg == 2 ? 1e-10 : 1e-4);
            if (qr.rank() < ncoef) {
                if (deg > 2) continue;
                throw Error(ErrorCode::DegenerateStencil,
                            "rank-deficient quadric fit at vertex " + std::to_string(v));
            }
            for (int k = 0; k < n - 2; ++k) {
                const VecX coef = qr.solve(VecX(W.row(k).transpose()));
                L(k, 0) = coef[0];
                L(k, 1) = coef[1];
                A[k] << coef[2], coef[3], coef[3], coef[4];
                A[k] /= scale;
            }
            break;
        }
        if (it + 1 == opt.frame_iterations || L.norm() < 1e-15) break;
        T = orthonormalize(T + N * L);
    }

    VertexCurvature c;
    c.tangent = T;
    c.normal = N;
    c.A = A;
    c.B = assemble_B(T, N, A);
    c.H = VecX::Zero(n);
    for (int k = 0; k < n - 2; ++k) {
        c.H += A[k].trace() * N.col(k);
        c.K += A[k].determinant();
    }
    return c;
}

CurvatureField estimate_curvature(const SurfaceMesh& mesh, const CurvatureOptions& opt) {
    CurvatureField field;
    field.v.resize(mesh.num_vertices());
    const VecX w = mesh.vertex_areas();
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        field.v[v] = fit_vertex(mesh, v, mesh.ring(v, opt.rings), opt);
        field.v[v].area = w[v];
    }
    return field;
}

// ---------------------------------------------------------------------------

std::vector<BoundaryStencil> boundary_stencils(const SurfaceMesh& mesh) {
    std::vector<BoundaryStencil> s(mesh.num_vertices());
    for (const auto& loop : mesh.boundary_loops()) {
        const std::size_t L = loop.size();
        for (std::size_t i = 0; i < L; ++i) {
            s[loop[i]].prev = loop[(i + L - 1) % L];
            s[loop[i]].next = loop[(i + 1) % L];
        }
    }
    return s;
}

double boundary_turning_angle(const SurfaceMesh& mesh, int v) {
    double sum = 0;
    for (int f : mesh.vertex_faces(v)) {
        const Tri& t = mesh.triangles()[f];
        const int k = t[0] == v ? 0 : (t[1] == v ? 1 : 2);
        const VecX a = mesh.point(t[(k + 1) % 3]) - mesh.point(v);
        const VecX b = mesh.point(t[(k + 2) % 3]) - mesh.point(v);
        sum += std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0));
    }
    return kPi - sum;
}

Vec3 fitted_conormal(const SurfaceMesh& mesh, const VertexCurvature& c, int v, const BoundaryStencil& s) {
    const Mat3 P = c.P().topLeftCorner<3, 3>();
    const Vec3 tau = (P * (mesh.p3(s.next) - mesh.p3(s.prev))).normalized();
    Vec3 w = Vec3::Zero();
    for (int f : mesh.vertex_faces(v)) {
        const Tri& t = mesh.triangles()[f];
        w += (mesh.p3(t[0]) + mesh.p3(t[1]) + mesh.p3(t[2])) / 3.0 - mesh.p3(v);
    }
    Vec3 eta = P * w;
    eta -= eta.dot(tau) * tau;
    // Fall back to the rotated tangent if the centroid direction is degenerate.
    if (eta.norm() < 1e-14) eta = c.tangent.col(0).head<3>().cross(c.tangent.col(1).head<3>()).cross(tau);
    eta.normalize();
    if (eta.dot(w) < 0) eta = -eta;
    return eta;
}

double ortho_angle_max(const SurfaceMesh& mesh, const CurvatureField& field, const ImplicitDomain& domain) {
    const auto st = boundary_stencils(mesh);
    double worst = 0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (!mesh.is_boundary(v)) continue;
        const Vec3 eta = fitted_conormal(mesh, field.v[v], v, st[v]);
        const Vec3 y = project_to_surface(domain, mesh.p3(v));
        const Vec3 nu = -domain.gradient(y).normalized();
        worst = std::max(worst, std::acos(std::clamp(eta.dot(nu), -1.0, 1.0)));
    }
    return worst;
}

EnergyReport energy_report(const SurfaceMesh& mesh, const CurvatureField& field, double p,
                           const ImplicitDomain* domain) {
    if (!(p >= 1)) throw Error(ErrorCode::InvalidConfig, "p must be >= 1");
    EnergyReport r;
    r.p = p;
    r.area = mesh.area();
    r.boundary_length = mesh.boundary_length();
    r.euler_char = mesh.euler_characteristic();
    double K = 0, turning = 0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const auto& c = field.v[v];
        r.energy_A_p += c.area * std::pow(c.A_norm2(), 0.5 * p);
        r.energy_B_p += c.area * std::pow(c.B_norm2(), 0.5 * p);
        r.energy_H_2 += c.area * c.H.squaredNorm();
        K += c.area * c.K;
        if (mesh.is_boundary(v)) turning += boundary_turning_angle(mesh, v);
    }
    r.gauss_bonnet_residual = std::abs(K + turning - 2 * kPi * r.euler_char);
    if (domain && !mesh.boundary_loops().empty() && mesh.dim() == 3)
        r.ortho_angle_max = ortho_angle_max(mesh, field, *domain);
    return r;
}

std::vector<BoundaryCurvature> geodesic_boundary_curvature(const SurfaceMesh& mesh,
                                                           const ImplicitDomain& domain,
                                                           double surface_tol) {
    const auto st = boundary_stencils(mesh);
    std::vector<BoundaryCurvature> out;
    for (const auto& loop : mesh.boundary_loops()) {
        for (int v : loop) {
            const Vec3 x = mesh.p3(v);
            if (std::abs(domain.distance(x)) > surface_tol)
                throw Error(ErrorCode::BoundaryOffSurface,
                            "boundary vertex " + std::to_string(v) + " is off S");
            const Vec3 xp = mesh.p3(st[v].prev), xn = mesh.p3(st[v].next);
            const double ds = 0.5 * ((xn - x).norm() + (x - xp).norm());
            const BoundaryFrame fr = boundary_frame(domain, x);
            Vec3 tau = xn - xp;
            tau -= tau.dot(fr.normal) * fr.normal;
            tau.normalize();
            out.push_back({v, boundary_turning_angle(mesh, v) / ds, fr.shape_form(tau, tau)});
        }
    }
    return out;
}

}  // namespace orthovar
