#include "orthovar/reflect.hpp"

#include <cmath>
#include <random>

namespace orthovar {

namespace {

Eigen::Matrix<double, 3, 2> plane_basis(const Mat3& P) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (P + P.transpose()));
    return es.eigenvectors().rightCols<2>();
}

// exp of a skew matrix (Rodrigues).
Mat3 rotation(const Mat3& W) {
    const Vec3 w(W(2, 1), W(0, 2), W(1, 0));
    const double a = w.norm();
    if (a < 1e-300) return Mat3::Identity();
    const Mat3 K = W / a;
    return Mat3::Identity() + std::sin(a) * K + (1 - std::cos(a)) * K * K;
}

Mat3 jacobian_times_projection(const Mat3& G, const Mat3& P) {
    return metric_jacobian(G, P) * metric_projection(G, P);
}

Mat3 inverse_metric(const Mat3& G) {
    Eigen::LDLT<Mat3> ldlt(G);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 1e-14)
        throw Error(ErrorCode::MetricNotInvertible, "metric is not positive definite");
    return ldlt.solve(Mat3::Identity());
}

Mat3 vertex_plane(const VertexCurvature& c) { return c.P().topLeftCorner<3, 3>(); }

}  // namespace

MetricField pullback_metric(DomainPtr domain, double h) {
    MetricField m;
    m.provenance = "pullback-of-sigma";
    m.G = [domain](const Vec3& x) {
        const Mat3 J = reflection_jacobian(*domain, x);
        return Mat3(J.transpose() * J);
    };
    m.DG = [G = m.G, h](const Vec3& x) {
        Tensor3 out(3);
        for (int k = 0; k < 3; ++k) {
            const Vec3 e = Vec3::Unit(k) * h;
            out[k] = (G(x + e) - G(x - e)) / (2 * h);
        }
        return out;
    };
    return m;
}

MetricField identity_metric() { return conformal_metric(1.0); }

MetricField conformal_metric(double c) {
    MetricField m;
    m.provenance = c == 1.0 ? "identity" : "conformal";
    m.G = [c](const Vec3&) { return Mat3(c * c * Mat3::Identity()); };
    m.DG = [](const Vec3&) { return Tensor3(3, MatX::Zero(3, 3)); };
    return m;
}

MetricField synthetic_metric(std::uint64_t seed, double amplitude) {
    std::mt19937_64 rng(seed);
    auto uniform = [&] { return 2 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1; };
    struct Mode {
        Mat3 S;
        Vec3 w;
        double c;
    };
    std::vector<Mode> modes;
    for (int k = 0; k < 3; ++k) {
        Vec3 a, b, w;
        for (int i = 0; i < 3; ++i) a[i] = uniform(), b[i] = uniform(), w[i] = 2 * uniform();
        const Mat3 ab = a * b.transpose();
        modes.push_back({0.5 * (ab + ab.transpose()), w, kPi * uniform()});
    }
    MetricField m;
    m.provenance = "synthetic-test-metric";
    m.G = [modes, amplitude](const Vec3& x) {
        Mat3 G = Mat3::Identity();
        for (const auto& md : modes) G += amplitude * std::sin(md.w.dot(x) + md.c) * md.S;
        return G;
    };
    m.DG = [modes, amplitude](const Vec3& x) {
        Tensor3 out(3, MatX::Zero(3, 3));
        for (const auto& md : modes) {
            const double c = amplitude * std::cos(md.w.dot(x) + md.c);
            for (int k = 0; k < 3; ++k) out[k] += c * md.w[k] * md.S;
        }
        return out;
    };
    return m;
}

double metric_jacobian(const Mat3& G, const Mat3& P) {
    const auto T = plane_basis(P);
    const double det = (T.transpose() * G * T).determinant();
    if (!(det > 0)) throw Error(ErrorCode::MetricNotInvertible, "metric degenerate on the plane");
    return std::sqrt(det);
}

Mat3 metric_projection(const Mat3& G, const Mat3& P) {
    const auto T = plane_basis(P);
    const Eigen::Matrix2d g = T.transpose() * G * T;
    return T * g.inverse() * T.transpose() * G;
}

MeanCurvatureTerms riemannian_mean_curvature(const MetricField& metric, const Vec3& x, const Mat3& P,
                                             const Tensor3& B, double hP) {
    const Mat3 G = metric.G(x);
    const Tensor3 DG = metric.DG(x);
    const Mat3 Gi = inverse_metric(G);
    const double J = metric_jacobian(G, P);
    const Mat3 Q = metric_projection(G, P);
    MeanCurvatureTerms t;

    // phi1^l = g^{lm} / JG * sum_i d/dP (JG Q)^i_m [B_i].
    Vec3 c = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
        const Mat3 N = B[i];
        const double s = N.norm();
        if (s == 0) continue;
        const Mat3 W = (N * P - P * N) / s;
        const Mat3 Rp = rotation(hP * W), Rm = rotation(-hP * W);
        const Mat3 Pp = Rp * P * Rp.transpose(), Pm = Rm * P * Rm.transpose();
        const Mat3 d = s * (jacobian_times_projection(G, Pp) - jacobian_times_projection(G, Pm)) / (2 * hP);
        c += d.row(i).transpose();
    }
    t.phi1 = Gi * c / J;

    // phi2 = G^{-1} / JG * sum_j (d_j (JG Q))^T P e_j.
    const double hG = 1e-5;
    Vec3 s2 = Vec3::Zero();
    for (int j = 0; j < 3; ++j) {
        const Mat3 Dj = DG[j];
        const double s = Dj.norm();
        if (s == 0) continue;
        const Mat3 d = s * (jacobian_times_projection(G + hG * Dj / s, P) -
                            jacobian_times_projection(G - hG * Dj / s, P)) / (2 * hG);
        s2 += d.transpose() * P.col(j);
    }
    t.phi2 = Gi * s2 / J;

    // phi3^i = -1/2 g^{ij} <Q G^{-1} d_j G, P>.
    Vec3 s3;
    for (int j = 0; j < 3; ++j) s3[j] = (Q * Gi * DG[j]).cwiseProduct(P).sum();
    t.phi3 = -0.5 * Gi * s3;
    return t;
}

std::vector<Vec3> H_g_field(const SurfaceMesh& mesh, const CurvatureField& field, const MetricField& metric) {
    std::vector<Vec3> out;
    out.reserve(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const auto& c = field.v[v];
        out.push_back(riemannian_mean_curvature(metric, mesh.p3(v), vertex_plane(c), c.B).total());
    }
    return out;
}

double riemannian_mass(const SurfaceMesh& mesh, const CurvatureField& field, const MetricField& metric) {
    double m = 0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const auto& c = field.v[v];
        m += c.area * metric_jacobian(metric.G(mesh.p3(v)), vertex_plane(c));
    }
    return m;
}

Vec3 boundary_mean_curvature(const ImplicitDomain& domain, const Vec3& x, const Mat3& P, const Vec3& H) {
    const Mat3 D2 = domain.hessian(x);
    const Vec3 nu = -domain.gradient(x);
    const Mat3 Pp = Mat3::Identity() - P;
    const double lap = (P * D2).trace();
    return H - 2 * lap * Pp * nu + 4 * Pp * D2 * P * nu;
}

Vec3 seam_mean_curvature(const ImplicitDomain& domain, const Vec3& x, const Mat3& P, const Vec3& H) {
    const Vec3 nu = -domain.gradient(x);
    const double lap = (P * domain.hessian(x)).trace();
    return H - nu.dot(H) * nu + lap * nu;
}

double ReflectedSurface::energy() const {
    double e = 0;
    for (std::size_t i = 0; i < H.size(); ++i) e += weight[i] * H[i].squaredNorm();
    return e;
}

double ReflectedSurface::mass() const {
    double m = 0;
    for (double w : weight) m += w;
    return m;
}

ReflectedSurface reflect_surface(const SurfaceMesh& mesh, const CurvatureField& field, DomainPtr domain,
                                 double seam_tol, double boundary_tol) {
    if (mesh.dim() != 3) throw Error(ErrorCode::InvalidMesh, "reflection needs a surface in R^3");
    for (const auto& loop : mesh.boundary_loops())
        for (int v : loop) {
            const double d = domain->distance(mesh.p3(v));
            if (std::abs(d) > boundary_tol)
                throw Error(ErrorCode::BoundaryNotOnSurface,
                            "boundary vertex " + std::to_string(v) + " at distance " + format_double(d));
        }
    const MetricField metric = pullback_metric(domain);
    ReflectedSurface W;
    const int n = mesh.num_vertices();
    std::vector<char> seam(n);
    std::vector<int> mirror(n);
    for (int v = 0; v < n; ++v) {
        const Vec3 x = mesh.p3(v);
        const auto& c = field.v[v];
        const Mat3 P = vertex_plane(c);
        seam[v] = std::abs(domain->distance(x)) < seam_tol;
        W.points.push_back(x);
        W.source.push_back(v);
        if (seam[v]) {
            const Vec3 h = seam_mean_curvature(*domain, x, P, c.H);
            // The average of both sheets from the generic path; agrees with the seam formula on S.
            const Vec3 Hg = riemannian_mean_curvature(metric, x, P, c.B).total();
            const Vec3 avg = 0.5 * (c.H + reflection_jacobian(*domain, x) * Hg);
            W.seam_consistency = std::max(W.seam_consistency, (avg - h).norm() / (1 + h.norm()));
            W.H.push_back(h);
            W.weight.push_back(2 * c.area);
            W.multiplicity.push_back(2);
            ++W.seam_vertices;
        } else {
            W.H.push_back(c.H);
            W.weight.push_back(c.area);
            W.multiplicity.push_back(1);
        }
    }
    W.sheet_offset = n;
    for (int v = 0; v < n; ++v) {
        if (seam[v]) {
            mirror[v] = v;
            continue;
        }
        const Vec3 x = mesh.p3(v);
        const auto& c = field.v[v];
        const Mat3 P = vertex_plane(c);
        mirror[v] = static_cast<int>(W.points.size());
        W.points.push_back(reflect(*domain, x));
        W.source.push_back(v);
        const Vec3 Hg = riemannian_mean_curvature(metric, x, P, c.B).total();
        W.H.push_back(reflection_jacobian(*domain, x) * Hg);
        W.weight.push_back(c.area * metric_jacobian(metric.G(x), P));
        W.multiplicity.push_back(1);
    }
    W.triangles = mesh.triangles();
    for (const Tri& t : mesh.triangles()) W.triangles.push_back({mirror[t[0]], mirror[t[2]], mirror[t[1]]});
    return W;
}

ReflectedEnergyRecord reflected_energy_check(const SurfaceMesh& mesh, const CurvatureField& field, DomainPtr domain,
                                             double C) {
    const ReflectedSurface W = reflect_surface(mesh, field, domain);
    const MetricField metric = pullback_metric(domain);
    ReflectedEnergyRecord r;
    r.lhs = W.energy();
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const auto& c = field.v[v];
        r.twice_H += 2 * c.area * c.H.squaredNorm();
        r.B_energy += c.area * c.B_norm2();
        r.mass += c.area;
        const Vec3 x = mesh.p3(v);
        r.eps = std::max(r.eps, (metric.G(x) - Mat3::Identity()).norm());
        const Tensor3 D = metric.DG(x);
        double dn = 0;
        for (const auto& Dk : D) dn += Dk.squaredNorm();
        r.Lambda = std::max(r.Lambda, std::sqrt(dn));
    }
    const double excess = std::max(0.0, r.lhs - r.twice_H);
    const double terms = r.eps > 0 ? r.eps * r.B_energy + r.Lambda * r.Lambda * r.mass / r.eps : 0.0;
    r.c_min = excess == 0 ? 0 : terms > 0 ? excess / terms : INFINITY;
    const double c = C < 0 ? r.c_min : C;
    r.slack = r.twice_H + (terms > 0 ? c * terms : 0.0) - r.lhs;
    return r;
}

}  // namespace orthovar
