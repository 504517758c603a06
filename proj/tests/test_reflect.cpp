#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "orthovar/curvature.hpp"
#include "orthovar/domain.hpp"
#include "orthovar/mesh.hpp"
#include "orthovar/reflect.hpp"

#include <random>

using namespace orthovar;

namespace {

Mat3 plane_projection(const Vec3& n) {
    const Vec3 u = n.normalized();
    return Mat3::Identity() - u * u.transpose();
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0);
    w.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5)), dp = 1;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = z;
        w[i] = 2 / ((1 - z * z) * dp * dp);
    }
}

}  // namespace

TEST_CASE("metric Jacobian: identity, conformal, and sqrt det of the restricted metric") {
    const Mat3 P = plane_projection(Vec3(1, 2, -1));
    CHECK(metric_jacobian(Mat3::Identity(), P) == doctest::Approx(1).epsilon(1e-14));
    CHECK(metric_jacobian(9 * Mat3::Identity(), P) == doctest::Approx(9).epsilon(1e-13));
    Mat3 G;
    G << 2, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.2;
    Eigen::SelfAdjointEigenSolver<Mat3> es(P);
    const Eigen::Matrix<double, 3, 2> T = es.eigenvectors().rightCols<2>();
    CHECK(metric_jacobian(G, P) == doctest::Approx(std::sqrt((T.transpose() * G * T).determinant())).epsilon(1e-12));
}

TEST_CASE("pullback metric of the ball equals Dsigma^T Dsigma, identity on S") {
    auto ball = std::make_shared<Ball>();
    const MetricField g = pullback_metric(ball);
    for (const Vec3& x : {Vec3(0.8, 0.1, 0.2), Vec3(-0.3, 0.6, 0.6), Vec3(0, 0, 0.95)}) {
        Mat3 J;
        const double h = 1e-6;
        for (int i = 0; i < 3; ++i) {
            Vec3 e = Vec3::Zero();
            e[i] = h;
            J.col(i) = (reflect(*ball, x + e) - reflect(*ball, x - e)) / (2 * h);
        }
        CHECK((g.G(x) - J.transpose() * J).norm() < 1e-7);
        CHECK((g.G(x.normalized()) - Mat3::Identity()).norm() < 1e-12);
    }
}

TEST_CASE("constant conformal metric c^2 I: H_g = H / c^2, identity: H_g = H") {
    const SurfaceMesh m = icosphere(3);
    const CurvatureField f = estimate_curvature(m);
    const MetricField conf = conformal_metric(1.7);
    for (int v = 0; v < m.num_vertices(); v += 37) {
        const Vec3 x = m.p3(v);
        const Mat3 P = f.v[v].P();
        const Vec3 Hc = riemannian_mean_curvature(conf, x, P, f.v[v].B).total();
        const Vec3 Hi = riemannian_mean_curvature(identity_metric(), x, P, f.v[v].B).total();
        CHECK((Hc - f.v[v].H / (1.7 * 1.7)).norm() < 1e-8);
        CHECK((Hi - f.v[v].H).norm() < 1e-8);
    }
}

TEST_CASE("first variation of the Riemannian mass matches finite differences") {
    // Graph patch with exact tangent planes and second fundamental form.
    auto X = [](double s, double t) { return Vec3(0.3 * s, 0.3 * t, 0.75 + 0.1 * s * s - 0.05 * t * t + 0.03 * s * t); };
    auto Xs = [](double s, double t) { return Vec3(0.3, 0, 0.2 * s + 0.03 * t); };
    auto Xt = [](double s, double t) { return Vec3(0, 0.3, -0.1 * t + 0.03 * s); };
    const Vec3 x0 = X(0.05, -0.04), e = Vec3(0.3, -0.4, 0.85).normalized();
    const double r = 0.24;
    auto flow = [&](const Vec3& x) -> Vec3 {
        const double q = (x - x0).squaredNorm() / (r * r);
        return q >= 1 ? Vec3::Zero() : Vec3(std::exp(-1 / (1 - q)) * e);
    };
    auto dflow = [&](const Vec3& x) -> Mat3 {
        const double q = (x - x0).squaredNorm() / (r * r);
        if (q >= 1) return Mat3::Zero();
        const double b = std::exp(-1 / (1 - q));
        return e * (-b / ((1 - q) * (1 - q)) * 2 * (x - x0) / (r * r)).transpose();
    };
    const int N = 80;
    std::vector<double> gx, gw;
    gauss_legendre(N, gx, gw);
    auto ball = std::make_shared<Ball>();
    for (const MetricField& metric : {synthetic_metric(3, 0.1), pullback_metric(ball)}) {
        auto mass = [&](double tt) {
            double M = 0;
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) {
                    const Vec3 x = X(gx[i], gx[j]);
                    const Mat3 D = Mat3::Identity() + tt * dflow(x);
                    const Vec3 n = (D * Xs(gx[i], gx[j])).cross(D * Xt(gx[i], gx[j]));
                    M += gw[i] * gw[j] * n.norm() * metric_jacobian(metric.G(x + tt * flow(x)), plane_projection(n));
                }
            return M;
        };
        const double h = 1e-5, fd = (mass(h) - mass(-h)) / (2 * h);
        double formula = 0;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                const double s = gx[i], t = gx[j];
                const Vec3 x = X(s, t), a = Xs(s, t), b = Xt(s, t);
                const Vec3 n = a.cross(b).normalized();
                const Vec3 t1 = a.normalized(), t2 = n.cross(t1);
                MatX T(3, 2), Nn(3, 1);
                T << t1, t2;
                Nn << n;
                Eigen::Matrix<double, 3, 2> AB;
                AB << a, b;
                Eigen::Matrix2d L;
                L << 0.2 * n.z(), 0.03 * n.z(), 0.03 * n.z(), -0.1 * n.z();
                const Eigen::Matrix2d C = (AB.transpose() * AB).inverse() * AB.transpose() * T;
                const Tensor3 B = assemble_B(T, Nn, {C.transpose() * L * C});
                const Mat3 P = T * T.transpose(), G = metric.G(x);
                const Vec3 Hg = riemannian_mean_curvature(metric, x, P, B).total();
                formula -= gw[i] * gw[j] * a.cross(b).norm() * (G * Hg).dot(flow(x)) * metric_jacobian(G, P);
            }
        CHECK(std::abs(fd - formula) < 1e-3 * std::abs(fd));
    }
}

TEST_CASE("seam mean curvature of an orthogonal plane through the center is nu^S") {
    Ball ball;
    const Mat3 P = plane_projection(Vec3::UnitZ());
    for (double a : {0.0, 1.0, 2.5}) {
        const Vec3 x(std::cos(a), std::sin(a), 0);
        CHECK((seam_mean_curvature(ball, x, P, Vec3::Zero()) + x).norm() < 1e-12);
    }
}

TEST_CASE("pullback mass of an orthogonal cap equals the area of its mirror image") {
    auto ball = std::make_shared<Ball>();
    const SurfaceMesh cap = orthogonal_cap(4, 0.3);
    const CurvatureField f = estimate_curvature(cap);
    std::vector<Vec3> pts;
    for (int v = 0; v < cap.num_vertices(); ++v) pts.push_back(reflect(*ball, cap.p3(v)));
    const SurfaceMesh mirror(pts, cap.triangles());
    CHECK(riemannian_mass(cap, f, pullback_metric(ball)) == doctest::Approx(mirror.area()).epsilon(1e-2));
}

TEST_CASE("reflected half-sphere: doubled sphere energy, seam formula converging") {
    auto ball = std::make_shared<Ball>();
    double prev = 1e300;
    for (int level = 3; level <= 4; ++level) {
        const SurfaceMesh h = hemisphere(level);
        const ReflectedSurface W = reflect_surface(h, estimate_curvature(h), ball);
        CHECK(W.energy() == doctest::Approx(16 * kPi).epsilon(0.05));
        CHECK(W.seam_consistency < prev);
        prev = W.seam_consistency;
        CHECK(W.seam_vertices == h.num_vertices());  // the half-sphere lies on S
    }
    const SurfaceMesh inner = ring_disk(3, 0.5);
    CHECK_THROWS_AS(reflect_surface(inner, estimate_curvature(inner), ball), Error);
}

TEST_CASE("reflected energy bound holds at the reported constant") {
    auto ball = std::make_shared<Ball>();
    const SurfaceMesh cap = orthogonal_cap(3, 0.3);
    const CurvatureField f = estimate_curvature(cap);
    const ReflectedEnergyRecord r = reflected_energy_check(cap, f, ball);
    CHECK(r.c_min >= 0);
    CHECK(r.slack >= -1e-12 * r.lhs);
    const ReflectedEnergyRecord r2 = reflected_energy_check(cap, f, ball, r.c_min + 1);
    CHECK(r2.slack > 0);
}
