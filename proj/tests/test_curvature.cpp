#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "orthovar/curvature.hpp"
#include "orthovar/domain.hpp"
#include "orthovar/mesh.hpp"

#include <random>

using namespace orthovar;

TEST_CASE("fixture counts are fixed") {
    CHECK(icosphere(3).num_vertices() == 642);
    CHECK(icosphere(3).num_faces() == 1280);
    CHECK(hemisphere(4).num_vertices() == 545);
    CHECK(hemisphere(4).num_faces() == 1024);
    CHECK(hemisphere(4).euler_characteristic() == 1);
    CHECK(annulus(3).euler_characteristic() == 0);
    CHECK(icosphere(2).euler_characteristic() == 2);
}

TEST_CASE("OFF round trip is exact") {
    const SurfaceMesh m = orthogonal_cap(2, 0.3);
    const SurfaceMesh r = parse_off(format_off(m));
    CHECK(r.num_faces() == m.num_faces());
    CHECK((r.points() - m.points()).norm() == 0);
    CHECK_THROWS_AS(parse_off("OFF\n3 1 0\n0 0 0\n"), Error);
}

TEST_CASE("sphere: H = -2x and K = 1 at every vertex, converging under refinement") {
    auto worst = [](int level) {
        const SurfaceMesh m = icosphere(level);
        const CurvatureField f = estimate_curvature(m);
        double e = 0;
        for (int v = 0; v < m.num_vertices(); ++v)
            e = std::max({e, (f.v[v].H + 2 * m.p3(v)).norm(), std::abs(f.v[v].K - 1)});
        return e;
    };
    const double e3 = worst(3), e4 = worst(4);
    CHECK(e4 < 1e-2);
    CHECK(e4 < 0.5 * e3);
}

TEST_CASE("cylinder: |H| = 1 and K = 0 inside, converging under refinement") {
    auto worst = [](int level) {
        const SurfaceMesh m = cylinder_strip(level);
        const CurvatureField f = estimate_curvature(m);
        double e = 0;
        for (int v = 0; v < m.num_vertices(); ++v)
            if (!m.is_boundary(v)) e = std::max({e, std::abs(f.v[v].H.norm() - 1), std::abs(f.v[v].K)});
        return e;
    };
    const double e3 = worst(3), e4 = worst(4);
    CHECK(e4 < 5e-3);
    CHECK(e4 < 0.5 * e3);
}

TEST_CASE("planar meshes have B = 0") {
    for (const SurfaceMesh& m : {ring_disk(3), annulus(3), ball_section(3, 0.0)}) {
        const CurvatureField f = estimate_curvature(m);
        for (const auto& c : f.v) CHECK(c.B_norm2() < 1e-20);
    }
}

TEST_CASE("|B|^2 = 2|A|^2 and tr B = H on randomly displaced meshes") {
    std::mt19937 rng(3);
    std::normal_distribution<double> n(0, 0.01);
    for (SurfaceMesh m : {icosphere(2), hemisphere(3), annulus(2)}) {
        MatX X = m.points();
        for (int i = 0; i < X.size(); ++i) X(i) += n(rng);
        m.set_points(X);
        const CurvatureField f = estimate_curvature(m);
        for (const auto& c : f.v) {
            CHECK(std::abs(c.B_norm2() - 2 * c.A_norm2()) < 1e-10 * (1 + c.B_norm2()));
            CHECK((c.trace_B() - c.H).norm() < 1e-10 * (1 + c.H.norm()));
        }
    }
}

TEST_CASE("assemble_B against the defining formula") {
    std::mt19937 rng(5);
    std::normal_distribution<double> g(0, 1);
    Mat3 Q = Mat3::NullaryExpr([&] { return g(rng); }).householderQr().householderQ();
    const MatX T = Q.leftCols(2), N = Q.rightCols(1);
    Eigen::Matrix2d A;
    A << g(rng), g(rng), 0, g(rng);
    A(1, 0) = A(0, 1);
    const Tensor3 B = assemble_B(T, N, {A});
    // A(u, v) as a vector, for u, v tangent.
    auto Avec = [&](const Vec3& u, const Vec3& v) -> Vec3 {
        return (T.transpose() * u).dot(A * (T.transpose() * v)) * Vec3(N.col(0));
    };
    const Mat3 P = T * T.transpose();
    for (int k = 0; k < 20; ++k) {
        const Vec3 v(g(rng), g(rng), g(rng)), w(g(rng), g(rng), g(rng));
        Vec3 expected = Avec(P * v, P * w);
        for (int a = 0; a < 2; ++a) {
            const Vec3 ta = T.col(a);
            expected += Avec(P * v, ta).dot(w - P * w) * ta;
        }
        Vec3 got = Vec3::Zero();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int l = 0; l < 3; ++l) got[l] += B[i](j, l) * v[i] * w[j];
        CHECK((got - expected).norm() < 1e-12);
    }
}

TEST_CASE("energies are invariant under rigid motions and scaling") {
    const SurfaceMesh m = orthogonal_cap(3, 0.4);
    const EnergyReport e0 = energy_report(m, estimate_curvature(m), 2);
    const Mat3 R = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
    const SurfaceMesh mr = rigid_transform(m, R, Vec3(0.3, -1, 2));
    const EnergyReport er = energy_report(mr, estimate_curvature(mr), 2);
    CHECK(er.energy_B_p == doctest::Approx(e0.energy_B_p).epsilon(1e-9));
    const SurfaceMesh ms = scaled(m, 2.5);
    const EnergyReport es = energy_report(ms, estimate_curvature(ms), 2);
    CHECK(es.energy_B_p == doctest::Approx(e0.energy_B_p).epsilon(1e-9));
    CHECK(es.area == doctest::Approx(6.25 * e0.area).epsilon(1e-12));
}

TEST_CASE("sphere energy and Gauss-Bonnet") {
    const SurfaceMesh m = icosphere(4);
    const EnergyReport e = energy_report(m, estimate_curvature(m), 2);
    CHECK(e.energy_B_p == doctest::Approx(16 * kPi).epsilon(0.02));
    CHECK(e.energy_A_p == doctest::Approx(8 * kPi).epsilon(0.02));
    CHECK(e.euler_char == 2);
    CHECK(std::abs(e.gauss_bonnet_residual) < 0.05);
}

TEST_CASE("boundary of the orthogonal cap meets the unit sphere at a right angle") {
    Ball b;
    const SurfaceMesh cap = orthogonal_cap(4, 0.3);
    const SurfaceMesh disk = ball_section(4, 0.0);
    CHECK(ortho_angle_max(disk, estimate_curvature(disk), b) < 1e-6);
    CHECK(ortho_angle_max(cap, estimate_curvature(cap), b) < 2 * kPi / 180);
    const SurfaceMesh tilted = ball_section(4, 0.5);
    CHECK(ortho_angle_max(tilted, estimate_curvature(tilted), b) == doctest::Approx(kPi / 6).epsilon(1e-3));
}
