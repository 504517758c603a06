#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "orthovar/curvature.hpp"
#include "orthovar/domain.hpp"
#include "orthovar/mesh.hpp"
#include "orthovar/varcheck.hpp"

#include <random>

using namespace orthovar;

TEST_CASE("great disk: first variation of a linear field is pi tr(P M) on both sides") {
    Ball ball;
    const SurfaceMesh disk = ball_section(4, 0.0);
    const CurvatureField f = estimate_curvature(disk);
    Mat3 M;
    M << 0.3, -0.2, 0.5, 0.1, 0.7, -0.4, 0.2, 0.6, -0.9;
    const auto [dv, rhs] = first_variation_sides(disk, f, ball, linear_field(M));
    const double expected = kPi * (M(0, 0) + M(1, 1));
    CHECK(dv == doctest::Approx(expected).epsilon(1e-2));
    CHECK(rhs == doctest::Approx(expected).epsilon(1e-2));
}

TEST_CASE("closed sphere: delta V(phi) = -int <H, phi>") {
    Ball ball(Vec3::Zero(), 3.0);  // far away, no boundary involved
    const SurfaceMesh s = icosphere(4);
    const CurvatureField f = estimate_curvature(s);
    for (const TestFunction& phi : position_bank()) {
        const auto [dv, rhs] = first_variation_sides(s, f, ball, phi);
        CHECK(std::abs(dv - rhs) < 1e-2 * (1 + std::abs(dv)));
    }
}

TEST_CASE("weak identity: small for orthogonal slices, large for tilted ones") {
    Ball ball;
    const TestFunctionBank bank = default_bank();
    const SurfaceMesh disk = ball_section(4, 0.0);
    const SurfaceMesh cap = orthogonal_cap(4, 0.4);
    const SurfaceMesh tilted = ball_section(4, 0.3);
    CHECK(orthogonality_identity_residual(disk, estimate_curvature(disk), ball, bank).residual < 1e-3);
    CHECK(orthogonality_identity_residual(cap, estimate_curvature(cap), ball, bank).residual < 5e-3);
    CHECK(orthogonality_identity_residual(tilted, estimate_curvature(tilted), ball, bank).residual > 1e-2);
}

TEST_CASE("residual is invariant under rotating both surface and test functions about the ball center") {
    Ball ball;
    const SurfaceMesh disk = ball_section(3, 0.0);
    const Mat3 R = Eigen::AngleAxisd(0.4, Vec3(1, 1, 0).normalized()).toRotationMatrix();
    const SurfaceMesh rd = rigid_transform(disk, R, Vec3::Zero());
    const TestFunctionBank bank = {constant_field(Vec3(0.1, 0.2, 0.3)), linear_field(Mat3::Identity())};
    const double r0 = orthogonality_identity_residual(disk, estimate_curvature(disk), ball, bank).residual;
    const double r1 = orthogonality_identity_residual(rd, estimate_curvature(rd), ball, bank).residual;
    CHECK(std::abs(r0 - r1) < 1e-3);
}

TEST_CASE("mass bounds: Young's inequality and the free-boundary mass estimate") {
    Ball ball;
    for (const SurfaceMesh& m : {hemisphere(3), orthogonal_cap(3, 0.5), ball_section(3, 0.0)}) {
        const CurvatureField f = estimate_curvature(m);
        for (double eps : {0.3, 1.0, 2.5})
            for (double p : {1.5, 2.0, 3.0}) {
                const MassBounds b = mass_bounds_report(m, f, ball, p, eps);
                CHECK(b.B_L1 <= b.young * (1 + 1e-12));
                CHECK(b.mass <= b.upper_rhs);
            }
    }
    CHECK_THROWS_AS(mass_bounds_report(hemisphere(2), estimate_curvature(hemisphere(2)), ball, 1.0), Error);
}

TEST_CASE("interior integrand of a constant field on a flat plane vanishes") {
    const TestFunction c = constant_field(Vec3(1, 2, 3));
    Mat3 P = Mat3::Identity();
    P(2, 2) = 0;
    const Tensor3 B(3, MatX::Zero(3, 3));
    CHECK(interior_integrand(c, Vec3(0.2, 0.1, 0), P, B) == 0);
}
