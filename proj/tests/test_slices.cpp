#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "orthovar/domain.hpp"
#include "orthovar/slices.hpp"

using namespace orthovar;

TEST_CASE("affine plane normal form and distance") {
    const AffinePlane a = AffinePlane::from_normal(Vec3(0, 0, 2), 1.0);
    CHECK((a.z - Vec3(0, 0, 1)).norm() < 1e-14);
    CHECK((a.P - Vec3(1, 1, 0).asDiagonal().toDenseMatrix()).norm() < 1e-14);
    const AffinePlane b = AffinePlane::from_normal(Vec3(0, 1, 1), 0.0);
    CHECK(a.distance(b) == doctest::Approx(b.distance(a)).epsilon(1e-15));
    CHECK(a.distance(a) < 1e-14);
    AffinePlane c = a;
    c.P += 1e-3 * Mat3::Random();
    c.normalize();
    CHECK((c.P * c.P - c.P).norm() < 1e-12);
    CHECK(std::abs(c.P.trace() - 2) < 1e-12);
    CHECK((c.P * c.z).norm() < 1e-12);
}

TEST_CASE("ball sections: area, topology and orthogonality residual") {
    Ball ball;
    const SliceResult s0 = intersect(ball, AffinePlane::from_normal(Vec3::UnitZ(), 0.0));
    CHECK(s0.components.size() == 1);
    CHECK(s0.euler_char == 1);
    CHECK(s0.is_disk);
    CHECK(s0.area == doctest::Approx(kPi).epsilon(1e-3));
    CHECK(s0.ortho_residual < 1e-6);
    const SliceResult s1 = intersect(ball, AffinePlane::from_normal(Vec3::UnitZ(), 0.5));
    CHECK(s1.area == doctest::Approx(0.75 * kPi).epsilon(1e-3));
    CHECK(s1.ortho_residual == doctest::Approx(0.5).epsilon(1e-3));
    CHECK_THROWS_AS(intersect(ball, AffinePlane::from_normal(Vec3::UnitZ(), 1.5)), Error);
}

TEST_CASE("annulus prism: horizontal section is an annulus") {
    AnnulusPrism prism;
    const SliceResult s = intersect(prism, AffinePlane::from_normal(Vec3::UnitZ(), 0.2));
    CHECK(s.euler_char == 0);
    CHECK(s.area == doctest::Approx(kPi).epsilon(5e-3));
    CHECK(s.ortho_residual < 1e-6);
}

TEST_CASE("ellipsoid: exactly the three principal planes") {
    Ellipsoid e(Vec3::Zero(), Vec3(1, 1.2, 1.5));
    const auto found = find_orthogonal_slices(e, 2);
    REQUIRE(found.size() == 3);
    int axes_hit[3] = {0, 0, 0};
    for (const auto& s : found) {
        const Vec3 n = s.plane.complement().col(0);
        int k;
        n.cwiseAbs().maxCoeff(&k);
        CHECK(std::abs(std::abs(n[k]) - 1) < 1e-8);
        CHECK(s.plane.z.norm() < 1e-8);
        CHECK(s.ortho_residual < 1e-6);
        ++axes_hit[k];
    }
    CHECK(axes_hit[0] == 1);
    CHECK(axes_hit[1] == 1);
    CHECK(axes_hit[2] == 1);
}

TEST_CASE("deduplicate merges identical slices") {
    Ball ball;
    const SliceResult s = intersect(ball, AffinePlane::from_normal(Vec3::UnitX(), 0.0));
    const SliceResult t = intersect(ball, AffinePlane::from_normal(Vec3::UnitY(), 0.0));
    const auto reps = deduplicate({s, s, t, s}, 1e-6);
    CHECK(reps.size() == 2);
}

TEST_CASE("ball: one-dimensional orthogonal slices are diameters") {
    Ball ball;
    SliceOptions opt;
    opt.directions = 12;
    opt.offsets = 4;
    const auto found = find_orthogonal_slices(ball, 1, opt);
    REQUIRE(!found.empty());
    for (const auto& s : found) {
        CHECK(s.plane.z.norm() < 1e-6);
        CHECK(s.area == doctest::Approx(2).epsilon(1e-3));
    }
}
