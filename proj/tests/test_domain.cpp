#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "orthovar/domain.hpp"
#include "orthovar/domain_io.hpp"
#include "orthovar/mesh.hpp"

#include <filesystem>
#include <random>

using namespace orthovar;

namespace {

std::vector<Vec3> sample_points(int n, double lo, double hi, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dir(-1, 1), rad(lo, hi);
    std::vector<Vec3> out;
    while (static_cast<int>(out.size()) < n) {
        Vec3 v(dir(rng), dir(rng), dir(rng));
        if (v.norm() < 0.1) continue;
        out.push_back(rad(rng) * v.normalized());
    }
    return out;
}

Vec3 fd_gradient(const ImplicitDomain& d, const Vec3& x, double h = 1e-6) {
    Vec3 g;
    for (int i = 0; i < 3; ++i) {
        Vec3 e = Vec3::Zero();
        e[i] = h;
        g[i] = (d.distance(x + e) - d.distance(x - e)) / (2 * h);
    }
    return g;
}

Mat3 fd_hessian(const ImplicitDomain& d, const Vec3& x, double h = 1e-5) {
    Mat3 H;
    for (int i = 0; i < 3; ++i) {
        Vec3 e = Vec3::Zero();
        e[i] = h;
        H.col(i) = (d.gradient(x + e) - d.gradient(x - e)) / (2 * h);
    }
    return H;
}

}  // namespace

TEST_CASE("ball distance is |x| - r") {
    Ball b(Vec3(0.1, -0.2, 0.3), 1.5);
    for (const Vec3& y : sample_points(50, 1.2, 1.8, 1)) {
        const Vec3 x = y + Vec3(0.1, -0.2, 0.3);
        CHECK(b.distance(x) == doctest::Approx(y.norm() - 1.5).epsilon(1e-14));
        CHECK((b.gradient(x) - y.normalized()).norm() < 1e-13);
    }
}

TEST_CASE("ellipsoid distance: unit gradient, closest point on S, FD derivatives") {
    const Vec3 axes(1, 1.2, 1.5);
    Ellipsoid e(Vec3::Zero(), axes);
    for (const Vec3& dir : sample_points(40, 1, 1, 2)) {
        const Vec3 s = dir / dir.cwiseQuotient(axes).norm();
        const Vec3 n = e.gradient(s);
        for (double t : {-0.1, 0.05, 0.2}) {
            const Vec3 x = s + t * n;
            CHECK(e.distance(x) == doctest::Approx(t).epsilon(1e-9));
            CHECK(e.gradient(x).norm() == doctest::Approx(1).epsilon(1e-10));
            const Vec3 y = e.closest_point(x);
            CHECK(std::abs(y.cwiseQuotient(axes).squaredNorm() - 1) < 1e-10);
            CHECK((fd_gradient(e, x) - e.gradient(x)).norm() < 1e-7);
            CHECK((fd_hessian(e, x) - e.hessian(x)).norm() < 1e-5);
        }
    }
}

TEST_CASE("boundary shape operator of the unit sphere is the identity on TS") {
    Ball b;
    for (const Vec3& x : sample_points(10, 1, 1, 3)) {
        const BoundaryFrame f = boundary_frame(b, x);
        CHECK((f.normal + x).norm() < 1e-12);
        CHECK((f.shape - Eigen::Matrix2d::Identity()).norm() < 1e-9);
    }
}

TEST_CASE("reflection is an involution fixing S, Jacobian matches finite differences") {
    Ellipsoid e(Vec3::Zero(), Vec3(1, 1.2, 1.5));
    for (const Vec3& dir : sample_points(20, 1, 1, 4)) {
        const Vec3 s = dir / dir.cwiseQuotient(Vec3(1, 1.2, 1.5)).norm();
        CHECK((reflect(e, s) - s).norm() < 1e-10);
        const Vec3 x = s - 0.05 * e.gradient(s);
        const Vec3 rx = reflect(e, x);
        CHECK(e.distance(rx) == doctest::Approx(0.05).epsilon(1e-8));
        CHECK((reflect(e, rx) - x).norm() < 1e-9);
        Mat3 J;
        const double h = 1e-6;
        for (int i = 0; i < 3; ++i) {
            Vec3 d = Vec3::Zero();
            d[i] = h;
            J.col(i) = (reflect(e, x + d) - reflect(e, x - d)) / (2 * h);
        }
        CHECK((J - reflection_jacobian(e, x)).norm() < 1e-6);
    }
}

TEST_CASE("points outside the tube are rejected") {
    Ball b;
    CHECK_THROWS_AS(require_in_tube(b, Vec3(0, 0, 0.1)), Error);
    CHECK_NOTHROW(require_in_tube(b, Vec3(0, 0, 0.9)));
}

TEST_CASE("scaled domain: d_l(l x) = l d(x)") {
    auto base = std::make_shared<Ellipsoid>(Vec3::Zero(), Vec3(1, 1.2, 1.5));
    ScaledDomain s(base, 2.0);
    for (const Vec3& x : sample_points(20, 1.1, 1.6, 5)) {
        CHECK(s.distance(2 * x) == doctest::Approx(2 * base->distance(x)).epsilon(1e-10));
        CHECK((s.gradient(2 * x) - base->gradient(x)).norm() < 1e-9);
        CHECK((s.hessian(2 * x) - 0.5 * base->hessian(x)).norm() < 1e-8);
    }
}

TEST_CASE("graph cap: interior normal and level set of the quadratic graph") {
    GraphCap cap(GraphFunction::isotropic(2.0));
    const Vec3 x(0.2, -0.1, 0.5 * (0.04 + 0.01));
    CHECK(std::abs(cap.level(x)) < 1e-14);
    const Vec3 expected = Vec3(-0.2, 0.1, 1).normalized();
    CHECK((cap.surface_normal(x) - expected).norm() < 1e-12);
    CHECK(cap.distance(Vec3(0, 0, 0.3)) < 0);
}

TEST_CASE("annulus prism distance on the flat faces") {
    AnnulusPrism a;
    CHECK(a.distance(Vec3(1.2, 0, 0.9)) == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(a.distance(Vec3(0, 1.2, -1.1)) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(a.distance(Vec3(0.9, 0, 0)) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("grid SDF of a fine icosphere approximates the ball") {
    const SurfaceMesh m = icosphere(4);
    std::vector<Vec3> verts;
    for (int v = 0; v < m.num_vertices(); ++v) verts.push_back(m.p3(v));
    GridSdf g(verts, m.triangles(), 48, 0.3);
    for (const Vec3& x : sample_points(30, 0.8, 1.2, 6)) CHECK(std::abs(g.distance(x) - (x.norm() - 1)) < 5e-3);
}

TEST_CASE("domain configs round-trip and reject unknown keys") {
    const auto dir = std::filesystem::temp_directory_path() / "orthovar_test_domain";
    std::filesystem::create_directories(dir);
    const std::vector<DomainPtr> domains = {
        std::make_shared<Ball>(Vec3(0.1, 0, 0), 2.0),
        std::make_shared<Ellipsoid>(Vec3::Zero(), Vec3(1, 1.2, 1.5)),
        std::make_shared<AnnulusPrism>(1.0, std::sqrt(2.0), 1.0, 0.05),
        std::make_shared<Cylinder>(1.0),
        std::make_shared<Slab>(),
        std::make_shared<GraphCap>(GraphFunction::isotropic(2.0)),
        std::make_shared<ScaledDomain>(std::make_shared<Ball>(), 3.0),
    };
    const auto pts = sample_points(10, 0.5, 1.5, 7);
    for (const auto& d : domains) {
        const std::string path = (dir / (d->kind() + ".cfg")).string();
        save_domain(*d, path);
        const DomainPtr r = load_domain(path);
        CHECK(r->kind() == d->kind());
        for (const Vec3& x : pts) CHECK(r->level(x) == doctest::Approx(d->level(x)).epsilon(1e-10));
    }
    ConfigSection s("domain");
    s.set("kind", std::string("ball"));
    s.set("radius", 1.0);
    s.set("radiu", 1.0);
    CHECK_THROWS_AS(domain_from_section(s), Error);
    ConfigSection k("domain");
    k.set("kind", std::string("torus"));
    CHECK_THROWS_AS(domain_from_section(k), Error);
    CHECK_THROWS_AS(load_domain((dir / "missing.cfg").string()), Error);
}
