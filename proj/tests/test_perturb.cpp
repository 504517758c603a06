#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "orthovar/domain.hpp"
#include "orthovar/domain_io.hpp"
#include "orthovar/perturb.hpp"
#include "orthovar/slices.hpp"

#include <random>

using namespace orthovar;

TEST_CASE("mollifier has unit mass, compact support, and smooth step plateaus") {
    for (int m : {1, 2}) {
        MollifierKernel k(m, 128);
        double s = 0;
        for (double w : k.weights()) s += w;
        CHECK(s == doctest::Approx(1).epsilon(1e-12));
        CHECK(k.integral() == doctest::Approx(1).epsilon(1e-3));
        for (const VecX& y : k.nodes()) CHECK(y.norm() < 1);
        VecX out = VecX::Constant(m, 0.8);
        if (out.norm() >= 1) CHECK(k.value(out) == 0);
    }
    CHECK(smooth_step(0.3) == 1);
    CHECK(smooth_step(-0.5) == 1);
    CHECK(smooth_step(1.0) == 0);
    CHECK(smooth_step(0.75) > 0);
    CHECK(smooth_step(0.75) < 1);
    CHECK_THROWS_AS(MollifierKernel(1, 4), Error);
}

TEST_CASE("extension: u(x, 0) = 0, normal derivative psi, linear psi reproduced") {
    auto kernel = std::make_shared<MollifierKernel>(1, 256);
    // Mollification preserves affine functions exactly: u(x, z) = z psi(x).
    const VectorFunction affine = [](const VecX& x) {
        VecX v(1);
        v[0] = 0.5 - 2 * x[0];
        return v;
    };
    const Extension u = extend(affine, 1, 1, kernel);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int k = 0; k < 20; ++k) {
        VecX x(1), z(1);
        x[0] = U(rng);
        z[0] = 0.3 * U(rng);
        CHECK(u(x, z) == doctest::Approx(z[0] * affine(x)[0]).epsilon(1e-12));
        CHECK(u(x, VecX::Zero(1)) == 0);
    }
}

TEST_CASE("extension with cutoff vanishes for |z| >= eps and outside the psi support") {
    auto kernel = std::make_shared<MollifierKernel>(1, 64);
    const VectorFunction bump = [](const VecX& x) {
        VecX v(1);
        v[0] = std::abs(x[0]) < 1 ? std::exp(-1 / (1 - x[0] * x[0])) : 0.0;
        return v;
    };
    const Extension u = extend_with_cutoff(bump, 1, 1, kernel, 0.4);
    VecX x(1), z(1);
    for (double zz : {0.4, -0.45, 0.9}) {
        x[0] = 0.1;
        z[0] = zz;
        CHECK(u(x, z) == 0);
    }
    for (double zz : {0.05, -0.2, 0.35}) {
        z[0] = zz;
        x[0] = 1 + std::abs(zz) + 1e-3;
        CHECK(u(x, z) == 0);
        x[0] = -x[0];
        CHECK(u(x, z) == 0);
    }
    x[0] = 0;
    z[0] = 0.1;
    CHECK(u(x, z) > 0);
}

TEST_CASE("under-resolved quadrature is reported") {
    auto kernel = std::make_shared<MollifierKernel>(1, 16);
    const VectorFunction psi = [](const VecX& x) { return VecX::Constant(1, std::sin(40 * x[0])); };
    const Extension u = extend(psi, 1, 1, kernel, 0.01);
    VecX x = VecX::Zero(1), z = VecX::Constant(1, 0.5);
    CHECK_THROWS_AS(u(x, z), Error);
}

TEST_CASE("surface extension vanishes on the slice boundary with surface gradient psi_n N") {
    Ball ball;
    const SliceResult s = intersect(ball, AffinePlane::from_normal(Vec3::UnitZ(), 0.0));
    const ScalarField psi = [](const Vec3& y) { return 1 + 0.3 * std::cos(std::atan2(y.y(), y.x())); };
    const SurfaceExtension ext(ball, s, psi);
    for (int k = 0; k < 12; ++k) {
        const double a = 2 * kPi * k / 12;
        const Vec3 x(std::cos(a), std::sin(a), 0);
        CHECK(std::abs(ext(x)) < 1e-10);
        const Vec3 g = surface_gradient(ball, [&](const Vec3& y) { return ext(y); }, x);
        CHECK((g - psi(x) * ext.conormal(x)).norm() < 1e-4 * (1 + psi(x)));
    }
}

TEST_CASE("linearized slice map against finite differences") {
    Ball ball;
    const SliceResult s = intersect(ball, AffinePlane::from_normal(Vec3::UnitZ(), 0.0));
    NormalPerturbation dir;
    dir.u = [](const Vec3& y) { return y.x() * y.z() + 0.3 * y.z() * y.y(); };
    const L0Check c = l0_check(ball, s, dir);
    CHECK(c.fd_norm > 0);
    CHECK(c.relative_error < 1e-5);
}

TEST_CASE("generic spec round-trips through a config section bit-exactly") {
    GenericSpec spec;
    spec.seed = 11;
    spec.step = 3e-3;
    spec.scale = 1.0 / 3;
    GenericSpec::Term t;
    t.normal = Vec3(0.1, -0.2, 0.97).normalized();
    t.offset = 0.123456789012345;
    t.centroid = Vec3(0.01, 0.02, 0.03);
    t.coeffs = {0.1, -0.7, 1.0 / 7};
    spec.terms.push_back(t);
    ConfigSection sec("domain");
    spec.write(sec);
    const GenericSpec r = GenericSpec::read(sec);
    REQUIRE(r.terms.size() == 1);
    CHECK(r.scale == spec.scale);
    CHECK(r.terms[0].normal == t.normal);
    CHECK(r.terms[0].offset == t.offset);
    CHECK(r.terms[0].coeffs == t.coeffs);
}

TEST_CASE("generic perturbation of the ball: small, slice-free, reloadable") {
    auto ball = std::make_shared<Ball>();
    const auto before = find_orthogonal_slices(*ball, 2);
    REQUIRE(!before.empty());
    GenericOptions opt;
    opt.step = 1e-2;
    opt.seed = 7;
    const GenericResult g = make_generic(ball, before, opt);
    CHECK(g.remaining.empty());
    CHECK(surface_c2_norm(*ball, build_generic_field(*ball, g.spec)) == doctest::Approx(1e-2).epsilon(1e-6));
    const DomainPtr reloaded = domain_from_section(domain_section(*g.domain));
    for (const Vec3& x : {Vec3(0.3, 0.2, 0.9), Vec3(-0.7, 0.5, 0.1), Vec3(0.05, -0.99, 0.02)})
        CHECK(reloaded->level(x) == g.domain->level(x));
    // The perturbed boundary is g_u(S).
    const NormalPerturbation pert{build_generic_field(*ball, g.spec), {}, 0, ""};
    for (const Vec3& y : {Vec3(1, 0, 0), Vec3(0, 0.6, 0.8), Vec3(-0.48, 0.6, -0.64)})
        CHECK(std::abs(g.domain->level(pert.displace(*ball, y))) < 1e-12);
}
