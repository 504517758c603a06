#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "orthovar/curvature.hpp"
#include "orthovar/domain.hpp"
#include "orthovar/mesh.hpp"
#include "orthovar/minimize.hpp"

#include <random>

using namespace orthovar;

namespace {

SurfaceMesh tilted_start(double lambda = 1.0) {
    const Mat3 R = Eigen::AngleAxisd(20 * kPi / 180, Vec3::UnitX()).toRotationMatrix();
    return scaled(rigid_transform(ball_section(2, 0.15), R, Vec3::Zero()), lambda);
}

}  // namespace

TEST_CASE("config validation rejects nonsense") {
    MinimizeConfig c;
    CHECK_NOTHROW(c.validate());
    c.tol_grad = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.armijo_c = 1.5;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.p = 0.5;
    CHECK_THROWS_AS(minimize(ball_section(1, 0.0), Ball(), c), Error);
}

TEST_CASE("local finite-difference gradient equals the global directional derivative") {
    Ball ball;
    const SurfaceMesh m = tilted_start();
    MinimizeConfig cfg;
    const double L = std::sqrt(m.area());
    const MatX g = minimize_gradient(m, ball, cfg, L);
    std::mt19937 rng(2);
    std::normal_distribution<double> n(0, 1);
    for (int trial = 0; trial < 3; ++trial) {
        const MatX D = MatX::NullaryExpr(3, m.num_vertices(), [&] { return n(rng); });
        const double eps = 1e-5;
        SurfaceMesh mp = m, mm = m;
        mp.set_points(m.points() + eps * L * D);
        mm.set_points(m.points() - eps * L * D);
        const double fd =
            (minimize_objective(mp, ball, cfg, L).value - minimize_objective(mm, ball, cfg, L).value) / (2 * eps);
        const double dir = (g.array() * D.array()).sum();
        CHECK(dir == doctest::Approx(fd).epsilon(1e-4));
    }
}

TEST_CASE("objective splits into energy and penalties, and vanishes on the flat slice") {
    Ball ball;
    const SurfaceMesh flat = ball_section(2, 0.0);
    const ObjectiveValue v = minimize_objective(flat, ball, {}, std::sqrt(flat.area()));
    CHECK(v.value < 1e-24);  // boundary vertices sit on S up to rounding
    CHECK(v.energy == 0);
    const SurfaceMesh t = tilted_start();
    const ObjectiveValue w = minimize_objective(t, ball, {}, std::sqrt(t.area()));
    CHECK(w.ortho > 0);
    CHECK(w.value >= w.energy);
}

TEST_CASE("flat slice is a fixed point") {
    Ball ball;
    const SurfaceMesh flat = ball_section(2, 0.0);
    const MinimizeResult r = minimize(flat, ball);
    CHECK(r.trace.converged);
    CHECK(r.trace.steps.size() == 1);
    CHECK((r.mesh.points() - flat.points()).norm() == 0);
}

TEST_CASE("tilted near-disk descends to an orthogonal flat slice; run is scale invariant") {
    Ball ball;
    const MinimizeResult r = minimize(tilted_start(), ball);
    const auto& fr = r.trace.final_report;
    CHECK(r.trace.converged);
    CHECK(fr.energy_A_p < 1e-4);
    CHECK(fr.ortho_angle_max * 180 / kPi < 1);
    for (std::size_t k = 1; k < r.trace.steps.size(); ++k) {
        const auto &a = r.trace.steps[k - 1], &b = r.trace.steps[k];
        if (a.penalty_boundary == b.penalty_boundary && a.penalty_ortho == b.penalty_ortho)
            CHECK(b.objective <= a.objective);
    }
    // The plane translates to the center: every boundary vertex ends on S and
    // the mesh is a disk through the origin.
    Vec3 mean = Vec3::Zero();
    for (int v = 0; v < r.mesh.num_vertices(); ++v) mean += r.mesh.p3(v);
    mean /= r.mesh.num_vertices();
    CHECK(mean.norm() < 0.05);

    auto big = std::make_shared<Ball>(Vec3::Zero(), 2.0);
    const MinimizeResult s = minimize(tilted_start(2.0), *big);
    CHECK(s.trace.final_report.energy_A_p == doctest::Approx(fr.energy_A_p).epsilon(1e-6).scale(1e-12));
    CHECK(s.trace.final_report.area == doctest::Approx(4 * fr.area).epsilon(1e-8));
    CHECK(s.trace.steps.size() == r.trace.steps.size());
}

TEST_CASE("comparison surface: round half-sphere at 0, negative slope proportional to tr h") {
    const GraphFunction u = GraphFunction::isotropic(2.0);
    const SurfaceMesh s0 = build_comparison_surface(u, 0.0);
    const SurfaceMesh h = hemisphere(4);
    CHECK(s0.num_vertices() == h.num_vertices());
    double e = 0;
    for (int v = 0; v < h.num_vertices(); ++v) e = std::max(e, (s0.p3(v) - h.p3(v)).norm());
    CHECK(e < 1e-14);
    CHECK(comparison_energy(u, 0.0) == doctest::Approx(8 * kPi).epsilon(0.02));
    CHECK_THROWS_AS(build_comparison_surface(u, -0.1), Error);
    CHECK_THROWS_AS(build_comparison_surface(u, 0.6), Error);

    // Boundary stays on the graph of u_lambda and meets it orthogonally.
    const double lambda = 0.15;
    const SurfaceMesh s = build_comparison_surface(u, lambda);
    const GraphCap dom = comparison_domain(u, lambda);
    for (const auto& loop : s.boundary_loops())
        for (int v : loop) CHECK(std::abs(dom.distance(s.p3(v))) < 1e-12);
    CHECK(energy_report(s, estimate_curvature(s), 2, &dom).ortho_angle_max < 0.5 * kPi / 180);

    // Willmore-type first variation: d/dl int |B|^2 at 0 = -4 pi tr h.
    const double slope2 = energy_slope_at_zero(u);
    const double slope1 = energy_slope_at_zero(GraphFunction::isotropic(1.0));
    CHECK(slope2 == doctest::Approx(-8 * kPi).epsilon(0.02));
    CHECK(slope1 == doctest::Approx(0.5 * slope2).epsilon(0.02));
}
