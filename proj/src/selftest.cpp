#include "orthovar/selftest.hpp"

#include "orthovar/config.hpp"
#include "orthovar/curvature.hpp"
#include "orthovar/domain.hpp"
#include "orthovar/domain_io.hpp"
#include "orthovar/minimize.hpp"
#include "orthovar/perturb.hpp"
#include "orthovar/reflect.hpp"
#include "orthovar/slices.hpp"
#include "orthovar/varcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>

namespace orthovar {

bool CriterionResult::metrics_pass() const {
    if (!error.empty() || metrics.empty()) return false;
    return std::all_of(metrics.begin(), metrics.end(), [](const CriterionMetric& m) { return m.pass; });
}

bool SelftestReport::pass() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.pass(); });
}

CsvTable SelftestReport::summary() const {
    CsvTable t({"criterion", "metric", "value", "relation", "threshold", "pass"});
    for (const auto& c : criteria) {
        if (!c.error.empty()) t.add_row({std::to_string(c.id), "error", csv_cell(c.error), "", "", "0"});
        for (const auto& m : c.metrics)
            t.add_row({std::to_string(c.id), m.name, csv_cell(m.value), m.relation, csv_cell(m.threshold),
                       m.pass ? "1" : "0"});
    }
    return t;
}

void SelftestReport::write(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    const std::filesystem::path d(dir);
    summary().write((d / "summary.csv").string(), config_hash);
    for (const auto& [name, table] : tables) table.write((d / name).string(), config_hash);
}

std::string format_criterion(const CriterionResult& c) {
    char head[256];
    std::snprintf(head, sizeof head, "[%s] criterion %2d: %s (%.1f s, limit %.0f s)", c.pass() ? "PASS" : "FAIL", c.id,
                  c.title.c_str(), c.seconds, c.time_limit);
    std::string out = head;
    if (!c.error.empty()) out += "\n    error: " + c.error;
    for (const auto& m : c.metrics) {
        char line[256];
        std::snprintf(line, sizeof line, "\n    %-4s %s = %.6g %s %.6g", m.pass ? "ok" : "BAD", m.name.c_str(), m.value,
                      m.relation.c_str(), m.threshold);
        out += line;
    }
    return out;
}

namespace {

CriterionMetric metric(const std::string& name, double value, const std::string& rel, double threshold,
                       double target = 0) {
    CriterionMetric m{name, value, rel, threshold, false};
    if (rel == "<") m.pass = value < threshold;
    else if (rel == "<=") m.pass = value <= threshold;
    else if (rel == ">") m.pass = value > threshold;
    else if (rel == ">=") m.pass = value >= threshold;
    else if (rel == "==") m.pass = value == threshold;
    else if (rel == "in") m.pass = std::abs(value - target) <= threshold;
    return m;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Context {
    const SelftestOptions& opt;
    SelftestReport& report;
};

// ---------------------------------------------------------------------------
// 1. |B|^2 = 2|A|^2 and tr B = H per vertex on every fixture.

void curvature_identities(Context& ctx, CriterionResult& r) {
    const std::vector<std::pair<std::string, SurfaceMesh>> meshes = {
        {"icosphere3", icosphere(3)},
        {"halfsphere4", hemisphere(4)},
        {"disk3", ring_disk(3)},
        {"ball_section3", ball_section(3, 0.3)},
        {"annulus3", annulus(3)},
        {"cylinder_strip3", cylinder_strip(3)},
        {"orthogonal_cap3", orthogonal_cap(3, 0.3)},
        {"comparison4", build_comparison_surface(GraphFunction::isotropic(2.0), 0.1)},
    };
    CsvTable t({"mesh", "vertices", "max_B2_minus_2A2", "max_trB_minus_H", "seconds_ok"});
    double worst_norm = 0, worst_trace = 0;
    int slow = 0;
    for (const auto& [name, mesh] : meshes) {
        const auto t0 = std::chrono::steady_clock::now();
        const CurvatureField f = estimate_curvature(mesh);
        double en = 0, et = 0;
        for (const auto& c : f.v) {
            en = std::max(en, std::abs(c.B_norm2() - 2 * c.A_norm2()));
            et = std::max(et, (c.trace_B() - c.H).norm());
        }
        const double dt = seconds_since(t0);
        worst_norm = std::max(worst_norm, en);
        worst_trace = std::max(worst_trace, et);
        slow += dt >= 1;
        t.add_row({name, std::to_string(mesh.num_vertices()), csv_cell(en), csv_cell(et), dt < 1 ? "1" : "0"});
    }
    r.metrics.push_back(metric("max | |B|^2 - 2|A|^2 |", worst_norm, "<", 1e-10));
    r.metrics.push_back(metric("max |tr B - H|", worst_trace, "<", 1e-10));
    r.metrics.push_back(metric("meshes taking 1 s or more", slow, "==", 0));
    ctx.report.tables.emplace("curvature_identities.csv", std::move(t));
}

// 2. Sphere 16 pi and half-sphere 8 pi at level 4.

void energy_thresholds(Context& ctx, CriterionResult& r) {
    const SurfaceMesh sphere = icosphere(4), half = hemisphere(4);
    Ball ball;
    const double es = energy_report(sphere, estimate_curvature(sphere), 2).energy_B_p;
    const double eh = energy_report(half, estimate_curvature(half), 2, &ball).energy_B_p;
    r.metrics.push_back(metric("sphere int|B|^2 / 16pi - 1", es / (16 * kPi) - 1, "in", 0.02));
    r.metrics.push_back(metric("half-sphere int|B|^2 / 8pi - 1", eh / (8 * kPi) - 1, "in", 0.02));
    CsvTable t({"mesh", "energy_B_2", "reference"});
    t.add_row({"icosphere4", csv_cell(es), csv_cell(16 * kPi)});
    t.add_row({"halfsphere4", csv_cell(eh), csv_cell(8 * kPi)});
    ctx.report.tables.emplace("energy_thresholds.csv", std::move(t));
}

// 3. Comparison surface dips below 8 pi; negative slope at 0.

void comparison(Context& ctx, CriterionResult& r) {
    const GraphFunction u = GraphFunction::isotropic(2.0);
    CsvTable t({"lambda", "energy_B_2", "ortho_angle_max_deg"});
    double best = 1e300;
    for (int k = 1; k <= 20; ++k) {
        const double lambda = 0.01 * k;
        const SurfaceMesh m = build_comparison_surface(u, lambda);
        const GraphCap dom = comparison_domain(u, lambda);
        const EnergyReport e = energy_report(m, estimate_curvature(m), 2, &dom);
        best = std::min(best, e.energy_B_p);
        t.add_row({lambda, e.energy_B_p, e.ortho_angle_max * 180 / kPi});
    }
    const double slope = energy_slope_at_zero(u);
    r.metrics.push_back(metric("min energy over (0, 0.2] - (8pi - 0.5% of 8pi)", best - 8 * kPi * 0.995, "<", 0));
    r.metrics.push_back(metric("slope at lambda = 0", slope, "<", 0));
    ctx.report.tables.emplace("comparison_sweep.csv", std::move(t));
}

// 4. Slices of the ball, the ellipsoid (against a dense scan) and the annulus prism.

// Orthogonality residual of the section {<n, x> = c} of the ellipsoid with
// semi-axes a, computed from the parametrized section ellipse.
double ellipsoid_section_residual(const Vec3& a, const Vec3& n, double c, int samples = 64) {
    const Vec3 an = a.cwiseProduct(n);
    const double cy = c / an.norm();
    if (std::abs(cy) >= 1) return 1e300;
    const Vec3 m = an.normalized();
    const auto e = orthonormal_complement(m);
    const double rad = std::sqrt(1 - cy * cy);
    double worst = 0;
    for (int k = 0; k < samples; ++k) {
        const double t = 2 * kPi * k / samples;
        const Vec3 y = cy * m + rad * (std::cos(t) * e[0] + std::sin(t) * e[1]);
        const Vec3 g = y.cwiseQuotient(a);
        worst = std::max(worst, std::abs(n.dot(g)) / g.norm());
    }
    return worst;
}

// (n, c) and (-n, -c) describe the same plane; make the first component of n
// that is not negligible positive.
void canonical_sign(Vec3& n, double& c) {
    for (int i = 2; i >= 0; --i)
        if (std::abs(n[i]) > 1e-9) {
            if (n[i] < 0) n = -n, c = -c;
            return;
        }
}

struct ScanMinimum {
    Vec3 normal;
    double offset;
    double residual;
};

// Local minima of the residual over a Fibonacci grid of normals (upper
// hemisphere) and offsets, refined by compass search.
std::vector<ScanMinimum> ellipsoid_dense_scan(const Vec3& a) {
    const int N = 4000, M = 21;
    std::vector<Vec3> normals;
    for (int i = 0; i < 2 * N; ++i) {
        const double z = 1 - (i + 0.5) / N;
        if (z < 0) break;
        const double phi = i * kPi * (3 - std::sqrt(5.0));
        normals.emplace_back(std::sqrt(1 - z * z) * std::cos(phi), std::sqrt(1 - z * z) * std::sin(phi), z);
    }
    auto refine = [&](Vec3 n, double c) {
        double f = ellipsoid_section_residual(a, n, c);
        for (double step = 0.02; step > 1e-10;) {
            bool moved = false;
            for (int k = 0; k < 4 && !moved; ++k) {
                for (int s = -1; s <= 1; s += 2) {
                    Vec3 n2 = n;
                    double c2 = c;
                    if (k < 3) n2[k] += s * step, n2.normalize();
                    else c2 += s * step;
                    const double f2 = ellipsoid_section_residual(a, n2, c2);
                    if (f2 < f) {
                        n = n2, c = c2, f = f2, moved = true;
                        break;
                    }
                }
            }
            if (!moved) step *= 0.5;
        }
        canonical_sign(n, c);
        return ScanMinimum{n, c, f};
    };
    std::vector<ScanMinimum> out;
    for (const Vec3& n : normals) {
        const double support = a.cwiseProduct(n).norm();
        for (int j = 0; j < M; ++j) {
            const double c = support * (-0.9 + 1.8 * j / (M - 1));
            const double f = ellipsoid_section_residual(a, n, c);
            if (f > 0.05) continue;
            const ScanMinimum s = refine(n, c);
            if (s.residual > 1e-8) continue;
            bool dup = false;
            for (const auto& o : out)
                if ((o.normal - s.normal).norm() < 1e-4 && std::abs(o.offset - s.offset) < 1e-4) dup = true;
            if (!dup) out.push_back(s);
        }
    }
    return out;
}

void slice_detection(Context& ctx, CriterionResult& r) {
    Ball ball;
    const auto bs = find_orthogonal_slices(ball, 2);
    double zmax = 0;
    for (const auto& s : bs) zmax = std::max(zmax, s.plane.z.norm());
    r.metrics.push_back(metric("ball slices found", static_cast<double>(bs.size()), ">", 0));
    r.metrics.push_back(metric("ball max |z|", zmax, "<", 1e-6));

    const Vec3 axes(1, 1.2, 1.5);
    Ellipsoid ell(Vec3::Zero(), axes);
    const auto es = find_orthogonal_slices(ell, 2);
    const auto oracle = ellipsoid_dense_scan(axes);
    int matched = 0;
    CsvTable t({"source", "nx", "ny", "nz", "offset", "residual"});
    for (const auto& s : es) {
        Vec3 n = s.plane.complement().col(0);
        double c = n.dot(s.plane.z);
        canonical_sign(n, c);
        for (const auto& o : oracle)
            if ((o.normal - n).norm() < 1e-4 && std::abs(o.offset - c) < 1e-4) {
                ++matched;
                break;
            }
        t.add_row({"finder", csv_cell(n.x()), csv_cell(n.y()), csv_cell(n.z()), csv_cell(c), csv_cell(s.ortho_residual)});
    }
    for (const auto& o : oracle)
        t.add_row({"scan", csv_cell(o.normal.x()), csv_cell(o.normal.y()), csv_cell(o.normal.z()), csv_cell(o.offset),
                   csv_cell(o.residual)});
    r.metrics.push_back(metric("ellipsoid slices found", static_cast<double>(es.size()), "==", 3));
    r.metrics.push_back(metric("dense-scan minima", static_cast<double>(oracle.size()), "==", 3));
    r.metrics.push_back(metric("finder planes matched by the scan", static_cast<double>(matched), "==", 3));
    ctx.report.tables.emplace("slices_ellipsoid.csv", std::move(t));

    AnnulusPrism prism;
    const auto ps = find_orthogonal_slices(prism, 2);
    int annuli = 0;
    for (const auto& s : ps)
        if (s.euler_char == 0 && std::abs(std::abs(s.plane.complement().col(0).z()) - 1) < 1e-9) ++annuli;
    r.metrics.push_back(metric("annulus-prism horizontal slices with chi = 0", annuli, ">", 0));
}

// 5. Weak identity residual on the great disk and a 10 degree tilted disk.

void weak_identity(Context& ctx, CriterionResult& r) {
    Ball ball;
    const TestFunctionBank bank = default_bank();
    CsvTable t({"level", "residual_orthogonal", "residual_tilted"});
    std::vector<double> res, tilt;
    for (int level = 2; level <= 4; ++level) {
        const SurfaceMesh m = ball_section(level, 0.0);
        const SurfaceMesh mt = ball_section(level, std::sin(10 * kPi / 180));
        res.push_back(orthogonality_identity_residual(m, estimate_curvature(m), ball, bank).residual);
        tilt.push_back(orthogonality_identity_residual(mt, estimate_curvature(mt), ball, bank).residual);
        t.add_row({static_cast<double>(level), res.back(), tilt.back()});
    }
    const double order1 = std::log2(res[0] / res[1]), order2 = std::log2(res[1] / res[2]);
    r.metrics.push_back(metric("observed order, levels 2-3", order1, ">=", 1));
    r.metrics.push_back(metric("observed order, levels 3-4", order2, ">=", 1));
    r.metrics.push_back(metric("residual at level 4", res[2], "<", 1e-3));
    r.metrics.push_back(metric("tilted residual floor (min over levels)", *std::min_element(tilt.begin(), tilt.end()), ">",
                               1e-2));
    ctx.report.tables.emplace("weak_identity.csv", std::move(t));
}

// 6. First variation of the Riemannian mass against a mesh-free oracle.

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

// x(s, t) = (0.3 s, 0.3 t, 0.75 + 0.1 s^2 - 0.05 t^2 + 0.03 s t) on [-1, 1]^2.
struct Patch {
    static Vec3 x(double s, double t) { return {0.3 * s, 0.3 * t, 0.75 + 0.1 * s * s - 0.05 * t * t + 0.03 * s * t}; }
    static Vec3 xs(double s, double t) { return {0.3, 0, 0.2 * s + 0.03 * t}; }
    static Vec3 xt(double s, double t) { return {0, 0.3, -0.1 * t + 0.03 * s}; }
    static Eigen::Matrix2d second(const Vec3& n) {
        Eigen::Matrix2d L;
        L << 0.2 * n.z(), 0.03 * n.z(), 0.03 * n.z(), -0.1 * n.z();
        return L;
    }
};

struct Flow {
    Vec3 x0, e;
    double r;
    Vec3 X(const Vec3& x) const {
        const double q = (x - x0).squaredNorm() / (r * r);
        if (q >= 1) return Vec3::Zero();
        return std::exp(-1 / (1 - q)) * e;
    }
    Mat3 DX(const Vec3& x) const {
        const double q = (x - x0).squaredNorm() / (r * r);
        if (q >= 1) return Mat3::Zero();
        const double b = std::exp(-1 / (1 - q));
        return e * (-b / ((1 - q) * (1 - q)) * 2 * (x - x0) / (r * r)).transpose();
    }
};

struct FirstVariation {
    double fd = 0, formula = 0;
};

FirstVariation first_variation(const MetricField& metric, const Flow& F, int N) {
    std::vector<double> gx, gw;
    gauss_legendre(N, gx, gw);
    auto mass = [&](double tt) {
        double M = 0;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                const double s = gx[i], t = gx[j];
                const Vec3 x = Patch::x(s, t);
                const Mat3 D = Mat3::Identity() + tt * F.DX(x);
                const Vec3 n = (D * Patch::xs(s, t)).cross(D * Patch::xt(s, t));
                const Vec3 nu = n.normalized();
                const Mat3 P = Mat3::Identity() - nu * nu.transpose();
                M += gw[i] * gw[j] * n.norm() * metric_jacobian(metric.G(x + tt * F.X(x)), P);
            }
        return M;
    };
    FirstVariation out;
    const double h = 1e-5;
    out.fd = (mass(h) - mass(-h)) / (2 * h);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const double s = gx[i], t = gx[j];
            const Vec3 x = Patch::x(s, t), a = Patch::xs(s, t), b = Patch::xt(s, t);
            Vec3 n = a.cross(b);
            const double J = n.norm();
            n /= J;
            const Vec3 t1 = a.normalized(), t2 = n.cross(t1);
            MatX T(3, 2), Nn(3, 1);
            T << t1, t2;
            Nn << n;
            Eigen::Matrix<double, 3, 2> AB;
            AB << a, b;
            const Eigen::Matrix2d C = (AB.transpose() * AB).inverse() * AB.transpose() * T;
            const Tensor3 B = assemble_B(T, Nn, {C.transpose() * Patch::second(n) * C});
            const Mat3 P = T * T.transpose();
            const Mat3 G = metric.G(x);
            const Vec3 Hg = riemannian_mean_curvature(metric, x, P, B).total();
            out.formula -= gw[i] * gw[j] * J * (G * Hg).dot(F.X(x)) * metric_jacobian(G, P);
        }
    return out;
}

void riemannian_first_variation(Context& ctx, CriterionResult& r) {
    std::mt19937_64 rng(ctx.opt.seed);
    auto uniform = [&] { return 2 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1; };
    std::vector<Flow> flows;
    for (int k = 0; k < 5; ++k) {
        const double s = 0.1 * uniform(), t = 0.1 * uniform();
        Vec3 e(uniform(), uniform(), uniform());
        if (e.norm() < 0.1) e = Vec3::UnitZ();
        flows.push_back({Patch::x(s, t), e.normalized(), 0.24});
    }
    auto ball = std::make_shared<Ball>();
    const std::vector<MetricField> metrics = {synthetic_metric(ctx.opt.seed, 0.1), pullback_metric(ball)};
    CsvTable t({"metric", "flow", "fd", "formula", "relative_error"});
    double worst = 0;
    for (const auto& m : metrics)
        for (std::size_t k = 0; k < flows.size(); ++k) {
            const FirstVariation fv = first_variation(m, flows[k], 96);
            const double rel = std::abs(fv.fd - fv.formula) / std::abs(fv.fd);
            worst = std::max(worst, rel);
            t.add_row({m.provenance, std::to_string(k), csv_cell(fv.fd), csv_cell(fv.formula), csv_cell(rel)});
        }
    r.metrics.push_back(metric("max relative error, synthetic and pullback metrics", worst, "<", 1e-3));

    const SurfaceMesh half = hemisphere(4);
    const CurvatureField f = estimate_curvature(half);
    const auto Hg = H_g_field(half, f, identity_metric());
    double e = 0;
    for (int v = 0; v < half.num_vertices(); ++v) e = std::max(e, (Hg[v] - f.v[v].H).norm());
    r.metrics.push_back(metric("identity metric max |H_g - H|", e, "<", 1e-8));
    ctx.report.tables.emplace("first_variation.csv", std::move(t));
}

// 7. G = I on S and DG nu = 4 h^S on 100 points of the ball and the ellipsoid.

void metric_jets(Context& ctx, CriterionResult& r) {
    CsvTable t({"domain", "max_G_minus_I", "max_DGnu_minus_4hS", "max_DG_tangential"});
    const double h = 1e-5;
    for (int which = 0; which < 2; ++which) {
        const Vec3 axes = which == 0 ? Vec3(1, 1, 1) : Vec3(1, 1.2, 1.5);
        DomainPtr d = which == 0 ? DomainPtr(std::make_shared<Ball>())
                                 : DomainPtr(std::make_shared<Ellipsoid>(Vec3::Zero(), axes));
        const MetricField m = pullback_metric(d, h);
        double eG = 0, eD = 0, eT = 0;
        for (int k = 0; k < 100; ++k) {
            const double z = 1 - 2 * (k + 0.5) / 100, phi = k * kPi * (3 - std::sqrt(5.0));
            const Vec3 dir(std::sqrt(1 - z * z) * std::cos(phi), std::sqrt(1 - z * z) * std::sin(phi), z);
            const Vec3 x = dir / dir.cwiseQuotient(axes).norm();
            const Vec3 nu = -d->gradient(x);
            const Mat3 PS = Mat3::Identity() - nu * nu.transpose();
            const Tensor3 DG = m.DG(x);
            Mat3 Dn = Mat3::Zero(), Dt = Mat3::Zero();
            const Vec3 tau = (PS * Vec3(0.3, -0.5, 0.8)).normalized();
            for (int i = 0; i < 3; ++i) Dn += nu[i] * DG[i], Dt += tau[i] * DG[i];
            eG = std::max(eG, (m.G(x) - Mat3::Identity()).norm());
            eD = std::max(eD, (Dn - 4 * PS * d->hessian(x) * PS).norm());
            eT = std::max(eT, Dt.norm());
        }
        const std::string name = which == 0 ? "ball" : "ellipsoid";
        r.metrics.push_back(metric(name + " max |G - I|", eG, "<=", 1e-5));
        r.metrics.push_back(metric(name + " max |DG nu - 4 h^S|", eD, "<=", 1e-5));
        t.add_row({name, csv_cell(eG), csv_cell(eD), csv_cell(eT)});
    }
    ctx.report.tables.emplace("metric_jets.csv", std::move(t));
}

// 8. Half-sphere reflection: 16 pi and the seam formula.

void reflected_surface(Context& ctx, CriterionResult& r) {
    auto ball = std::make_shared<Ball>();
    CsvTable t({"level", "energy_W", "ratio_to_16pi", "seam_consistency", "seam_vertices"});
    std::vector<double> seam;
    double ratio = 0;
    for (int level = 3; level <= 4; ++level) {
        const SurfaceMesh half = hemisphere(level);
        const ReflectedSurface W = reflect_surface(half, estimate_curvature(half), ball);
        ratio = W.energy() / (16 * kPi);
        seam.push_back(W.seam_consistency);
        t.add_row({static_cast<double>(level), W.energy(), ratio, W.seam_consistency,
                   static_cast<double>(W.seam_vertices)});
    }
    r.metrics.push_back(metric("int |H_W|^2 / 16pi - 1 at level 4", ratio - 1, "in", 0.05));
    r.metrics.push_back(metric("seam consistency at level 4", seam[1], "<", 1e-2));
    r.metrics.push_back(metric("seam consistency level 4 / level 3", seam[1] / seam[0], "<", 1));
    ctx.report.tables.emplace("reflection.csv", std::move(t));
}

// 9. Extension operator: vanishing, normal derivative, support.

void extension_operator(Context& ctx, CriterionResult& r) {
    auto kernel = std::make_shared<MollifierKernel>(2, 256);
    const VectorFunction psi = [](const VecX& x) {
        VecX v(1);
        v[0] = std::sin(x[0]) * std::cos(0.5 * x[1]) + 0.3 * x[1];
        return v;
    };
    const Extension u = extend(psi, 2, 1, kernel);
    std::mt19937_64 rng(ctx.opt.seed);
    auto uniform = [&] { return 2 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1; };
    double zero = 0, deriv = 0;
    const double h = 1e-4;
    VecX z0 = VecX::Zero(1), zp(1), zm(1);
    zp[0] = h;
    zm[0] = -h;
    for (int k = 0; k < 20; ++k) {
        VecX x(2);
        x << uniform(), uniform();
        zero = std::max(zero, std::abs(u(x, z0)));
        deriv = std::max(deriv, std::abs((u(x, zp) - u(x, zm)) / (2 * h) - psi(x)[0]));
    }
    r.metrics.push_back(metric("max |u(x, 0)|", zero, "==", 0));
    r.metrics.push_back(metric("max |d_z u(x, 0) - psi(x)|", deriv, "<", 1e-6));

    // psi supported in the unit disk; u(x, z) must vanish once |x| >= 1 + |z|,
    // and the cutoff kills |z| >= eps.
    const VectorFunction bump = [](const VecX& x) {
        VecX v(1);
        const double q = x.squaredNorm();
        v[0] = q < 1 ? std::exp(-1 / (1 - q)) : 0.0;
        return v;
    };
    auto coarse = std::make_shared<MollifierKernel>(2, 64);
    const Extension ub = extend_with_cutoff(bump, 2, 1, coarse, 0.5);
    double outside = 0;
    for (int k = 0; k < 40; ++k) {
        VecX z(1);
        z[0] = 0.45 * uniform();
        const double ang = kPi * uniform();
        VecX x(2);
        x << std::cos(ang), std::sin(ang);
        x *= 1 + std::abs(z[0]) + 0.01 * (1 + uniform());
        outside = std::max(outside, std::abs(ub(x, z)));
        VecX zc(1);
        zc[0] = (0.5 + 0.2 * std::abs(uniform())) * (k % 2 ? 1 : -1);
        VecX xi(2);
        xi << 0.2 * uniform(), 0.2 * uniform();
        outside = std::max(outside, std::abs(ub(xi, zc)));
    }
    r.metrics.push_back(metric("max |u| outside the support", outside, "==", 0));
    CsvTable t({"check", "value"});
    t.add_row({"max_u_at_zero", csv_cell(zero)});
    t.add_row({"max_normal_derivative_error", csv_cell(deriv)});
    t.add_row({"max_outside_support", csv_cell(outside)});
    ctx.report.tables.emplace("extension.csv", std::move(t));
}

// 10. Generic perturbation of the ball and the ellipsoid.

void genericity(Context& ctx, CriterionResult& r) {
    CsvTable t({"domain", "slices_before", "attempts", "terms", "scale", "slices_after_reload"});
    for (int which = 0; which < 2; ++which) {
        DomainPtr d = which == 0 ? DomainPtr(std::make_shared<Ball>())
                                 : DomainPtr(std::make_shared<Ellipsoid>(Vec3::Zero(), Vec3(1, 1.2, 1.5)));
        const std::string name = which == 0 ? "ball" : "ellipsoid";
        const auto before = find_orthogonal_slices(*d, 2);
        GenericOptions go;
        go.step = 1e-2;
        go.seed = ctx.opt.seed;
        const GenericResult g = make_generic(d, before, go);
        // Re-search on the domain rebuilt from its serialized form.
        const DomainPtr reloaded = domain_from_section(domain_section(*g.domain));
        SliceOptions so;
        so.tol_ortho = 1e-6;
        const auto after = find_orthogonal_slices(*reloaded, 2, so);
        r.metrics.push_back(metric(name + " slices before", static_cast<double>(before.size()), ">", 0));
        r.metrics.push_back(metric(name + " slices after (pipeline)", static_cast<double>(g.remaining.size()), "==", 0));
        r.metrics.push_back(metric(name + " slices after (reloaded domain)", static_cast<double>(after.size()), "==", 0));
        t.add_row({name, std::to_string(before.size()), std::to_string(g.attempts), std::to_string(g.spec.terms.size()),
                   csv_cell(g.spec.scale), std::to_string(after.size())});
    }
    ctx.report.tables.emplace("genericity.csv", std::move(t));
}

// 11. Minimizer: tilted near-disk descends; the flat slice is a fixed point.

void minimizer(Context& ctx, CriterionResult& r) {
    Ball ball;
    const SurfaceMesh flat = ball_section(2, 0.0);
    const MinimizeResult f0 = minimize(flat, ball);
    r.metrics.push_back(metric("flat start: accepted steps", static_cast<double>(f0.trace.steps.size() - 1), "==", 0));
    r.metrics.push_back(metric("flat start: max vertex displacement", (f0.mesh.points() - flat.points()).cwiseAbs().maxCoeff(),
                               "==", 0));
    r.metrics.push_back(metric("flat start: E", f0.trace.final_report.energy_A_p, "<", 1e-12));

    const Mat3 R = Eigen::AngleAxisd(20 * kPi / 180, Vec3::UnitX()).toRotationMatrix();
    const SurfaceMesh tilted = rigid_transform(ball_section(2, 0.15), R, Vec3::Zero());
    const MinimizeResult res = minimize(tilted, ball);
    const auto& fr = res.trace.final_report;
    r.metrics.push_back(metric("tilted start: final E", fr.energy_A_p, "<", 1e-4));
    r.metrics.push_back(metric("tilted start: ortho_angle_max (deg)", fr.ortho_angle_max * 180 / kPi, "<", 1));
    bool monotone = true;
    for (std::size_t k = 1; k < res.trace.steps.size(); ++k) {
        const auto &a = res.trace.steps[k - 1], &b = res.trace.steps[k];
        if (a.penalty_boundary == b.penalty_boundary && a.penalty_ortho == b.penalty_ortho && b.objective > a.objective)
            monotone = false;
    }
    r.metrics.push_back(metric("accepted steps non-increasing", monotone ? 1 : 0, "==", 1));

    CsvTable t({"iter", "energy", "objective", "area", "boundary_length", "ortho_angle_max_deg", "boundary_dist_max", "step"});
    for (const auto& s : res.trace.steps)
        t.add_row({static_cast<double>(s.iter), s.energy, s.objective, s.area, s.boundary_length, s.ortho_angle_max,
                   s.boundary_dist_max, s.step});
    ctx.report.tables.emplace("minimize_trace.csv", std::move(t));
}

struct Check {
    int id;
    const char* title;
    double limit;
    void (*run)(Context&, CriterionResult&);
};

const std::vector<Check>& checks() {
    static const std::vector<Check> c = {
        {1, "curvature identities on fixtures", 8.0, curvature_identities},
        {2, "sphere and half-sphere energy thresholds", 10.0, energy_thresholds},
        {3, "comparison surface beats 8pi", 120.0, comparison},
        {4, "slice detection", 120.0, slice_detection},
        {5, "weak identity residual", 60.0, weak_identity},
        {6, "Riemannian first variation", 120.0, riemannian_first_variation},
        {7, "reflection metric jets", 30.0, metric_jets},
        {8, "reflected half-sphere", 60.0, reflected_surface},
        {9, "extension operator", 30.0, extension_operator},
        {10, "genericity pipeline", 300.0, genericity},
        {11, "minimizer sanity", 300.0, minimizer},
    };
    return c;
}

}  // namespace

SelftestReport run_selftest(const SelftestOptions& opt) {
    SelftestReport report;
    Config cfg;
    auto& s = cfg.add_section("selftest");
    s.set("seed", std::to_string(opt.seed));
    std::string only;
    for (int id : opt.only) only += (only.empty() ? "" : " ") + std::to_string(id);
    s.set("only", only.empty() ? "all" : only);
    report.config_hash = cfg.hash();

    Context ctx{opt, report};
    for (const auto& c : checks()) {
        if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), c.id) == opt.only.end()) continue;
        CriterionResult r;
        r.id = c.id;
        r.title = c.title;
        r.time_limit = c.limit;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(ctx, r);
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        r.seconds = seconds_since(t0);
        report.criteria.push_back(std::move(r));
    }
    return report;
}

}  // namespace orthovar
