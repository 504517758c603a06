#include "orthovar/minimize.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <deque>

namespace orthovar {

void MinimizeConfig::validate() const {
    auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (!(p >= 1)) bad("p must be >= 1");
    if (!(penalty_boundary >= 0) || !(penalty_ortho >= 0)) bad("penalty weights must be >= 0");
    if (!(armijo_c > 0 && armijo_c < 1)) bad("armijo_c must lie in (0, 1)");
    if (max_iters < 0) bad("max_iters must be >= 0");
    if (!(step_init > 0) || !(fd_step > 0)) bad("step_init and fd_step must be positive");
    if (!(tol_grad > 0) || !(tol_boundary > 0) || !(tol_ortho_deg > 0)) bad("tolerances must be positive");
    if (!(area_floor >= 0) || !(quality_floor >= 0)) bad("floors must be >= 0");
    if (memory < 0 || smooth_every < 1 || stall_window < 1)
        bad("memory must be >= 0, smooth_every and stall_window >= 1");
    if (!(stall_fraction >= 0 && stall_fraction < 1)) bad("stall_fraction must lie in [0, 1)");
}

namespace {

struct Term {
    double energy = 0;  // a |A|^p, dimensional
    double boundary = 0;
    double ortho = 0;   // 1 - <eta, nu>
};

class Objective {
public:
    Objective(const SurfaceMesh& mesh, const ImplicitDomain& domain, const MinimizeConfig& cfg, double L)
        : domain_(domain), cfg_(cfg), L_(L), stencils_(boundary_stencils(mesh)) {
        const int n = mesh.num_vertices();
        rings_.resize(n);
        influence_.resize(n);
        for (int v = 0; v < n; ++v) {
            rings_[v] = mesh.ring(v, 2);
            influence_[v] = rings_[v];
            influence_[v].push_back(v);
        }
        escale_ = std::pow(L_, cfg_.p - 2);
    }

    Term term(const SurfaceMesh& mesh, int u) const {
        VertexCurvature c;
        try {
            c = fit_vertex(mesh, u, rings_[u]);
        } catch (const Error& e) {
            throw Error(ErrorCode::MeshDegenerated, e.what());
        }
        double a = 0;
        for (int f : mesh.vertex_faces(u)) a += mesh.face_area(f) / 3;
        Term t;
        t.energy = a * std::pow(c.A_norm2(), 0.5 * cfg_.p);
        if (mesh.is_boundary(u)) {
            const Vec3 x = mesh.p3(u);
            t.boundary = domain_.distance(x);
            const Vec3 nu = -domain_.gradient(x).normalized();
            t.ortho = 1 - fitted_conormal(mesh, c, u, stencils_[u]).dot(nu);
        }
        return t;
    }

    double weigh(const Term& t) const {
        return t.energy * escale_ + wb_ * t.boundary * t.boundary / (L_ * L_) + wo_ * t.ortho * t.ortho;
    }

    ObjectiveValue value(const SurfaceMesh& mesh, double* dist_max = nullptr, double* ortho_max = nullptr) const {
        ObjectiveValue out;
        double dmax = 0, omax = 0;
        for (int u = 0; u < mesh.num_vertices(); ++u) {
            const Term t = term(mesh, u);
            out.value += weigh(t);
            out.energy += t.energy;
            out.boundary += t.boundary * t.boundary / (L_ * L_);
            out.ortho += t.ortho * t.ortho;
            dmax = std::max(dmax, std::abs(t.boundary));
            omax = std::max(omax, std::acos(std::clamp(1 - t.ortho, -1.0, 1.0)));
        }
        if (dist_max) *dist_max = dmax;
        if (ortho_max) *ortho_max = omax * 180 / kPi;
        return out;
    }

    // d objective / d(x / L)
    MatX gradient(SurfaceMesh& mesh) const {
        const int n = mesh.num_vertices();
        const double h = cfg_.fd_step;
        MatX g(3, n);
        for (int v = 0; v < n; ++v) {
            const VecX x = mesh.point(v);
            for (int k = 0; k < 3; ++k) {
                double side[2];
                for (int s = 0; s < 2; ++s) {
                    VecX y = x;
                    y[k] += (s == 0 ? h : -h) * L_;
                    mesh.set_point(v, y);
                    double acc = 0;
                    for (int u : influence_[v]) acc += weigh(term(mesh, u));
                    side[s] = acc;
                }
                g(k, v) = (side[0] - side[1]) / (2 * h);
            }
            mesh.set_point(v, x);
        }
        return g;
    }

    void set_weights(double wb, double wo) { wb_ = wb, wo_ = wo; }
    double wb() const { return wb_; }
    double wo() const { return wo_; }

private:
    const ImplicitDomain& domain_;
    const MinimizeConfig& cfg_;
    double L_, escale_ = 1;
    double wb_ = 0, wo_ = 0;
    std::vector<BoundaryStencil> stencils_;
    std::vector<std::vector<int>> rings_, influence_;
};

// Tangential area-weighted Laplacian smoothing; boundary vertices slide along
// their loop only.
MatX smooth_tangential(const SurfaceMesh& mesh, double alpha) {
    const auto st = boundary_stencils(mesh);
    MatX X = mesh.points();
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const Vec3 x = mesh.p3(v);
        Vec3 lap;
        if (mesh.is_boundary(v)) {
            const Vec3 tau = (mesh.p3(st[v].next) - mesh.p3(st[v].prev)).normalized();
            lap = 0.5 * (mesh.p3(st[v].next) + mesh.p3(st[v].prev)) - x;
            lap = lap.dot(tau) * tau;
        } else {
            Vec3 c = Vec3::Zero(), nsum = Vec3::Zero();
            double w = 0;
            for (int f : mesh.vertex_faces(v)) {
                const Tri& t = mesh.triangles()[f];
                const Vec3 e = (mesh.p3(t[1]) - mesh.p3(t[0])).cross(mesh.p3(t[2]) - mesh.p3(t[0]));
                const double a = 0.5 * e.norm();
                c += a * (mesh.p3(t[0]) + mesh.p3(t[1]) + mesh.p3(t[2])) / 3;
                w += a;
                nsum += e;
            }
            if (w == 0 || nsum.norm() == 0) continue;
            const Vec3 n = nsum.normalized();
            lap = c / w - x;
            lap -= lap.dot(n) * n;
        }
        X.col(v).head<3>() += alpha * lap;
    }
    return X;
}

// I + beta L^T L with the umbrella Laplacian; boundary vertices use their
// loop neighbours so that rigid motions are nearly free.
class Preconditioner {
public:
    Preconditioner(const SurfaceMesh& mesh, double beta) : beta_(beta) {
        if (beta <= 0) return;
        const int n = mesh.num_vertices();
        const auto st = boundary_stencils(mesh);
        std::vector<Eigen::Triplet<double>> t;
        for (int v = 0; v < n; ++v) {
            std::vector<int> nb = mesh.neighbors(v);
            if (mesh.is_boundary(v)) nb = {st[v].prev, st[v].next};
            t.emplace_back(v, v, -1.0);
            for (int w : nb) t.emplace_back(v, w, 1.0 / static_cast<double>(nb.size()));
        }
        Eigen::SparseMatrix<double> Lap(n, n), I(n, n);
        Lap.setFromTriplets(t.begin(), t.end());
        I.setIdentity();
        const Eigen::SparseMatrix<double> M = I + beta * Eigen::SparseMatrix<double>(Lap.transpose() * Lap);
        solver_.compute(M);
        if (solver_.info() != Eigen::Success) throw Error(ErrorCode::MeshDegenerated, "preconditioner factorization failed");
    }
    VecX apply(const VecX& q) const {
        if (beta_ <= 0) return q;
        const MatX Q = Eigen::Map<const MatX>(q.data(), 3, q.size() / 3);
        const MatX R = solver_.solve(MatX(Q.transpose())).transpose();
        return Eigen::Map<const VecX>(R.data(), R.size());
    }

private:
    double beta_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

VecX flat(const MatX& M) { return Eigen::Map<const VecX>(M.data(), M.size()); }
MatX unflat(const VecX& v, int rows) { return Eigen::Map<const MatX>(v.data(), rows, v.size() / rows); }

}  // namespace

ObjectiveValue minimize_objective(const SurfaceMesh& mesh, const ImplicitDomain& domain, const MinimizeConfig& config,
                                  double length_scale) {
    Objective obj(mesh, domain, config, length_scale);
    obj.set_weights(config.penalty_boundary, config.penalty_ortho);
    return obj.value(mesh);
}

MatX minimize_gradient(const SurfaceMesh& mesh, const ImplicitDomain& domain, const MinimizeConfig& config,
                       double length_scale) {
    Objective obj(mesh, domain, config, length_scale);
    obj.set_weights(config.penalty_boundary, config.penalty_ortho);
    SurfaceMesh work = mesh;
    return obj.gradient(work);
}

MinimizeResult minimize(const SurfaceMesh& mesh0, const ImplicitDomain& domain, const MinimizeConfig& cfg) {
    cfg.validate();
    if (mesh0.dim() != 3) throw Error(ErrorCode::InvalidMesh, "minimize needs a surface in R^3");
    for (const auto& loop : mesh0.boundary_loops())
        for (int v : loop) require_in_tube(domain, mesh0.p3(v));

    const double area0 = mesh0.area();
    const double L = std::sqrt(area0);
    const double floor = cfg.area_floor * area0;
    SurfaceMesh mesh = mesh0;
    Objective obj(mesh, domain, cfg, L);
    obj.set_weights(cfg.penalty_boundary, cfg.penalty_ortho);
    const Preconditioner pre(mesh, cfg.precondition);

    MinimizeResult res;
    auto& trace = res.trace;
    double dmax = 0, omax = 0;
    ObjectiveValue f = obj.value(mesh, &dmax, &omax);
    MatX g = obj.gradient(mesh);

    auto record = [&](int it, double step) {
        MinimizeStep s;
        s.iter = it;
        s.energy = f.energy;
        s.objective = f.value;
        s.area = mesh.area();
        s.boundary_length = mesh.boundary_length();
        s.ortho_angle_max = omax;
        s.boundary_dist_max = dmax;
        s.step = step;
        s.grad_max = g.cwiseAbs().maxCoeff();
        s.penalty_boundary = obj.wb();
        s.penalty_ortho = obj.wo();
        trace.steps.push_back(s);
    };
    record(0, 0);

    std::deque<std::pair<VecX, VecX>> mem;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const double gmax = g.cwiseAbs().maxCoeff();
        const bool bad_b = dmax / L > cfg.tol_boundary, bad_o = omax > cfg.tol_ortho_deg;
        const auto& hist = trace.steps;
        const bool stalled = hist.size() > static_cast<std::size_t>(cfg.stall_window) &&
                             hist[hist.size() - cfg.stall_window].penalty_ortho == obj.wo() &&
                             hist[hist.size() - cfg.stall_window].penalty_boundary == obj.wb() &&
                             hist[hist.size() - cfg.stall_window].objective - f.value <
                                 cfg.stall_fraction * hist[hist.size() - cfg.stall_window].objective;
        if (gmax < cfg.tol_grad || stalled) {
            if (!bad_b && !bad_o) {
                trace.converged = true;
                if (gmax >= cfg.tol_grad) trace.status = "converged (stalled within tolerances)";
                break;
            }
            if (trace.doublings >= cfg.max_doublings) {
                trace.status = "penalty weights exhausted";
                break;
            }
            obj.set_weights(obj.wb() * (bad_b ? 2 : 1), obj.wo() * (bad_o ? 2 : 1));
            ++trace.doublings;
            f = obj.value(mesh, &dmax, &omax);
            g = obj.gradient(mesh);
            mem.clear();
            continue;
        }

        // L-BFGS two-loop recursion.
        const VecX gv = flat(g);
        VecX q = -gv;
        std::vector<double> alpha(mem.size());
        for (int i = static_cast<int>(mem.size()) - 1; i >= 0; --i) {
            const auto& [s, y] = mem[i];
            alpha[i] = s.dot(q) / y.dot(s);
            q -= alpha[i] * y;
        }
        q = pre.apply(q);
        if (!mem.empty()) {
            const auto& [s, y] = mem.back();
            q *= s.dot(y) / y.dot(pre.apply(y));
        }
        for (std::size_t i = 0; i < mem.size(); ++i) {
            const auto& [s, y] = mem[i];
            q += s * (alpha[i] - y.dot(q) / y.dot(s));
        }
        if (q.dot(gv) >= 0) {
            q = pre.apply(-gv);
            mem.clear();
        }

        const MatX X = mesh.points();
        bool accepted = false;
        double t = 0;
        ObjectiveValue fc;
        double dc = 0, oc = 0;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            t = mem.empty() ? cfg.step_init / q.cwiseAbs().maxCoeff() : 1.0;
            const double slope = q.dot(gv);
            for (int k = 0; k < 50; ++k, t *= 0.5) {
                mesh.set_points(X + L * t * unflat(q, 3));
                try {
                    fc = obj.value(mesh, &dc, &oc);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::MeshDegenerated) throw;
                    continue;
                }
                if (fc.value <= f.value + cfg.armijo_c * t * slope) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                if (mem.empty()) break;
                mem.clear();
                q = pre.apply(-gv);
            }
        }
        if (!accepted) {
            mesh.set_points(X);
            if (gmax < 1e3 * cfg.tol_grad && !bad_b && !bad_o) {
                trace.converged = true;
                trace.status = "stalled at the finite-difference noise floor";
                break;
            }
            trace.status = "line search failed";
            if (cfg.throw_on_failure) throw Error(ErrorCode::LineSearchFailed, "no Armijo step at iteration " + std::to_string(it));
            break;
        }
        f = fc;
        dmax = dc;
        omax = oc;
        MatX gn = obj.gradient(mesh);
        const VecX s = t * q, y = flat(gn) - gv;
        if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
            mem.emplace_back(s, y);
            if (static_cast<int>(mem.size()) > cfg.memory) mem.pop_front();
        }
        g = std::move(gn);

        if (cfg.regularize_mesh && it % cfg.smooth_every == 0) {
            const MatX Y = mesh.points();
            mesh.set_points(smooth_tangential(mesh, cfg.smooth_strength));
            double ds = 0, os = 0;
            ObjectiveValue fs;
            bool ok = true;
            try {
                fs = obj.value(mesh, &ds, &os);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::MeshDegenerated) throw;
                ok = false;
            }
            if (ok && fs.value <= f.value) {
                f = fs;
                dmax = ds;
                omax = os;
                g = obj.gradient(mesh);
                mem.clear();
            } else {
                mesh.set_points(Y);
            }
        }
        record(it, t * L * q.cwiseAbs().maxCoeff());

        const double area = mesh.area();
        if (area < floor) {
            trace.status = "collapsed";
            if (cfg.throw_on_failure)
                throw Error(ErrorCode::Collapsed, "area " + format_double(area) + " below floor " + format_double(floor));
            break;
        }
        const double quality = mesh.min_triangle_quality();
        if (quality < cfg.quality_floor) {
            trace.status = "mesh degenerated";
            if (cfg.throw_on_failure)
                throw Error(ErrorCode::MeshDegenerated, "min triangle quality " + format_double(quality));
            break;
        }
    }
    if (trace.status.empty()) trace.status = trace.converged ? "converged" : "iteration limit";
    trace.final_report = energy_report(mesh, estimate_curvature(mesh), cfg.p, &domain);
    res.mesh = std::move(mesh);
    return res;
}

// ---------------------------------------------------------------------------

namespace {

SurfaceMesh comparison_mesh(const GraphFunction& u, double lambda, int level) {
    SurfaceMesh m = hemisphere(level);
    MatX X = m.points();
    for (int v = 0; v < m.num_vertices(); ++v) {
        const Eigen::Vector2d z = X.col(v).head<2>();
        const double y = X(2, v);
        // u_l(z) = u(l z) / l and Du_l(z) = Du(l z) for the quadratic graph.
        const double ul = lambda == 0 ? 0.0 : u.value(lambda * z) / lambda;
        const Eigen::Vector2d du = u.grad(lambda * z);
        const Vec3 nu = Vec3(-du[0], -du[1], 1).normalized();
        X.col(v) = Vec3(z[0], z[1], ul) + y * nu;
    }
    m.set_points(X);
    return m;
}

}  // namespace

SurfaceMesh build_comparison_surface(const GraphFunction& u, double lambda, const ComparisonOptions& opt) {
    if (!(lambda >= 0) || lambda > opt.lambda_max)
        throw Error(ErrorCode::LambdaOutOfRange,
                    "lambda = " + format_double(lambda) + " outside [0, " + format_double(opt.lambda_max) + "]");
    return comparison_mesh(u, lambda, opt.level);
}

GraphCap comparison_domain(const GraphFunction& u, double lambda) {
    GraphFunction ul;
    ul.H = lambda * u.H;
    return GraphCap(ul);
}

double comparison_energy(const GraphFunction& u, double lambda, const ComparisonOptions& opt) {
    const SurfaceMesh m = build_comparison_surface(u, lambda, opt);
    return energy_report(m, estimate_curvature(m), 2).energy_B_p;
}

double energy_slope_at_zero(const GraphFunction& u, double h, const ComparisonOptions& opt) {
    auto energy = [&](double l) {
        const SurfaceMesh m = comparison_mesh(u, l, opt.level);
        return energy_report(m, estimate_curvature(m), 2).energy_B_p;
    };
    return (energy(h) - energy(-h)) / (2 * h);
}

}  // namespace orthovar
