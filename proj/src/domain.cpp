#include "orthovar/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace orthovar {

// ---------------------------------------------------------------------------
// ImplicitDomain defaults

Vec3 ImplicitDomain::gradient(const Vec3& x) const {
    const double h = 1e-7 * bbox_.diameter();
    Vec3 g;
    for (int i = 0; i < 3; ++i) {
        Vec3 e = Vec3::Zero();
        e[i] = h;
        g[i] = (distance(x + e) - distance(x - e)) / (2 * h);
    }
    return g;
}

Mat3 ImplicitDomain::hessian(const Vec3& x) const {
    const double h = fd_step();
    Mat3 H;
    for (int i = 0; i < 3; ++i) {
        Vec3 e = Vec3::Zero();
        e[i] = h;
        H.col(i) = (gradient(x + e) - gradient(x - e)) / (2 * h);
    }
    return 0.5 * (H + H.transpose());
}

Vec3 ImplicitDomain::closest_point(const Vec3& x) const {
    return x - distance(x) * gradient(x);
}

// ---------------------------------------------------------------------------
// LevelSetDomain

Vec3 LevelSetDomain::level_gradient(const Vec3& x) const {
    const double h = 1e-6 * bbox_.diameter();
    Vec3 g;
    for (int i = 0; i < 3; ++i) {
        Vec3 e = Vec3::Zero();
        e[i] = h;
        g[i] = (level(x + e) - level(x - e)) / (2 * h);
    }
    return g;
}

Mat3 LevelSetDomain::level_hessian(const Vec3& x) const {
    const double h = fd_step();
    Mat3 H;
    for (int i = 0; i < 3; ++i) {
        Vec3 e = Vec3::Zero();
        e[i] = h;
        H.col(i) = (level_gradient(x + e) - level_gradient(x - e)) / (2 * h);
    }
    return 0.5 * (H + H.transpose());
}

LevelSetDomain::Projection LevelSetDomain::project(const Vec3& x) const {
    // Newton-Lagrange on y - x + mu grad F(y) = 0, F(y) = 0.
    Vec3 g = level_gradient(x);
    double gg = g.squaredNorm();
    if (gg == 0.0) throw Error(ErrorCode::PointOutsideTube, "vanishing level gradient");
    Vec3 y = x - level(x) / gg * g;
    g = level_gradient(y);
    double mu = (x - y).dot(g) / g.squaredNorm();

    const double scale = 1.0 + x.norm();
    auto residual = [&](const Vec3& yy, double m, Eigen::Vector4d& r) {
        const Vec3 gy = level_gradient(yy);
        r.head<3>() = yy - x + m * gy;
        r[3] = level(yy) / gy.norm();
        return r.norm();
    };
    Eigen::Vector4d r;
    double rn = residual(y, mu, r);
    bool converged = false;
    for (int it = 0; it < tol_.max_iter; ++it) {
        if (rn <= 1e-15 * scale) {
            converged = true;
            break;
        }
        const Vec3 gy = level_gradient(y);
        const Mat3 Hy = level_hessian(y);
        Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
        J.topLeftCorner<3, 3>() = Mat3::Identity() + mu * Hy;
        J.topRightCorner<3, 1>() = gy;
        J.bottomLeftCorner<1, 3>() = gy.transpose() / gy.norm();
        Eigen::Vector4d rhs = r;
        const Eigen::Vector4d step = J.fullPivLu().solve(rhs);
        double t = 1.0;
        bool accepted = false;
        for (int k = 0; k < 30; ++k) {
            const Vec3 yn = y - t * step.head<3>();
            const double mn = mu - t * step[3];
            Eigen::Vector4d rtrial;
            const double rt = residual(yn, mn, rtrial);
            if (rt < rn || rt <= 1e-15 * scale) {
                y = yn;
                mu = mn;
                r = rtrial;
                rn = rt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            converged = rn <= 1e-11 * scale;
            break;
        }
        if (t * step.norm() <= 1e-15 * scale) {
            converged = true;
            break;
        }
    }
    if (!converged && rn > 1e-11 * scale)
        throw Error(ErrorCode::NoConvergence, "surface projection did not converge");
    const Vec3 gy = level_gradient(y);
    Projection p;
    p.y = y;
    p.n = gy.normalized();
    p.d = (x - y).dot(p.n);
    return p;
}

double LevelSetDomain::distance(const Vec3& x) const { return project(x).d; }

Vec3 LevelSetDomain::gradient(const Vec3& x) const { return project(x).n; }

Vec3 LevelSetDomain::closest_point(const Vec3& x) const { return project(x).y; }

Mat3 LevelSetDomain::hessian(const Vec3& x) const {
    const Projection p = project(x);
    const double gnorm = level_gradient(p.y).norm();
    const Mat3 PT = Mat3::Identity() - p.n * p.n.transpose();
    const Mat3 S = PT * level_hessian(p.y) * PT / gnorm;
    const Mat3 M = Mat3::Identity() + p.d * S;
    Mat3 H = S * M.inverse();
    return 0.5 * (H + H.transpose());
}

// ---------------------------------------------------------------------------
// Ball

Ball::Ball(const Vec3& center, double radius) : c_(center), r_(radius) {
    if (!(radius > 0)) throw Error(ErrorCode::InvalidConfig, "ball radius must be positive");
    bbox_ = {center.array() - 1.05 * radius, center.array() + 1.05 * radius};
    reach_ = 0.5 * radius;
}

double Ball::distance(const Vec3& x) const { return (x - c_).norm() - r_; }

Vec3 Ball::gradient(const Vec3& x) const {
    const Vec3 v = x - c_;
    const double n = v.norm();
    if (n == 0.0) throw Error(ErrorCode::PointOutsideTube, "ball center has no normal");
    return v / n;
}

Mat3 Ball::hessian(const Vec3& x) const {
    const Vec3 v = x - c_;
    const double n = v.norm();
    if (n == 0.0) throw Error(ErrorCode::PointOutsideTube, "ball center has no normal");
    const Vec3 u = v / n;
    return (Mat3::Identity() - u * u.transpose()) / n;
}

Vec3 Ball::closest_point(const Vec3& x) const { return c_ + r_ * gradient(x); }

void Ball::write_params(ConfigSection& out) const {
    out.set("center", c_);
    out.set("radius", r_);
}

// ---------------------------------------------------------------------------
// Ellipsoid

Ellipsoid::Ellipsoid(const Vec3& center, const Vec3& axes) : c_(center), a_(axes) {
    if ((axes.array() <= 0).any())
        throw Error(ErrorCode::InvalidConfig, "ellipsoid axes must be positive");
    bbox_ = {center.array() - 1.05 * axes.maxCoeff(), center.array() + 1.05 * axes.maxCoeff()};
    reach_ = 0.5 * axes.minCoeff() * axes.minCoeff() / axes.maxCoeff();
}

double Ellipsoid::level(const Vec3& x) const {
    return ((x - c_).array() / a_.array()).square().sum() - 1.0;
}

Vec3 Ellipsoid::level_gradient(const Vec3& x) const {
    return (2.0 * (x - c_).array() / a_.array().square()).matrix();
}

Mat3 Ellipsoid::level_hessian(const Vec3&) const {
    return (2.0 / a_.array().square()).matrix().asDiagonal();
}

void Ellipsoid::write_params(ConfigSection& out) const {
    out.set("center", c_);
    out.set("axes", a_);
}

// ---------------------------------------------------------------------------
// Slab

Slab::Slab(double center, double half_width, double lateral)
    : c_(center), h_(half_width), lateral_(lateral) {
    if (!(half_width > 0) || !(lateral > 0))
        throw Error(ErrorCode::InvalidConfig, "slab dimensions must be positive");
    bbox_ = {Vec3(-lateral, -lateral, center - 1.05 * half_width),
             Vec3(lateral, lateral, center + 1.05 * half_width)};
    reach_ = 0.5 * half_width;
}

double Slab::distance(const Vec3& x) const { return std::abs(x.z() - c_) - h_; }

Vec3 Slab::gradient(const Vec3& x) const {
    return Vec3(0, 0, x.z() >= c_ ? 1.0 : -1.0);
}

Mat3 Slab::hessian(const Vec3&) const { return Mat3::Zero(); }

void Slab::write_params(ConfigSection& out) const {
    out.set("center", c_);
    out.set("half_width", h_);
    out.set("lateral", lateral_);
}

// ---------------------------------------------------------------------------
// AnnulusPrism

AnnulusPrism::AnnulusPrism(double r_in, double r_out, double half_height, double rho)
    : rin_(r_in), rout_(r_out), h_(half_height), rho_(rho) {
    if (!(r_in > 0) || !(r_out > r_in) || !(half_height > 0) || !(rho > 0) ||
        2 * rho >= std::min(r_out - r_in, 2 * half_height))
        throw Error(ErrorCode::InvalidConfig, "invalid annulus_prism dimensions");
    const double pad = 0.05 * r_out;
    bbox_ = {Vec3(-r_out - pad, -r_out - pad, -h_ - pad), Vec3(r_out + pad, r_out + pad, h_ + pad)};
    reach_ = rho;
}

double AnnulusPrism::profile(double r, double z, Eigen::Vector2d* grad,
                             Eigen::Matrix2d* hess) const {
    const double rc = 0.5 * (rin_ + rout_);
    const double hx = 0.5 * (rout_ - rin_) - rho_;
    const double hz = h_ - rho_;
    const double sx = r >= rc ? 1.0 : -1.0;
    const double sz = z >= 0 ? 1.0 : -1.0;
    const double qx = std::abs(r - rc) - hx;
    const double qz = std::abs(z) - hz;
    if (qx > 0 && qz > 0) {
        const double len = std::hypot(qx, qz);
        const Eigen::Vector2d n(sx * qx / len, sz * qz / len);
        if (grad) *grad = n;
        if (hess) *hess = (Eigen::Matrix2d::Identity() - n * n.transpose()) / len;
        return len - rho_;
    }
    if (hess) hess->setZero();
    if (qx >= qz) {
        if (grad) *grad = Eigen::Vector2d(sx, 0);
        return qx - rho_;
    }
    if (grad) *grad = Eigen::Vector2d(0, sz);
    return qz - rho_;
}

double AnnulusPrism::distance(const Vec3& x) const {
    return profile(std::hypot(x.x(), x.y()), x.z(), nullptr, nullptr);
}

Vec3 AnnulusPrism::gradient(const Vec3& x) const {
    const double r = std::hypot(x.x(), x.y());
    if (r == 0.0) throw Error(ErrorCode::PointOutsideTube, "annulus axis has no normal");
    Eigen::Vector2d g;
    profile(r, x.z(), &g, nullptr);
    return Vec3(g[0] * x.x() / r, g[0] * x.y() / r, g[1]);
}

Mat3 AnnulusPrism::hessian(const Vec3& x) const {
    const double r = std::hypot(x.x(), x.y());
    if (r == 0.0) throw Error(ErrorCode::PointOutsideTube, "annulus axis has no normal");
    Eigen::Vector2d g;
    Eigen::Matrix2d h;
    profile(r, x.z(), &g, &h);
    const Vec3 er(x.x() / r, x.y() / r, 0);
    const Vec3 ez = Vec3::UnitZ();
    Mat3 Exy = Mat3::Zero();
    Exy(0, 0) = Exy(1, 1) = 1.0;
    return h(0, 0) * er * er.transpose() + h(0, 1) * (er * ez.transpose() + ez * er.transpose()) +
           h(1, 1) * ez * ez.transpose() + (g[0] / r) * (Exy - er * er.transpose());
}

void AnnulusPrism::write_params(ConfigSection& out) const {
    out.set("r_in", rin_);
    out.set("r_out", rout_);
    out.set("half_height", h_);
    out.set("smooth", rho_);
}

// ---------------------------------------------------------------------------
// Cylinder

Cylinder::Cylinder(double radius, double half_length) : r_(radius), half_length_(half_length) {
    if (!(radius > 0) || !(half_length > 0))
        throw Error(ErrorCode::InvalidConfig, "cylinder dimensions must be positive");
    bbox_ = {Vec3(-1.05 * radius, -1.05 * radius, -half_length),
             Vec3(1.05 * radius, 1.05 * radius, half_length)};
    reach_ = 0.5 * radius;
}

double Cylinder::distance(const Vec3& x) const { return std::hypot(x.x(), x.y()) - r_; }

Vec3 Cylinder::gradient(const Vec3& x) const {
    const double r = std::hypot(x.x(), x.y());
    if (r == 0.0) throw Error(ErrorCode::PointOutsideTube, "cylinder axis has no normal");
    return Vec3(x.x() / r, x.y() / r, 0);
}

Mat3 Cylinder::hessian(const Vec3& x) const {
    const double r = std::hypot(x.x(), x.y());
    if (r == 0.0) throw Error(ErrorCode::PointOutsideTube, "cylinder axis has no normal");
    const Vec3 er(x.x() / r, x.y() / r, 0);
    Mat3 H = Mat3::Zero();
    H(0, 0) = H(1, 1) = 1.0;
    return (H - er * er.transpose()) / r;
}

void Cylinder::write_params(ConfigSection& out) const {
    out.set("radius", r_);
    out.set("half_length", half_length_);
}

// ---------------------------------------------------------------------------
// GraphCap

GraphCap::GraphCap(const GraphFunction& u, double extent) : u_(u), extent_(extent) {
    if (!(extent > 0)) throw Error(ErrorCode::InvalidConfig, "graph_cap extent must be positive");
    const double umax = 0.5 * u.H.cwiseAbs().sum() * extent * extent;
    bbox_ = {Vec3(-extent, -extent, -umax - extent), Vec3(extent, extent, umax + extent)};
    const double kmax = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(u.H).eigenvalues().cwiseAbs().maxCoeff();
    reach_ = kmax > 0 ? std::min(0.5 / kmax, 0.5 * extent) : 0.5 * extent;
}

double GraphCap::level(const Vec3& x) const {
    return u_.value(x.head<2>()) - x.z();
}

Vec3 GraphCap::level_gradient(const Vec3& x) const {
    const Eigen::Vector2d g = u_.grad(x.head<2>());
    return Vec3(g[0], g[1], -1.0);
}

Mat3 GraphCap::level_hessian(const Vec3&) const {
    Mat3 H = Mat3::Zero();
    H.topLeftCorner<2, 2>() = u_.H;
    return H;
}

void GraphCap::write_params(ConfigSection& out) const {
    out.set("hessian", std::vector<double>{u_.H(0, 0), u_.H(0, 1), u_.H(1, 1)});
    out.set("extent", extent_);
}

// ---------------------------------------------------------------------------
// GridSdf

namespace {

Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return a;
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return b;
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + d1 / (d1 - d3) * ab;
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return c;
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + d2 / (d2 - d6) * ac;
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
        return b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (c - b);
    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

double solid_angle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 x = a - p, y = b - p, z = c - p;
    const double lx = x.norm(), ly = y.norm(), lz = z.norm();
    const double num = x.dot(y.cross(z));
    const double den = lx * ly * lz + x.dot(y) * lz + y.dot(z) * lx + z.dot(x) * ly;
    return 2.0 * std::atan2(num, den);
}

void catmull_rom(double t, double w[4]) {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2 * t2 - t);
    w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
    w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
}

}  // namespace

GridSdf::GridSdf(const std::vector<Vec3>& verts, const std::vector<std::array<int, 3>>& tris,
                 int resolution, double padding)
    : n_(resolution), padding_(padding) {
    if (verts.empty() || tris.empty())
        throw Error(ErrorCode::InvalidMesh, "custom_mesh_sdf needs a nonempty closed mesh");
    if (resolution < 8) throw Error(ErrorCode::InvalidConfig, "sdf resolution must be >= 8");
    Vec3 lo = verts[0], hi = verts[0];
    for (const auto& v : verts) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const double pad = padding * (hi - lo).maxCoeff();
    lo.array() -= pad;
    hi.array() += pad;
    h_ = (hi - lo).maxCoeff() / (n_ - 1);
    origin_ = lo;
    bbox_ = {lo, lo.array() + h_ * (n_ - 1)};
    values_.resize(static_cast<std::size_t>(n_) * n_ * n_);
    for (int k = 0; k < n_; ++k)
        for (int j = 0; j < n_; ++j)
            for (int i = 0; i < n_; ++i) {
                const Vec3 p = origin_ + h_ * Vec3(i, j, k);
                double best = std::numeric_limits<double>::infinity();
                double wind = 0.0;
                for (const auto& t : tris) {
                    const Vec3 &a = verts[t[0]], &b = verts[t[1]], &c = verts[t[2]];
                    best = std::min(best, (p - closest_on_triangle(p, a, b, c)).squaredNorm());
                    wind += solid_angle(p, a, b, c);
                }
                const bool inside = std::abs(wind) > 2 * kPi;
                values_[(static_cast<std::size_t>(k) * n_ + j) * n_ + i] =
                    inside ? -std::sqrt(best) : std::sqrt(best);
            }
    reach_ = 2 * h_;
}

double GridSdf::sample(int i, int j, int k) const {
    i = std::clamp(i, 0, n_ - 1);
    j = std::clamp(j, 0, n_ - 1);
    k = std::clamp(k, 0, n_ - 1);
    return values_[(static_cast<std::size_t>(k) * n_ + j) * n_ + i];
}

double GridSdf::distance(const Vec3& x) const {
    const Vec3 g = (x - origin_) / h_;
    int base[3];
    double w[3][4];
    for (int a = 0; a < 3; ++a) {
        const double c = std::clamp(g[a], 0.0, n_ - 1.0 - 1e-12);
        base[a] = static_cast<int>(std::floor(c));
        catmull_rom(c - base[a], w[a]);
    }
    double v = 0.0;
    for (int c = 0; c < 4; ++c)
        for (int b = 0; b < 4; ++b)
            for (int a = 0; a < 4; ++a)
                v += w[0][a] * w[1][b] * w[2][c] *
                     sample(base[0] - 1 + a, base[1] - 1 + b, base[2] - 1 + c);
    // Outside the grid continue linearly so that the sign stays meaningful.
    const Vec3 clamped = x.cwiseMax(bbox_.lo).cwiseMin(bbox_.hi);
    return v + (x - clamped).norm();
}

void GridSdf::write_params(ConfigSection& out) const {
    out.set("mesh", source_);
    out.set("resolution", static_cast<long>(n_));
    out.set("padding", padding_);
}

// ---------------------------------------------------------------------------
// ScaledDomain

ScaledDomain::ScaledDomain(DomainPtr base, double lambda) : base_(std::move(base)), lambda_(lambda) {
    if (!(lambda > 0)) throw Error(ErrorCode::InvalidConfig, "scale must be positive");
    bbox_ = {lambda * base_->bbox().lo, lambda * base_->bbox().hi};
    reach_ = lambda * base_->reach();
    tol_ = base_->tolerances();
}

double ScaledDomain::distance(const Vec3& x) const { return lambda_ * base_->distance(x / lambda_); }
Vec3 ScaledDomain::gradient(const Vec3& x) const { return base_->gradient(x / lambda_); }
Mat3 ScaledDomain::hessian(const Vec3& x) const { return base_->hessian(x / lambda_) / lambda_; }
Vec3 ScaledDomain::closest_point(const Vec3& x) const {
    return lambda_ * base_->closest_point(x / lambda_);
}
double ScaledDomain::level(const Vec3& x) const { return lambda_ * base_->level(x / lambda_); }
Vec3 ScaledDomain::level_gradient(const Vec3& x) const { return base_->level_gradient(x / lambda_); }

void ScaledDomain::write_params(ConfigSection& out) const {
    ConfigSection inner;
    base_->write_params(inner);
    out.set("scale", lambda_);
    out.set("base_kind", base_->kind());
    for (const auto& [k, v] : inner.entries()) out.set("base_" + k, v);
}

// ---------------------------------------------------------------------------
// Free functions

double BoundaryFrame::shape_form(const Vec3& v, const Vec3& w) const {
    const Eigen::Vector2d a(v.dot(tangent_basis[0]), v.dot(tangent_basis[1]));
    const Eigen::Vector2d b(w.dot(tangent_basis[0]), w.dot(tangent_basis[1]));
    return a.dot(shape * b);
}

void require_in_tube(const ImplicitDomain& domain, const Vec3& x) {
    const double d = domain.distance(x);
    if (!(std::abs(d) < domain.reach()))
        throw Error(ErrorCode::PointOutsideTube,
                    "|d_S(x)| = " + format_double(std::abs(d)) + " >= reach " +
                        format_double(domain.reach()));
}

BoundaryFrame boundary_frame(const ImplicitDomain& domain, const Vec3& x) {
    require_in_tube(domain, x);
    BoundaryFrame f;
    f.point = project_to_surface(domain, x);
    f.normal = -domain.gradient(f.point).normalized();
    f.tangent_basis = orthonormal_complement(f.normal);
    const Mat3 H = domain.hessian(f.point);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            f.shape(i, j) = f.tangent_basis[i].dot(H * f.tangent_basis[j]);
    f.shape = 0.5 * (f.shape + f.shape.transpose()).eval();
    return f;
}

Vec3 project_to_surface(const ImplicitDomain& domain, const Vec3& x) {
    require_in_tube(domain, x);
    Vec3 y = domain.closest_point(x);
    const auto& tol = domain.tolerances();
    for (int it = 0; it < tol.max_iter; ++it) {
        const double d = domain.distance(y);
        if (std::abs(d) <= tol.proj) return y;
        y -= d * domain.gradient(y);
    }
    if (std::abs(domain.distance(y)) <= tol.proj) return y;
    throw Error(ErrorCode::NoConvergence, "projection to S exceeded max_iter");
}

Vec3 reflect(const ImplicitDomain& domain, const Vec3& x) {
    require_in_tube(domain, x);
    return x - 2 * domain.distance(x) * domain.gradient(x);
}

Mat3 reflection_jacobian(const ImplicitDomain& domain, const Vec3& x) {
    require_in_tube(domain, x);
    const double d = domain.distance(x);
    const Vec3 g = domain.gradient(x);
    return Mat3::Identity() - 2 * g * g.transpose() - 2 * d * domain.hessian(x);
}

Vec3 fermi_point(const ImplicitDomain& domain, const Vec3& x, const Vec3& v) {
    if (v.norm() >= domain.tolerances().fermi_fraction * domain.reach())
        throw Error(ErrorCode::OffsetTooLarge, "Fermi offset exceeds admissible radius");
    if (v.isZero(0.0)) return x;
    return project_to_surface(domain, x + v);
}

std::vector<Vec3> fermi_coordinates(const ImplicitDomain& domain, const std::vector<Vec3>& base_curve,
                                    const std::vector<Vec3>& offsets) {
    if (base_curve.size() != offsets.size())
        throw Error(ErrorCode::InvalidConfig, "one offset per curve point expected");
    std::vector<Vec3> out;
    out.reserve(base_curve.size());
    for (std::size_t i = 0; i < base_curve.size(); ++i)
        out.push_back(fermi_point(domain, base_curve[i], offsets[i]));
    return out;
}

}  // namespace orthovar
