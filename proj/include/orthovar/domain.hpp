#pragma once

#include "orthovar/common.hpp"
#include "orthovar/config.hpp"

#include <memory>
#include <string>
#include <vector>

namespace orthovar {

struct Box {
    Vec3 lo = Vec3::Constant(-1.0);
    Vec3 hi = Vec3::Constant(1.0);
    double diameter() const { return (hi - lo).norm(); }
    bool contains(const Vec3& x) const {
        return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
    }
};

struct DomainTolerances {
    double proj = 1e-12;
    int max_iter = 50;
    double fermi_fraction = 0.5;  // admissible |v| as a fraction of reach
};

/// Domain with signed distance d (negative inside). The interior normal is
/// -grad d and the boundary second fundamental form is +D grad d on T S, so
/// that convex domains have positive shape operator.
class ImplicitDomain {
public:
    virtual ~ImplicitDomain() = default;

    virtual std::string kind() const = 0;
    virtual double distance(const Vec3& x) const = 0;
    virtual Vec3 gradient(const Vec3& x) const;
    virtual Mat3 hessian(const Vec3& x) const;
    virtual Vec3 closest_point(const Vec3& x) const;

    /// Any function with the same zero set and sign as d and nonvanishing
    /// gradient near S. Cheaper than `distance` for implicit domains.
    virtual double level(const Vec3& x) const { return distance(x); }
    virtual Vec3 level_gradient(const Vec3& x) const { return gradient(x); }

    /// Serializes kind-specific parameters (not reach/tolerances).
    virtual void write_params(ConfigSection& out) const = 0;

    const Box& bbox() const { return bbox_; }
    double reach() const { return reach_; }
    const DomainTolerances& tolerances() const { return tol_; }
    double fd_step() const { return 1e-5 * bbox_.diameter(); }

    void set_reach(double r) { reach_ = r; }
    void set_tolerances(const DomainTolerances& t) { tol_ = t; }
    void set_bbox(const Box& b) { bbox_ = b; }

    /// Interior unit normal at a point of S (or near it): -grad level / |grad level|.
    Vec3 surface_normal(const Vec3& y) const {
        return -level_gradient(y).normalized();
    }

protected:
    Box bbox_;
    double reach_ = 0.1;
    DomainTolerances tol_;
};

using DomainPtr = std::shared_ptr<const ImplicitDomain>;

/// Domain given by a defining function F (negative inside). Distance and its
/// derivatives come from the Newton-Lagrange projection onto {F = 0}.
class LevelSetDomain : public ImplicitDomain {
public:
    double level(const Vec3& x) const override = 0;
    Vec3 level_gradient(const Vec3& x) const override;
    virtual Mat3 level_hessian(const Vec3& x) const;

    double distance(const Vec3& x) const override;
    Vec3 gradient(const Vec3& x) const override;
    Mat3 hessian(const Vec3& x) const override;
    Vec3 closest_point(const Vec3& x) const override;

    struct Projection {
        Vec3 y;
        double d;
        Vec3 n;  // outward unit normal grad F(y)/|grad F(y)| = grad d(x)
    };
    Projection project(const Vec3& x) const;
};

class Ball : public ImplicitDomain {
public:
    Ball(const Vec3& center = Vec3::Zero(), double radius = 1.0);
    std::string kind() const override { return "ball"; }
    double distance(const Vec3& x) const override;
    Vec3 gradient(const Vec3& x) const override;
    Mat3 hessian(const Vec3& x) const override;
    Vec3 closest_point(const Vec3& x) const override;
    void write_params(ConfigSection& out) const override;
    const Vec3& center() const { return c_; }
    double radius() const { return r_; }

private:
    Vec3 c_;
    double r_;
};

class Ellipsoid : public LevelSetDomain {
public:
    Ellipsoid(const Vec3& center, const Vec3& axes);
    std::string kind() const override { return "ellipsoid"; }
    double level(const Vec3& x) const override;
    Vec3 level_gradient(const Vec3& x) const override;
    Mat3 level_hessian(const Vec3& x) const override;
    void write_params(ConfigSection& out) const override;
    const Vec3& axes() const { return a_; }
    const Vec3& center() const { return c_; }

private:
    Vec3 c_, a_;
};

/// {|x_3 - c| < h}; the bbox truncates it laterally.
class Slab : public ImplicitDomain {
public:
    Slab(double center = 0.0, double half_width = 1.0, double lateral = 2.0);
    std::string kind() const override { return "slab"; }
    double distance(const Vec3& x) const override;
    Vec3 gradient(const Vec3& x) const override;
    Mat3 hessian(const Vec3& x) const override;
    void write_params(ConfigSection& out) const override;

private:
    double c_, h_, lateral_;
};

/// Solid of revolution of a rounded rectangle: r_in < r < r_out, |z| < h,
/// corners rounded with radius rho.
class AnnulusPrism : public ImplicitDomain {
public:
    AnnulusPrism(double r_in = 1.0, double r_out = 1.4142135623730951, double half_height = 1.0,
                 double rho = 0.05);
    std::string kind() const override { return "annulus_prism"; }
    double distance(const Vec3& x) const override;
    Vec3 gradient(const Vec3& x) const override;
    Mat3 hessian(const Vec3& x) const override;
    void write_params(ConfigSection& out) const override;
    double rho() const { return rho_; }

private:
    // Rounded-rectangle distance in the (r, z) half plane with derivatives.
    double profile(double r, double z, Eigen::Vector2d* grad, Eigen::Matrix2d* hess) const;
    double rin_, rout_, h_, rho_;
};

/// Infinite solid cylinder x^2 + y^2 < R^2 around the z axis.
class Cylinder : public ImplicitDomain {
public:
    explicit Cylinder(double radius = 1.0, double half_length = 2.0);
    std::string kind() const override { return "cylinder"; }
    double distance(const Vec3& x) const override;
    Vec3 gradient(const Vec3& x) const override;
    Mat3 hessian(const Vec3& x) const override;
    void write_params(ConfigSection& out) const override;

private:
    double r_, half_length_;
};

/// Quadratic boundary graph u(z) = z^T H z / 2 over R^2, Du(0) = 0.
struct GraphFunction {
    Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
    double value(const Eigen::Vector2d& z) const { return 0.5 * z.dot(H * z); }
    Eigen::Vector2d grad(const Eigen::Vector2d& z) const { return H * z; }
    double trace() const { return H.trace(); }
    static GraphFunction isotropic(double trh) {
        GraphFunction g;
        g.H = Eigen::Matrix2d::Identity() * (0.5 * trh);
        return g;
    }
};

/// Epigraph {x_3 > u(x_1, x_2)}: interior normal (-Du, 1)/sqrt(1 + |Du|^2).
class GraphCap : public LevelSetDomain {
public:
    explicit GraphCap(const GraphFunction& u, double extent = 1.5);
    std::string kind() const override { return "graph_cap"; }
    double level(const Vec3& x) const override;
    Vec3 level_gradient(const Vec3& x) const override;
    Mat3 level_hessian(const Vec3& x) const override;
    void write_params(ConfigSection& out) const override;
    const GraphFunction& graph() const { return u_; }

private:
    GraphFunction u_;
    double extent_;
};

/// Signed distance sampled on a regular grid from a closed triangle mesh,
/// tricubic Catmull-Rom interpolation. Sign from the winding number.
class GridSdf : public ImplicitDomain {
public:
    GridSdf(const std::vector<Vec3>& verts, const std::vector<std::array<int, 3>>& tris,
            int resolution, double padding);
    std::string kind() const override { return "custom_mesh_sdf"; }
    double distance(const Vec3& x) const override;
    void write_params(ConfigSection& out) const override;
    void set_source(const std::string& path) { source_ = path; }

private:
    double sample(int i, int j, int k) const;
    int n_;
    double padding_;
    Vec3 origin_;
    double h_;
    std::vector<double> values_;
    std::string source_;
};

/// lambda * base: d(x) = lambda d_base(x / lambda).
class ScaledDomain : public ImplicitDomain {
public:
    ScaledDomain(DomainPtr base, double lambda);
    std::string kind() const override { return "scaled"; }
    double distance(const Vec3& x) const override;
    Vec3 gradient(const Vec3& x) const override;
    Mat3 hessian(const Vec3& x) const override;
    Vec3 closest_point(const Vec3& x) const override;
    double level(const Vec3& x) const override;
    Vec3 level_gradient(const Vec3& x) const override;
    void write_params(ConfigSection& out) const override;
    const ImplicitDomain& base() const { return *base_; }
    double lambda() const { return lambda_; }

private:
    DomainPtr base_;
    double lambda_;
};

struct BoundaryFrame {
    Vec3 point;
    Vec3 normal;                       // interior unit normal
    std::array<Vec3, 2> tangent_basis;
    Eigen::Matrix2d shape;             // h^S in tangent_basis
    double shape_form(const Vec3& v, const Vec3& w) const;
};

BoundaryFrame boundary_frame(const ImplicitDomain& domain, const Vec3& x);
Vec3 project_to_surface(const ImplicitDomain& domain, const Vec3& x);
Vec3 reflect(const ImplicitDomain& domain, const Vec3& x);
Mat3 reflection_jacobian(const ImplicitDomain& domain, const Vec3& x);
Vec3 fermi_point(const ImplicitDomain& domain, const Vec3& x, const Vec3& v);
std::vector<Vec3> fermi_coordinates(const ImplicitDomain& domain, const std::vector<Vec3>& base_curve,
                                    const std::vector<Vec3>& offsets);

/// Throws PointOutsideTube unless |d(x)| < reach.
void require_in_tube(const ImplicitDomain& domain, const Vec3& x);

}  // namespace orthovar
