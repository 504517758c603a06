#pragma once

#include "orthovar/common.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace orthovar {

class ImplicitDomain;

using Tri = std::array<int, 3>;

/// Oriented triangle mesh in R^n with boundary loops. Topology is fixed at
/// construction; positions can be updated in place.
class SurfaceMesh {
public:
    SurfaceMesh() = default;
    SurfaceMesh(MatX points, std::vector<Tri> triangles);
    SurfaceMesh(const std::vector<Vec3>& points, std::vector<Tri> triangles);

    int dim() const { return static_cast<int>(X_.rows()); }
    int num_vertices() const { return static_cast<int>(X_.cols()); }
    int num_faces() const { return static_cast<int>(tris_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    int euler_characteristic() const { return num_vertices() - num_edges() + num_faces(); }

    const MatX& points() const { return X_; }
    VecX point(int i) const { return X_.col(i); }
    Vec3 p3(int i) const { return X_.col(i).head<3>(); }
    void set_points(const MatX& X);
    void set_point(int i, const VecX& x) { X_.col(i) = x; }

    const std::vector<Tri>& triangles() const { return tris_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<std::vector<int>>& boundary_loops() const { return loops_; }
    bool is_boundary(int v) const { return boundary_[v]; }
    const std::vector<int>& vertex_faces(int v) const { return vfaces_[v]; }
    const std::vector<int>& neighbors(int v) const { return nbrs_[v]; }
    /// Vertices within k edge hops of v, excluding v, sorted.
    std::vector<int> ring(int v, int k) const;
    /// Number of triangles containing edge (a, b).
    int edge_valence(int a, int b) const;

    double face_area(int f) const;
    VecX face_normal3(int f) const;  // unit normal, n = 3 only
    double area() const;
    /// Lumped (barycentric) vertex areas.
    VecX vertex_areas() const;
    double boundary_length() const;
    double min_triangle_quality() const;

private:
    void build();
    MatX X_;
    std::vector<Tri> tris_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> loops_;
    std::vector<bool> boundary_;
    std::vector<std::vector<int>> vfaces_;
    std::vector<std::vector<int>> nbrs_;
};

using Projector = std::function<VecX(const VecX&)>;

/// Midpoint subdivision (V' = V + E, F' = 4F). New interior points go through
/// `snap` when given; new boundary points are projected to S when a domain is
/// given.
SurfaceMesh refine(const SurfaceMesh& mesh, const ImplicitDomain* domain = nullptr,
                   const Projector& snap = {});

SurfaceMesh read_off(const std::string& path);
void write_off(const SurfaceMesh& mesh, const std::string& path);
SurfaceMesh parse_off(const std::string& text);
std::string format_off(const SurfaceMesh& mesh);

SurfaceMesh rigid_transform(const SurfaceMesh& mesh, const Mat3& R, const Vec3& t);
SurfaceMesh scaled(const SurfaceMesh& mesh, double lambda);

// Fixtures. All are deterministic functions of their arguments.
Projector sphere_projector(const Vec3& center, double radius);
SurfaceMesh icosphere(int level, double radius = 1.0, const Vec3& center = Vec3::Zero());
/// Upper unit hemisphere z >= 0 from a subdivided octahedron; the equator
/// vertices are exact.
SurfaceMesh hemisphere(int level, double radius = 1.0);
/// Flat disk of the given radius in the plane z = height, 2^level rings.
SurfaceMesh ring_disk(int level, double radius = 1.0, double height = 0.0);
/// Great-circle disk of the unit ball at height h: radius sqrt(1 - h^2).
SurfaceMesh ball_section(int level, double height);
/// Planar annulus r_in < r < r_out at z = 0.
SurfaceMesh annulus(int level, double r_in = 1.0, double r_out = 1.4142135623730951);
/// Strip of the cylinder x^2 + y^2 = radius^2 over an angular span and height.
SurfaceMesh cylinder_strip(int level, double radius = 1.0, double span = 1.0, double height = 1.0);
/// Spherical cap of radius r meeting the unit sphere orthogonally, centered
/// on the positive z axis at distance sqrt(1 + r^2).
SurfaceMesh orthogonal_cap(int level, double r);
/// Generic polar mesh: map(rho in [0,1], phi) with 2^level rings.
SurfaceMesh polar_mesh(int level, const std::function<Vec3(double, double)>& map);

}  // namespace orthovar
