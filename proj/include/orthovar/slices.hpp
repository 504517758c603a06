#pragma once

#include "orthovar/common.hpp"
#include "orthovar/field.hpp"
#include "orthovar/mesh.hpp"

#include <vector>

namespace orthovar {

class ImplicitDomain;

/// Affine m-plane z + im P with P symmetric idempotent of rank m and Pz = 0.
struct AffinePlane {
    Vec3 z = Vec3::Zero();
    Mat3 P = Mat3::Identity();
    int m = 2;

    static AffinePlane from_normal(const Vec3& n, double offset);        // {<n / |n|, x> = offset}
    static AffinePlane from_line(const Vec3& direction, const Vec3& point);
    static AffinePlane from_basis(const MatX& U, const Vec3& point);   // U: 3 x m

    /// Symmetrize, truncate to rank m, re-project z onto ker P.
    void normalize();
    MatX basis() const;       // 3 x m orthonormal
    MatX complement() const;  // 3 x (3 - m) orthonormal
    Mat3 perp() const { return Mat3::Identity() - P; }
    /// |P - Q|_F + |z - w|, symmetric in its arguments.
    double distance(const AffinePlane& other) const;
};

struct SliceResult {
    AffinePlane plane;
    std::vector<SurfaceMesh> components;           // planar meshes (m = 2)
    std::vector<std::vector<Vec3>> boundary_curves;  // loops (m = 2) or endpoint pairs (m = 1)
    std::vector<int> curve_component;
    double ortho_residual = 0;   // max over boundary points of |P^perp nu^S|
    int euler_char = 0;
    bool is_disk = false;
    double area = 0;             // length for m = 1
    double total_turning = 0;    // signed turning of the boundary loops, in the plane
    double min_inplane_gradient = 0;  // min over boundary points of |P grad d| / |grad d|
    bool resolved = true;        // every component is at least two grid cells thick
    bool truncated = false;      // region reaches the edge of the sampling window
};

struct SliceOptions {
    int grid_resolution = 256;
    int seed_resolution = 48;
    int directions = 32;
    int offsets = 8;
    double tol_ortho = 1e-6;
    int max_iter = 40;
    int max_halvings = 20;
    double step_tol = 1e-10;
    double dedup_tol = 1e-3;
    int max_components = 4;
};

/// Components of int(closure(Omega) cap (z + P)) by contouring the level
/// function on a grid. Throws EmptyIntersection.
SliceResult intersect(const ImplicitDomain& domain, const AffinePlane& plane, int resolution = 256);

/// Seeds sweep the affine Grassmannian over planes meeting the set of points
/// at depth >= reach; each seed is refined by damped Gauss-Newton on the
/// boundary residual P^perp nu^S. One result per orthogonal component.
std::vector<SliceResult> find_orthogonal_slices(const ImplicitDomain& domain, int m,
                                                const SliceOptions& opt = {});

/// Union-find clustering at `tol` on plane distance plus boundary-centroid
/// distance; returns the representative (first) index of each cluster.
std::vector<int> deduplicate(const std::vector<SliceResult>& slices, double tol);

/// Offsets v = eta(z, P, u)(x) in P0^perp with g_u(E(x, v)) in plane, per base point.
std::vector<Vec3> solve_offsets(const ImplicitDomain& domain, const std::vector<Vec3>& base,
                                const AffinePlane& plane0, const AffinePlane& plane,
                                const NormalPerturbation& pert, const std::vector<Vec3>* warm = nullptr);

/// G(z, P, u)(x) = P0^perp P^perp nu_u(E(x, v)), v = eta(z, P, u)(x).
std::vector<Vec3> g_map(const ImplicitDomain& domain, const std::vector<Vec3>& base,
                        const AffinePlane& plane0, const AffinePlane& plane,
                        const NormalPerturbation& pert);

struct ContinueOptions {
    double tol_ortho = 1e-8;
    double max_perturbation = 0.1;  // admissible |u|_C2
    int max_points = 128;
    int max_iter = 30;
};

struct ContinuationResult {
    SliceResult slice;           // plane, continued boundary curve and its residual
    std::vector<Vec3> offsets;   // v per base point at the continued plane
    bool orthogonal = false;     // G vanished to tol_ortho
};

/// Follows an orthogonal slice of S to g_u(S). Throws PerturbationTooLarge
/// or ContinuationDiverged.
ContinuationResult continue_slice(const ImplicitDomain& domain, const SliceResult& slice,
                                  const NormalPerturbation& pert, const ContinueOptions& opt = {});

}  // namespace orthovar
