#include "orthovar/slices.hpp"

#include "orthovar/domain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>

namespace orthovar {

namespace {

MatX gram_schmidt(MatX Q) {
    for (int j = 0; j < Q.cols(); ++j) {
        for (int i = 0; i < j; ++i) Q.col(j) -= Q.col(i).dot(Q.col(j)) * Q.col(i);
        Q.col(j).normalize();
    }
    return Q;
}

MatX complement_of(const MatX& U) {
    if (U.cols() == 2) {
        MatX W(3, 1);
        W.col(0) = Vec3(U.col(0)).cross(Vec3(U.col(1))).normalized();
        return W;
    }
    const auto c = orthonormal_complement(Vec3(U.col(0)).normalized());
    MatX W(3, 2);
    W.col(0) = c[0];
    W.col(1) = c[1];
    return W;
}

// Plane carried by explicit orthonormal bases so that parameter updates are smooth.
struct PlaneState {
    MatX U, W;
    Vec3 z;
    int m() const { return static_cast<int>(U.cols()); }
    int params() const { return (3 - m()) * (m() + 1); }
    AffinePlane plane() const {
        AffinePlane a;
        a.P = U * U.transpose();
        a.z = z;
        a.m = m();
        return a;
    }
};

PlaneState state_of(const AffinePlane& a) {
    PlaneState s;
    s.U = a.basis();
    s.W = complement_of(s.U);
    s.z = s.W * (s.W.transpose() * a.z);
    return s;
}

// Rotation by X in Hom(P, P^perp) and offset y in P^perp.
PlaneState apply(const PlaneState& s, const VecX& theta) {
    const int m = s.m(), p = 3 - m;
    const MatX X = Eigen::Map<const MatX>(theta.data(), p, m);
    const VecX y = theta.tail(p);
    MatX M(3, 3);
    M << s.U + s.W * X, s.W - s.U * X.transpose();
    const MatX Q = gram_schmidt(M);
    PlaneState out;
    out.U = Q.leftCols(m);
    out.W = Q.rightCols(p);
    const Vec3 z = s.z + s.W * y;
    out.z = out.W * (out.W.transpose() * z);
    return out;
}

// Moves p onto the plane, then along the in-plane gradient onto {level = 0}.
bool track(const ImplicitDomain& d, const PlaneState& s, Vec3& p) {
    const double diam = d.bbox().diameter();
    p -= s.W * (s.W.transpose() * (p - s.z));
    for (int it = 0; it < 40; ++it) {
        const double F = d.level(p);
        if (std::abs(F) <= 1e-14) return true;
        const Vec3 g = d.level_gradient(p);
        const Vec3 gp = s.U * (s.U.transpose() * g);
        if (gp.norm() < 1e-8 * g.norm()) return false;
        const Vec3 step = F / gp.squaredNorm() * gp;
        if (step.norm() > 0.25 * diam) return false;
        p -= step;
        if (step.norm() < 1e-16 * diam) break;
    }
    return std::abs(d.level(p)) < 1e-11;
}

using ResidualFn = std::function<std::optional<VecX>(const PlaneState&, std::vector<Vec3>*)>;

struct GNOutcome {
    PlaneState s;
    VecX r;
    bool converged = false;
    int iterations = 0;
};

// Damped Gauss-Newton on the plane parameters. `aux` is read by the residual
// (tracked points, warm starts) and replaced by its output on acceptance.
GNOutcome gauss_newton(PlaneState s, const ResidualFn& f, std::vector<Vec3>& aux, double tol, int max_iter,
                       int max_halvings, double step_tol, double h = 1e-7) {
    GNOutcome out;
    std::vector<Vec3> moved;
    auto r0 = f(s, &moved);
    out.s = s;
    if (!r0) return out;
    aux = moved;
    VecX r = *r0;
    const int k = s.params();
    // Nested solves make the residual noisy; large steps switch to central differences.
    const bool central = h > 1e-6;
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        if (r.size() == 0 || r.norm() == 0) {
            out.converged = true;
            break;
        }
        MatX J(r.size(), k);
        for (int j = 0; j < k; ++j) {
            VecX th = VecX::Zero(k);
            th[j] = h;
            auto rj = f(apply(s, th), nullptr);
            if (rj && central) {
                th[j] = -h;
                auto rm = f(apply(s, th), nullptr);
                if (rm) {
                    J.col(j) = (*rj - *rm) / (2 * h);
                    continue;
                }
                th[j] = h;
            }
            if (rj) {
                J.col(j) = (*rj - r) / h;
                continue;
            }
            th[j] = -h;
            rj = f(apply(s, th), nullptr);
            if (!rj) return out.s = s, out.r = r, out;
            J.col(j) = (r - *rj) / h;
        }
        const VecX delta = Eigen::CompleteOrthogonalDecomposition<MatX>(J).solve(-r);
        if (r.cwiseAbs().maxCoeff() < tol && delta.norm() < step_tol) {
            out.converged = true;
            break;
        }
        double t = 1;
        bool accepted = false;
        double ratio = 1;
        for (int hv = 0; hv <= max_halvings; ++hv, t *= 0.5) {
            const PlaneState cand = apply(s, t * delta);
            auto rc = f(cand, &moved);
            if (rc && rc->squaredNorm() < (1 - 1e-4 * t) * r.squaredNorm()) {
                ratio = rc->squaredNorm() / r.squaredNorm();
                s = cand;
                r = *rc;
                aux = moved;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        if (ratio > 1 - 1e-10) break;
    }
    if (r.size() && r.cwiseAbs().maxCoeff() < tol) out.converged = true;
    out.s = s;
    out.r = r;
    return out;
}

int find_root(std::vector<int>& parent, int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
}

void unite(std::vector<int>& parent, int a, int b) {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
}

std::vector<int> cluster(int n, const std::function<double(int, int)>& dist, double tol) {
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (dist(i, j) < tol) unite(parent, i, j);
    std::vector<int> reps;
    for (int i = 0; i < n; ++i)
        if (find_root(parent, i) == i) reps.push_back(i);
    return reps;
}

// Zero of the level function on segment [a, b] with a change of sign (Illinois).
Vec3 segment_root(const ImplicitDomain& d, const Vec3& a, const Vec3& b, double fa, double fb) {
    double ta = 0, tb = 1;
    int side = 0;
    Vec3 x = a;
    for (int it = 0; it < 100; ++it) {
        const double t = (ta * fb - tb * fa) / (fb - fa);
        x = a + t * (b - a);
        const double ft = d.level(x);
        if (ft == 0 || tb - ta < 1e-16) break;
        if ((ft < 0) == (fb < 0)) {
            tb = t;
            fb = ft;
            if (side == -1) fa *= 0.5;
            side = -1;
        } else {
            ta = t;
            fa = ft;
            if (side == 1) fb *= 0.5;
            side = 1;
        }
        if (std::abs(ft) < 1e-15) break;
    }
    return x;
}

// In-plane window covering the bounding box.
void window(const ImplicitDomain& d, const PlaneState& s, VecX& lo, VecX& hi) {
    const int m = s.m();
    lo = VecX::Constant(m, 1e300);
    hi = VecX::Constant(m, -1e300);
    const Box& b = d.bbox();
    for (int c = 0; c < 8; ++c) {
        const Vec3 x((c & 1) ? b.hi.x() : b.lo.x(), (c & 2) ? b.hi.y() : b.lo.y(), (c & 4) ? b.hi.z() : b.lo.z());
        const VecX q = s.U.transpose() * (x - s.z);
        lo = lo.cwiseMin(q);
        hi = hi.cwiseMax(q);
    }
    const VecX pad = 0.02 * (hi - lo);
    lo -= pad;
    hi += pad;
    // Break exact alignments between the grid and symmetric domains.
    lo -= 0.0031415926 * (hi - lo) / 64.0;
}

void finish_component(const ImplicitDomain& d, const PlaneState& s, SliceResult& r) {
    r.ortho_residual = 0;
    r.min_inplane_gradient = 1;
    int count = 0;
    for (const auto& curve : r.boundary_curves)
        for (std::size_t i = 0; i < curve.size(); ++i) {
            const Vec3 g = d.level_gradient(curve[i]);
            const Vec3 nu = -g.normalized();
            r.ortho_residual = std::max(r.ortho_residual, (s.W.transpose() * nu).norm());
            r.min_inplane_gradient = std::min(r.min_inplane_gradient, (s.U.transpose() * g).norm() / g.norm());
            ++count;
        }
    if (count == 0) r.min_inplane_gradient = 0;
}

double loop_turning(const PlaneState& s, const std::vector<Vec3>& loop) {
    const std::size_t L = loop.size();
    double total = 0;
    for (std::size_t i = 0; i < L; ++i) {
        const Eigen::Vector2d a = s.U.transpose() * (loop[i] - s.z);
        const Eigen::Vector2d b = s.U.transpose() * (loop[(i + 1) % L] - s.z);
        const Eigen::Vector2d c = s.U.transpose() * (loop[(i + 2) % L] - s.z);
        const Eigen::Vector2d e1 = b - a, e2 = c - b;
        total += std::atan2(e1.x() * e2.y() - e1.y() * e2.x(), e1.dot(e2));
    }
    return total;
}

std::vector<SliceResult> plane_components(const ImplicitDomain& d, const PlaneState& s, int N) {
    VecX lo, hi;
    window(d, s, lo, hi);
    const double hx = (hi[0] - lo[0]) / N, hy = (hi[1] - lo[1]) / N;
    const int C = N + 1;
    auto pos = [&](int i, int j) -> Vec3 { return s.z + s.U.col(0) * (lo[0] + i * hx) + s.U.col(1) * (lo[1] + j * hy); };
    std::vector<double> f(static_cast<std::size_t>(C) * C);
    bool any = false;
    for (int j = 0; j < C; ++j)
        for (int i = 0; i < C; ++i) {
            f[i + j * C] = d.level(pos(i, j));
            any = any || f[i + j * C] < 0;
        }
    if (!any) throw Error(ErrorCode::EmptyIntersection, "plane misses the domain");
    auto in = [&](int i, int j) { return f[i + j * C] < 0; };

    std::vector<Vec3> X;
    std::vector<int> cid(static_cast<std::size_t>(C) * C, -1), hid(static_cast<std::size_t>(N) * C, -1),
        vid(static_cast<std::size_t>(C) * N, -1);
    auto corner = [&](int i, int j) {
        int& id = cid[i + j * C];
        if (id < 0) {
            id = static_cast<int>(X.size());
            X.push_back(pos(i, j));
        }
        return id;
    };
    auto crossing = [&](int& id, int i0, int j0, int i1, int j1) {
        if (id < 0) {
            id = static_cast<int>(X.size());
            X.push_back(segment_root(d, pos(i0, j0), pos(i1, j1), f[i0 + j0 * C], f[i1 + j1 * C]));
        }
        return id;
    };
    auto hedge = [&](int i, int j) { return crossing(hid[i + j * N], i, j, i + 1, j); };
    auto vedge = [&](int i, int j) { return crossing(vid[i + j * C], i, j, i, j + 1); };

    std::vector<Tri> tris;
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const int ci[4] = {i, i + 1, i + 1, i}, cj[4] = {j, j, j + 1, j + 1};
            bool ins[4];
            int mask = 0;
            for (int k = 0; k < 4; ++k) {
                ins[k] = in(ci[k], cj[k]);
                mask |= ins[k] << k;
            }
            if (mask == 0) continue;
            auto corner_k = [&](int k) { return corner(ci[k], cj[k]); };
            auto edge_k = [&](int k) {
                switch (k) {
                    case 0: return hedge(i, j);
                    case 1: return vedge(i + 1, j);
                    case 2: return hedge(i, j + 1);
                    default: return vedge(i, j);
                }
            };
            std::vector<int> poly;
            const bool saddle = mask == 0b0101 || mask == 0b1010;
            if (saddle && d.level(pos(i, j) + 0.5 * hx * s.U.col(0) + 0.5 * hy * s.U.col(1)) >= 0) {
                for (int k = 0; k < 4; ++k) {
                    if (!ins[k]) continue;
                    const int a = corner_k(k), b = edge_k(k), c = edge_k((k + 3) % 4);
                    tris.push_back({a, b, c});
                }
                continue;
            }
            for (int k = 0; k < 4; ++k) {
                if (ins[k]) poly.push_back(corner_k(k));
                if (ins[k] != ins[(k + 1) % 4]) poly.push_back(edge_k(k));
            }
            for (std::size_t q = 1; q + 1 < poly.size(); ++q) tris.push_back({poly[0], poly[q], poly[q + 1]});
        }

    const int V = static_cast<int>(X.size());
    std::vector<int> parent(V);
    std::iota(parent.begin(), parent.end(), 0);
    for (const Tri& t : tris) {
        unite(parent, t[0], t[1]);
        unite(parent, t[1], t[2]);
    }
    std::vector<int> comp_index(V, -1);
    std::vector<std::vector<int>> comp_tris;
    for (std::size_t t = 0; t < tris.size(); ++t) {
        const int r = find_root(parent, tris[t][0]);
        if (comp_index[r] < 0) {
            comp_index[r] = static_cast<int>(comp_tris.size());
            comp_tris.emplace_back();
        }
        comp_tris[comp_index[r]].push_back(static_cast<int>(t));
    }
    std::vector<char> resolved(comp_tris.size(), 0), truncated(comp_tris.size(), 0);
    for (int j = 0; j < C; ++j)
        for (int i = 0; i < C; ++i) {
            if (!in(i, j)) continue;
            const int c = comp_index[find_root(parent, cid[i + j * C])];
            if (i == 0 || j == 0 || i == N || j == N) {
                truncated[c] = 1;
                continue;
            }
            bool full = true;
            for (int b = -1; b <= 1 && full; ++b)
                for (int a = -1; a <= 1 && full; ++a) full = in(i + a, j + b);
            if (full) resolved[c] = 1;
        }

    std::vector<SliceResult> out;
    for (std::size_t c = 0; c < comp_tris.size(); ++c) {
        std::vector<int> remap(V, -1);
        std::vector<Vec3> pts;
        std::vector<Tri> ct;
        for (int t : comp_tris[c]) {
            Tri tr;
            for (int a = 0; a < 3; ++a) {
                int& r = remap[tris[t][a]];
                if (r < 0) {
                    r = static_cast<int>(pts.size());
                    pts.push_back(X[tris[t][a]]);
                }
                tr[a] = r;
            }
            ct.push_back(tr);
        }
        SurfaceMesh mesh(pts, ct);
        SliceResult r;
        r.plane = s.plane();
        for (const auto& loop : mesh.boundary_loops()) {
            std::vector<Vec3> curve;
            for (int v : loop) curve.push_back(mesh.p3(v));
            r.total_turning += loop_turning(s, curve);
            r.boundary_curves.push_back(std::move(curve));
            r.curve_component.push_back(0);
        }
        r.euler_char = mesh.euler_characteristic();
        r.is_disk = mesh.boundary_loops().size() == 1 && r.euler_char == 1;
        r.area = mesh.area();
        r.resolved = resolved[c];
        r.truncated = truncated[c];
        r.components.push_back(std::move(mesh));
        finish_component(d, s, r);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<SliceResult> line_components(const ImplicitDomain& d, const PlaneState& s, int N) {
    VecX lo, hi;
    window(d, s, lo, hi);
    const double h = (hi[0] - lo[0]) / N;
    const Vec3 u = s.U.col(0);
    auto pos = [&](int i) -> Vec3 { return s.z + u * (lo[0] + i * h); };
    std::vector<double> f(N + 1);
    for (int i = 0; i <= N; ++i) f[i] = d.level(pos(i));
    std::vector<SliceResult> out;
    int i = 0;
    while (i <= N) {
        if (f[i] >= 0) {
            ++i;
            continue;
        }
        const int start = i;
        while (i <= N && f[i] < 0) ++i;
        SliceResult r;
        r.plane = s.plane();
        r.truncated = start == 0 || i == N + 1;
        const Vec3 a = start == 0 ? pos(0) : segment_root(d, pos(start - 1), pos(start), f[start - 1], f[start]);
        const Vec3 b = i == N + 1 ? pos(N) : segment_root(d, pos(i - 1), pos(i), f[i - 1], f[i]);
        r.boundary_curves.push_back({a, b});
        r.curve_component.push_back(0);
        r.euler_char = 1;
        r.is_disk = true;
        r.area = (b - a).norm();
        r.resolved = i - start >= 2;
        finish_component(d, s, r);
        out.push_back(std::move(r));
    }
    if (out.empty()) throw Error(ErrorCode::EmptyIntersection, "line misses the domain");
    return out;
}

std::vector<SliceResult> components(const ImplicitDomain& d, const PlaneState& s, int N) {
    return s.m() == 2 ? plane_components(d, s, N) : line_components(d, s, N);
}

Vec3 centroid(const std::vector<std::vector<Vec3>>& curves) {
    Vec3 c = Vec3::Zero();
    int n = 0;
    for (const auto& cv : curves)
        for (const Vec3& p : cv) {
            c += p;
            ++n;
        }
    return n ? Vec3(c / n) : c;
}

// Area centroid of the meshes (m = 2) or midpoint of the chords (m = 1).
Vec3 region_centroid(const SliceResult& s) {
    if (s.components.empty()) return centroid(s.boundary_curves);
    Vec3 c = Vec3::Zero();
    double total = 0;
    for (const auto& mesh : s.components)
        for (int f = 0; f < mesh.num_faces(); ++f) {
            const Tri& t = mesh.triangles()[f];
            const double a = mesh.face_area(f);
            c += a / 3.0 * (mesh.p3(t[0]) + mesh.p3(t[1]) + mesh.p3(t[2]));
            total += a;
        }
    return total > 0 ? Vec3(c / total) : c;
}

std::vector<Vec3> flatten(const std::vector<std::vector<Vec3>>& curves, std::size_t max_points) {
    std::vector<Vec3> all;
    for (const auto& c : curves) all.insert(all.end(), c.begin(), c.end());
    if (all.size() <= max_points) return all;
    std::vector<Vec3> out;
    const double stride = static_cast<double>(all.size()) / static_cast<double>(max_points);
    for (std::size_t k = 0; k < max_points; ++k) out.push_back(all[static_cast<std::size_t>(k * stride)]);
    return out;
}

double fibonacci_z(int k, int n) { return 1.0 - (k + 0.5) / n; }

double halton(int index, int base) {
    double f = 1, r = 0;
    while (index > 0) {
        f /= base;
        r += f * (index % base);
        index /= base;
    }
    return r;
}

std::vector<PlaneState> seeds(const ImplicitDomain& d, int m, const SliceOptions& opt) {
    const Box& b = d.bbox();
    const int G = 20;
    std::vector<Vec3> deep, inside;
    for (int k = 0; k < G; ++k)
        for (int j = 0; j < G; ++j)
            for (int i = 0; i < G; ++i) {
                const Vec3 t((i + 0.5) / G, (j + 0.5) / G, (k + 0.5) / G);
                const Vec3 x = b.lo + t.cwiseProduct(b.hi - b.lo);
                if (d.level(x) >= 0) continue;
                inside.push_back(x);
                // Projection can fail near the medial axis, which is deep anyway.
                double dist = -1e300;
                try {
                    dist = d.distance(x);
                } catch (const Error&) {
                }
                if (dist <= -d.reach()) deep.push_back(x);
            }
    const auto& pts = deep.size() >= 4 ? deep : inside;
    std::vector<PlaneState> out;
    if (pts.empty()) return out;
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    const double cell = b.diameter() / G;
    for (int k = 0; k < opt.directions; ++k) {
        const double zc = fibonacci_z(k, opt.directions);
        const double rr = std::sqrt(std::max(0.0, 1 - zc * zc));
        const Vec3 n(rr * std::cos(k * golden), rr * std::sin(k * golden), zc);
        if (m == 2) {
            double lo = 1e300, hi = -1e300;
            for (const Vec3& x : pts) {
                lo = std::min(lo, n.dot(x));
                hi = std::max(hi, n.dot(x));
            }
            for (int o = 0; o < opt.offsets; ++o) {
                const double c = lo + (o + 0.5) / opt.offsets * (hi - lo);
                out.push_back(state_of(AffinePlane::from_normal(n, c)));
            }
        } else {
            const auto w = orthonormal_complement(n);
            Eigen::Vector2d lo(1e300, 1e300), hi(-1e300, -1e300);
            std::vector<Eigen::Vector2d> q;
            for (const Vec3& x : pts) {
                q.emplace_back(w[0].dot(x), w[1].dot(x));
                lo = lo.cwiseMin(q.back());
                hi = hi.cwiseMax(q.back());
            }
            for (int o = 0; o < opt.offsets; ++o) {
                Eigen::Vector2d t(halton(o + 1, 2), halton(o + 1, 3));
                Eigen::Vector2d c = lo + t.cwiseProduct(hi - lo);
                double best = 1e300;
                Eigen::Vector2d snap = c;
                for (const auto& p : q)
                    if ((p - c).norm() < best) best = (p - c).norm(), snap = p;
                if (best > 1.5 * cell) c = snap;
                out.push_back(state_of(AffinePlane::from_line(n, c.x() * w[0] + c.y() * w[1])));
            }
        }
    }
    return out;
}

std::optional<VecX> boundary_residual(const ImplicitDomain& d, const PlaneState& s, const std::vector<Vec3>& base,
                                      std::vector<Vec3>* moved) {
    const int p = 3 - s.m();
    VecX r(p * static_cast<int>(base.size()));
    if (moved) moved->clear();
    for (std::size_t i = 0; i < base.size(); ++i) {
        Vec3 q = base[i];
        if (!track(d, s, q)) return std::nullopt;
        r.segment(p * static_cast<int>(i), p) = s.W.transpose() * d.surface_normal(q);
        if (moved) moved->push_back(q);
    }
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------

AffinePlane AffinePlane::from_normal(const Vec3& n, double offset) {
    const Vec3 u = n.normalized();
    AffinePlane a;
    a.m = 2;
    a.P = Mat3::Identity() - u * u.transpose();
    a.z = offset * u;
    return a;
}

AffinePlane AffinePlane::from_line(const Vec3& direction, const Vec3& point) {
    const Vec3 u = direction.normalized();
    AffinePlane a;
    a.m = 1;
    a.P = u * u.transpose();
    a.z = point - u * u.dot(point);
    return a;
}

AffinePlane AffinePlane::from_basis(const MatX& U, const Vec3& point) {
    const MatX Q = gram_schmidt(U);
    AffinePlane a;
    a.m = static_cast<int>(U.cols());
    a.P = Q * Q.transpose();
    a.z = point - a.P * point;
    return a;
}

void AffinePlane::normalize() {
    const Mat3 S = 0.5 * (P + P.transpose());
    Eigen::SelfAdjointEigenSolver<Mat3> es(S);
    const MatX V = es.eigenvectors().rightCols(m);
    P = V * V.transpose();
    z -= P * z;
}

MatX AffinePlane::basis() const {
    Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (P + P.transpose()));
    return es.eigenvectors().rightCols(m);
}

MatX AffinePlane::complement() const {
    Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (P + P.transpose()));
    return es.eigenvectors().leftCols(3 - m);
}

double AffinePlane::distance(const AffinePlane& other) const {
    return (P - other.P).norm() + (z - other.z).norm();
}

SliceResult intersect(const ImplicitDomain& domain, const AffinePlane& plane, int resolution) {
    if (plane.m != 1 && plane.m != 2) throw Error(ErrorCode::InvalidConfig, "slice dimension must be 1 or 2");
    const PlaneState s = state_of(plane);
    auto parts = components(domain, s, resolution);
    SliceResult r;
    r.plane = plane;
    r.ortho_residual = 0;
    r.min_inplane_gradient = 1;
    for (std::size_t c = 0; c < parts.size(); ++c) {
        auto& p = parts[c];
        for (auto& mesh : p.components) r.components.push_back(std::move(mesh));
        for (auto& curve : p.boundary_curves) {
            r.boundary_curves.push_back(std::move(curve));
            r.curve_component.push_back(static_cast<int>(c));
        }
        r.ortho_residual = std::max(r.ortho_residual, p.ortho_residual);
        r.min_inplane_gradient = std::min(r.min_inplane_gradient, p.min_inplane_gradient);
        r.euler_char += p.euler_char;
        r.area += p.area;
        r.total_turning += p.total_turning;
        r.resolved = r.resolved && p.resolved;
        r.truncated = r.truncated || p.truncated;
    }
    r.is_disk = parts.size() == 1 && parts[0].is_disk;
    return r;
}

std::vector<int> deduplicate(const std::vector<SliceResult>& slices, double tol) {
    std::vector<Vec3> c;
    for (const auto& s : slices) c.push_back(region_centroid(s));
    return cluster(
        static_cast<int>(slices.size()),
        [&](int i, int j) { return slices[i].plane.distance(slices[j].plane) + (c[i] - c[j]).norm(); }, tol);
}

std::vector<SliceResult> find_orthogonal_slices(const ImplicitDomain& domain, int m, const SliceOptions& opt) {
    if (m != 1 && m != 2) throw Error(ErrorCode::InvalidConfig, "slice dimension must be 1 or 2");
    std::vector<PlaneState> cands;
    for (const PlaneState& seed : seeds(domain, m, opt)) {
        std::vector<SliceResult> parts;
        try {
            parts = components(domain, seed, opt.seed_resolution);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptyIntersection) throw;
            continue;
        }
        std::stable_sort(parts.begin(), parts.end(),
                         [](const SliceResult& a, const SliceResult& b) { return a.area > b.area; });
        if (static_cast<int>(parts.size()) > opt.max_components) parts.resize(opt.max_components);
        for (const auto& part : parts) {
            if (!part.resolved || part.truncated) continue;
            std::vector<Vec3> aux = flatten(part.boundary_curves, 200);
            ResidualFn f = [&](const PlaneState& s, std::vector<Vec3>* moved) {
                return boundary_residual(domain, s, aux, moved);
            };
            const GNOutcome g =
                gauss_newton(seed, f, aux, opt.tol_ortho, opt.max_iter, opt.max_halvings, opt.step_tol);
            if (g.converged) cands.push_back(g.s);
        }
    }

    // Candidates on the same plane share one fine contour; every orthogonal
    // component of it is kept.
    std::vector<AffinePlane> cp;
    for (const auto& c : cands) cp.push_back(c.plane());
    const auto reps = cluster(
        static_cast<int>(cands.size()), [&](int i, int j) { return cp[i].distance(cp[j]); }, opt.dedup_tol);

    std::vector<SliceResult> found;
    for (int i : reps) {
        std::vector<SliceResult> parts;
        try {
            parts = components(domain, cands[i], opt.grid_resolution);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptyIntersection) throw;
            continue;
        }
        for (auto& r : parts)
            if (r.resolved && !r.truncated && r.ortho_residual < opt.tol_ortho) found.push_back(std::move(r));
    }
    std::vector<SliceResult> out;
    for (int i : deduplicate(found, opt.dedup_tol)) out.push_back(std::move(found[i]));
    return out;
}

// ---------------------------------------------------------------------------

std::vector<Vec3> solve_offsets(const ImplicitDomain& domain, const std::vector<Vec3>& base,
                                const AffinePlane& plane0, const AffinePlane& plane,
                                const NormalPerturbation& pert, const std::vector<Vec3>* warm) {
    const MatX W0 = plane0.complement();
    const int p = static_cast<int>(W0.cols());
    const Mat3 Pp = plane.perp();
    const double limit = domain.tolerances().fermi_fraction * domain.reach();
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < base.size(); ++i) {
        const Vec3& x = base[i];
        auto F = [&](const VecX& a) -> VecX {
            const Vec3 y = fermi_point(domain, x, W0 * a);
            return W0.transpose() * (Pp * (pert.displace(domain, y) - plane.z));
        };
        VecX a = warm ? VecX(W0.transpose() * (*warm)[i]) : VecX::Zero(p);
        bool ok = false;
        try {
            for (int it = 0; it < 30; ++it) {
                const VecX fa = F(a);
                if (fa.norm() < 1e-13) {
                    ok = true;
                    break;
                }
                MatX J(p, p);
                const double h = 1e-7;
                for (int j = 0; j < p; ++j) {
                    VecX e = VecX::Zero(p);
                    e[j] = h;
                    J.col(j) = (F(a + e) - F(a - e)) / (2 * h);
                }
                a -= J.fullPivLu().solve(fa);
                if (!(a.norm() < limit)) break;
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::OffsetTooLarge) throw;
            ok = false;
        }
        if (!ok)
            throw Error(ErrorCode::ContinuationDiverged,
                        "offset Newton failed at boundary point " + std::to_string(i));
        out.push_back(W0 * a);
    }
    return out;
}

std::vector<Vec3> g_map(const ImplicitDomain& domain, const std::vector<Vec3>& base, const AffinePlane& plane0,
                        const AffinePlane& plane, const NormalPerturbation& pert) {
    const auto v = solve_offsets(domain, base, plane0, plane, pert);
    const MatX W0 = plane0.complement();
    const Mat3 Q = W0 * W0.transpose() * plane.perp();
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < base.size(); ++i) {
        const Vec3 y = fermi_point(domain, base[i], v[i]);
        out.push_back(Q * perturbed_normal(domain, pert, y));
    }
    return out;
}

ContinuationResult continue_slice(const ImplicitDomain& domain, const SliceResult& slice,
                                  const NormalPerturbation& pert, const ContinueOptions& opt) {
    if (pert.c2_norm > opt.max_perturbation)
        throw Error(ErrorCode::PerturbationTooLarge,
                    "|u|_C2 = " + format_double(pert.c2_norm) + " exceeds " + format_double(opt.max_perturbation));
    const AffinePlane plane0 = slice.plane;
    const MatX W0 = plane0.complement();
    const auto base = flatten(slice.boundary_curves, static_cast<std::size_t>(opt.max_points));
    const int p = static_cast<int>(W0.cols());

    std::vector<Vec3> offsets(base.size(), Vec3::Zero());
    ResidualFn f = [&](const PlaneState& s, std::vector<Vec3>* moved) -> std::optional<VecX> {
        const AffinePlane plane = s.plane();
        std::vector<Vec3> v;
        try {
            v = solve_offsets(domain, base, plane0, plane, pert, &offsets);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ContinuationDiverged) throw;
            return std::nullopt;
        }
        VecX r(p * static_cast<int>(base.size()));
        for (std::size_t i = 0; i < base.size(); ++i) {
            const Vec3 y = fermi_point(domain, base[i], v[i]);
            r.segment(p * static_cast<int>(i), p) =
                W0.transpose() * (plane.perp() * perturbed_normal(domain, pert, y));
        }
        if (moved) *moved = v;
        return r;
    };
    // The starting offsets must exist; this is where divergence is reported.
    offsets = solve_offsets(domain, base, plane0, plane0, pert);
    const GNOutcome g = gauss_newton(state_of(plane0), f, offsets, opt.tol_ortho, opt.max_iter, 20, 1e-10, 1e-5);

    ContinuationResult out;
    out.orthogonal = g.converged;
    out.offsets = offsets;
    SliceResult& r = out.slice;
    r.plane = g.s.plane();
    r.euler_char = slice.euler_char;
    r.is_disk = slice.is_disk;
    std::vector<Vec3> curve;
    r.ortho_residual = 0;
    r.min_inplane_gradient = 1;
    for (std::size_t i = 0; i < base.size(); ++i) {
        const Vec3 y = fermi_point(domain, base[i], offsets[i]);
        curve.push_back(pert.displace(domain, y));
        const Vec3 nu = perturbed_normal(domain, pert, y);
        r.ortho_residual = std::max(r.ortho_residual, (r.plane.perp() * nu).norm());
        r.min_inplane_gradient = std::min(r.min_inplane_gradient, (r.plane.P * nu).norm());
    }
    r.boundary_curves.push_back(std::move(curve));
    r.curve_component.push_back(0);
    return out;
}

}  // namespace orthovar
