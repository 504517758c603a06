#include "orthovar/mesh.hpp"

#include "orthovar/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace orthovar {

SurfaceMesh::SurfaceMesh(MatX points, std::vector<Tri> triangles)
    : X_(std::move(points)), tris_(std::move(triangles)) {
    build();
}

SurfaceMesh::SurfaceMesh(const std::vector<Vec3>& points, std::vector<Tri> triangles)
    : tris_(std::move(triangles)) {
    X_.resize(3, static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) X_.col(static_cast<Eigen::Index>(i)) = points[i];
    build();
}

void SurfaceMesh::set_points(const MatX& X) {
    if (X.rows() != X_.rows() || X.cols() != X_.cols())
        throw Error(ErrorCode::InvalidMesh, "point array shape does not match topology");
    X_ = X;
}

void SurfaceMesh::build() {
    const int V = num_vertices();
    if (V == 0 || tris_.empty()) throw Error(ErrorCode::InvalidMesh, "empty mesh");
    if (dim() < 3) throw Error(ErrorCode::InvalidMesh, "ambient dimension must be >= 3");
    auto key = [V](int i, int j) { return static_cast<std::int64_t>(i) * V + j; };
    std::vector<std::int64_t> directed;
    directed.reserve(3 * tris_.size());
    vfaces_.assign(V, {});
    for (int f = 0; f < num_faces(); ++f) {
        const Tri& t = tris_[f];
        for (int a = 0; a < 3; ++a) {
            if (t[a] < 0 || t[a] >= V)
                throw Error(ErrorCode::InvalidMesh, "triangle index out of range");
            if (t[a] == t[(a + 1) % 3])
                throw Error(ErrorCode::InvalidMesh, "degenerate triangle");
        }
        for (int a = 0; a < 3; ++a) {
            directed.push_back(key(t[a], t[(a + 1) % 3]));
            vfaces_[t[a]].push_back(f);
        }
    }
    std::sort(directed.begin(), directed.end());
    // A repeated directed edge means inconsistent orientation or an edge in
    // more than two triangles.
    if (std::adjacent_find(directed.begin(), directed.end()) != directed.end())
        throw Error(ErrorCode::InvalidMesh, "inconsistent orientation or non-manifold edge");
    auto has = [&](int i, int j) { return std::binary_search(directed.begin(), directed.end(), key(i, j)); };

    edges_.clear();
    boundary_.assign(V, false);
    std::vector<int> next(V, -1);
    for (std::int64_t k : directed) {
        const int i = static_cast<int>(k / V), j = static_cast<int>(k % V);
        const bool twin = has(j, i);
        if (i < j || !twin) edges_.emplace_back(std::min(i, j), std::max(i, j));
        if (twin) continue;
        if (next[i] != -1)
            throw Error(ErrorCode::NonManifoldVertex, "vertex " + std::to_string(i) + " has two boundary fans");
        next[i] = j;
        boundary_[i] = boundary_[j] = true;
    }
    std::sort(edges_.begin(), edges_.end());
    loops_.clear();
    std::vector<bool> seen(V, false);
    for (int v = 0; v < V; ++v) {
        if (next[v] == -1 || seen[v]) continue;
        std::vector<int> loop;
        int c = v;
        while (!seen[c]) {
            seen[c] = true;
            loop.push_back(c);
            c = next[c];
            if (c == -1) throw Error(ErrorCode::InvalidMesh, "open boundary chain");
        }
        loops_.push_back(std::move(loop));
    }

    nbrs_.assign(V, {});
    for (const auto& [a, b] : edges_) {
        nbrs_[a].push_back(b);
        nbrs_[b].push_back(a);
    }
    std::vector<std::pair<int, int>> link;
    for (int v = 0; v < V; ++v) {
        if (vfaces_[v].empty()) throw Error(ErrorCode::InvalidMesh, "unreferenced vertex");
        std::sort(nbrs_[v].begin(), nbrs_[v].end());
        // The link of v must be a single cycle or path.
        link.clear();
        for (int f : vfaces_[v]) {
            const Tri& t = tris_[f];
            const int k = t[0] == v ? 0 : (t[1] == v ? 1 : 2);
            link.emplace_back(t[(k + 1) % 3], t[(k + 2) % 3]);
        }
        const int start = boundary_[v] ? next[v] : link.front().first;
        int count = 0;
        for (int c = start; count <= static_cast<int>(link.size());) {
            auto it = std::find_if(link.begin(), link.end(), [c](const auto& e) { return e.first == c; });
            if (it == link.end()) break;
            ++count;
            c = it->second;
            if (c == start) break;
        }
        if (count != static_cast<int>(link.size()))
            throw Error(ErrorCode::NonManifoldVertex, "vertex " + std::to_string(v) + " is not a manifold point");
    }
}

std::vector<int> SurfaceMesh::ring(int v, int k) const {
    std::vector<int> seen = {v};
    std::vector<int> frontier = {v};
    for (int d = 0; d < k; ++d) {
        std::vector<int> next;
        for (int c : frontier)
            for (int n : nbrs_[c])
                if (std::find(seen.begin(), seen.end(), n) == seen.end()) {
                    seen.push_back(n);
                    next.push_back(n);
                }
        frontier = std::move(next);
    }
    seen.erase(seen.begin());
    std::sort(seen.begin(), seen.end());
    return seen;
}

int SurfaceMesh::edge_valence(int a, int b) const {
    int c = 0;
    for (int f : vfaces_[a]) {
        const Tri& t = tris_[f];
        if (t[0] == b || t[1] == b || t[2] == b) ++c;
    }
    return c;
}

double SurfaceMesh::face_area(int f) const {
    const Tri& t = tris_[f];
    const VecX e1 = X_.col(t[1]) - X_.col(t[0]);
    const VecX e2 = X_.col(t[2]) - X_.col(t[0]);
    const double g = e1.squaredNorm() * e2.squaredNorm() - std::pow(e1.dot(e2), 2);
    return 0.5 * std::sqrt(std::max(g, 0.0));
}

VecX SurfaceMesh::face_normal3(int f) const {
    const Tri& t = tris_[f];
    const Vec3 n = (p3(t[1]) - p3(t[0])).cross(p3(t[2]) - p3(t[0]));
    return n.normalized();
}

double SurfaceMesh::area() const {
    double a = 0;
    for (int f = 0; f < num_faces(); ++f) a += face_area(f);
    return a;
}

VecX SurfaceMesh::vertex_areas() const {
    VecX w = VecX::Zero(num_vertices());
    for (int f = 0; f < num_faces(); ++f) {
        const double a = face_area(f) / 3.0;
        for (int v : tris_[f]) w[v] += a;
    }
    return w;
}

double SurfaceMesh::boundary_length() const {
    double L = 0;
    for (const auto& loop : loops_)
        for (std::size_t i = 0; i < loop.size(); ++i)
            L += (X_.col(loop[(i + 1) % loop.size()]) - X_.col(loop[i])).norm();
    return L;
}

double SurfaceMesh::min_triangle_quality() const {
    double q = 1.0;
    for (int f = 0; f < num_faces(); ++f) {
        const Tri& t = tris_[f];
        double s = 0;
        for (int a = 0; a < 3; ++a) s += (X_.col(t[(a + 1) % 3]) - X_.col(t[a])).squaredNorm();
        q = std::min(q, s > 0 ? 4 * std::sqrt(3.0) * face_area(f) / s : 0.0);
    }
    return q;
}

// ---------------------------------------------------------------------------

SurfaceMesh refine(const SurfaceMesh& mesh, const ImplicitDomain* domain, const Projector& snap) {
    const int V = mesh.num_vertices();
    MatX X(mesh.dim(), V + mesh.num_edges());
    X.leftCols(V) = mesh.points();
    std::map<std::pair<int, int>, int> mid;
    int next = V;
    for (const auto& [a, b] : mesh.edges()) {
        VecX m = 0.5 * (mesh.point(a) + mesh.point(b));
        const bool bnd = mesh.edge_valence(a, b) == 1;
        if (bnd && domain) {
            Vec3 y = project_to_surface(*domain, m.head<3>());
            m.head<3>() = y;
        } else if (snap) {
            m = snap(m);
        }
        X.col(next) = m;
        mid[{a, b}] = next++;
    }
    auto M = [&](int a, int b) { return mid.at({std::min(a, b), std::max(a, b)}); };
    std::vector<Tri> tris;
    tris.reserve(4 * mesh.num_faces());
    for (const Tri& t : mesh.triangles()) {
        const int ab = M(t[0], t[1]), bc = M(t[1], t[2]), ca = M(t[2], t[0]);
        tris.push_back({t[0], ab, ca});
        tris.push_back({ab, t[1], bc});
        tris.push_back({ca, bc, t[2]});
        tris.push_back({ab, bc, ca});
    }
    return SurfaceMesh(std::move(X), std::move(tris));
}

// ---------------------------------------------------------------------------
// OFF

SurfaceMesh parse_off(const std::string& text) {
    std::istringstream raw(text);
    std::string content, line;
    while (std::getline(raw, line)) {
        const auto h = line.find('#');
        content += (h == std::string::npos ? line : line.substr(0, h)) + '\n';
    }
    std::istringstream in(content);
    std::string head;
    if (!(in >> head)) throw Error(ErrorCode::InvalidMesh, "empty OFF input");
    int dim = 3;
    if (head == "nOFF") {
        if (!(in >> dim) || dim < 3) throw Error(ErrorCode::InvalidMesh, "bad nOFF dimension");
    } else if (head != "OFF") {
        throw Error(ErrorCode::InvalidMesh, "missing OFF header");
    }
    long nv = 0, nf = 0, ne = 0;
    if (!(in >> nv >> nf >> ne) || nv <= 0 || nf <= 0)
        throw Error(ErrorCode::InvalidMesh, "bad OFF counts");
    MatX X(dim, nv);
    for (long i = 0; i < nv; ++i)
        for (int d = 0; d < dim; ++d)
            if (!(in >> X(d, i))) throw Error(ErrorCode::InvalidMesh, "truncated OFF vertex list");
    std::vector<Tri> tris;
    for (long f = 0; f < nf; ++f) {
        int k = 0;
        if (!(in >> k) || k < 3) throw Error(ErrorCode::InvalidMesh, "bad OFF face");
        std::vector<int> idx(k);
        for (int& i : idx)
            if (!(in >> i)) throw Error(ErrorCode::InvalidMesh, "truncated OFF face list");
        for (int j = 1; j + 1 < k; ++j) tris.push_back({idx[0], idx[j], idx[j + 1]});
        std::string rest;
        std::getline(in, rest);
    }
    return SurfaceMesh(std::move(X), std::move(tris));
}

SurfaceMesh read_off(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open mesh '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_off(ss.str());
}

std::string format_off(const SurfaceMesh& mesh) {
    std::string out = mesh.dim() == 3 ? "OFF\n" : "nOFF\n" + std::to_string(mesh.dim()) + "\n";
    out += std::to_string(mesh.num_vertices()) + " " + std::to_string(mesh.num_faces()) + " " +
           std::to_string(mesh.num_edges()) + "\n";
    char buf[64];
    for (int i = 0; i < mesh.num_vertices(); ++i) {
        for (int d = 0; d < mesh.dim(); ++d) {
            std::snprintf(buf, sizeof buf, d ? " %.17g" : "%.17g", mesh.points()(d, i));
            out += buf;
        }
        out += '\n';
    }
    for (const Tri& t : mesh.triangles())
        out += "3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
    return out;
}

void write_off(const SurfaceMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write mesh '" + path + "'");
    out << format_off(mesh);
}

SurfaceMesh rigid_transform(const SurfaceMesh& mesh, const Mat3& R, const Vec3& t) {
    MatX X = mesh.points();
    X.topRows<3>() = (R * X.topRows<3>()).colwise() + t;
    return SurfaceMesh(std::move(X), mesh.triangles());
}

SurfaceMesh scaled(const SurfaceMesh& mesh, double lambda) {
    return SurfaceMesh(MatX(lambda * mesh.points()), mesh.triangles());
}

// ---------------------------------------------------------------------------
// Fixtures

Projector sphere_projector(const Vec3& center, double radius) {
    return [center, radius](const VecX& x) {
        VecX y = x;
        const Vec3 v = x.head<3>() - center;
        y.head<3>() = center + radius * v.normalized();
        return y;
    };
}

namespace {

SurfaceMesh oriented_outward(std::vector<Vec3> pts, std::vector<Tri> tris) {
    for (Tri& t : tris) {
        const Vec3 n = (pts[t[1]] - pts[t[0]]).cross(pts[t[2]] - pts[t[0]]);
        if (n.dot(pts[t[0]] + pts[t[1]] + pts[t[2]]) < 0) std::swap(t[1], t[2]);
    }
    return SurfaceMesh(pts, std::move(tris));
}

// Triangulates the band between two closed rings given their angles.
void stitch(const std::vector<int>& in, const std::vector<double>& ain, const std::vector<int>& out,
            const std::vector<double>& aout, std::vector<Tri>& tris) {
    const std::size_t n1 = in.size(), n2 = out.size();
    std::size_t i = 0, j = 0;
    auto angle = [](const std::vector<double>& a, std::size_t k) {
        return k < a.size() ? a[k] : a[k - a.size()] + 2 * kPi;
    };
    while (i < n1 || j < n2) {
        const bool advance_out = j < n2 && (i == n1 || angle(aout, j + 1) <= angle(ain, i + 1));
        if (advance_out) {
            tris.push_back({in[i % n1], out[j % n2], out[(j + 1) % n2]});
            ++j;
        } else {
            tris.push_back({in[i % n1], out[j % n2], in[(i + 1) % n1]});
            ++i;
        }
    }
}

}  // namespace

SurfaceMesh icosphere(int level, double radius, const Vec3& center) {
    const double t = (1 + std::sqrt(5.0)) / 2;
    std::vector<Vec3> p = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                           {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& v : p) v.normalize();
    std::vector<Tri> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                          {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                          {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                          {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    SurfaceMesh m = oriented_outward(p, f);
    const Projector snap = sphere_projector(Vec3::Zero(), 1.0);
    for (int k = 0; k < level; ++k) m = refine(m, nullptr, snap);
    MatX X = radius * m.points();
    X.colwise() += center;
    return SurfaceMesh(std::move(X), m.triangles());
}

SurfaceMesh hemisphere(int level, double radius) {
    std::vector<Vec3> p = {{1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}, {0, 0, 1}};
    std::vector<Tri> f = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
    SurfaceMesh m(p, f);
    const Projector snap = sphere_projector(Vec3::Zero(), 1.0);
    for (int k = 0; k < level; ++k) m = refine(m, nullptr, snap);
    return SurfaceMesh(MatX(radius * m.points()), m.triangles());
}

SurfaceMesh polar_mesh(int level, const std::function<Vec3(double, double)>& map) {
    const int R = 1 << level;
    std::vector<Vec3> pts = {map(0.0, 0.0)};
    std::vector<Tri> tris;
    std::vector<int> prev = {0};
    std::vector<double> aprev = {0.0};
    for (int k = 1; k <= R; ++k) {
        const int n = 6 * k;
        std::vector<int> ring;
        std::vector<double> ang;
        for (int j = 0; j < n; ++j) {
            const double phi = 2 * kPi * j / n;
            ring.push_back(static_cast<int>(pts.size()));
            ang.push_back(phi);
            pts.push_back(map(static_cast<double>(k) / R, phi));
        }
        if (k == 1) {
            for (int j = 0; j < n; ++j) tris.push_back({0, ring[j], ring[(j + 1) % n]});
        } else {
            stitch(prev, aprev, ring, ang, tris);
        }
        prev = std::move(ring);
        aprev = std::move(ang);
    }
    return SurfaceMesh(pts, std::move(tris));
}

SurfaceMesh ring_disk(int level, double radius, double height) {
    return polar_mesh(level, [=](double rho, double phi) {
        return Vec3(radius * rho * std::cos(phi), radius * rho * std::sin(phi), height);
    });
}

SurfaceMesh ball_section(int level, double height) {
    return ring_disk(level, std::sqrt(1 - height * height), height);
}

SurfaceMesh annulus(int level, double r_in, double r_out) {
    const int M = 1 << level;
    const double rmid = 0.5 * (r_in + r_out);
    const int N = std::max(12, static_cast<int>(std::lround(2 * kPi * rmid * M / (r_out - r_in))));
    std::vector<Vec3> pts;
    std::vector<Tri> tris;
    std::vector<int> prev;
    std::vector<double> aprev;
    for (int i = 0; i <= M; ++i) {
        const double r = r_in + (r_out - r_in) * i / M;
        const double off = (i % 2) * kPi / N;
        std::vector<int> ring;
        std::vector<double> ang;
        for (int j = 0; j < N; ++j) {
            const double phi = off + 2 * kPi * j / N;
            ring.push_back(static_cast<int>(pts.size()));
            ang.push_back(phi);
            pts.emplace_back(r * std::cos(phi), r * std::sin(phi), 0.0);
        }
        if (i > 0) stitch(prev, aprev, ring, ang, tris);
        prev = std::move(ring);
        aprev = std::move(ang);
    }
    return SurfaceMesh(pts, std::move(tris));
}

SurfaceMesh cylinder_strip(int level, double radius, double span, double height) {
    const int N = 1 << level;
    const int Nz = std::max(1, static_cast<int>(std::lround(N * height / (radius * span))));
    std::vector<Vec3> pts;
    for (int j = 0; j <= Nz; ++j)
        for (int i = 0; i <= N; ++i) {
            const double phi = -0.5 * span + span * i / N;
            pts.emplace_back(radius * std::cos(phi), radius * std::sin(phi), -0.5 * height + height * j / Nz);
        }
    std::vector<Tri> tris;
    auto id = [&](int i, int j) { return j * (N + 1) + i; };
    for (int j = 0; j < Nz; ++j)
        for (int i = 0; i < N; ++i) {
            if ((i + j) % 2 == 0) {
                tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            } else {
                tris.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                tris.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        }
    return SurfaceMesh(pts, std::move(tris));
}

SurfaceMesh orthogonal_cap(int level, double r) {
    const double c = std::sqrt(1 + r * r);
    const double theta_max = std::acos(r / c);
    return polar_mesh(level, [=](double rho, double phi) {
        const double th = rho * theta_max;
        return Vec3(r * std::sin(th) * std::cos(phi), r * std::sin(th) * std::sin(phi), c - r * std::cos(th));
    });
}

}  // namespace orthovar
