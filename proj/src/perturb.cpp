#include "orthovar/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace orthovar {

namespace {

double bump(double r2) { return r2 < 1 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

double unit_sphere_area(int m) {
    // |S^{m-1}| for m = 1, 2, 3.
    return m == 1 ? 2.0 : m == 2 ? 2 * kPi : 4 * kPi;
}

std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string exact(const Vec3& v) { return exact(v.x()) + ", " + exact(v.y()) + ", " + exact(v.z()); }

std::string exact(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + exact(v[i]);
    return s;
}

double wrap(double a) {
    a = std::fmod(a, 2 * kPi);
    return a < 0 ? a + 2 * kPi : a;
}

double angle_distance(double a, double b) {
    const double d = wrap(a - b);
    return std::min(d, 2 * kPi - d);
}

}  // namespace

MollifierKernel::MollifierKernel(int m, int resolution) : m_(m), n_(resolution) {
    if (m < 1 || m > 3) throw Error(ErrorCode::InvalidConfig, "kernel dimension must be 1, 2 or 3");
    if (resolution < 8) throw Error(ErrorCode::QuadratureUnderresolved, "kernel grid needs at least 8 cells");
    // Radial integral of the unnormalized bump.
    const int nr = 200000;
    double radial = 0;
    for (int i = 0; i < nr; ++i) {
        const double r = (i + 0.5) / nr;
        radial += bump(r * r) * std::pow(r, m - 1);
    }
    c_ = 1.0 / (unit_sphere_area(m) * radial / nr);

    const double h = 2.0 / n_;
    const double cell = std::pow(h, m);
    const long total = static_cast<long>(std::pow(n_, m));
    for (long k = 0; k < total; ++k) {
        long q = k;
        VecX y(m);
        for (int a = 0; a < m; ++a) {
            y[a] = -1 + (q % n_ + 0.5) * h;
            q /= n_;
        }
        const double v = value(y);
        if (v <= 0) continue;
        nodes_.push_back(y);
        weights_.push_back(v * cell);
        total_ += v * cell;
    }
    for (double& w : weights_) w /= total_;
}

double MollifierKernel::value(const VecX& y) const { return c_ * bump(y.squaredNorm()); }

VecX MollifierKernel::gradient(const VecX& y) const {
    const double r2 = y.squaredNorm();
    if (r2 >= 1) return VecX::Zero(y.size());
    const double s = 1 - r2;
    return value(y) * (-2.0 / (s * s)) * y;
}

double smooth_step(double s) {
    const double a = std::abs(s);
    if (a <= 0.5) return 1;
    if (a >= 1) return 0;
    const double q = 2 * (a - 0.5);
    auto f = [](double t) { return t > 0 ? std::exp(-1 / t) : 0.0; };
    return f(1 - q) / (f(1 - q) + f(q));
}

Extension::Extension(VectorFunction psi, int m, int p, std::shared_ptr<const MollifierKernel> kernel, double eps,
                     double psi_scale)
    : psi_(std::move(psi)), m_(m), p_(p), kernel_(std::move(kernel)), eps_(eps), psi_scale_(psi_scale) {
    if (!kernel_ || kernel_->dim() != m)
        throw Error(ErrorCode::InvalidConfig, "kernel dimension must match the base dimension");
    if (p < 1) throw Error(ErrorCode::InvalidConfig, "extension needs p >= 1");
}

double Extension::operator()(const VecX& x, const VecX& z) const {
    if (x.size() != m_ || z.size() != p_) throw Error(ErrorCode::InvalidConfig, "argument sizes do not match");
    double alpha = 1;
    if (eps_ > 0) {
        for (int j = 0; j < p_; ++j) alpha *= smooth_step(z[j] / eps_);
        if (alpha == 0) return 0;
    }
    const auto& nodes = kernel_->nodes();
    const auto& w = kernel_->weights();
    double total = 0;
    for (int j = 0; j < p_; ++j) {
        if (z[j] == 0) continue;
        const double r = std::abs(z[j]);
        if (psi_scale_ > 0 && 2 * r / kernel_->resolution() > 0.25 * psi_scale_)
            throw Error(ErrorCode::QuadratureUnderresolved,
                        "kernel spacing " + format_double(2 * r / kernel_->resolution()) +
                            " too coarse for psi scale " + format_double(psi_scale_));
        double conv = 0;
        for (std::size_t k = 0; k < nodes.size(); ++k) conv += w[k] * psi_(x - r * nodes[k])[j];
        total += z[j] * conv;
    }
    return alpha * total;
}

Extension extend(VectorFunction psi, int m, int p, std::shared_ptr<const MollifierKernel> kernel, double psi_scale) {
    return Extension(std::move(psi), m, p, std::move(kernel), 0, psi_scale);
}

Extension extend_with_cutoff(VectorFunction psi, int m, int p, std::shared_ptr<const MollifierKernel> kernel,
                             double eps, double psi_scale) {
    if (!(eps > 0)) throw Error(ErrorCode::InvalidConfig, "cutoff width must be positive");
    return Extension(std::move(psi), m, p, std::move(kernel), eps, psi_scale);
}

// ---------------------------------------------------------------------------

SurfaceExtension::SurfaceExtension(const ImplicitDomain& domain, const SliceResult& slice, const ScalarField& psi_n,
                                   const SurfaceExtendOptions& opt)
    : domain_(&domain) {
    if (slice.plane.m != 2) throw Error(ErrorCode::InvalidConfig, "surface extension needs a planar slice");
    if (slice.boundary_curves.size() != 1)
        throw Error(ErrorCode::ChartCoverageGap,
                    "angular charts cover a single boundary loop, got " +
                        std::to_string(slice.boundary_curves.size()));
    const auto& loop = slice.boundary_curves[0];
    if (loop.size() < 8) throw Error(ErrorCode::ChartCoverageGap, "boundary loop has too few points");
    if (opt.charts < 1 || opt.table < 64 || opt.quadrature < 8)
        throw Error(ErrorCode::InvalidConfig, "surface extension needs charts >= 1, table >= 64, quadrature >= 8");

    n0_ = slice.plane.complement().col(0);
    z0_ = slice.plane.z;
    U_ = slice.plane.basis();
    eps_ = opt.eps > 0 ? opt.eps : 0.25 * domain.reach();

    const MollifierKernel k1(1, opt.quadrature);
    for (std::size_t i = 0; i < k1.nodes().size(); ++i) {
        nodes_.push_back(k1.nodes()[i][0]);
        weights_.push_back(k1.weights()[i]);
    }

    auto flat = [&](const Vec3& x) { return Eigen::Vector2d(U_.col(0).dot(x), U_.col(1).dot(x)); };
    Vec3 c = Vec3::Zero();
    for (const auto& p : loop) c += p;
    c /= static_cast<double>(loop.size());
    double rmin = 1e300;
    for (const auto& p : loop) rmin = std::min(rmin, (p - c).norm());

    const int K = opt.charts;
    auto partition = [&](const Vec3& x) {
        if (K == 1) return std::vector<double>{1.0};
        const Eigen::Vector2d q = flat(x - c);
        const double phi = std::atan2(q.y(), q.x());
        std::vector<double> b(K);
        double sum = 0;
        for (int i = 0; i < K; ++i) {
            const double r = angle_distance(phi, 2 * kPi * i / K) / (2 * kPi / K);
            b[i] = bump(r * r);
            sum += b[i];
        }
        for (double& v : b) v /= sum;
        return b;
    };

    for (int j = 0; j < K; ++j) {
        Chart ch;
        const double a = 2 * kPi * j / K + 0.3;
        ch.centre = K == 1 ? c : Vec3(c + 0.2 * rmin * (std::cos(a) * U_.col(0) + std::sin(a) * U_.col(1)));

        // Unwrapped angles of the loop about the chart centre.
        const std::size_t n = loop.size();
        std::vector<Eigen::Vector2d> q(n + 1);
        std::vector<double> A(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            q[i] = flat(loop[i % n] - ch.centre);
            const double th = std::atan2(q[i].y(), q[i].x());
            if (i == 0) {
                A[i] = th;
            } else {
                double d = th - std::atan2(q[i - 1].y(), q[i - 1].x());
                d = std::remainder(d, 2 * kPi);
                A[i] = A[i - 1] + d;
            }
        }
        const double turn = A[n] - A[0];
        if (std::abs(std::abs(turn) - 2 * kPi) > 1e-6)
            throw Error(ErrorCode::ChartCoverageGap, "chart centre is not enclosed by the boundary loop");
        if (turn < 0) {
            for (auto& v : A) v = -v;
        }
        for (std::size_t i = 0; i < n; ++i)
            if (!(A[i + 1] > A[i]))
                throw Error(ErrorCode::ChartCoverageGap, "boundary loop is not star-shaped about the chart centre");
        const double sgn = turn < 0 ? -1 : 1;

        ch.w.resize(opt.table);
        for (int m = 0; m < opt.table; ++m) {
            const double th = 2 * kPi * m / opt.table;
            double a0 = A[0] + wrap(sgn * th - A[0]);
            const std::size_t i =
                std::min<std::size_t>(n - 1, std::upper_bound(A.begin(), A.end(), a0) - A.begin() - 1);
            const Eigen::Vector2d d(std::cos(sgn * a0), std::sin(sgn * a0));
            const Eigen::Vector2d e = q[i + 1] - q[i];
            // Ray t d meets q_i + s e.
            Eigen::Matrix2d M;
            M << d, -e;
            const Eigen::Vector2d ts = M.colPivHouseholderQr().solve(q[i]);
            const double s = std::clamp(ts[1], 0.0, 1.0);
            const Vec3 x = loop[i % n] + s * (loop[(i + 1) % n] - loop[i % n]);
            const Vec3 y = project_to_surface(domain, x);
            const Vec3 nu = domain.surface_normal(y);
            const double tn = (n0_ - n0_.dot(nu) * nu).norm();
            if (tn < 1e-3) throw Error(ErrorCode::ChartCoverageGap, "plane is tangent to S along the boundary");
            ch.w[m] = partition(y)[j] * psi_n(y) / tn;
        }
        charts_.push_back(std::move(ch));
    }
}

double SurfaceExtension::chart_value(const Chart& c, double theta, double r) const {
    const int M = static_cast<int>(c.w.size());
    auto at = [&](double th) {
        const double s = wrap(th) / (2 * kPi) * M;
        const int i = static_cast<int>(s) % M;
        const double f = s - std::floor(s);
        return (1 - f) * c.w[i] + f * c.w[(i + 1) % M];
    };
    if (r == 0) return at(theta);
    double conv = 0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) conv += weights_[k] * at(theta - r * nodes_[k]);
    return conv;
}

double SurfaceExtension::operator()(const Vec3& y) const {
    const double t = n0_.dot(y - z0_);
    if (std::abs(t) >= eps_) return 0;
    double total = 0;
    for (const auto& c : charts_) {
        const Vec3 d = y - c.centre;
        const double th = std::atan2(U_.col(1).dot(d), U_.col(0).dot(d));
        total += chart_value(c, th, std::abs(t));
    }
    return smooth_step(t / eps_) * t * total;
}

Vec3 SurfaceExtension::conormal(const Vec3& x) const {
    const Vec3 nu = domain_->surface_normal(x);
    return (n0_ - n0_.dot(nu) * nu).normalized();
}

double surface_c2_norm(const ImplicitDomain& domain, const ScalarField& u, int grid) {
    const Box& b = domain.bbox();
    const double h = 1e-3 * b.diameter();
    double c0 = 0, c1 = 0, c2 = 0;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j)
            for (int k = 0; k < grid; ++k) {
                const Vec3 f((i + 0.5) / grid, (j + 0.5) / grid, (k + 0.5) / grid);
                const Vec3 x = b.lo + f.cwiseProduct(b.hi - b.lo);
                Vec3 y;
                try {
                    if (std::abs(domain.distance(x)) > 0.5 * domain.reach()) continue;
                    y = project_to_surface(domain, x);
                } catch (const Error&) {
                    continue;
                }
                const auto t = orthonormal_complement(domain.surface_normal(y));
                auto at = [&](double a, double c) { return u(project_to_surface(domain, y + a * t[0] + c * t[1])); };
                const double u0 = at(0, 0);
                const double up = at(h, 0), um = at(-h, 0), vp = at(0, h), vm = at(0, -h);
                const double g1 = (up - um) / (2 * h), g2 = (vp - vm) / (2 * h);
                const double h11 = (up - 2 * u0 + um) / (h * h), h22 = (vp - 2 * u0 + vm) / (h * h);
                const double h12 = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
                c0 = std::max(c0, std::abs(u0));
                c1 = std::max(c1, std::hypot(g1, g2));
                c2 = std::max(c2, std::sqrt(h11 * h11 + h22 * h22 + 2 * h12 * h12));
            }
    return c0 + c1 + c2;
}

// ---------------------------------------------------------------------------

void GenericSpec::write(ConfigSection& out) const {
    out.set("seed", std::to_string(seed));
    out.set("step", exact(step));
    out.set("attempt", static_cast<long>(attempt));
    out.set("scale", exact(scale));
    out.set("resolution", static_cast<long>(resolution));
    out.set("charts", static_cast<long>(extend.charts));
    out.set("band", exact(extend.eps));
    out.set("quadrature", static_cast<long>(extend.quadrature));
    out.set("table", static_cast<long>(extend.table));
    out.set("terms", static_cast<long>(terms.size()));
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string p = "term" + std::to_string(i) + ".";
        out.set(p + "normal", exact(terms[i].normal));
        out.set(p + "offset", exact(terms[i].offset));
        out.set(p + "centroid", exact(terms[i].centroid));
        out.set(p + "coeffs", exact(terms[i].coeffs));
        out.set(p + "weight", exact(terms[i].weight));
    }
}

GenericSpec GenericSpec::read(const ConfigSection& in) {
    GenericSpec s;
    s.seed = std::stoull(in.get_or("seed", "7"));
    s.step = in.get_double_or("step", 1e-2);
    s.attempt = static_cast<int>(in.get_int_or("attempt", 0));
    s.scale = in.get_double_or("scale", 1);
    s.resolution = static_cast<int>(in.get_int_or("resolution", 256));
    s.extend.charts = static_cast<int>(in.get_int_or("charts", 1));
    s.extend.eps = in.get_double_or("band", 0);
    s.extend.quadrature = static_cast<int>(in.get_int_or("quadrature", 32));
    s.extend.table = static_cast<int>(in.get_int_or("table", 2048));
    const long n = in.get_int_or("terms", 0);
    if (n < 0) throw Error(ErrorCode::InvalidConfig, "terms must be non-negative");
    for (long i = 0; i < n; ++i) {
        const std::string p = "term" + std::to_string(i) + ".";
        Term t;
        t.normal = in.get_vec3(p + "normal");
        t.offset = in.get_double(p + "offset");
        t.centroid = in.get_vec3(p + "centroid");
        t.coeffs = in.get_doubles(p + "coeffs");
        t.weight = in.get_double(p + "weight");
        if (t.coeffs.empty()) throw Error(ErrorCode::InvalidConfig, p + "coeffs is empty");
        s.terms.push_back(std::move(t));
    }
    return s;
}

namespace {

// The component of the plane section whose boundary centroid is nearest `centroid`.
SliceResult term_slice(const ImplicitDomain& base, const GenericSpec::Term& t, int resolution) {
    SliceResult s = intersect(base, AffinePlane::from_normal(t.normal, t.offset), resolution);
    int best = -1;
    double bd = 1e300;
    for (std::size_t i = 0; i < s.boundary_curves.size(); ++i) {
        Vec3 c = Vec3::Zero();
        for (const auto& p : s.boundary_curves[i]) c += p;
        c /= static_cast<double>(s.boundary_curves[i].size());
        if ((c - t.centroid).norm() < bd) bd = (c - t.centroid).norm(), best = static_cast<int>(i);
    }
    SliceResult one = s;
    one.components.clear();
    one.boundary_curves = {s.boundary_curves[best]};
    one.curve_component = {0};
    return one;
}

ScalarField fourier_field(const GenericSpec::Term& t) {
    const auto tb = orthonormal_complement(t.normal.normalized());
    return [tb, t](const Vec3& x) {
        const Vec3 d = x - t.centroid;
        const double phi = std::atan2(tb[1].dot(d), tb[0].dot(d));
        double v = t.coeffs[0];
        for (std::size_t k = 1; 2 * k < t.coeffs.size() + 1; ++k) {
            v += t.coeffs[2 * k - 1] * std::cos(k * phi);
            if (2 * k < t.coeffs.size()) v += t.coeffs[2 * k] * std::sin(k * phi);
        }
        return v;
    };
}

}  // namespace

ScalarField build_generic_field(const ImplicitDomain& base, const GenericSpec& spec) {
    std::vector<std::pair<double, std::shared_ptr<SurfaceExtension>>> parts;
    for (const auto& t : spec.terms) {
        const SliceResult s = term_slice(base, t, spec.resolution);
        parts.emplace_back(t.weight, std::make_shared<SurfaceExtension>(base, s, fourier_field(t), spec.extend));
    }
    const double scale = spec.scale;
    return [parts, scale](const Vec3& y) {
        double v = 0;
        for (const auto& [w, e] : parts) v += w * (*e)(y);
        return scale * v;
    };
}

PerturbedDomain::PerturbedDomain(DomainPtr base, NormalPerturbation pert, ConfigSection params)
    : base_(std::move(base)), pert_(std::move(pert)), params_(std::move(params)) {
    if (!base_) throw Error(ErrorCode::InvalidConfig, "perturbed domain needs a base domain");
    if (pert_.xi) throw Error(ErrorCode::InvalidConfig, "perturbed domain supports xi = nu^S only");
    base_ls_ = dynamic_cast<const LevelSetDomain*>(base_.get());
    Box b = base_->bbox();
    const Vec3 pad = Vec3::Constant(0.05 * b.diameter());
    b.lo -= pad;
    b.hi += pad;
    set_bbox(b);
    set_reach(0.8 * base_->reach());
    set_tolerances(base_->tolerances());
}

double PerturbedDomain::level(const Vec3& x) const {
    double d;
    Vec3 y;
    try {
        if (base_ls_) {
            const auto pr = base_ls_->project(x);
            d = pr.d;
            y = pr.y;
        } else {
            d = base_->distance(x);
            y = base_->closest_point(x);
        }
    } catch (const Error&) {
        // Medial points lie deep inside; u has no influence there.
        return base_->level(x) < 0 ? -base_->reach() : base_->reach();
    }
    return d + pert_.u(y);
}

void PerturbedDomain::write_params(ConfigSection& out) const {
    ConfigSection b;
    base_->write_params(b);
    out.set("base.kind", base_->kind());
    out.set("base.reach", exact(base_->reach()));
    for (const auto& [k, v] : b.entries()) out.set("base." + k, v);
    for (const auto& [k, v] : params_.entries()) out.set(k, v);
}

std::shared_ptr<PerturbedDomain> make_perturbed(DomainPtr base, const GenericSpec& spec) {
    NormalPerturbation pert;
    pert.u = build_generic_field(*base, spec);
    pert.c2_norm = spec.step;
    pert.description = "generic perturbation, seed " + std::to_string(spec.seed) + ", attempt " +
                       std::to_string(spec.attempt);
    ConfigSection params;
    spec.write(params);
    return std::make_shared<PerturbedDomain>(std::move(base), std::move(pert), std::move(params));
}

GenericResult make_generic(DomainPtr domain, const std::vector<SliceResult>& slices, const GenericOptions& opt) {
    if (slices.empty()) throw Error(ErrorCode::InvalidConfig, "make_generic needs at least one slice");
    if (!(opt.step > 0)) throw Error(ErrorCode::InvalidConfig, "step must be positive");

    // Farthest-point selection of single-loop planar slices.
    std::vector<int> usable;
    for (std::size_t i = 0; i < slices.size(); ++i)
        if (slices[i].plane.m == 2 && slices[i].boundary_curves.size() == 1) usable.push_back(static_cast<int>(i));
    if (usable.empty())
        throw Error(ErrorCode::ChartCoverageGap, "no slice with a single boundary loop to perturb along");
    std::vector<int> chosen{usable[0]};
    while (static_cast<int>(chosen.size()) < std::min<int>(opt.max_slices, static_cast<int>(usable.size()))) {
        int best = -1;
        double bd = -1;
        for (int i : usable) {
            double d = 1e300;
            for (int j : chosen) d = std::min(d, slices[i].plane.distance(slices[j].plane));
            if (d > bd) bd = d, best = i;
        }
        if (bd <= 0) break;
        chosen.push_back(best);
    }

    std::mt19937_64 rng(opt.seed);
    auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    GenericResult out;
    for (int attempt = 0; attempt <= opt.retries; ++attempt) {
        GenericSpec spec;
        spec.seed = opt.seed;
        spec.step = opt.step;
        spec.attempt = attempt;
        spec.resolution = opt.search.grid_resolution;
        spec.extend = opt.extend;
        for (int i : chosen) {
            const auto& s = slices[i];
            GenericSpec::Term t;
            t.normal = s.plane.complement().col(0);
            t.offset = t.normal.dot(s.plane.z);
            t.centroid = Vec3::Zero();
            for (const auto& p : s.boundary_curves[0]) t.centroid += p;
            t.centroid /= static_cast<double>(s.boundary_curves[0].size());
            for (int k = 0; k < 2 * opt.modes - 1; ++k) t.coeffs.push_back(2 * uniform() - 1);
            t.weight = (uniform() < 0.5 ? -1 : 1) * (0.5 + uniform());
            spec.terms.push_back(std::move(t));
        }
        const double raw = surface_c2_norm(*domain, build_generic_field(*domain, spec));
        if (!(raw > 0)) throw Error(ErrorCode::GenericityFailed, "perturbation vanished on the sampled surface");
        spec.scale = opt.step / raw;

        auto pd = make_perturbed(domain, spec);
        out.spec = spec;
        out.domain = pd;
        out.raw_c2 = raw;
        out.attempts = attempt + 1;
        out.remaining = find_orthogonal_slices(*pd, 2, opt.search);
        if (out.remaining.empty()) return out;
    }
    throw Error(ErrorCode::GenericityFailed,
                std::to_string(out.remaining.size()) + " orthogonal slice(s) survive after " +
                    std::to_string(out.attempts) + " attempts");
}

// ---------------------------------------------------------------------------

Vec3 l0_apply(const ImplicitDomain& domain, const AffinePlane& plane0, const NormalPerturbation& dir,
              const Vec3& x) {
    const double h = 1e-6;
    const Vec3 nu = domain.surface_normal(x);
    const Vec3 xi = dir.direction(domain, x);
    const double phi = dir.u(x);
    const Vec3 grad = surface_gradient(domain, dir.u, x, h);
    Vec3 dxi_nu = Vec3::Zero();
    if (dir.xi) {
        for (const Vec3& t : orthonormal_complement(nu)) {
            const Vec3 a = dir.xi(project_to_surface(domain, x + h * t));
            const Vec3 b = dir.xi(project_to_surface(domain, x - h * t));
            dxi_nu += ((a - b) / (2 * h)).dot(nu) * t;
        }
    }
    const Mat3 Pp = plane0.perp();
    const Vec3 dnu = -(nu.dot(xi) * grad + phi * dxi_nu);
    // Moving the base point by dE/dv [-phi P0^perp xi] rotates nu^S by -D^2 d.
    const Vec3 w = -phi * (Pp * xi);
    const Vec3 wt = w - w.dot(nu) * nu;
    return Pp * (dnu - domain.hessian(x) * wt);
}

L0Check l0_check(const ImplicitDomain& domain, const SliceResult& slice, const NormalPerturbation& dir, double eps,
                 int max_points) {
    std::vector<Vec3> base;
    std::size_t total = 0;
    for (const auto& c : slice.boundary_curves) total += c.size();
    const std::size_t stride = std::max<std::size_t>(1, total / std::max(1, max_points));
    std::size_t k = 0;
    for (const auto& c : slice.boundary_curves)
        for (const auto& p : c)
            if (k++ % stride == 0) base.push_back(p);

    auto scaled = [&](double s) {
        NormalPerturbation p = dir;
        p.u = [u = dir.u, s](const Vec3& y) { return s * u(y); };
        return p;
    };
    std::vector<Vec3> f;
    L0Check out;
    for (const auto& x : base) {
        f.push_back(l0_apply(domain, slice.plane, dir, x));
        out.formula_norm = std::max(out.formula_norm, f.back().norm());
    }
    // Difference along the unit-size direction so the step is meaningful.
    const double s = out.formula_norm > 0 ? eps / out.formula_norm : eps;
    const auto gp = g_map(domain, base, slice.plane, slice.plane, scaled(s));
    const auto gm = g_map(domain, base, slice.plane, slice.plane, scaled(-s));
    for (std::size_t i = 0; i < base.size(); ++i) {
        const Vec3 fd = (gp[i] - gm[i]) / (2 * s);
        out.fd_norm = std::max(out.fd_norm, fd.norm());
        out.max_error = std::max(out.max_error, (fd - f[i]).norm());
    }
    out.relative_error = out.formula_norm > 0 ? out.max_error / out.formula_norm : out.max_error;
    return out;
}

}  // namespace orthovar
