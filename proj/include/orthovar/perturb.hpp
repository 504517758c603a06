#pragma once

#include "orthovar/common.hpp"
#include "orthovar/config.hpp"
#include "orthovar/domain.hpp"
#include "orthovar/field.hpp"
#include "orthovar/slices.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace orthovar {

/// c exp(-1 / (1 - |y|^2)) on the unit ball of R^m with unit integral, and a
/// tensor-product midpoint rule on [-1, 1]^m.
class MollifierKernel {
public:
    explicit MollifierKernel(int m = 1, int resolution = 256);
    int dim() const { return m_; }
    int resolution() const { return n_; }
    double value(const VecX& y) const;
    VecX gradient(const VecX& y) const;
    /// Midpoint sum of the kernel; 1 up to quadrature error.
    double integral() const { return total_; }
    const std::vector<VecX>& nodes() const { return nodes_; }
    /// Midpoint weights normalized to sum to one.
    const std::vector<double>& weights() const { return weights_; }

private:
    int m_, n_;
    double c_ = 1;
    double total_ = 0;
    std::vector<VecX> nodes_;
    std::vector<double> weights_;
};

/// C-infinity step: 1 on [-1/2, 1/2], 0 outside (-1, 1).
double smooth_step(double s);

using VectorFunction = std::function<VecX(const VecX&)>;

/// u(x, z) = sum_j z_j (eta_{z_j} * psi_j)(x), optionally times alpha(z / eps).
class Extension {
public:
    Extension(VectorFunction psi, int m, int p, std::shared_ptr<const MollifierKernel> kernel, double eps,
              double psi_scale);
    double operator()(const VecX& x, const VecX& z) const;
    int m() const { return m_; }
    int p() const { return p_; }
    double eps() const { return eps_; }

private:
    VectorFunction psi_;
    int m_, p_;
    std::shared_ptr<const MollifierKernel> kernel_;
    double eps_;        // 0: no cutoff
    double psi_scale_;  // length scale on which psi varies; 0: unknown
};

/// psi_scale > 0 enables the QuadratureUnderresolved check.
Extension extend(VectorFunction psi, int m, int p, std::shared_ptr<const MollifierKernel> kernel,
                 double psi_scale = 0);
Extension extend_with_cutoff(VectorFunction psi, int m, int p, std::shared_ptr<const MollifierKernel> kernel,
                             double eps, double psi_scale = 0);

struct SurfaceExtendOptions {
    int charts = 1;        // angular charts with a smooth partition of unity
    double eps = 0;        // band half width; 0 picks 0.25 reach
    int quadrature = 32;   // kernel nodes along the curve
    int table = 2048;      // samples of the chart data per revolution
};

/// Scalar field on S vanishing on a closed slice boundary Gamma_0 with
/// prescribed surface gradient psi_n N there (N the unit co-normal of Gamma_0
/// in S pointing to the positive side of the plane). Each chart is
/// (angle about a centre in the plane, signed offset from the plane).
class SurfaceExtension {
public:
    SurfaceExtension(const ImplicitDomain& domain, const SliceResult& slice, const ScalarField& psi_n,
                     const SurfaceExtendOptions& opt = {});
    double operator()(const Vec3& y) const;
    /// Unit co-normal of Gamma_0 at x on Gamma_0.
    Vec3 conormal(const Vec3& x) const;
    double eps() const { return eps_; }

private:
    struct Chart {
        Vec3 centre;
        std::vector<double> w;  // chart data on a uniform angle grid
    };
    double chart_value(const Chart& c, double theta, double r) const;
    const ImplicitDomain* domain_;
    MatX U_;
    Vec3 n0_, z0_;
    double eps_;
    std::vector<Chart> charts_;
    std::vector<double> nodes_, weights_;
};

/// Rough sampled C^2 norm of a field on S: max |u| + max |grad u| + max |D^2 u|.
double surface_c2_norm(const ImplicitDomain& domain, const ScalarField& u, int grid = 24);

/// Description of a generic perturbation; enough to rebuild it exactly.
struct GenericSpec {
    struct Term {
        Vec3 normal;
        double offset = 0;
        Vec3 centroid;                 // picks the component of the plane section
        std::vector<double> coeffs;    // psi_n = sum a_k cos k phi + b_k sin k phi
        double weight = 1;
    };
    std::uint64_t seed = 7;
    double step = 1e-2;
    int attempt = 0;
    double scale = 1;                  // factor applied to the raw sum
    int resolution = 256;
    SurfaceExtendOptions extend;
    std::vector<Term> terms;
    void write(ConfigSection& out) const;
    static GenericSpec read(const ConfigSection& in);
};

/// sum_j weight_j u_j with u_j the surface extension of the term's psi_n.
ScalarField build_generic_field(const ImplicitDomain& base, const GenericSpec& spec);

/// Domain bounded by g_u(S), g_u(x) = x + u(x) nu^S(x): level d_base + u o pi_S.
class PerturbedDomain : public LevelSetDomain {
public:
    PerturbedDomain(DomainPtr base, NormalPerturbation pert, ConfigSection params = ConfigSection());
    std::string kind() const override { return "perturbed"; }
    double level(const Vec3& x) const override;
    void write_params(ConfigSection& out) const override;
    const ImplicitDomain& base() const { return *base_; }
    DomainPtr base_ptr() const { return base_; }
    const NormalPerturbation& perturbation() const { return pert_; }

private:
    DomainPtr base_;
    const LevelSetDomain* base_ls_ = nullptr;
    NormalPerturbation pert_;
    ConfigSection params_;
};

std::shared_ptr<PerturbedDomain> make_perturbed(DomainPtr base, const GenericSpec& spec);

struct GenericOptions {
    double step = 1e-2;
    std::uint64_t seed = 7;
    int retries = 3;
    int max_slices = 8;
    int modes = 4;              // Fourier modes of psi_n along each boundary
    SliceOptions search;
    SurfaceExtendOptions extend;
};

struct GenericResult {
    GenericSpec spec;
    std::shared_ptr<PerturbedDomain> domain;
    double raw_c2 = 0;            // C^2 estimate before scaling
    int attempts = 0;
    std::vector<SliceResult> remaining;  // slices found after the last attempt
};

/// Perturbs S along combinations of surface extensions until the slice search
/// on g_u(S) comes back empty. Throws GenericityFailed.
GenericResult make_generic(DomainPtr domain, const std::vector<SliceResult>& slices, const GenericOptions& opt = {});

struct L0Check {
    double fd_norm = 0;
    double formula_norm = 0;
    double max_error = 0;
    double relative_error = 0;
};

/// L0 phi(x) = P0^perp (D nu(0) phi + D nu^S(x) [-phi P0^perp xi]) on Gamma_0,
/// with D nu(0) phi = -(<nu^S, xi> grad phi + phi (grad xi)^* nu^S).
Vec3 l0_apply(const ImplicitDomain& domain, const AffinePlane& plane0, const NormalPerturbation& dir,
              const Vec3& x);

/// Central difference of the G-map along `dir` (step eps) against l0_apply.
L0Check l0_check(const ImplicitDomain& domain, const SliceResult& slice, const NormalPerturbation& dir,
                 double eps = 1e-4, int max_points = 64);

}  // namespace orthovar
