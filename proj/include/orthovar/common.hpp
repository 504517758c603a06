#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace orthovar {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Third-order tensor stored as n matrices; `t[i](j, k)`.
using Tensor3 = std::vector<MatX>;

enum class ErrorCode {
    PointOutsideTube,
    NoConvergence,
    OffsetTooLarge,
    DegenerateStencil,
    NonManifoldVertex,
    InvalidMesh,
    BoundaryOffSurface,
    EmptyIntersection,
    ContinuationDiverged,
    PerturbationTooLarge,
    LineSearchFailed,
    MeshDegenerated,
    Collapsed,
    LambdaOutOfRange,
    MetricNotInvertible,
    BoundaryNotOnSurface,
    QuadratureUnderresolved,
    ChartCoverageGap,
    GenericityFailed,
    InvalidConfig,
    IoError,
    UnknownFixture,
};

const char* to_string(ErrorCode code);

/// Numerical failures carry one of the named error kinds; the CLI maps
/// configuration/IO kinds to exit code 2 and everything else to 3.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline constexpr double kPi = 3.14159265358979323846;

/// Orthonormal completion of a unit vector.
inline std::array<Vec3, 2> orthonormal_complement(const Vec3& n) {
    Vec3 a = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    Vec3 t1 = (a - a.dot(n) * n).normalized();
    Vec3 t2 = n.cross(t1);
    return {t1, t2};
}

}  // namespace orthovar
