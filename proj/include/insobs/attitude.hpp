// SO(3) primitives and the small vector-equation solvers that every observer
// in this project builds on: attitude from direction pairs (Wahba/Procrustes),
// a point from sphere distances, a constant vector from a cross-product
// series, and the two-solution cross product with known norm.
#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

#include "insobs/errors.hpp"

namespace insobs {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Default tolerances. The underlying identities assume exact arithmetic, so
// every solver takes these as explicit arguments with the defaults below.
inline constexpr double kEpsDir = 1e-6;     // direction independence [rad]
inline constexpr double kEpsRank = 1e-8;    // relative singular-value cutoff
inline constexpr double kEpsPerp = 1e-9;    // relative perpendicularity test
inline constexpr double kEpsClamp = 1e-12;  // relative sqrt-argument clamp
inline constexpr double kDcmTol = 1e-9;     // orthonormality / det tolerance

/// Skew-symmetric matrix of v, so that skew(v) * w == v.cross(w).
Mat3 skew(const Vec3& v);

/// Rotation matrix on SO(3). By project convention an AttitudeDCM named C_bn
/// maps body-frame coordinates to navigation-frame coordinates
/// (v_n = C_bn * v_b); the navigation frame is ordered (North, Up, East).
class AttitudeDCM {
  public:
    AttitudeDCM() : m_(Mat3::Identity()) {}

    /// Wraps a matrix after checking orthonormality and det = +1 within
    /// kDcmTol. Throws NotARotation otherwise.
    static AttitudeDCM from_matrix(const Mat3& m);

    /// Nearest rotation matrix (polar decomposition via SVD).
    static AttitudeDCM project(const Mat3& m);

    const Mat3& matrix() const { return m_; }
    AttitudeDCM transposed() const { return AttitudeDCM(m_.transpose(), Unchecked{}); }

    Vec3 operator*(const Vec3& v) const { return m_ * v; }
    AttitudeDCM operator*(const AttitudeDCM& o) const {
        return AttitudeDCM(m_ * o.m_, Unchecked{});
    }

  private:
    struct Unchecked {};
    AttitudeDCM(const Mat3& m, Unchecked) : m_(m) {}
    Mat3 m_;

    friend AttitudeDCM so3_exp(const Vec3&);
};

/// exp(skew(rotvec)) in Rodrigues form; switches to the second-order series
/// below 1e-8 rad to avoid cancellation.
AttitudeDCM so3_exp(const Vec3& rotvec);

/// Rotation angle between two attitudes (geodesic metric on SO(3)), in rad.
double rotation_angle(const AttitudeDCM& a, const AttitudeDCM& b);

/// Euler angles, sequence: first about y (yaw psi), then z (pitch theta),
/// then x (roll phi), all intrinsic, frame rotation from navigation to body.
/// With the (North, Up, East) navigation frame this is the usual
/// yaw-about-vertical / pitch / roll triple.
struct EulerAngles {
    double roll = 0.0;   // phi  [rad]
    double yaw = 0.0;    // psi  [rad]
    double pitch = 0.0;  // theta[rad]
};

AttitudeDCM dcm_from_euler(const EulerAngles& e);
EulerAngles euler_from_dcm(const AttitudeDCM& c);

/// Attitude between two frames from >= 2 direction pairs. Each pair holds the
/// coordinates of one physical direction in frame A and frame B; the result C
/// minimizes sum |C*u_A - u_B|^2 over rotations (orthogonal Procrustes), so
/// it accepts any number of pairs. Directions are normalized internally.
/// Throws DegenerateDirections when all frame-A directions are collinear
/// within eps_dir.
AttitudeDCM attitude_from_vector_pairs(std::span<const std::pair<Vec3, Vec3>> pairs,
                                       double eps_dir = kEpsDir);

/// Solution of |a_k - x| = r for the unknown point x given points a_k.
/// When the points are non-coplanar the solution is unique; the degenerate
/// ranks return a geometric descriptor of the solution set instead.
struct SpherePointSolution {
    enum class Kind { Unique, TwoPoints, Circle, Sphere };
    int rank = 0;  // rank of sum (a_k - a_1)(a_k - a_1)^T
    Kind kind = Kind::Sphere;
    Vec3 point = Vec3::Zero();         // Unique
    Vec3 point_a = Vec3::Zero();       // TwoPoints
    Vec3 point_b = Vec3::Zero();       // TwoPoints
    Vec3 center = Vec3::Zero();        // Circle / Sphere
    Vec3 axis = Vec3::UnitX();         // Circle normal
    double radius = 0.0;               // Circle / Sphere
};

/// Throws Inconsistent when a rank-3 solution violates the sphere residuals
/// beyond residual_tol * r, or when a degenerate-rank solution set is empty.
SpherePointSolution point_from_spheres(std::span<const Vec3> points, double r,
                                       double eps_rank = kEpsRank,
                                       double residual_tol = 1e-6);

/// Constant vector m from samples satisfying a_k x m = b_k, solved in least
/// squares over the stacked system. Throws ConstantDirection when all a_k are
/// parallel (m then undetermined along a).
Vec3 vector_from_cross_products(std::span<const std::pair<Vec3, Vec3>> samples,
                                double eps_dir = kEpsDir);

/// Both solutions of a x m = b with |m| given:
///   m = +/- a * sqrt(|a|^2 |m|^2 - |b|^2) / |a|^2 - a x b / |a|^2.
/// The sqrt argument is clamped to zero when within -eps_clamp (relative);
/// collapsed is true iff the clamp fired, in which case both solutions agree.
struct CrossNormSolutions {
    Vec3 m_plus = Vec3::Zero();
    Vec3 m_minus = Vec3::Zero();
    bool collapsed = false;
};

CrossNormSolutions cross_with_norm(const Vec3& a, const Vec3& b, double m_norm,
                                   double eps_perp = kEpsPerp,
                                   double eps_clamp = kEpsClamp);

}  // namespace insobs
