#include "insobs/attitude.hpp"

#include <cmath>
#include <stdexcept>

namespace insobs {

Mat3 skew(const Vec3& v) {
    Mat3 m;
    // clang-format off
    m <<    0.0, -v.z(),  v.y(),
          v.z(),    0.0, -v.x(),
         -v.y(),  v.x(),    0.0;
    // clang-format on
    return m;
}

AttitudeDCM AttitudeDCM::from_matrix(const Mat3& m) {
    const Mat3 gram = m.transpose() * m - Mat3::Identity();
    if (gram.cwiseAbs().maxCoeff() > kDcmTol || std::abs(m.determinant() - 1.0) > kDcmTol) {
        throw NotARotation("matrix is not orthonormal with det +1");
    }
    return AttitudeDCM(m, Unchecked{});
}

AttitudeDCM AttitudeDCM::project(const Mat3& m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0.0) {
        Mat3 d = Mat3::Identity();
        d(2, 2) = -1.0;
        r = svd.matrixU() * d * svd.matrixV().transpose();
    }
    return AttitudeDCM(r, Unchecked{});
}

AttitudeDCM so3_exp(const Vec3& rotvec) {
    const double th2 = rotvec.squaredNorm();
    const double th = std::sqrt(th2);
    double a, b;
    if (th < 1e-8) {
        a = 1.0 - th2 / 6.0;
        b = 0.5 - th2 / 24.0;
    } else {
        a = std::sin(th) / th;
        b = (1.0 - std::cos(th)) / th2;
    }
    const Mat3 k = skew(rotvec);
    const Mat3 r = Mat3::Identity() + a * k + b * (k * k);
    return AttitudeDCM(r, AttitudeDCM::Unchecked{});
}

double rotation_angle(const AttitudeDCM& a, const AttitudeDCM& b) {
    const Mat3 r = a.matrix().transpose() * b.matrix();
    const Vec3 v(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    const double s = 0.5 * v.norm();
    const double c = 0.5 * (r.trace() - 1.0);
    return std::atan2(s, c);
}

AttitudeDCM dcm_from_euler(const EulerAngles& e) {
    const double cy = std::cos(e.yaw), sy = std::sin(e.yaw);
    const double cz = std::cos(e.pitch), sz = std::sin(e.pitch);
    const double cx = std::cos(e.roll), sx = std::sin(e.roll);
    Mat3 ry, rz, rx;
    // clang-format off
    ry <<  cy, 0.0,  sy,
          0.0, 1.0, 0.0,
          -sy, 0.0,  cy;
    rz <<  cz, -sz, 0.0,
           sz,  cz, 0.0,
          0.0, 0.0, 1.0;
    rx << 1.0, 0.0, 0.0,
          0.0,  cx, -sx,
          0.0,  sx,  cx;
    // clang-format on
    // Body axes obtained from navigation axes by yaw, pitch, roll in turn;
    // the composed matrix maps body coordinates to navigation coordinates.
    return AttitudeDCM::project(ry * rz * rx);
}

EulerAngles euler_from_dcm(const AttitudeDCM& c) {
    const Mat3& m = c.matrix();
    EulerAngles e;
    e.pitch = std::asin(std::clamp(m(1, 0), -1.0, 1.0));
    e.roll = std::atan2(-m(1, 2), m(1, 1));
    e.yaw = std::atan2(-m(2, 0), m(0, 0));
    return e;
}

AttitudeDCM attitude_from_vector_pairs(std::span<const std::pair<Vec3, Vec3>> pairs,
                                       double eps_dir) {
    if (pairs.size() < 2) {
        throw std::invalid_argument("attitude_from_vector_pairs: need at least two pairs");
    }
    std::vector<std::pair<Vec3, Vec3>> unit;
    unit.reserve(pairs.size());
    for (const auto& [ua, ub] : pairs) {
        const double na = ua.norm(), nb = ub.norm();
        if (na <= 0.0 || nb <= 0.0) {
            throw DegenerateDirections("attitude_from_vector_pairs: zero direction");
        }
        unit.emplace_back(ua / na, ub / nb);
    }
    bool independent = false;
    for (std::size_t i = 0; i + 1 < unit.size() && !independent; ++i) {
        for (std::size_t j = i + 1; j < unit.size(); ++j) {
            if (unit[i].first.cross(unit[j].first).norm() > eps_dir) {
                independent = true;
                break;
            }
        }
    }
    if (!independent) {
        throw DegenerateDirections("attitude_from_vector_pairs: frame-A directions collinear");
    }
    Mat3 profile = Mat3::Zero();
    for (const auto& [ua, ub] : unit) {
        profile += ub * ua.transpose();
    }
    return AttitudeDCM::project(profile);
}

SpherePointSolution point_from_spheres(std::span<const Vec3> points, double r,
                                       double eps_rank, double residual_tol) {
    if (points.empty()) {
        throw std::invalid_argument("point_from_spheres: no points");
    }
    if (!(r > 0.0)) {
        throw std::invalid_argument("point_from_spheres: radius must be positive");
    }
    const Vec3 a1 = points[0];
    Mat3 a = Mat3::Zero();
    Vec3 rhs = Vec3::Zero();
    for (std::size_t k = 1; k < points.size(); ++k) {
        const Vec3 d = points[k] - a1;
        a += d * d.transpose();
        rhs += d * (points[k].squaredNorm() - a1.squaredNorm());
    }
    rhs *= 0.5;

    Eigen::JacobiSVD<Mat3> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sv = svd.singularValues();
    const double smax = sv(0);
    int rank = 0;
    for (int i = 0; i < 3; ++i) {
        if (smax > 0.0 && sv(i) > eps_rank * smax) ++rank;
    }

    SpherePointSolution sol;
    sol.rank = rank;
    // Min-norm least-squares solution of the linear difference system; exact
    // for rank 3, the row-space component otherwise.
    Vec3 x0 = Vec3::Zero();
    for (int i = 0; i < rank; ++i) {
        x0 += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(rhs) / sv(i));
    }

    if (rank == 3) {
        for (const Vec3& p : points) {
            if (std::abs((p - x0).norm() - r) > residual_tol * r) {
                throw Inconsistent("point_from_spheres: sphere residual beyond tolerance");
            }
        }
        sol.kind = SpherePointSolution::Kind::Unique;
        sol.point = x0;
        return sol;
    }
    if (rank == 2) {
        // Solutions form the line x0 + alpha * zeta intersected with the
        // first sphere: zero, one or two points.
        const Vec3 zeta = svd.matrixV().col(2);
        const double c = zeta.dot(x0 - a1);
        const double q = (x0 - a1).squaredNorm() - r * r;
        const double disc = c * c - q;
        if (disc < -residual_tol * r * r) {
            throw Inconsistent("point_from_spheres: coplanar constraints miss the sphere");
        }
        const double root = std::sqrt(std::max(disc, 0.0));
        sol.kind = SpherePointSolution::Kind::TwoPoints;
        sol.point_a = x0 + (-c + root) * zeta;
        sol.point_b = x0 + (-c - root) * zeta;
        return sol;
    }
    if (rank == 1) {
        // Points on a common line: solutions are the circle cut from the
        // first sphere by the plane normal to that line.
        const Vec3 dir = svd.matrixV().col(0);
        const double off = dir.dot(x0 - a1);
        const double rad2 = r * r - off * off;
        if (rad2 < -residual_tol * r * r) {
            throw Inconsistent("point_from_spheres: collinear constraints miss the sphere");
        }
        sol.kind = SpherePointSolution::Kind::Circle;
        sol.center = a1 + off * dir;
        sol.axis = dir;
        sol.radius = std::sqrt(std::max(rad2, 0.0));
        return sol;
    }
    sol.kind = SpherePointSolution::Kind::Sphere;
    sol.center = a1;
    sol.radius = r;
    return sol;
}

Vec3 vector_from_cross_products(std::span<const std::pair<Vec3, Vec3>> samples,
                                double eps_dir) {
    if (samples.empty()) {
        throw std::invalid_argument("vector_from_cross_products: no samples");
    }
    Mat3 gram = Mat3::Zero();
    Vec3 rhs = Vec3::Zero();
    for (const auto& [a, b] : samples) {
        const Mat3 ax = skew(a);
        gram += ax.transpose() * ax;
        rhs += ax.transpose() * b;
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(gram);
    const Vec3 ev = eig.eigenvalues();  // ascending
    // All a_k parallel <=> the stacked skew matrix has rank 2; the smallest
    // eigenvalue then scales with the squared direction spread.
    if (ev(2) <= 0.0 || ev(0) <= eps_dir * eps_dir * ev(2)) {
        throw ConstantDirection("vector_from_cross_products: directions are parallel");
    }
    const Vec3 proj = eig.eigenvectors().transpose() * rhs;
    return eig.eigenvectors() * proj.cwiseQuotient(ev);
}

CrossNormSolutions cross_with_norm(const Vec3& a, const Vec3& b, double m_norm,
                                   double eps_perp, double eps_clamp) {
    const double an = a.norm();
    if (!(an > 0.0)) {
        throw std::invalid_argument("cross_with_norm: |a| must be positive");
    }
    if (m_norm < 0.0) {
        throw std::invalid_argument("cross_with_norm: norm must be non-negative");
    }
    const double bn = b.norm();
    if (std::abs(a.dot(b)) >= eps_perp * std::max(an * bn, 1e-300)) {
        throw NotPerpendicular("cross_with_norm: b is not perpendicular to a");
    }
    const double an2 = an * an;
    const double scale = an2 * m_norm * m_norm;
    double arg = scale - bn * bn;
    if (arg < -eps_clamp * std::max(scale, bn * bn)) {
        throw NormInfeasible("cross_with_norm: |b| exceeds |a||m|");
    }
    CrossNormSolutions sol;
    if (arg <= 0.0) {
        arg = 0.0;
        sol.collapsed = true;
    }
    const Vec3 base = -a.cross(b) / an2;
    const Vec3 axial = a * (std::sqrt(arg) / an2);
    sol.m_plus = axial + base;
    sol.m_minus = -axial + base;
    return sol;
}

}  // namespace insobs
