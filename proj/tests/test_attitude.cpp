#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "insobs/attitude.hpp"
#include "insobs/units.hpp"

using namespace insobs;

namespace {

std::mt19937_64 rng(20260810);

Vec3 random_vec(double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return Vec3(u(rng), u(rng), u(rng));
}

Vec3 random_unit() {
    Vec3 v = random_vec();
    while (v.norm() < 1e-3) v = random_vec();
    return v.normalized();
}

AttitudeDCM random_rotation() { return so3_exp(random_vec(kPi)); }

}  // namespace

TEST_CASE("skew encodes the cross product") {
    CHECK(skew(Vec3::Zero()).isZero(0.0));
    CHECK((skew(Vec3(0, 0, 1)) * Vec3(1, 0, 0) - Vec3(0, 1, 0)).norm() == 0.0);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 v = random_vec(10.0);
        const Vec3 w = random_vec(10.0);
        CHECK((skew(v) * w - v.cross(w)).norm() <= 1e-15 * v.norm() * w.norm() + 1e-300);
        CHECK((skew(v).transpose() + skew(v)).norm() == 0.0);
    }
}

TEST_CASE("so3_exp basics") {
    CHECK((so3_exp(Vec3::Zero()).matrix() - Mat3::Identity()).norm() == 0.0);
    const Vec3 quarter(0, 0, kPi / 2);
    CHECK((so3_exp(quarter) * Vec3(1, 0, 0) - Vec3(0, 1, 0)).norm() < 1e-12);
}

TEST_CASE("so3_exp composition and orthonormality") {
    for (int i = 0; i < 1000; ++i) {
        const Vec3 v = random_vec(3.0);
        const AttitudeDCM whole = so3_exp(v);
        const AttitudeDCM halves = so3_exp(v / 2) * so3_exp(v / 2);
        CHECK((whole.matrix() - halves.matrix()).cwiseAbs().maxCoeff() < 1e-12);

        const Mat3 gram = whole.matrix().transpose() * whole.matrix() - Mat3::Identity();
        CHECK(gram.cwiseAbs().maxCoeff() < 1e-9);
        CHECK(whole.matrix().determinant() == doctest::Approx(1.0).epsilon(1e-9));

        const Vec3 w = random_vec(5.0);
        CHECK(std::abs((whole * w).norm() - w.norm()) < 1e-12 * std::max(1.0, w.norm()));
    }
}

TEST_CASE("so3_exp small-angle branch") {
    const Vec3 tiny(3e-9, -2e-9, 1e-9);
    const AttitudeDCM r = so3_exp(tiny);
    // antisymmetric part recovers the rotation vector
    CHECK(std::abs(r.matrix()(2, 1) - r.matrix()(1, 2) - 2 * tiny.x()) < 1e-24);
    const Mat3 gram = r.matrix().transpose() * r.matrix() - Mat3::Identity();
    CHECK(gram.cwiseAbs().maxCoeff() < 1e-16);
}

TEST_CASE("from_matrix validates") {
    CHECK_THROWS_AS(AttitudeDCM::from_matrix(2.0 * Mat3::Identity()), NotARotation);
    Mat3 reflect = Mat3::Identity();
    reflect(0, 0) = -1.0;
    CHECK_THROWS_AS(AttitudeDCM::from_matrix(reflect), NotARotation);
    CHECK_NOTHROW(AttitudeDCM::from_matrix(random_rotation().matrix()));
}

TEST_CASE("euler round trip and conventions") {
    // yaw about up (y), pitch about east (z), roll about north (x)
    const AttitudeDCM yaw90 = dcm_from_euler({0.0, kPi / 2, 0.0});
    // body x (north before rotation) maps to... yaw +90 about up takes north into -east
    const Vec3 nav_of_bx = yaw90 * Vec3(1, 0, 0);
    CHECK((nav_of_bx - Vec3(0, 0, -1)).norm() < 1e-12);

    for (int i = 0; i < 1000; ++i) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const EulerAngles e{u(rng) * kPi, u(rng) * kPi, u(rng) * kPi / 2 * 0.98};
        const EulerAngles back = euler_from_dcm(dcm_from_euler(e));
        CHECK(rotation_angle(dcm_from_euler(e), dcm_from_euler(back)) < 1e-10);
    }
}

TEST_CASE("rotation_angle metric") {
    const AttitudeDCM a = random_rotation();
    CHECK(rotation_angle(a, a) < 1e-12);
    const Vec3 axis = random_unit();
    for (double ang : {1e-6, 0.1, 1.0, 3.0}) {
        const AttitudeDCM b = a * so3_exp(axis * ang);
        CHECK(rotation_angle(a, b) == doctest::Approx(ang).epsilon(1e-9));
    }
}

TEST_CASE("attitude_from_vector_pairs identity and recovery") {
    const std::pair<Vec3, Vec3> id_pairs[] = {
        {Vec3(1, 0, 0), Vec3(1, 0, 0)},
        {Vec3(0, 1, 0), Vec3(0, 1, 0)},
    };
    CHECK(rotation_angle(attitude_from_vector_pairs(id_pairs), AttitudeDCM()) < 1e-12);

    for (int i = 0; i < 500; ++i) {
        const AttitudeDCM c = random_rotation();
        std::vector<std::pair<Vec3, Vec3>> pairs;
        const int n = 2 + static_cast<int>(rng() % 5);
        for (int k = 0; k < n; ++k) {
            const Vec3 ua = random_vec(4.0) + Vec3(0.1, 0, 0);
            pairs.emplace_back(ua, c * ua);
        }
        // regenerate if accidentally collinear
        bool ok = false;
        for (std::size_t p = 0; p + 1 < pairs.size() && !ok; ++p) {
            for (std::size_t q = p + 1; q < pairs.size(); ++q) {
                if (pairs[p].first.normalized().cross(pairs[q].first.normalized()).norm() > 1e-3) {
                    ok = true;
                    break;
                }
            }
        }
        if (!ok) continue;
        const AttitudeDCM rec = attitude_from_vector_pairs(pairs);
        CHECK((rec.matrix() - c.matrix()).norm() < 1e-10);
        double res = 0.0;
        for (const auto& [ua, ub] : pairs) {
            res += (rec * ua.normalized() - ub.normalized()).squaredNorm();
        }
        CHECK(res < 1e-12);
    }
}

TEST_CASE("attitude_from_vector_pairs degenerate directions") {
    const std::pair<Vec3, Vec3> collinear[] = {
        {Vec3(1, 0, 0), Vec3(0, 1, 0)},
        {Vec3(2, 0, 0), Vec3(0, 2, 0)},
    };
    CHECK_THROWS_AS(attitude_from_vector_pairs(collinear), DegenerateDirections);
}

TEST_CASE("point_from_spheres unique case") {
    // x + 2*{e1, e2, e3, -e3}; the oracle below verifies non-coplanarity and
    // substitutes the solution back into the distance equations.
    const Vec3 x(1, 2, 3);
    const double r = 2.0;
    const std::vector<Vec3> pts = {Vec3(3, 2, 3), Vec3(1, 4, 3), Vec3(1, 2, 5), Vec3(1, 2, 1)};
    Mat3 spread;
    spread.col(0) = pts[1] - pts[0];
    spread.col(1) = pts[2] - pts[0];
    spread.col(2) = pts[3] - pts[0];
    REQUIRE(std::abs(spread.determinant()) > 1e-9);  // oracle: not coplanar
    for (const Vec3& p : pts) REQUIRE(std::abs((p - x).norm() - r) < 1e-12);

    const SpherePointSolution sol = point_from_spheres(pts, r);
    CHECK(sol.rank == 3);
    CHECK(sol.kind == SpherePointSolution::Kind::Unique);
    CHECK((sol.point - x).norm() < 1e-12);
}

TEST_CASE("point_from_spheres randomized round trips") {
    int unique_cases = 0;
    for (int i = 0; i < 10000; ++i) {
        const Vec3 x = random_vec(5.0);
        std::uniform_real_distribution<double> ur(0.1, 10.0);
        const double r = ur(rng);
        const int n = 4 + static_cast<int>(rng() % 4);
        std::vector<Vec3> pts;
        for (int k = 0; k < n; ++k) pts.push_back(x + r * random_unit());
        Mat3 a = Mat3::Zero();
        for (std::size_t k = 1; k < pts.size(); ++k) {
            const Vec3 d = pts[k] - pts[0];
            a += d * d.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Mat3> eig(a);
        if (eig.eigenvalues()(0) < 1e-4 * eig.eigenvalues()(2)) continue;  // nearly coplanar draw
        const SpherePointSolution sol = point_from_spheres(pts, r);
        REQUIRE(sol.kind == SpherePointSolution::Kind::Unique);
        CHECK((sol.point - x).norm() < 1e-10 * std::max(1.0, x.norm()));
        for (const Vec3& p : pts) CHECK(std::abs((p - sol.point).norm() - r) < 1e-10);
        ++unique_cases;
    }
    CHECK(unique_cases > 9000);
}

TEST_CASE("point_from_spheres degenerate ranks") {
    const Vec3 x(0.5, -1.0, 2.0);
    const double r = 3.0;

    SUBCASE("three points are always coplanar") {
        std::vector<Vec3> pts;
        for (int k = 0; k < 3; ++k) pts.push_back(x + r * random_unit());
        const SpherePointSolution sol = point_from_spheres(pts, r);
        CHECK(sol.rank <= 2);
        CHECK(sol.kind != SpherePointSolution::Kind::Unique);
        if (sol.kind == SpherePointSolution::Kind::TwoPoints) {
            const bool hits = (sol.point_a - x).norm() < 1e-8 || (sol.point_b - x).norm() < 1e-8;
            CHECK(hits);
            for (const Vec3& p : pts) {
                CHECK(std::abs((p - sol.point_a).norm() - r) < 1e-8);
                CHECK(std::abs((p - sol.point_b).norm() - r) < 1e-8);
            }
        }
    }
    SUBCASE("collinear centers give a circle") {
        const std::vector<Vec3> pts = {Vec3(0, 0, -1), Vec3(0, 0, 1)};
        const double rr = std::sqrt(2.0);  // any (cos t, sin t, 0) is at sqrt(2) from both
        const SpherePointSolution sol = point_from_spheres(pts, rr);
        CHECK(sol.rank == 1);
        CHECK(sol.kind == SpherePointSolution::Kind::Circle);
        CHECK(std::abs(sol.center.z()) < 1e-12);
        CHECK(std::abs(sol.radius - 1.0) < 1e-12);
        CHECK(std::abs(std::abs(sol.axis.z()) - 1.0) < 1e-12);
    }
    SUBCASE("identical centers give the whole sphere") {
        const Vec3 c0 = x + Vec3(0, 0, r);
        const std::vector<Vec3> pts = {c0, c0, c0};
        const SpherePointSolution sol = point_from_spheres(pts, r);
        CHECK(sol.rank == 0);
        CHECK(sol.kind == SpherePointSolution::Kind::Sphere);
        CHECK((sol.center - c0).norm() == 0.0);
        CHECK(sol.radius == r);
    }
}

TEST_CASE("point_from_spheres inconsistent data") {
    const Vec3 x(1, 2, 3);
    const double r = 2.0;
    std::vector<Vec3> pts = {Vec3(3, 2, 3), Vec3(1, 4, 3), Vec3(1, 2, 5), Vec3(1, 2, 1)};
    pts[2] += Vec3(0.1, 0.1, 0.1);  // break one distance
    CHECK_THROWS_AS(point_from_spheres(pts, r), Inconsistent);
}

TEST_CASE("vector_from_cross_products") {
    SUBCASE("known vector from two axes") {
        const Vec3 m(1, 2, 3);
        const std::pair<Vec3, Vec3> samples[] = {
            {Vec3(1, 0, 0), Vec3(1, 0, 0).cross(m)},
            {Vec3(0, 1, 0), Vec3(0, 1, 0).cross(m)},
        };
        CHECK((vector_from_cross_products(samples) - m).norm() < 1e-12);
    }
    SUBCASE("parallel directions rejected") {
        const Vec3 m(0.3, -0.4, 0.5);
        const std::pair<Vec3, Vec3> samples[] = {
            {Vec3(0, 0, 1), Vec3(0, 0, 1).cross(m)},
            {Vec3(0, 0, -2.5), Vec3(0, 0, -2.5).cross(m)},
        };
        CHECK_THROWS_AS(vector_from_cross_products(samples), ConstantDirection);
    }
    SUBCASE("randomized forward oracle") {
        for (int i = 0; i < 10000; ++i) {
            const Vec3 m = random_vec(5.0);
            std::vector<std::pair<Vec3, Vec3>> samples;
            for (int k = 0; k < 10; ++k) {
                const Vec3 a = random_vec(2.0);
                samples.emplace_back(a, a.cross(m));
            }
            Vec3 rec;
            try {
                rec = vector_from_cross_products(samples);
            } catch (const ConstantDirection&) {
                continue;  // astronomically unlikely draw
            }
            CHECK((rec - m).norm() < 1e-10 * std::max(1.0, m.norm()));
            for (const auto& [a, b] : samples) {
                CHECK((a.cross(rec) - b).norm() < 1e-10 * std::max(1.0, b.norm()));
            }
        }
    }
}

TEST_CASE("cross_with_norm worked examples") {
    SUBCASE("perpendicular m collapses both branches") {
        const auto sol = cross_with_norm(Vec3(0, 0, 1), Vec3(0, 1, 0), 1.0);
        CHECK((sol.m_plus - Vec3(1, 0, 0)).norm() < 1e-12);
        CHECK((sol.m_minus - Vec3(1, 0, 0)).norm() < 1e-12);
        CHECK(sol.collapsed);
        CHECK((Vec3(0, 0, 1).cross(sol.m_plus) - Vec3(0, 1, 0)).norm() < 1e-12);
    }
    SUBCASE("two distinct solutions") {
        const Vec3 a(0, 0, 2), b(0, 2, 0);
        const auto sol = cross_with_norm(a, b, std::sqrt(2.0));
        CHECK((sol.m_plus - Vec3(1, 0, 1)).norm() < 1e-12);
        CHECK((sol.m_minus - Vec3(1, 0, -1)).norm() < 1e-12);
        CHECK_FALSE(sol.collapsed);
        for (const Vec3& m : {sol.m_plus, sol.m_minus}) {
            CHECK((a.cross(m) - b).norm() < 1e-12);
            CHECK(std::abs(m.norm() - std::sqrt(2.0)) < 1e-12);
        }
    }
    SUBCASE("infeasible norm") {
        CHECK_THROWS_AS(cross_with_norm(Vec3(0, 0, 1), Vec3(0, 2, 0), 1.0), NormInfeasible);
    }
    SUBCASE("non-perpendicular input") {
        CHECK_THROWS_AS(cross_with_norm(Vec3(0, 0, 1), Vec3(0, 1, 0.5), 1.0), NotPerpendicular);
    }
}

TEST_CASE("cross_with_norm randomized round trips") {
    for (int i = 0; i < 10000; ++i) {
        const Vec3 a = random_vec(3.0) + Vec3(0.01, 0, 0);
        std::uniform_real_distribution<double> un(0.05, 5.0);
        const double mn = un(rng);
        const Vec3 m = mn * random_unit();
        const Vec3 b = a.cross(m);
        const auto sol = cross_with_norm(a, b, mn);
        for (const Vec3& cand : {sol.m_plus, sol.m_minus}) {
            CHECK((a.cross(cand) - b).norm() < 1e-10 * std::max(1.0, b.norm()));
            CHECK(std::abs(cand.norm() - mn) < 1e-10 * std::max(1.0, mn));
        }
        const bool m_recovered =
            (sol.m_plus - m).norm() < 1e-8 * std::max(1.0, mn) ||
            (sol.m_minus - m).norm() < 1e-8 * std::max(1.0, mn);
        CHECK(m_recovered);
    }
}
