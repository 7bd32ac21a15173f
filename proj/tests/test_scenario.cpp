#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "insobs/scenario.hpp"

using namespace insobs;

namespace {

Scenario base_scenario(double duration = 60.0) {
    Scenario s;
    s.earth = EarthParams::at(deg_to_rad(28.2204), 60.0);
    s.sample_rate = 100.0;
    s.duration = duration;
    return s;
}

ScenarioSegment const_rotation(const Vec3& axis, double rate_dps, double t0, double t1) {
    ScenarioSegment seg;
    seg.kind = SegmentKind::ConstRotation;
    seg.axis_b = axis.normalized();
    seg.rate = dps_to_rads(rate_dps);
    seg.t_start = t0;
    seg.t_end = t1;
    return seg;
}

ScenarioSegment varying_rotation(const Vec3& axis, double t0, double t1) {
    // 6 + 4 sin(0.04 pi (t - t0)) deg/s
    ScenarioSegment seg;
    seg.kind = SegmentKind::FixedAxisVaryingRate;
    seg.axis_b = axis.normalized();
    seg.profile.bias = dps_to_rads(6.0);
    seg.profile.amplitude = dps_to_rads(4.0);
    seg.profile.angular_frequency = 0.04 * kPi;
    seg.profile.phase = 0.0;
    seg.t_start = t0;
    seg.t_end = t1;
    return seg;
}

}  // namespace

TEST_CASE("all-static scenario holds attitude and spins with the earth") {
    Scenario s = base_scenario(30.0);
    const Timeline tl = build_timeline(s);
    const auto truth = integrate_truth(s, tl);
    REQUIRE(truth.size() == 3001);
    const auto imu = emit_imu(truth, Vec3::Zero(), Vec3::Zero());
    for (const TruthSample& ts : truth) {
        CHECK(ts.omega_nb_b.norm() == 0.0);
        CHECK((ts.C_bn.matrix() - truth.front().C_bn.matrix()).norm() == 0.0);
    }
    for (const ImuRecord& r : imu) {
        CHECK(std::abs(r.omega_ib_b.norm() - s.earth.earth_rate) < 1e-18);
        CHECK((r.omega_ib_b - imu.front().omega_ib_b).norm() == 0.0);
        CHECK(std::abs(r.f_b.norm() - s.earth.gravity) < 1e-12);
    }
}

TEST_CASE("full turn returns the attitude to its start") {
    Scenario s = base_scenario(60.0);
    s.segments.push_back(const_rotation(Vec3(0, 1, 0), 10.0, 10.0, 46.0));  // 360 deg
    const Timeline tl = build_timeline(s);
    const auto truth = integrate_truth(s, tl);
    const long k0 = std::lround(10.0 * s.sample_rate);
    const long k1 = std::lround(46.0 * s.sample_rate);
    CHECK(rotation_angle(truth[k0].C_bn, truth[k1].C_bn) < 1e-10);
    // halfway through, the body is flipped
    CHECK(rotation_angle(truth[k0].C_bn, truth[(k0 + k1) / 2].C_bn) ==
          doctest::Approx(kPi).epsilon(1e-9));
}

TEST_CASE("static/rotate/static switch times land on the configured grid") {
    Scenario s = base_scenario(600.0);
    s.segments.push_back(const_rotation(Vec3(0, 1, 0), 10.0, 100.0, 500.0));
    const Timeline tl = build_timeline(s);
    REQUIRE(tl.intervals.size() == 3);
    const auto truth = integrate_truth(s, tl);
    const double w = dps_to_rads(10.0);
    for (const TruthSample& ts : truth) {
        if (ts.t < 100.0 || ts.t >= 500.0) {
            CHECK(ts.omega_nb_b.norm() == 0.0);
            CHECK_FALSE(ts.in_rotation);
        } else {
            CHECK((ts.omega_nb_b - Vec3(0, w, 0)).norm() < 1e-18);
            CHECK(ts.in_rotation);
        }
    }
}

TEST_CASE("static samples satisfy the three manifold identities") {
    Scenario s = base_scenario(40.0);
    s.initial_euler = {deg_to_rad(20.0), deg_to_rad(30.0), deg_to_rad(10.0)};
    s.true_bg = Vec3::Constant(degh_to_rads(0.01));
    s.true_ba = Vec3::Constant(ug_to_ms2(50.0));
    const Timeline tl = build_timeline(s);
    const auto truth = integrate_truth(s, tl);
    const auto imu = emit_imu(truth, s.true_bg, s.true_ba);
    const double dot_ref = s.earth.gravity * s.earth.earth_rate * std::sin(s.earth.latitude);
    for (std::size_t k = 0; k < imu.size(); k += 97) {
        const Vec3 w = imu[k].omega_ib_b - s.true_bg;
        const Vec3 f = imu[k].f_b - s.true_ba;
        CHECK(std::abs(w.norm() - s.earth.earth_rate) < 1e-12 * s.earth.earth_rate + 1e-18);
        CHECK(std::abs(f.norm() - s.earth.gravity) < 1e-12 * s.earth.gravity);
        CHECK(std::abs(w.dot(f) - dot_ref) < 1e-10 * std::abs(dot_ref));
    }
}

TEST_CASE("analytic derivatives obey the rotation identities") {
    Scenario s = base_scenario(600.0);
    s.initial_euler = {deg_to_rad(-5.0), deg_to_rad(40.0), deg_to_rad(3.0)};
    s.true_bg = Vec3::Constant(degh_to_rads(0.01));
    s.true_ba = Vec3::Constant(ug_to_ms2(50.0));
    s.segments.push_back(const_rotation(Vec3(0, 1, 0), 10.0, 100.0, 500.0));
    const Timeline tl = build_timeline(s);
    const auto truth = integrate_truth(s, tl);
    auto imu = emit_imu(truth, s.true_bg, s.true_ba);
    fill_analytic_derivatives(truth, imu);

    const double w_scale = dps_to_rads(10.0);
    for (std::size_t k = 0; k < imu.size(); k += 211) {
        if (!truth[k].in_rotation) {
            CHECK_FALSE(imu[k].has_d1);
            continue;
        }
        const ImuRecord& r = imu[k];
        const Vec3& w = truth[k].omega_nb_b;
        REQUIRE(r.has_d2);
        // rate equation chain: d1_omega + w x (omega_ib - bg) = 0
        CHECK((r.d1_omega + w.cross(r.omega_ib_b - s.true_bg)).norm() < 1e-10 * w_scale);
        // force equation chain: w x (f - ba) + d1_f = 0
        CHECK((w.cross(r.f_b - s.true_ba) + r.d1_f).norm() < 1e-10 * s.earth.gravity * w_scale);
        // both first derivatives are perpendicular to the rotation axis
        CHECK(std::abs(r.d1_omega.dot(w)) < 1e-15);
        CHECK(std::abs(r.d1_f.dot(w)) < 1e-12);
        // |d1_f|^2 = |w x g_b|^2
        CHECK(r.d1_f.squaredNorm() ==
              doctest::Approx(w.cross(truth[k].g_b).squaredNorm()).epsilon(1e-12));
        // triple-product identities fix the axis direction and magnitude
        const Vec3 lhs_w = r.d1_omega.cross(r.d2_omega);
        const Vec3 rhs_w = -w.cross(truth[k].omega_ie_b).squaredNorm() * w;
        CHECK((lhs_w - rhs_w).norm() < 1e-9 * rhs_w.norm());
        const Vec3 lhs_f = r.d1_f.cross(r.d2_f);
        const Vec3 rhs_f = -w.cross(truth[k].g_b).squaredNorm() * w;
        CHECK((lhs_f - rhs_f).norm() < 1e-9 * rhs_f.norm());
    }
}

TEST_CASE("analytic derivatives refuse static samples") {
    Scenario s = base_scenario(10.0);
    const Timeline tl = build_timeline(s);
    const auto truth = integrate_truth(s, tl);
    auto imu = emit_imu(truth, Vec3::Zero(), Vec3::Zero());
    CHECK_THROWS_AS(analytic_derivatives(truth[5], imu[5]), OutsideRotation);
}

TEST_CASE("vertical rotation at the equator leaves the specific force frozen") {
    Scenario s = base_scenario(60.0);
    s.earth = EarthParams::at(0.0, 0.0);
    s.segments.push_back(const_rotation(Vec3(0, 1, 0), 10.0, 10.0, 50.0));
    const Timeline tl = build_timeline(s);
    const auto truth = integrate_truth(s, tl);
    auto imu = emit_imu(truth, Vec3::Zero(), Vec3::Zero());
    fill_analytic_derivatives(truth, imu);
    for (std::size_t k = 1500; k < 3500; k += 100) {
        REQUIRE(imu[k].has_d1);
        CHECK(imu[k].d1_f.norm() < 1e-18);  // w parallel to g_b
    }
}

TEST_CASE("finite differences are exact on a linear ramp") {
    // synthetic single-interval stream, not tied to a physical scenario
    Timeline tl;
    tl.sample_rate = 100.0;
    tl.n_samples = 200;
    Timeline::Interval iv;
    iv.k0 = 0;
    iv.k1 = 200;
    iv.seg.kind = SegmentKind::ConstRotation;
    tl.intervals.push_back(iv);

    std::vector<ImuRecord> recs;
    const Vec3 slope(0.3, -0.2, 0.1);
    for (long k = 0; k <= 200; ++k) {
        ImuRecord r;
        r.t = k / tl.sample_rate;
        r.omega_ib_b = slope * r.t;
        r.f_b = Vec3(1, 2, 3) + slope * (2.0 * r.t);
        recs.push_back(r);
    }
    finite_diff_derivatives(recs, tl, 2);
    for (long k = 2; k <= 198; k += 7) {
        REQUIRE(recs[k].has_d2);
        CHECK((recs[k].d1_omega - slope).norm() < 1e-12);
        CHECK((recs[k].d1_f - 2.0 * slope).norm() < 1e-11);
        CHECK(recs[k].d2_omega.norm() < 1e-9);
    }
    CHECK_FALSE(recs[0].has_d1);
    CHECK_FALSE(recs[1].has_d1);
    CHECK_FALSE(recs[200].has_d1);
}

TEST_CASE("finite differences track the analytic derivatives of a sinusoid") {
    Scenario s = base_scenario(300.0);
    s.segments.push_back(varying_rotation(Vec3(1, 0, 0), 50.0, 250.0));
    const Timeline tl = build_timeline(s);
    const auto truth = integrate_truth(s, tl);
    auto exact = emit_imu(truth, Vec3::Zero(), Vec3::Zero());
    auto fd = exact;
    fill_analytic_derivatives(truth, exact);
    finite_diff_derivatives(fd, tl, 2);
    double worst = 0.0;
    for (std::size_t k = 0; k < fd.size(); ++k) {
        if (!fd[k].has_d1 || !exact[k].has_d1) continue;
        worst = std::max(worst, (fd[k].d1_omega - exact[k].d1_omega).norm());
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("finite differences reject too-short rotation segments") {
    Scenario s = base_scenario(1.0);
    ScenarioSegment seg = const_rotation(Vec3(0, 1, 0), 10.0, 0.50, 0.52);  // 2 samples
    s.segments.push_back(seg);
    const Timeline tl = build_timeline(s);
    const auto truth = integrate_truth(s, tl);
    auto imu = emit_imu(truth, Vec3::Zero(), Vec3::Zero());
    CHECK_THROWS_AS(finite_diff_derivatives(imu, tl, 2), SegmentTooShort);
}

TEST_CASE("finite-difference noise amplification follows the stencil gain") {
    Scenario s = base_scenario(120.0);
    s.segments.push_back(const_rotation(Vec3(0, 1, 0), 10.0, 10.0, 110.0));
    const Timeline tl = build_timeline(s);
    const auto truth = integrate_truth(s, tl);
    auto clean = emit_imu(truth, Vec3::Zero(), Vec3::Zero());
    auto noisy = clean;
    const double density = 1e-6;  // rad/s/sqrt(Hz)
    add_noise(noisy, density, 0.0, 99, s.sample_rate);
    fill_analytic_derivatives(truth, clean);
    finite_diff_derivatives(noisy, tl, 2);

    const double dt = 1.0 / s.sample_rate;
    const double sigma_d = density * std::sqrt(s.sample_rate);
    // second-derivative stencil (-1,16,-30,16,-1)/(12 dt^2): noise gain
    const double gain = std::sqrt(1.0 + 256.0 + 900.0 + 256.0 + 1.0) / 12.0 / (dt * dt);
    double sq = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < noisy.size(); ++k) {
        if (!noisy[k].has_d2 || !clean[k].has_d2) continue;
        sq += (noisy[k].d2_omega - clean[k].d2_omega).squaredNorm();
        n += 3;
    }
    const double rms = std::sqrt(sq / static_cast<double>(n));
    CHECK(rms == doctest::Approx(gain * sigma_d).epsilon(0.3));
}

TEST_CASE("add_noise determinism and scale") {
    Scenario s = base_scenario(600.0);
    const Timeline tl = build_timeline(s);
    const auto truth = integrate_truth(s, tl);
    const auto clean = emit_imu(truth, Vec3::Zero(), Vec3::Zero());

    auto a = clean;
    add_noise(a, 0.0, 0.0, 7, s.sample_rate);
    for (std::size_t k = 0; k < a.size(); k += 1003) {
        CHECK((a[k].omega_ib_b - clean[k].omega_ib_b).norm() == 0.0);
    }

    auto b = clean;
    auto c = clean;
    add_noise(b, 1e-5, 1e-4, 42, s.sample_rate);
    add_noise(c, 1e-5, 1e-4, 42, s.sample_rate);
    for (std::size_t k = 0; k < b.size(); k += 997) {
        CHECK((b[k].omega_ib_b - c[k].omega_ib_b).norm() == 0.0);
        CHECK((b[k].f_b - c[k].f_b).norm() == 0.0);
    }

    double var = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) {
        var += (b[k].omega_ib_b - clean[k].omega_ib_b).squaredNorm();
    }
    var /= static_cast<double>(3 * b.size());
    CHECK(var == doctest::Approx(1e-10 * s.sample_rate).epsilon(0.05));
}

TEST_CASE("gravity trace spans two dimensions away from the poles") {
    for (double lat_deg : {-60.0, 0.0, 28.2204, 75.0}) {
        const EarthParams p = EarthParams::at(deg_to_rad(lat_deg), 0.0);
        const Vec3 w = earth_rate_n(p);
        const Vec3 u0 = p.gravity_n();
        const Vec3 u1 = so3_exp(w * 300.0) * u0;
        CHECK(u0.cross(u1).norm() > 1e-6);
    }
    // and degenerates to a line at the pole
    EarthParams pole;
    pole.latitude = kPi / 2;
    pole.gravity = 9.8;
    const Vec3 w = earth_rate_n(pole);
    const Vec3 u0 = pole.gravity_n();
    const Vec3 u1 = so3_exp(w * 300.0) * u0;
    CHECK(u0.cross(u1).norm() < 1e-12);
}

TEST_CASE("timeline validation") {
    Scenario s = base_scenario(100.0);
    s.segments.push_back(const_rotation(Vec3(0, 1, 0), 10.0, 10.0, 50.0));
    s.segments.push_back(const_rotation(Vec3(1, 0, 0), 10.0, 40.0, 80.0));
    CHECK_THROWS_AS(build_timeline(s), ValidationError);

    Scenario s2 = base_scenario(100.0);
    s2.segments.push_back(const_rotation(Vec3(0, 1, 0), 10.0, 10.0, 120.0));
    CHECK_THROWS_AS(build_timeline(s2), ValidationError);

    Scenario s3 = base_scenario(100.0);
    ScenarioSegment bad = const_rotation(Vec3(0, 1, 0), 0.0, 10.0, 20.0);
    bad.rate = 0.0;
    s3.segments.push_back(bad);
    CHECK_THROWS_AS(build_timeline(s3), ValidationError);

    Scenario s4 = base_scenario(100.0);
    ScenarioSegment nonunit = const_rotation(Vec3(0, 1, 0), 10.0, 10.0, 20.0);
    nonunit.axis_b = Vec3(0, 2, 0);
    s4.segments.push_back(nonunit);
    CHECK_THROWS_AS(build_timeline(s4), ValidationError);
}
