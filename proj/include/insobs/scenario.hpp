// Ground-truth attitude trajectories and ideal IMU streams for static,
// constant-rotation, varying-rate and multi-segment tumbling scenarios.
//
// Truth is propagated in closed form per segment (fixed rotation axis =>
// analytic angle integral), so no discretization error enters the streams.
#pragma once

#include <cstdint>
#include <vector>

#include "insobs/attitude.hpp"
#include "insobs/earth.hpp"

namespace insobs {

enum class SegmentKind { Static, ConstRotation, FixedAxisVaryingRate };

/// rate(t) = bias + amplitude * sin(angular_frequency * (t - t_start) + phase)
struct RateProfile {
    double bias = 0.0;               // [rad/s]
    double amplitude = 0.0;          // [rad/s]
    double angular_frequency = 0.0;  // [rad/s]
    double phase = 0.0;              // [rad]
};

struct ScenarioSegment {
    SegmentKind kind = SegmentKind::Static;
    Vec3 axis_b = Vec3::UnitY();  // unit rotation axis, body frame
    double rate = 0.0;            // [rad/s], ConstRotation only
    RateProfile profile;          // FixedAxisVaryingRate only
    double t_start = 0.0;         // [s]
    double t_end = 0.0;           // [s]
};

struct Scenario {
    EarthParams earth = EarthParams::at(deg_to_rad(28.2204), 60.0);
    EulerAngles initial_euler;
    std::vector<ScenarioSegment> segments;  // sorted, non-overlapping; gaps are static
    double sample_rate = 100.0;             // [Hz]
    double duration = 0.0;                  // [s]
    Vec3 true_bg = Vec3::Zero();            // [rad/s]
    Vec3 true_ba = Vec3::Zero();            // [m/s^2]
};

/// One timestamped IMU sample. Derivative fields are meaningful only when the
/// corresponding flag is set (analytic emission inside rotation segments, or
/// finite differencing).
struct ImuRecord {
    double t = 0.0;
    Vec3 omega_ib_b = Vec3::Zero();  // [rad/s]
    Vec3 f_b = Vec3::Zero();         // [m/s^2]
    bool has_d1 = false;
    bool has_d2 = false;
    Vec3 d1_omega = Vec3::Zero();  // [rad/s^2]
    Vec3 d2_omega = Vec3::Zero();  // [rad/s^3]
    Vec3 d1_f = Vec3::Zero();      // [m/s^3]
    Vec3 d2_f = Vec3::Zero();      // [m/s^4]
    int interval = -1;             // timeline interval index
};

struct TruthSample {
    double t = 0.0;
    AttitudeDCM C_bn;
    Vec3 omega_nb_b = Vec3::Zero();
    Vec3 omega_nb_dot_b = Vec3::Zero();
    Vec3 omega_nb_ddot_b = Vec3::Zero();
    Vec3 g_b = Vec3::Zero();       // C_bn^T * g_n
    Vec3 omega_ie_b = Vec3::Zero();  // C_bn^T * omega_ie_n
    bool in_rotation = false;
    int interval = -1;
};

/// Scenario timeline: the segment list snapped to the sample grid with the
/// implicit static gaps made explicit. Interval i owns sample indices
/// [k0, k1); the final interval also owns the last sample.
struct Timeline {
    struct Interval {
        long k0 = 0;
        long k1 = 0;
        ScenarioSegment seg;
        int source_index = -1;  // index into Scenario::segments, -1 for gaps
    };
    std::vector<Interval> intervals;
    double sample_rate = 0.0;
    long n_samples = 0;  // samples are 0..n_samples inclusive

    /// Index of the interval owning sample k.
    int interval_of(long k) const;
};

/// Validates the scenario and builds its timeline. Throws ValidationError on
/// overlapping/unsorted segments, zero-rate constant rotations, non-unit
/// axes, out-of-range spans or a polar location.
Timeline build_timeline(const Scenario& s);

std::vector<TruthSample> integrate_truth(const Scenario& s, const Timeline& tl);

/// omega_ib = omega_nb + omega_ie_b + bg;  f = -g_b + ba.
std::vector<ImuRecord> emit_imu(std::span<const TruthSample> truth, const Vec3& true_bg,
                                const Vec3& true_ba);

/// Fills d1/d2 of one record from the truth sample at the same instant.
/// Throws OutsideRotation for static samples. For constant-rotation samples
/// the chained-derivative identities are self-checked to 1e-12.
void analytic_derivatives(const TruthSample& truth, ImuRecord& rec);

/// Stream version: fills every rotation-segment sample, leaves statics alone.
void fill_analytic_derivatives(std::span<const TruthSample> truth, std::vector<ImuRecord>& recs);

/// Central finite differences of order 2h, limited to samples whose stencil
/// stays inside one interval; boundary samples keep derivatives absent.
/// Throws SegmentTooShort when a rotation interval has fewer than 2h+1
/// samples, std::invalid_argument for unsupported halfwidths (1 and 2).
void finite_diff_derivatives(std::vector<ImuRecord>& recs, const Timeline& tl,
                             int stencil_halfwidth);

/// Adds seeded white Gaussian noise. sigma_g/sigma_a are noise densities
/// (rad/s/sqrt(Hz), m/s^2/sqrt(Hz)); the per-sample standard deviation is
/// sigma * sqrt(sample_rate). Derivative fields are left untouched: noise
/// studies difference the noisy stream afterwards.
void add_noise(std::vector<ImuRecord>& recs, double sigma_g, double sigma_a,
               std::uint64_t seed, double sample_rate);

}  // namespace insobs
