// Coarse alignment plus a 12-state indirect (error-state) Kalman filter with
// zero-velocity measurements. State order: attitude error phi, velocity
// error dv, gyro bias error dbg, accel bias error dba, each 3-dimensional.
//
// Error convention: delta = estimate - truth, attitude error defined by
// C_hat = (I - skew(phi)) * C. Closed-loop form: every update folds the error
// estimate back into the nominal state and resets the error mean to zero.
#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "insobs/observers.hpp"
#include "insobs/scenario.hpp"

namespace insobs {

using Mat12 = Eigen::Matrix<double, 12, 12>;
using Vec12 = Eigen::Matrix<double, 12, 1>;

struct NavState {
    AttitudeDCM C_bn;
    Vec3 v_n = Vec3::Zero();
    Vec3 bg = Vec3::Zero();
    Vec3 ba = Vec3::Zero();
};

struct ErrorState12 {
    Vec3 phi = Vec3::Zero();
    Vec3 dv = Vec3::Zero();
    Vec3 dbg = Vec3::Zero();
    Vec3 dba = Vec3::Zero();
    Mat12 P = Mat12::Zero();
};

struct EkfSettings {
    double coarse_duration = 20.0;               // [s]
    double init_attitude_sigma = deg_to_rad(1.0);  // coarse perturbation, 1-sigma per axis
    double measurement_rate = 1.0;               // ZUPT rate [Hz]
    std::uint64_t seed = 1;

    // P0 diagonal; attitude block defaults to init_attitude_sigma^2.
    Vec3 p0_attitude = Vec3::Constant(-1.0);     // [rad^2], negative = derive from sigma
    Vec3 p0_velocity = Vec3::Constant(0.1 * 0.1);
    Vec3 p0_gyro_bias = Vec3::Constant(degh_to_rads(0.05) * degh_to_rads(0.05));
    Vec3 p0_accel_bias = Vec3::Constant(ug_to_ms2(100.0) * ug_to_ms2(100.0));

    // Continuous process noise densities (units^2 / s).
    Vec3 q_attitude = Vec3::Constant(1e-18);
    Vec3 q_velocity = Vec3::Constant(1e-18);
    Vec3 q_gyro_bias = Vec3::Constant(1e-16);
    Vec3 q_accel_bias = Vec3::Constant(1e-16);

    Vec3 r_velocity = Vec3::Constant(1e-4 * 1e-4);  // [m^2/s^2]

    Vec3 init_bg = Vec3::Zero();  // initial bias estimates [rad/s]
    Vec3 init_ba = Vec3::Zero();  // [m/s^2]

    enum class Feedback { ClosedLoop };
    Feedback feedback = Feedback::ClosedLoop;

    Vec12 p0_diagonal() const;
    Vec12 q_diagonal() const;
};

/// Analytic gyrocompass alignment from static averages (gravity and earth
/// rate direction pairs), perturbed by a seeded random rotation with the
/// given per-axis sigma. Throws DegenerateDirections near the poles.
AttitudeDCM coarse_align(const Vec3& static_avg_omega, const Vec3& static_avg_f,
                         const EarthParams& earth, double perturb_sigma, std::mt19937_64& rng);

/// One propagation step across [prev.t, cur.t]: nominal state integrated
/// with bias-corrected IMU (Heun, one corrector pass on the earth-rate
/// coupling), covariance with Phi = I + F dt and per-step Q = q * dt.
void ekf_propagate(NavState& state, ErrorState12& err, const ImuRecord& prev,
                   const ImuRecord& cur, const EarthParams& earth, const Vec12& q_diag);

/// Zero-velocity measurement update (Joseph form) with closed-loop feedback;
/// returns the innovation (the velocity estimate before correction).
Vec3 ekf_update_zupt(NavState& state, ErrorState12& err, const EarthParams& earth,
                     const Vec3& r_diag);

struct EkfHistoryRow {
    double t = 0.0;
    NavState state;
    Vec12 p_diag = Vec12::Zero();
    Vec3 innovation = Vec3::Zero();
};

/// Full run: coarse alignment over the leading static samples, then
/// filtering at the configured measurement rate. One history row per
/// measurement epoch (state after the update).
std::vector<EkfHistoryRow> ekf_run(std::span<const ImuRecord> stream, const EarthParams& earth,
                                   const EkfSettings& settings);

/// Variant starting from an explicit initial state at stream index
/// start_index (no coarse phase); used for truth-initialized runs.
std::vector<EkfHistoryRow> ekf_run_from(NavState init, std::size_t start_index,
                                        std::span<const ImuRecord> stream,
                                        const EarthParams& earth, const EkfSettings& settings);

}  // namespace insobs
