// Constructive solvers for alignment observability: static-manifold
// residuals, the multiposition solve, the two ideal observers for constant
// and fixed-axis varying rotation, bias candidate enumeration with the
// feasibility filter, the integral attitude solve, the multi-axis solve and
// the acceleration-aided disambiguation.
//
// All solvers are pure functions of their input streams; the ideal observers
// assume exact first/second sensor-output derivatives (analytic emission) and
// degrade gracefully with finite-difference derivatives.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "insobs/scenario.hpp"

namespace insobs {

struct StaticResiduals {
    double r_gyro_norm = 0.0;   // |omega_ib - bg| - Omega
    double r_accel_norm = 0.0;  // |f - ba| - g
    double r_dot = 0.0;         // (omega_ib - bg).(f - ba) - g Omega sin L
};

/// Residuals of the three static-manifold constraints for a static sample.
StaticResiduals static_constraint_residuals(const ImuRecord& rec, const Vec3& bg, const Vec3& ba,
                                            const EarthParams& earth);

/// omega_nb from a constant-rotation stream with derivatives: least-squares
/// solve of the stacked chained-derivative system, trapezoidal quadrature.
/// Samples without derivatives contribute nothing. Throws SingularGram when
/// the accumulated system is rank deficient or its condition number exceeds
/// cond_limit (constant-direction derivatives, e.g. a static stream).
Vec3 omega_from_const_rotation(std::span<const ImuRecord> segment, double cond_limit = 1e10);

/// Per-sample omega_nb(t) = d1_f x d2_f / |d1_f|^2 for fixed-axis
/// varying-magnitude rotation. Throws VanishingFdot when |d1_f| <= fdot_min
/// at an evaluated sample (vertical rotation axes land here).
struct VaryingRateOmega {
    std::vector<double> t;
    std::vector<Vec3> omega;
    double max_axis_angle = 0.0;  // max angle between any sample axis and the mean axis [rad]
};

VaryingRateOmega omega_from_varying_rotation(std::span<const ImuRecord> segment,
                                             double fdot_min = 1e-9);

/// A +/- candidate pair for one sensor bias, averaged over a segment.
/// collapsed means the two solutions coincide (the separation scale is below
/// collapse_tol relative); max_deviation is the worst per-sample departure
/// from the mean, a consistency diagnostic.
struct BiasPair {
    Vec3 plus = Vec3::Zero();
    Vec3 minus = Vec3::Zero();
    bool collapsed = false;
    double max_deviation = 0.0;
};

/// Candidates for the accelerometer bias from omega_nb x (f - ba) = -d1_f
/// with |f - ba| = g. Per-sample evaluation, averaged; throws
/// InconsistentSegment when per-sample results deviate beyond
/// consistency_tol (wrong omega_nb or non-fixed-axis motion).
BiasPair accel_bias_candidates(std::function<Vec3(std::size_t)> omega_at,
                               std::span<const ImuRecord> segment, double gravity,
                               double collapse_tol = 1e-6, double consistency_tol = 1e-6);
BiasPair accel_bias_candidates(const Vec3& omega_nb, std::span<const ImuRecord> segment,
                               double gravity, double collapse_tol = 1e-6,
                               double consistency_tol = 1e-6);

/// Candidates for the gyroscope bias from
/// omega_nb x (omega_ib - bg - omega_nb) = -d1_omega with
/// |omega_ib - bg - omega_nb| = Omega.
BiasPair gyro_bias_candidates(std::function<Vec3(std::size_t)> omega_at,
                              std::span<const ImuRecord> segment, double earth_rate,
                              double collapse_tol = 1e-6, double consistency_tol = 1e-6);
BiasPair gyro_bias_candidates(const Vec3& omega_nb, std::span<const ImuRecord> segment,
                              double earth_rate, double collapse_tol = 1e-6,
                              double consistency_tol = 1e-6);

struct BiasCandidateSet {
    BiasPair accel;
    BiasPair gyro;
};

struct CandidatePair {
    Vec3 ba = Vec3::Zero();
    Vec3 bg = Vec3::Zero();
    double residual = 0.0;  // feasibility residual (mean over the segment)
};

/// Keeps the candidate combinations whose implied earth-rate and gravity
/// vectors reproduce the known dot product -omega_ie_b . g_b = g Omega sin L
/// within tol_rel * g * Omega. Collapsed candidates contribute one entry, so
/// the result has one pair on fully observable geometry and two otherwise.
/// Throws NoFeasiblePair when nothing passes (corrupted stream or wrong
/// omega_nb).
std::vector<CandidatePair> feasible_pairs(const BiasCandidateSet& cands,
                                          std::function<Vec3(std::size_t)> omega_at,
                                          std::span<const ImuRecord> segment,
                                          const EarthParams& earth, double tol_rel = 1e-3);
std::vector<CandidatePair> feasible_pairs(const BiasCandidateSet& cands, const Vec3& omega_nb,
                                          std::span<const ImuRecord> segment,
                                          const EarthParams& earth, double tol_rel = 1e-3);

/// Initial attitude for a given bias pair: integrates the body-to-start
/// rotation from bias-corrected gyro samples and the navigation-frame earth
/// rotation in closed form, accumulates the two gravity-direction integrals
/// by trapezoidal quadrature, inverts the 3x3 Gram matrix and projects the
/// result onto SO(3). Throws IllConditionedGram when the gravity cone has not
/// opened enough (condition number > cond_limit).
AttitudeDCM initial_attitude_lsq(std::span<const ImuRecord> window, const Vec3& bg, const Vec3& ba,
                                 const EarthParams& earth, double cond_limit = 1e12);

/// Max gravity-equation residual |C_bn(t)(f - ba) + g_n| over the window when
/// replaying the trajectory implied by (C0, bg, ba).
double replay_gravity_residual(std::span<const ImuRecord> window, const AttitudeDCM& c0,
                               const Vec3& bg, const Vec3& ba, const EarthParams& earth);

/// Averaged static-posture observation.
struct StaticPosture {
    Vec3 omega_avg = Vec3::Zero();
    Vec3 f_avg = Vec3::Zero();
};

struct BiasSolution {
    Vec3 bg = Vec3::Zero();
    Vec3 ba = Vec3::Zero();
};

/// Biases from >= 4 disconnected static postures whose gyro (or specific
/// force) averages are non-coplanar: sphere solve for one bias, then a
/// stacked linear solve (dot-product rewrite plus sphere differences) for the
/// other. Throws CoplanarPositions when both routes are rank deficient.
BiasSolution multiposition_biases(std::span<const StaticPosture> postures,
                                  const EarthParams& earth, double eps_rank = kEpsRank,
                                  double residual_tol = 1e-6);

struct StaticWindow {
    double t0 = 0.0;
    double t1 = 0.0;
};

struct MultipositionSolution {
    Vec3 bg, ba;
    AttitudeDCM C0;
};

/// Full multiposition solve: averages the stream over each static window,
/// recovers the biases and then the initial attitude over the whole stream.
MultipositionSolution multiposition_solve(std::span<const ImuRecord> stream,
                                          std::span<const StaticWindow> windows,
                                          const EarthParams& earth);

/// One rotation segment prepared for the multi-axis solve: records plus the
/// recovered omega_nb (and its time derivative for varying-rate segments;
/// empty means identically zero, i.e. constant rotation).
struct SegmentRotation {
    std::span<const ImuRecord> records;
    std::vector<Vec3> omega;      // size == records.size()
    std::vector<Vec3> omega_dot;  // empty or size == records.size()
    Vec3 mean_axis = Vec3::Zero();
};

/// Unique biases from >= 2 rotation segments with independent axes, stacking
///   omega x bg = d1_omega + omega x omega_ib [- omega_dot]
///   omega x ba = d1_f + omega x f
/// across all segments. Throws DependentAxes when every pair of segment axes
/// is parallel within eps_dir.
BiasSolution multi_axis_biases(std::span<const SegmentRotation> segments,
                               double eps_dir = kEpsDir, double cond_limit = 1e10);

/// Reference velocity during an acceleration maneuver (navigation frame).
struct VelocityRefSample {
    double t = 0.0;
    Vec3 v = Vec3::Zero();       // [m/s]
    Vec3 v_dot = Vec3::Zero();   // [m/s^2]
    Vec3 v_ddot = Vec3::Zero();  // [m/s^3]
};

/// Accelerometer bias from an accelerated interval with known reference
/// velocity: stacks the squared-norm derivative rows with the cross-product
/// rows and solves for ba. Requires records and velocity samples aligned
/// one-to-one. Throws ParallelFdot when the stacked system stays rank
/// deficient (d1_f never leaves the plane normal to omega, e.g. zero
/// velocity throughout).
Vec3 accel_aided_resolve(const Vec3& omega_nb, std::span<const ImuRecord> records,
                         std::span<const VelocityRefSample> velocity, const EarthParams& earth,
                         double rank_tol = 1e-10);

/// Picks the gyro candidate consistent with a resolved accelerometer bias
/// via the dot-product constraint.
Vec3 resolve_gyro_candidate(const BiasPair& gyro, const Vec3& ba, const Vec3& omega_nb,
                            std::span<const ImuRecord> segment, const EarthParams& earth);

/// IMU records for a rotation scenario with an added constant linear
/// acceleration over [t0, t1] (desk-scale kinematic stub: the location and
/// the transport rate are held fixed). Returns the modified records plus the
/// aligned reference-velocity stream.
struct AcceleratedStub {
    std::vector<ImuRecord> records;
    std::vector<VelocityRefSample> velocity;
};

AcceleratedStub make_accelerated_stub(const Scenario& s, std::span<const TruthSample> truth,
                                      const Vec3& accel_n, double t0, double t1);

/// Everything one ideal-observer pass produces, for reporting.
struct AttitudeSolution {
    Vec3 ba = Vec3::Zero();
    Vec3 bg = Vec3::Zero();
    AttitudeDCM C0;
    double replay_residual = 0.0;
};

struct ObserverReport {
    Vec3 omega_nb = Vec3::Zero();            // constant solve (or mean of the stream)
    std::vector<double> omega_t;             // varying-rate solve, sample times
    std::vector<Vec3> omega_stream;          // varying-rate solve, per-sample omega
    BiasCandidateSet candidates;
    std::vector<CandidatePair> pairs;
    std::vector<AttitudeSolution> attitudes;  // one per feasible pair
    std::map<std::string, double> diagnostics;
};

}  // namespace insobs
