#include "insobs/ekf.hpp"

#include <cmath>

namespace insobs {

namespace {

Vec3 transport_rate(const Vec3& v_n, const EarthParams& earth) {
    const double tan_l = std::tan(earth.latitude);
    return Vec3(v_n.z() / (earth.r_transverse + earth.altitude),
                v_n.z() * tan_l / (earth.r_transverse + earth.altitude),
                -v_n.x() / (earth.r_meridian + earth.altitude));
}

Vec3 omega_nb_est(const NavState& s, const Vec3& gyro, const Vec3& w_in_n) {
    return gyro - s.bg - s.C_bn.matrix().transpose() * w_in_n;
}

Vec3 vdot_est(const NavState& s, const Vec3& f_b, const Vec3& w_ie_n, const EarthParams& earth) {
    const Vec3 w_en_n = transport_rate(s.v_n, earth);
    return s.C_bn * (f_b - s.ba) - (2.0 * w_ie_n + w_en_n).cross(s.v_n) + earth.gravity_n();
}

}  // namespace

Vec12 EkfSettings::p0_diagonal() const {
    Vec12 d;
    const Vec3 att = (p0_attitude(0) >= 0.0)
                         ? p0_attitude
                         : Vec3::Constant(init_attitude_sigma * init_attitude_sigma);
    d.segment<3>(0) = att;
    d.segment<3>(3) = p0_velocity;
    d.segment<3>(6) = p0_gyro_bias;
    d.segment<3>(9) = p0_accel_bias;
    return d;
}

Vec12 EkfSettings::q_diagonal() const {
    Vec12 d;
    d.segment<3>(0) = q_attitude;
    d.segment<3>(3) = q_velocity;
    d.segment<3>(6) = q_gyro_bias;
    d.segment<3>(9) = q_accel_bias;
    return d;
}

AttitudeDCM coarse_align(const Vec3& static_avg_omega, const Vec3& static_avg_f,
                         const EarthParams& earth, double perturb_sigma, std::mt19937_64& rng) {
    const std::pair<Vec3, Vec3> pairs[] = {
        {-static_avg_f, earth.gravity_n()},
        {static_avg_omega, earth_rate_n(earth)},
    };
    AttitudeDCM c = attitude_from_vector_pairs(pairs);
    if (perturb_sigma > 0.0) {
        std::normal_distribution<double> gauss(0.0, perturb_sigma);
        const Vec3 d(gauss(rng), gauss(rng), gauss(rng));
        c = so3_exp(d) * c;
    }
    return c;
}

void ekf_propagate(NavState& state, ErrorState12& err, const ImuRecord& prev,
                   const ImuRecord& cur, const EarthParams& earth, const Vec12& q_diag) {
    const double dt = cur.t - prev.t;
    if (!(dt > 0.0)) throw std::invalid_argument("ekf_propagate: non-positive dt");
    const Vec3 w_ie_n = earth_rate_n(earth);

    // --- covariance, linearized at the incoming state ---
    const Vec3 w_en_n = transport_rate(state.v_n, earth);
    const Vec3 w_in_n = w_ie_n + w_en_n;
    const Vec3 f_n = state.C_bn * (prev.f_b - state.ba);
    Mat12 f_mat = Mat12::Zero();
    f_mat.block<3, 3>(0, 0) = -skew(w_in_n);
    f_mat.block<3, 3>(0, 6) = state.C_bn.matrix();
    f_mat.block<3, 3>(3, 0) = skew(f_n);
    f_mat.block<3, 3>(3, 3) = -skew(2.0 * w_ie_n + w_en_n);
    f_mat.block<3, 3>(3, 9) = -state.C_bn.matrix();
    // bias rows stay zero: the biases are modeled as random constants

    const Mat12 phi = Mat12::Identity() + f_mat * dt;
    err.P = phi * err.P * phi.transpose();
    err.P += (q_diag * dt).asDiagonal();
    err.P = 0.5 * (err.P + err.P.transpose()).eval();

    // --- nominal state, Heun with one corrector pass on the earth-rate term ---
    const Vec3 w0 = omega_nb_est(state, prev.omega_ib_b, w_in_n);
    const Vec3 a0 = vdot_est(state, prev.f_b, w_ie_n, earth);

    if (prev.interval != cur.interval) {
        // IMU rates jump at segment boundaries; the step belongs to the
        // left segment, so integrate one-sided.
        state.C_bn = state.C_bn * so3_exp(dt * w0);
        state.v_n += dt * a0;
        return;
    }

    NavState pred = state;
    pred.C_bn = state.C_bn * so3_exp(0.5 * dt * (w0 + (cur.omega_ib_b - state.bg -
                                                        state.C_bn.matrix().transpose() * w_in_n)));
    pred.v_n = state.v_n + dt * a0;

    const Vec3 w_in_n1 = w_ie_n + transport_rate(pred.v_n, earth);
    const Vec3 w1 = omega_nb_est(pred, cur.omega_ib_b, w_in_n1);
    const Vec3 a1 = vdot_est(pred, cur.f_b, w_ie_n, earth);

    state.C_bn = state.C_bn * so3_exp(0.5 * dt * (w0 + w1));
    state.v_n += 0.5 * dt * (a0 + a1);
}

Vec3 ekf_update_zupt(NavState& state, ErrorState12& err, const EarthParams& earth,
                     const Vec3& r_diag) {
    (void)earth;
    const Vec3 innovation = state.v_n;  // measurement: true velocity is zero

    // H selects the dv block.
    const Eigen::Matrix<double, 3, 12> h =
        [] {
            Eigen::Matrix<double, 3, 12> m = Eigen::Matrix<double, 3, 12>::Zero();
            m.block<3, 3>(0, 3) = Mat3::Identity();
            return m;
        }();

    const Mat3 s = h * err.P * h.transpose() + Mat3(r_diag.asDiagonal());
    const Eigen::Matrix<double, 12, 3> k = err.P * h.transpose() * s.inverse();
    const Vec12 dx = k * innovation;

    const Mat12 ikh = Mat12::Identity() - k * h;
    err.P = ikh * err.P * ikh.transpose() + k * Mat3(r_diag.asDiagonal()) * k.transpose();
    err.P = 0.5 * (err.P + err.P.transpose()).eval();

    err.phi = dx.segment<3>(0);
    err.dv = dx.segment<3>(3);
    err.dbg = dx.segment<3>(6);
    err.dba = dx.segment<3>(9);

    // closed-loop feedback: estimate minus error estimate, then reset
    state.C_bn = so3_exp(err.phi) * state.C_bn;
    state.v_n -= err.dv;
    state.bg -= err.dbg;
    state.ba -= err.dba;
    err.phi.setZero();
    err.dv.setZero();
    err.dbg.setZero();
    err.dba.setZero();
    return innovation;
}

std::vector<EkfHistoryRow> ekf_run_from(NavState init, std::size_t start_index,
                                        std::span<const ImuRecord> stream,
                                        const EarthParams& earth, const EkfSettings& settings) {
    if (start_index >= stream.size()) {
        throw std::invalid_argument("ekf_run_from: start index past end of stream");
    }
    NavState state = init;
    ErrorState12 err;
    err.P = settings.p0_diagonal().asDiagonal();
    const Vec12 q = settings.q_diagonal();

    const double dt = stream.size() > 1 ? stream[1].t - stream[0].t : 0.01;
    const long meas_every = std::max(1L, std::lround(1.0 / (settings.measurement_rate * dt)));

    std::vector<EkfHistoryRow> hist;
    for (std::size_t k = start_index; k + 1 < stream.size(); ++k) {
        ekf_propagate(state, err, stream[k], stream[k + 1], earth, q);
        const std::size_t step = k + 1 - start_index;
        if (step % static_cast<std::size_t>(meas_every) == 0 || k + 2 == stream.size()) {
            EkfHistoryRow row;
            row.innovation = ekf_update_zupt(state, err, earth, settings.r_velocity);
            row.t = stream[k + 1].t;
            row.state = state;
            row.p_diag = err.P.diagonal();
            hist.push_back(row);
        }
    }
    return hist;
}

std::vector<EkfHistoryRow> ekf_run(std::span<const ImuRecord> stream, const EarthParams& earth,
                                   const EkfSettings& settings) {
    if (stream.size() < 2) throw std::invalid_argument("ekf_run: stream too short");

    // coarse phase: average the leading static samples
    const double t_begin = stream.front().t;
    Vec3 w_avg = Vec3::Zero(), f_avg = Vec3::Zero();
    std::size_t n = 0;
    std::size_t start = 0;
    for (std::size_t k = 0; k < stream.size(); ++k) {
        if (stream[k].t - t_begin >= settings.coarse_duration) {
            start = k;
            break;
        }
        w_avg += stream[k].omega_ib_b;
        f_avg += stream[k].f_b;
        ++n;
    }
    if (n == 0 || start == 0) throw std::invalid_argument("ekf_run: coarse window empty");
    w_avg /= static_cast<double>(n);
    f_avg /= static_cast<double>(n);

    std::mt19937_64 rng(settings.seed);
    NavState init;
    init.C_bn = coarse_align(w_avg, f_avg, earth, settings.init_attitude_sigma, rng);
    init.bg = settings.init_bg;
    init.ba = settings.init_ba;
    return ekf_run_from(init, start, stream, earth, settings);
}

}  // namespace insobs
