#include "insobs/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace insobs {

namespace {

// Angle swept from the interval start to local time tau, plus rate and its
// derivatives at tau; all exact per segment kind.
struct Motion {
    double angle = 0.0;
    double rate = 0.0;
    double rate_dot = 0.0;
    double rate_ddot = 0.0;
};

Motion motion_at(const ScenarioSegment& seg, double tau) {
    Motion m;
    switch (seg.kind) {
        case SegmentKind::Static:
            break;
        case SegmentKind::ConstRotation:
            m.angle = seg.rate * tau;
            m.rate = seg.rate;
            break;
        case SegmentKind::FixedAxisVaryingRate: {
            const RateProfile& p = seg.profile;
            const double ph = p.angular_frequency * tau + p.phase;
            m.angle = p.bias * tau +
                      (p.amplitude / p.angular_frequency) * (std::cos(p.phase) - std::cos(ph));
            m.rate = p.bias + p.amplitude * std::sin(ph);
            m.rate_dot = p.amplitude * p.angular_frequency * std::cos(ph);
            m.rate_ddot = -p.amplitude * p.angular_frequency * p.angular_frequency * std::sin(ph);
            break;
        }
    }
    return m;
}

}  // namespace

int Timeline::interval_of(long k) const {
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        if (k >= intervals[i].k0 && (k < intervals[i].k1 || i + 1 == intervals.size())) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

Timeline build_timeline(const Scenario& s) {
    if (!(s.sample_rate > 0.0)) throw ValidationError("scenario: sample_rate must be positive");
    if (!(s.duration > 0.0)) throw ValidationError("scenario: duration must be positive");
    if (std::abs(s.earth.latitude) >= kPi / 2.0) {
        throw ValidationError("scenario: location must not be at a pole");
    }

    Timeline tl;
    tl.sample_rate = s.sample_rate;
    tl.n_samples = std::lround(s.duration * s.sample_rate);

    std::vector<ScenarioSegment> segs(s.segments.begin(), s.segments.end());
    std::sort(segs.begin(), segs.end(),
              [](const ScenarioSegment& a, const ScenarioSegment& b) { return a.t_start < b.t_start; });

    long cursor = 0;
    for (std::size_t si = 0; si < segs.size(); ++si) {
        ScenarioSegment seg = segs[si];
        if (seg.kind != SegmentKind::Static) {
            if (std::abs(seg.axis_b.norm() - 1.0) > 1e-12) {
                throw ValidationError("segment: axis must be a unit vector");
            }
            if (seg.kind == SegmentKind::ConstRotation && seg.rate == 0.0) {
                throw ValidationError("segment: constant rotation rate must be non-zero");
            }
            if (seg.kind == SegmentKind::FixedAxisVaryingRate &&
                seg.profile.angular_frequency <= 0.0) {
                throw ValidationError("segment: rate profile needs a positive angular frequency");
            }
        }
        // Segment boundaries snap to the sample grid.
        const long k0 = std::lround(seg.t_start * s.sample_rate);
        const long k1 = std::lround(seg.t_end * s.sample_rate);
        if (k1 <= k0) throw ValidationError("segment: t_end must exceed t_start");
        if (k0 < cursor) throw ValidationError("segment: segments overlap");
        if (k1 > tl.n_samples) throw ValidationError("segment: extends past scenario duration");
        if (k0 > cursor) {
            Timeline::Interval gap;
            gap.k0 = cursor;
            gap.k1 = k0;
            gap.seg.kind = SegmentKind::Static;
            gap.seg.t_start = cursor / s.sample_rate;
            gap.seg.t_end = k0 / s.sample_rate;
            tl.intervals.push_back(gap);
        }
        Timeline::Interval iv;
        iv.k0 = k0;
        iv.k1 = k1;
        seg.t_start = k0 / s.sample_rate;
        seg.t_end = k1 / s.sample_rate;
        iv.seg = seg;
        iv.source_index = static_cast<int>(si);
        tl.intervals.push_back(iv);
        cursor = k1;
    }
    if (cursor < tl.n_samples || tl.intervals.empty()) {
        Timeline::Interval gap;
        gap.k0 = cursor;
        gap.k1 = tl.n_samples;
        gap.seg.kind = SegmentKind::Static;
        gap.seg.t_start = cursor / s.sample_rate;
        gap.seg.t_end = s.duration;
        tl.intervals.push_back(gap);
    }
    return tl;
}

std::vector<TruthSample> integrate_truth(const Scenario& s, const Timeline& tl) {
    const Vec3 g_n = s.earth.gravity_n();
    const Vec3 w_ie_n = earth_rate_n(s.earth);

    std::vector<TruthSample> out;
    out.reserve(tl.n_samples + 1);

    AttitudeDCM c_start = dcm_from_euler(s.initial_euler);
    for (std::size_t i = 0; i < tl.intervals.size(); ++i) {
        const Timeline::Interval& iv = tl.intervals[i];
        const bool last = (i + 1 == tl.intervals.size());
        const long k_end = last ? iv.k1 : iv.k1 - 1;
        for (long k = iv.k0; k <= k_end; ++k) {
            const double t = k / tl.sample_rate;
            const Motion m = motion_at(iv.seg, t - iv.seg.t_start);
            TruthSample ts;
            ts.t = t;
            ts.C_bn = c_start * so3_exp(iv.seg.axis_b * m.angle);
            ts.omega_nb_b = m.rate * iv.seg.axis_b;
            ts.omega_nb_dot_b = m.rate_dot * iv.seg.axis_b;
            ts.omega_nb_ddot_b = m.rate_ddot * iv.seg.axis_b;
            const Mat3 c_nb = ts.C_bn.matrix().transpose();
            ts.g_b = c_nb * g_n;
            ts.omega_ie_b = c_nb * w_ie_n;
            ts.in_rotation = iv.seg.kind != SegmentKind::Static;
            ts.interval = static_cast<int>(i);
            out.push_back(ts);
        }
        const Motion end = motion_at(iv.seg, iv.seg.t_end - iv.seg.t_start);
        c_start = c_start * so3_exp(iv.seg.axis_b * end.angle);
    }
    return out;
}

std::vector<ImuRecord> emit_imu(std::span<const TruthSample> truth, const Vec3& true_bg,
                                const Vec3& true_ba) {
    std::vector<ImuRecord> out;
    out.reserve(truth.size());
    for (const TruthSample& ts : truth) {
        ImuRecord rec;
        rec.t = ts.t;
        rec.omega_ib_b = ts.omega_nb_b + ts.omega_ie_b + true_bg;
        // The accelerometer senses the reaction to gravity: f = -g_b + ba.
        rec.f_b = -ts.g_b + true_ba;
        rec.interval = ts.interval;
        out.push_back(rec);
    }
    return out;
}

void analytic_derivatives(const TruthSample& truth, ImuRecord& rec) {
    if (!truth.in_rotation) {
        throw OutsideRotation("analytic_derivatives: sample is not in a rotation segment");
    }
    const Vec3& w = truth.omega_nb_b;
    const Vec3& wd = truth.omega_nb_dot_b;
    const Vec3& wie = truth.omega_ie_b;

    rec.d1_omega = wd - w.cross(wie);
    rec.d2_omega = truth.omega_nb_ddot_b - wd.cross(wie) + w.cross(w.cross(wie));
    rec.d1_f = w.cross(truth.g_b);
    rec.d2_f = wd.cross(truth.g_b) - w.cross(w.cross(truth.g_b));
    rec.has_d1 = true;
    rec.has_d2 = true;

    if (wd.isZero(0.0) && truth.omega_nb_ddot_b.isZero(0.0)) {
        // Constant rotation: the second derivatives must close on the first.
        const double sw = std::max(1.0, w.norm() * (rec.d1_omega.norm() + rec.d1_f.norm()));
        if ((rec.d1_omega.cross(w) - rec.d2_omega).norm() > 1e-12 * sw ||
            (rec.d1_f.cross(w) - rec.d2_f).norm() > 1e-12 * sw) {
            throw std::logic_error("analytic_derivatives: derivative chain self-check failed");
        }
    }
}

void fill_analytic_derivatives(std::span<const TruthSample> truth, std::vector<ImuRecord>& recs) {
    const std::size_t n = std::min(truth.size(), recs.size());
    for (std::size_t k = 0; k < n; ++k) {
        if (truth[k].in_rotation) analytic_derivatives(truth[k], recs[k]);
    }
}

void finite_diff_derivatives(std::vector<ImuRecord>& recs, const Timeline& tl,
                             int stencil_halfwidth) {
    if (stencil_halfwidth != 1 && stencil_halfwidth != 2) {
        throw std::invalid_argument("finite_diff_derivatives: halfwidth must be 1 or 2");
    }
    const double dt = 1.0 / tl.sample_rate;
    const int h = stencil_halfwidth;

    for (std::size_t i = 0; i < tl.intervals.size(); ++i) {
        const Timeline::Interval& iv = tl.intervals[i];
        const bool last = (i + 1 == tl.intervals.size());
        const long k_end = last ? iv.k1 : iv.k1 - 1;
        const long count = k_end - iv.k0 + 1;
        if (count < 2 * h + 1) {
            if (iv.seg.kind != SegmentKind::Static) {
                throw SegmentTooShort("finite_diff_derivatives: stencil exceeds segment");
            }
            continue;
        }
        for (long k = iv.k0 + h; k <= k_end - h; ++k) {
            ImuRecord& r = recs[k];
            auto at = [&](long off) -> const ImuRecord& { return recs[k + off]; };
            if (h == 1) {
                r.d1_omega = (at(1).omega_ib_b - at(-1).omega_ib_b) / (2.0 * dt);
                r.d1_f = (at(1).f_b - at(-1).f_b) / (2.0 * dt);
                r.d2_omega = (at(1).omega_ib_b - 2.0 * r.omega_ib_b + at(-1).omega_ib_b) / (dt * dt);
                r.d2_f = (at(1).f_b - 2.0 * r.f_b + at(-1).f_b) / (dt * dt);
            } else {
                r.d1_omega = (-at(2).omega_ib_b + 8.0 * at(1).omega_ib_b - 8.0 * at(-1).omega_ib_b +
                              at(-2).omega_ib_b) /
                             (12.0 * dt);
                r.d1_f = (-at(2).f_b + 8.0 * at(1).f_b - 8.0 * at(-1).f_b + at(-2).f_b) / (12.0 * dt);
                r.d2_omega = (-at(2).omega_ib_b + 16.0 * at(1).omega_ib_b - 30.0 * r.omega_ib_b +
                              16.0 * at(-1).omega_ib_b - at(-2).omega_ib_b) /
                             (12.0 * dt * dt);
                r.d2_f = (-at(2).f_b + 16.0 * at(1).f_b - 30.0 * r.f_b + 16.0 * at(-1).f_b -
                          at(-2).f_b) /
                         (12.0 * dt * dt);
            }
            r.has_d1 = true;
            r.has_d2 = true;
        }
    }
}

void add_noise(std::vector<ImuRecord>& recs, double sigma_g, double sigma_a,
               std::uint64_t seed, double sample_rate) {
    if (sigma_g == 0.0 && sigma_a == 0.0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sg = sigma_g * std::sqrt(sample_rate);
    const double sa = sigma_a * std::sqrt(sample_rate);
    for (ImuRecord& r : recs) {
        for (int i = 0; i < 3; ++i) r.omega_ib_b(i) += sg * gauss(rng);
        for (int i = 0; i < 3; ++i) r.f_b(i) += sa * gauss(rng);
    }
}

}  // namespace insobs
