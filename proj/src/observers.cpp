#include "insobs/observers.hpp"

#include <algorithm>
#include <cmath>

namespace insobs {

namespace {

// Gyro increment over [k, k+1] from bias-corrected rates; uses the analytic
// rate derivatives (cubic Hermite quadrature) when both samples carry them.
// The rate is discontinuous at segment boundaries (the right sample already
// carries the next segment's one-sided value), so a step that crosses a
// boundary integrates the left side only.
Vec3 gyro_increment(const ImuRecord& a, const ImuRecord& b, const Vec3& bg) {
    const double dt = b.t - a.t;
    const Vec3 wa = a.omega_ib_b - bg;
    if (a.interval != b.interval) {
        Vec3 th = dt * wa;
        if (a.has_d1) th += 0.5 * dt * dt * a.d1_omega;
        return th;
    }
    const Vec3 wb = b.omega_ib_b - bg;
    // trapezoid plus Hermite end-slope correction for the integral, plus the
    // second-order noncommutativity (coning) term
    Vec3 th = 0.5 * dt * (wa + wb) + (dt * dt / 12.0) * wa.cross(wb);
    if (a.has_d1 && b.has_d1) {
        th += (dt * dt / 12.0) * (a.d1_omega - b.d1_omega);
    }
    return th;
}

}  // namespace

StaticResiduals static_constraint_residuals(const ImuRecord& rec, const Vec3& bg, const Vec3& ba,
                                            const EarthParams& earth) {
    StaticResiduals r;
    const Vec3 w = rec.omega_ib_b - bg;
    const Vec3 f = rec.f_b - ba;
    r.r_gyro_norm = w.norm() - earth.earth_rate;
    r.r_accel_norm = f.norm() - earth.gravity;
    r.r_dot = w.dot(f) - earth.gravity * earth.earth_rate * std::sin(earth.latitude);
    return r;
}

Vec3 omega_from_const_rotation(std::span<const ImuRecord> segment, double cond_limit) {
    Mat3 gram = Mat3::Zero();
    Vec3 rhs = Vec3::Zero();
    for (std::size_t k = 0; k + 1 < segment.size(); ++k) {
        const ImuRecord& a = segment[k];
        const ImuRecord& b = segment[k + 1];
        if (!(a.has_d1 && a.has_d2 && b.has_d1 && b.has_d2)) continue;
        const double w = 0.5 * (b.t - a.t);
        for (const ImuRecord* r : {&a, &b}) {
            const Mat3 sw = skew(r->d1_omega);
            const Mat3 sf = skew(r->d1_f);
            gram += w * (sw * sw + sf * sf);
            rhs += w * (r->d1_omega.cross(r->d2_omega) + r->d1_f.cross(r->d2_f));
        }
    }
    Eigen::JacobiSVD<Mat3> svd(gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(2) <= 0.0 || sv(0) / sv(2) > cond_limit) {
        throw SingularGram("omega_from_const_rotation: derivative directions do not span 3-D");
    }
    return svd.solve(rhs);
}

VaryingRateOmega omega_from_varying_rotation(std::span<const ImuRecord> segment, double fdot_min) {
    VaryingRateOmega out;
    for (const ImuRecord& r : segment) {
        if (!(r.has_d1 && r.has_d2)) continue;
        const double fd = r.d1_f.norm();
        if (fd <= fdot_min) {
            throw VanishingFdot("omega_from_varying_rotation: |d1_f| vanishes (vertical axis?)");
        }
        out.t.push_back(r.t);
        out.omega.push_back(r.d1_f.cross(r.d2_f) / (fd * fd));
    }
    if (out.omega.empty()) {
        throw VanishingFdot("omega_from_varying_rotation: no derivative samples");
    }
    Vec3 mean_axis = Vec3::Zero();
    for (const Vec3& w : out.omega) mean_axis += w.normalized();
    mean_axis.normalize();
    for (const Vec3& w : out.omega) {
        const Vec3 u = w.normalized();
        const double ang = std::atan2(u.cross(mean_axis).norm(), u.dot(mean_axis));
        out.max_axis_angle = std::max(out.max_axis_angle, ang);
    }
    return out;
}

namespace {

// Shared per-sample candidate machinery for both bias kinds. extract() maps a
// record to (cross-equation rhs b, shift s) so that the bias is
// s - m with a x m = b and |m| = m_norm.
BiasPair bias_candidates(std::function<Vec3(std::size_t)> omega_at,
                         std::span<const ImuRecord> segment, double m_norm, double collapse_tol,
                         double consistency_tol,
                         const std::function<std::pair<Vec3, Vec3>(const ImuRecord&, const Vec3&)>&
                             extract) {
    std::vector<Vec3> plus, minus;
    Vec3 ref = Vec3::Zero();
    for (std::size_t k = 0; k < segment.size(); ++k) {
        const ImuRecord& rec = segment[k];
        if (!rec.has_d1) continue;
        const Vec3 w = omega_at(k);
        if (ref.isZero()) ref = w;
        auto [b, shift] = extract(rec, w);
        const CrossNormSolutions sol = cross_with_norm(w, b, m_norm);
        // The +/- labels follow the sign of the axial term along the
        // reference direction so they stay stable if the rate changes sign.
        Vec3 cand_plus = shift - sol.m_minus;
        Vec3 cand_minus = shift - sol.m_plus;
        if (w.dot(ref) < 0.0) std::swap(cand_plus, cand_minus);
        plus.push_back(cand_plus);
        minus.push_back(cand_minus);
    }
    if (plus.empty()) {
        throw std::invalid_argument("bias_candidates: no derivative samples in segment");
    }
    BiasPair out;
    for (std::size_t k = 0; k < plus.size(); ++k) {
        out.plus += plus[k];
        out.minus += minus[k];
    }
    out.plus /= static_cast<double>(plus.size());
    out.minus /= static_cast<double>(minus.size());
    for (std::size_t k = 0; k < plus.size(); ++k) {
        out.max_deviation = std::max(out.max_deviation, (plus[k] - out.plus).norm());
        out.max_deviation = std::max(out.max_deviation, (minus[k] - out.minus).norm());
    }
    if (out.max_deviation > consistency_tol) {
        throw InconsistentSegment("bias_candidates: per-sample candidates disagree");
    }
    out.collapsed = (out.plus - out.minus).norm() <= collapse_tol * 2.0 * m_norm;
    return out;
}

}  // namespace

BiasPair accel_bias_candidates(std::function<Vec3(std::size_t)> omega_at,
                               std::span<const ImuRecord> segment, double gravity,
                               double collapse_tol, double consistency_tol) {
    return bias_candidates(std::move(omega_at), segment, gravity, collapse_tol, consistency_tol,
                           [](const ImuRecord& rec, const Vec3&) {
                               return std::make_pair(Vec3(-rec.d1_f), rec.f_b);
                           });
}

BiasPair accel_bias_candidates(const Vec3& omega_nb, std::span<const ImuRecord> segment,
                               double gravity, double collapse_tol, double consistency_tol) {
    return accel_bias_candidates([omega_nb](std::size_t) { return omega_nb; }, segment, gravity,
                                 collapse_tol, consistency_tol);
}

BiasPair gyro_bias_candidates(std::function<Vec3(std::size_t)> omega_at,
                              std::span<const ImuRecord> segment, double earth_rate,
                              double collapse_tol, double consistency_tol) {
    return bias_candidates(std::move(omega_at), segment, earth_rate, collapse_tol,
                           consistency_tol, [](const ImuRecord& rec, const Vec3& w) {
                               return std::make_pair(Vec3(-rec.d1_omega),
                                                     Vec3(rec.omega_ib_b - w));
                           });
}

BiasPair gyro_bias_candidates(const Vec3& omega_nb, std::span<const ImuRecord> segment,
                              double earth_rate, double collapse_tol, double consistency_tol) {
    return gyro_bias_candidates([omega_nb](std::size_t) { return omega_nb; }, segment, earth_rate,
                                collapse_tol, consistency_tol);
}

std::vector<CandidatePair> feasible_pairs(const BiasCandidateSet& cands,
                                          std::function<Vec3(std::size_t)> omega_at,
                                          std::span<const ImuRecord> segment,
                                          const EarthParams& earth, double tol_rel) {
    std::vector<Vec3> ba_list;
    if (cands.accel.collapsed) {
        ba_list.push_back(0.5 * (cands.accel.plus + cands.accel.minus));
    } else {
        ba_list = {cands.accel.plus, cands.accel.minus};
    }
    std::vector<Vec3> bg_list;
    if (cands.gyro.collapsed) {
        bg_list.push_back(0.5 * (cands.gyro.plus + cands.gyro.minus));
    } else {
        bg_list = {cands.gyro.plus, cands.gyro.minus};
    }

    const double target = earth.gravity * earth.earth_rate * std::sin(earth.latitude);
    const double tol = tol_rel * earth.gravity * earth.earth_rate;

    std::vector<CandidatePair> out;
    for (const Vec3& ba : ba_list) {
        for (const Vec3& bg : bg_list) {
            double acc = 0.0;
            std::size_t n = 0;
            for (std::size_t k = 0; k < segment.size(); ++k) {
                const ImuRecord& rec = segment[k];
                if (!rec.has_d1) continue;
                const Vec3 w = omega_at(k);
                // implied earth rate and gravity in body axes
                const Vec3 wie = rec.omega_ib_b - bg - w;
                const Vec3 gb = ba - rec.f_b;
                acc += -wie.dot(gb) - target;
                ++n;
            }
            if (n == 0) continue;
            const double residual = acc / static_cast<double>(n);
            if (std::abs(residual) < tol) {
                out.push_back({ba, bg, residual});
            }
        }
    }
    if (out.empty()) {
        throw NoFeasiblePair("feasible_pairs: no candidate combination is consistent");
    }
    std::sort(out.begin(), out.end(), [](const CandidatePair& a, const CandidatePair& b) {
        return std::abs(a.residual) < std::abs(b.residual);
    });
    if (out.size() > 2) out.resize(2);
    return out;
}

std::vector<CandidatePair> feasible_pairs(const BiasCandidateSet& cands, const Vec3& omega_nb,
                                          std::span<const ImuRecord> segment,
                                          const EarthParams& earth, double tol_rel) {
    return feasible_pairs(cands, [omega_nb](std::size_t) { return omega_nb; }, segment, earth,
                          tol_rel);
}

AttitudeDCM initial_attitude_lsq(std::span<const ImuRecord> window, const Vec3& bg, const Vec3& ba,
                                 const EarthParams& earth, double cond_limit) {
    if (window.size() < 2) {
        throw IllConditionedGram("initial_attitude_lsq: window too short");
    }
    const double t0 = window.front().t;
    const Vec3 g_n = earth.gravity_n();
    const Vec3 w_ie_n = earth_rate_n(earth);

    // v(t) = B(t)(ba - f) must equal X u(t) with u(t) the gravity direction
    // traced in the start navigation frame and X the unknown nav-to-body map
    // at t0; accumulate the normal-equation integrals.
    Mat3 gram = Mat3::Zero();
    Mat3 cross = Mat3::Zero();
    AttitudeDCM b_mat;  // body(t) -> body(t0)

    auto accumulate = [&](const ImuRecord& rec, const AttitudeDCM& b, double w) {
        const Vec3 u = so3_exp(w_ie_n * (rec.t - t0)) * g_n;
        const Vec3 v = b * (ba - rec.f_b);
        gram += w * (u * u.transpose());
        cross += w * (v * u.transpose());
    };

    for (std::size_t k = 0; k + 1 < window.size(); ++k) {
        const double w = 0.5 * (window[k + 1].t - window[k].t);
        accumulate(window[k], b_mat, w);
        b_mat = b_mat * so3_exp(gyro_increment(window[k], window[k + 1], bg));
        accumulate(window[k + 1], b_mat, w);
    }

    Eigen::SelfAdjointEigenSolver<Mat3> eig(gram);
    const Vec3 ev = eig.eigenvalues();
    if (!(ev(0) > 0.0) || ev(2) / ev(0) > cond_limit) {
        throw IllConditionedGram("initial_attitude_lsq: gravity cone has not opened");
    }
    const Mat3 x = cross * gram.inverse();
    return AttitudeDCM::project(x.transpose());
}

double replay_gravity_residual(std::span<const ImuRecord> window, const AttitudeDCM& c0,
                               const Vec3& bg, const Vec3& ba, const EarthParams& earth) {
    if (window.empty()) return 0.0;
    const double t0 = window.front().t;
    const Vec3 g_n = earth.gravity_n();
    const Vec3 w_ie_n = earth_rate_n(earth);
    AttitudeDCM b_mat;
    double worst = 0.0;
    for (std::size_t k = 0; k < window.size(); ++k) {
        const ImuRecord& rec = window[k];
        const AttitudeDCM n_t = so3_exp(w_ie_n * (rec.t - t0));
        const AttitudeDCM c_bn = n_t.transposed() * c0 * b_mat;
        worst = std::max(worst, (c_bn * (rec.f_b - ba) + g_n).norm());
        if (k + 1 < window.size()) {
            b_mat = b_mat * so3_exp(gyro_increment(rec, window[k + 1], bg));
        }
    }
    return worst;
}

BiasSolution multiposition_biases(std::span<const StaticPosture> postures,
                                  const EarthParams& earth, double eps_rank,
                                  double residual_tol) {
    if (postures.empty()) {
        throw std::invalid_argument("multiposition_biases: no postures");
    }
    std::vector<Vec3> w_pts, f_pts;
    for (const StaticPosture& p : postures) {
        w_pts.push_back(p.omega_avg);
        f_pts.push_back(p.f_avg);
    }
    const double sin_l = std::sin(earth.latitude);
    const double dot_target = earth.gravity * earth.earth_rate * sin_l;

    // Solves the remaining bias once one of the two is known, stacking the
    // dot-product rewrite rows with the sphere-difference rows.
    auto solve_other = [&](const std::vector<Vec3>& known_dirs, const std::vector<Vec3>& own_pts,
                           const std::vector<double>& dot_rhs, double radius) -> Vec3 {
        const std::size_t m = known_dirs.size();
        Eigen::MatrixXd a(m + m - 1, 3);
        Eigen::VectorXd b(m + m - 1);
        for (std::size_t k = 0; k < m; ++k) {
            a.row(k) = known_dirs[k].transpose();
            b(k) = dot_rhs[k];
        }
        for (std::size_t k = 1; k < m; ++k) {
            const Vec3 d = own_pts[k] - own_pts[0];
            a.row(m + k - 1) = 2.0 * d.transpose();
            b(m + k - 1) = own_pts[k].squaredNorm() - own_pts[0].squaredNorm();
        }
        const Vec3 x = a.colPivHouseholderQr().solve(b);
        for (const Vec3& p : own_pts) {
            if (std::abs((p - x).norm() - radius) > residual_tol * radius) {
                throw Inconsistent("multiposition_biases: sphere residual beyond tolerance");
            }
        }
        return x;
    };

    BiasSolution out;
    try {
        const SpherePointSolution sg = point_from_spheres(w_pts, earth.earth_rate, eps_rank);
        if (sg.kind != SpherePointSolution::Kind::Unique) {
            throw CoplanarPositions("multiposition_biases: gyro averages lie in a common plane");
        }
        out.bg = sg.point;
        std::vector<Vec3> dirs;
        std::vector<double> rhs;
        for (std::size_t k = 0; k < postures.size(); ++k) {
            dirs.push_back(w_pts[k] - out.bg);
            rhs.push_back(dirs.back().dot(f_pts[k]) - dot_target);
        }
        out.ba = solve_other(dirs, f_pts, rhs, earth.gravity);
        return out;
    } catch (const CoplanarPositions&) {
        // fall through to the specific-force route
    }
    const SpherePointSolution sa = point_from_spheres(f_pts, earth.gravity, eps_rank);
    if (sa.kind != SpherePointSolution::Kind::Unique) {
        throw CoplanarPositions(
            "multiposition_biases: neither gyro nor accelerometer averages span 3-D");
    }
    out.ba = sa.point;
    std::vector<Vec3> dirs;
    std::vector<double> rhs;
    for (std::size_t k = 0; k < postures.size(); ++k) {
        dirs.push_back(f_pts[k] - out.ba);
        rhs.push_back(dirs.back().dot(w_pts[k]) - dot_target);
    }
    out.bg = solve_other(dirs, w_pts, rhs, earth.earth_rate);
    return out;
}

MultipositionSolution multiposition_solve(std::span<const ImuRecord> stream,
                                          std::span<const StaticWindow> windows,
                                          const EarthParams& earth) {
    std::vector<StaticPosture> postures;
    for (const StaticWindow& w : windows) {
        StaticPosture p;
        std::size_t n = 0;
        for (const ImuRecord& rec : stream) {
            if (rec.t < w.t0 || rec.t > w.t1) continue;
            p.omega_avg += rec.omega_ib_b;
            p.f_avg += rec.f_b;
            ++n;
        }
        if (n == 0) throw std::invalid_argument("multiposition_solve: empty static window");
        p.omega_avg /= static_cast<double>(n);
        p.f_avg /= static_cast<double>(n);
        postures.push_back(p);
    }
    const BiasSolution biases = multiposition_biases(postures, earth);
    MultipositionSolution out;
    out.bg = biases.bg;
    out.ba = biases.ba;
    out.C0 = initial_attitude_lsq(stream, biases.bg, biases.ba, earth);
    return out;
}

BiasSolution multi_axis_biases(std::span<const SegmentRotation> segments, double eps_dir,
                               double cond_limit) {
    if (segments.size() < 2) {
        throw std::invalid_argument("multi_axis_biases: need at least two rotation segments");
    }
    bool independent = false;
    for (std::size_t i = 0; i + 1 < segments.size() && !independent; ++i) {
        for (std::size_t j = i + 1; j < segments.size(); ++j) {
            if (segments[i].mean_axis.cross(segments[j].mean_axis).norm() > eps_dir) {
                independent = true;
                break;
            }
        }
    }
    if (!independent) {
        throw DependentAxes("multi_axis_biases: all segment axes are parallel");
    }

    Mat3 gram = Mat3::Zero();
    Vec3 rhs_g = Vec3::Zero();
    Vec3 rhs_a = Vec3::Zero();
    for (const SegmentRotation& seg : segments) {
        const std::size_t n = std::min(seg.records.size(), seg.omega.size());
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const double w = 0.5 * (seg.records[k + 1].t - seg.records[k].t);
            for (std::size_t kk : {k, k + 1}) {
                const ImuRecord& rec = seg.records[kk];
                if (!rec.has_d1) continue;
                const Vec3& om = seg.omega[kk];
                const Vec3 om_dot =
                    seg.omega_dot.empty() ? Vec3(Vec3::Zero()) : seg.omega_dot[kk];
                const Mat3 sx = skew(om);
                gram += w * (sx.transpose() * sx);
                rhs_g += w * sx.transpose() * (rec.d1_omega + om.cross(rec.omega_ib_b) - om_dot);
                rhs_a += w * sx.transpose() * (rec.d1_f + om.cross(rec.f_b));
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(gram);
    const Vec3 ev = eig.eigenvalues();
    if (!(ev(0) > 0.0) || ev(2) / ev(0) > cond_limit) {
        throw DependentAxes("multi_axis_biases: stacked system is rank deficient");
    }
    BiasSolution out;
    const Mat3 vmat = eig.eigenvectors();
    out.bg = vmat * (vmat.transpose() * rhs_g).cwiseQuotient(ev);
    out.ba = vmat * (vmat.transpose() * rhs_a).cwiseQuotient(ev);
    return out;
}

Vec3 accel_aided_resolve(const Vec3& omega_nb, std::span<const ImuRecord> records,
                         std::span<const VelocityRefSample> velocity, const EarthParams& earth,
                         double rank_tol) {
    if (records.size() != velocity.size()) {
        throw std::invalid_argument("accel_aided_resolve: records and velocity must align");
    }
    const Vec3 g_n = earth.gravity_n();
    const Vec3 w_ie_n = earth_rate_n(earth);
    const Mat3 sx = skew(omega_nb);

    Mat3 gram = Mat3::Zero();
    Vec3 rhs = Vec3::Zero();
    for (std::size_t k = 0; k < records.size(); ++k) {
        const ImuRecord& rec = records[k];
        if (!rec.has_d1) continue;
        const VelocityRefSample& vs = velocity[k];
        const Vec3 u = vs.v_dot + 2.0 * w_ie_n.cross(vs.v) - g_n;
        const Vec3 u_dot = vs.v_ddot + 2.0 * w_ie_n.cross(vs.v_dot);
        const double rho_dot = 2.0 * u.dot(u_dot);
        const Vec3 row = 2.0 * rec.d1_f;
        const double c1 = 2.0 * rec.d1_f.dot(rec.f_b) - rho_dot;
        gram += row * row.transpose() + sx.transpose() * sx;
        rhs += row * c1 + sx.transpose() * (omega_nb.cross(rec.f_b) + rec.d1_f);
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(gram);
    const Vec3 ev = eig.eigenvalues();
    if (!(ev(2) > 0.0) || ev(0) <= rank_tol * rank_tol * ev(2)) {
        throw ParallelFdot("accel_aided_resolve: system underdetermined along the rotation axis");
    }
    const Mat3 vmat = eig.eigenvectors();
    return vmat * (vmat.transpose() * rhs).cwiseQuotient(ev);
}

Vec3 resolve_gyro_candidate(const BiasPair& gyro, const Vec3& ba, const Vec3& omega_nb,
                            std::span<const ImuRecord> segment, const EarthParams& earth) {
    const double target = earth.gravity * earth.earth_rate * std::sin(earth.latitude);
    auto residual = [&](const Vec3& bg) {
        double acc = 0.0;
        std::size_t n = 0;
        for (const ImuRecord& rec : segment) {
            const Vec3 wie = rec.omega_ib_b - bg - omega_nb;
            acc += std::abs(-wie.dot(ba - rec.f_b) - target);
            ++n;
        }
        return n ? acc / static_cast<double>(n) : 0.0;
    };
    return residual(gyro.plus) <= residual(gyro.minus) ? gyro.plus : gyro.minus;
}

AcceleratedStub make_accelerated_stub(const Scenario& s, std::span<const TruthSample> truth,
                                      const Vec3& accel_n, double t0, double t1) {
    AcceleratedStub out;
    out.records = emit_imu(truth, s.true_bg, s.true_ba);
    const Vec3 g_n = s.earth.gravity_n();
    const Vec3 w_ie_n = earth_rate_n(s.earth);

    for (std::size_t k = 0; k < out.records.size(); ++k) {
        const TruthSample& ts = truth[k];
        ImuRecord& rec = out.records[k];
        if (ts.in_rotation) analytic_derivatives(ts, rec);

        VelocityRefSample vs;
        vs.t = ts.t;
        if (ts.t >= t0 && ts.t <= t1) {
            vs.v = accel_n * (ts.t - t0);
            vs.v_dot = accel_n;
        } else if (ts.t > t1) {
            vs.v = accel_n * (t1 - t0);
        }
        const Vec3 u = vs.v_dot + 2.0 * w_ie_n.cross(vs.v) - g_n;
        const Mat3 c_nb = ts.C_bn.matrix().transpose();
        rec.f_b = c_nb * u + s.true_ba;
        if (rec.has_d1) {
            const Vec3 u_dot_b = c_nb * (2.0 * w_ie_n.cross(vs.v_dot));
            rec.d1_f = -ts.omega_nb_b.cross(rec.f_b - s.true_ba) + u_dot_b;
            rec.d2_f = -ts.omega_nb_dot_b.cross(rec.f_b - s.true_ba) -
                       ts.omega_nb_b.cross(rec.d1_f) - ts.omega_nb_b.cross(u_dot_b);
        }
        out.velocity.push_back(vs);
    }
    return out;
}

}  // namespace insobs
