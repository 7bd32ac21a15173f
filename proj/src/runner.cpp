#include "insobs/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

namespace insobs {

namespace {

using nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ordered_json jvec(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

ordered_json jeuler_deg(const AttitudeDCM& c) {
    const EulerAngles e = euler_from_dcm(c);
    return ordered_json{{"roll", rad_to_deg(e.roll)},
                        {"yaw", rad_to_deg(e.yaw)},
                        {"pitch", rad_to_deg(e.pitch)}};
}

void write_text(const std::filesystem::path& p, const std::string& text,
                std::vector<std::string>& files) {
    std::ofstream out(p);
    if (!out) throw IoError("cannot write '" + p.string() + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + p.string() + "'");
    files.push_back(p.string());
}

struct Simulated {
    Timeline tl;
    std::vector<TruthSample> truth;
    std::vector<ImuRecord> records;
};

Simulated simulate(const ExperimentConfig& cfg, bool with_derivatives) {
    Simulated sim;
    sim.tl = build_timeline(cfg.scenario);
    sim.truth = integrate_truth(cfg.scenario, sim.tl);
    sim.records = emit_imu(sim.truth, cfg.scenario.true_bg, cfg.scenario.true_ba);
    if (cfg.noise.enabled) {
        add_noise(sim.records, cfg.noise.gyro_density, cfg.noise.accel_density, cfg.noise.seed,
                  cfg.scenario.sample_rate);
        if (with_derivatives) {
            finite_diff_derivatives(sim.records, sim.tl, 2);
        }
    } else if (with_derivatives) {
        fill_analytic_derivatives(sim.truth, sim.records);
    }
    return sim;
}

std::span<const ImuRecord> interval_span(const Simulated& sim, const Timeline::Interval& iv,
                                         bool is_last) {
    const long k_end = is_last ? iv.k1 + 1 : iv.k1;
    return std::span<const ImuRecord>(sim.records).subspan(iv.k0, k_end - iv.k0);
}

// Max static-manifold residuals over all static samples, relative to the
// natural scales (earth rate, gravity, their product).
ordered_json static_residual_block(const Simulated& sim, const Vec3& bg, const Vec3& ba,
                                   const EarthParams& earth) {
    double rg = 0.0, ra = 0.0, rd = 0.0;
    for (std::size_t k = 0; k < sim.records.size(); ++k) {
        if (sim.truth[k].in_rotation) continue;
        const StaticResiduals r = static_constraint_residuals(sim.records[k], bg, ba, earth);
        rg = std::max(rg, std::abs(r.r_gyro_norm));
        ra = std::max(ra, std::abs(r.r_accel_norm));
        rd = std::max(rd, std::abs(r.r_dot));
    }
    return ordered_json{{"gyro_norm_max_rel", rg / earth.earth_rate},
                        {"accel_norm_max_rel", ra / earth.gravity},
                        {"dot_max_rel", rd / (earth.gravity * earth.earth_rate)}};
}

ordered_json pair_block(const Simulated& sim, const ExperimentConfig& cfg,
                        const CandidatePair& pair) {
    const EarthParams& earth = cfg.scenario.earth;
    ordered_json out;
    out["ba_ms2"] = jvec(pair.ba);
    out["bg_rad_s"] = jvec(pair.bg);
    out["bg_degh"] = jvec(pair.bg.unaryExpr([](double v) { return rads_to_degh(v); }));
    out["feasibility_residual"] = pair.residual;
    const AttitudeDCM c0 = initial_attitude_lsq(sim.records, pair.bg, pair.ba, earth);
    out["attitude_euler_deg"] = jeuler_deg(c0);
    out["replay_residual"] =
        replay_gravity_residual(sim.records, c0, pair.bg, pair.ba, earth);
    out["static_residuals"] = static_residual_block(sim, pair.bg, pair.ba, earth);
    // truth-side scalars for verification
    out["bg_error_rad_s"] = (pair.bg - cfg.scenario.true_bg).norm();
    out["ba_error_ms2"] = (pair.ba - cfg.scenario.true_ba).norm();
    out["attitude_error_rad"] =
        rotation_angle(c0, sim.truth.front().C_bn);
    return out;
}

ordered_json candidate_block(const BiasCandidateSet& cands) {
    ordered_json out;
    out["ba_plus_ms2"] = jvec(cands.accel.plus);
    out["ba_minus_ms2"] = jvec(cands.accel.minus);
    out["bg_plus_degh"] = jvec(cands.gyro.plus.unaryExpr([](double v) { return rads_to_degh(v); }));
    out["bg_minus_degh"] =
        jvec(cands.gyro.minus.unaryExpr([](double v) { return rads_to_degh(v); }));
    out["accel_separation_ms2"] = (cands.accel.plus - cands.accel.minus).norm();
    out["gyro_separation_degh"] =
        rads_to_degh((cands.gyro.plus - cands.gyro.minus).norm());
    out["collapsed_accel"] = cands.accel.collapsed;
    out["collapsed_gyro"] = cands.gyro.collapsed;
    out["accel_max_deviation"] = cands.accel.max_deviation;
    out["gyro_max_deviation"] = cands.gyro.max_deviation;
    return out;
}

ordered_json run_ideal(const Simulated& sim, const ExperimentConfig& cfg, bool varying) {
    const EarthParams& earth = cfg.scenario.earth;
    const SegmentKind want = varying ? SegmentKind::FixedAxisVaryingRate : SegmentKind::ConstRotation;
    const Timeline::Interval* iv = nullptr;
    bool last = false;
    for (std::size_t i = 0; i < sim.tl.intervals.size(); ++i) {
        if (sim.tl.intervals[i].seg.kind == want) {
            iv = &sim.tl.intervals[i];
            last = (i + 1 == sim.tl.intervals.size());
            break;
        }
    }
    if (!iv) throw ValidationError("requested observer has no matching rotation segment");
    const auto seg = interval_span(sim, *iv, last);

    ordered_json out;
    out["segment"] = ordered_json{{"start_s", iv->seg.t_start}, {"end_s", iv->seg.t_end}};

    BiasCandidateSet cands;
    std::vector<CandidatePair> pairs;
    if (!varying) {
        const Vec3 omega = omega_from_const_rotation(seg);
        out["omega_nb_rad_s"] = jvec(omega);
        out["omega_error_rad_s"] =
            (omega - sim.truth[iv->k0].omega_nb_b).norm();
        cands.accel = accel_bias_candidates(omega, seg, earth.gravity);
        cands.gyro = gyro_bias_candidates(omega, seg, earth.earth_rate);
        pairs = feasible_pairs(cands, omega, seg, earth);
    } else {
        const VaryingRateOmega vo = omega_from_varying_rotation(seg);
        auto omega_at = [&vo](std::size_t k) { return vo.omega[k]; };
        Vec3 mean = Vec3::Zero();
        double max_err = 0.0;
        for (std::size_t k = 0; k < vo.omega.size(); ++k) {
            mean += vo.omega[k];
            max_err = std::max(max_err, (vo.omega[k] - sim.truth[iv->k0 + k].omega_nb_b).norm());
        }
        mean /= static_cast<double>(vo.omega.size());
        out["omega_nb_rad_s"] = jvec(mean);
        out["omega_max_error_rad_s"] = max_err;
        out["axis_consistency_rad"] = vo.max_axis_angle;
        cands.accel = accel_bias_candidates(omega_at, seg, earth.gravity);
        cands.gyro = gyro_bias_candidates(omega_at, seg, earth.earth_rate);
        pairs = feasible_pairs(cands, omega_at, seg, earth);
    }
    out["candidates"] = candidate_block(cands);
    ordered_json jp = ordered_json::array();
    for (const CandidatePair& p : pairs) jp.push_back(pair_block(sim, cfg, p));
    out["feasible_pairs"] = jp;
    out["n_feasible"] = pairs.size();
    return out;
}

// Recovered per-segment rotation data for the multi-axis solve.
ordered_json run_multi_axis(const Simulated& sim, const ExperimentConfig& cfg) {
    const EarthParams& earth = cfg.scenario.earth;
    std::vector<SegmentRotation> rots;
    std::vector<std::span<const ImuRecord>> spans;
    for (std::size_t i = 0; i < sim.tl.intervals.size(); ++i) {
        const Timeline::Interval& iv = sim.tl.intervals[i];
        if (iv.seg.kind == SegmentKind::Static) continue;
        const auto seg = interval_span(sim, iv, i + 1 == sim.tl.intervals.size());
        SegmentRotation rot;
        rot.records = seg;
        if (iv.seg.kind == SegmentKind::ConstRotation) {
            const Vec3 omega = omega_from_const_rotation(seg);
            rot.omega.assign(seg.size(), omega);
            rot.mean_axis = omega.normalized();
        } else {
            const VaryingRateOmega vo = omega_from_varying_rotation(seg);
            rot.omega = vo.omega;
            rot.omega_dot.assign(vo.omega.size(), Vec3::Zero());
            for (std::size_t k = 1; k + 1 < vo.omega.size(); ++k) {
                rot.omega_dot[k] = (vo.omega[k + 1] - vo.omega[k - 1]) / (vo.t[k + 1] - vo.t[k - 1]);
            }
            // endpoints keep zero slope estimates; drop them from the stack
            rot.records = seg.subspan(1, seg.size() - 2);
            rot.omega.erase(rot.omega.begin());
            rot.omega.pop_back();
            rot.omega_dot.erase(rot.omega_dot.begin());
            rot.omega_dot.pop_back();
            Vec3 mean = Vec3::Zero();
            for (const Vec3& w : rot.omega) mean += w.normalized();
            rot.mean_axis = mean.normalized();
        }
        rots.push_back(std::move(rot));
        spans.push_back(seg);
    }
    const BiasSolution biases = multi_axis_biases(rots);
    const AttitudeDCM c0 = initial_attitude_lsq(sim.records, biases.bg, biases.ba, earth);

    ordered_json out;
    out["n_segments"] = rots.size();
    out["bg_degh"] = jvec(biases.bg.unaryExpr([](double v) { return rads_to_degh(v); }));
    out["ba_ms2"] = jvec(biases.ba);
    out["bg_error_rad_s"] = (biases.bg - cfg.scenario.true_bg).norm();
    out["ba_error_ms2"] = (biases.ba - cfg.scenario.true_ba).norm();
    out["attitude_euler_deg"] = jeuler_deg(c0);
    out["attitude_error_rad"] = rotation_angle(c0, sim.truth.front().C_bn);
    out["replay_residual"] =
        replay_gravity_residual(sim.records, c0, biases.bg, biases.ba, earth);
    return out;
}

ordered_json run_multiposition(const Simulated& sim, const ExperimentConfig& cfg) {
    constexpr double kMinStatic = 10.0;  // [s] shortest usable posture
    std::vector<StaticWindow> windows;
    for (std::size_t i = 0; i < sim.tl.intervals.size(); ++i) {
        const Timeline::Interval& iv = sim.tl.intervals[i];
        if (iv.seg.kind != SegmentKind::Static) continue;
        if (iv.seg.t_end - iv.seg.t_start < kMinStatic) continue;
        windows.push_back({iv.seg.t_start, iv.seg.t_end});
    }
    const MultipositionSolution sol =
        multiposition_solve(sim.records, windows, cfg.scenario.earth);
    ordered_json out;
    out["n_postures"] = windows.size();
    out["bg_degh"] = jvec(sol.bg.unaryExpr([](double v) { return rads_to_degh(v); }));
    out["ba_ms2"] = jvec(sol.ba);
    out["bg_error_rad_s"] = (sol.bg - cfg.scenario.true_bg).norm();
    out["ba_error_ms2"] = (sol.ba - cfg.scenario.true_ba).norm();
    out["attitude_euler_deg"] = jeuler_deg(sol.C0);
    out["attitude_error_rad"] = rotation_angle(sol.C0, sim.truth.front().C_bn);
    return out;
}

std::string ekf_history_csv(std::span<const EkfHistoryRow> hist) {
    std::string csv =
        "t,roll_deg,yaw_deg,pitch_deg,v_n,v_u,v_e,"
        "bg_x_degh,bg_y_degh,bg_z_degh,ba_x_ms2,ba_y_ms2,ba_z_ms2,"
        "ba_x_ug,ba_y_ug,ba_z_ug,"
        "p_att_x,p_att_y,p_att_z,p_vel_x,p_vel_y,p_vel_z,"
        "p_bg_x,p_bg_y,p_bg_z,p_ba_x,p_ba_y,p_ba_z\n";
    for (const EkfHistoryRow& row : hist) {
        const EulerAngles e = euler_from_dcm(row.state.C_bn);
        csv += fmt(row.t);
        for (double v : {rad_to_deg(e.roll), rad_to_deg(e.yaw), rad_to_deg(e.pitch)}) {
            csv += "," + fmt(v);
        }
        for (int i = 0; i < 3; ++i) csv += "," + fmt(row.state.v_n(i));
        for (int i = 0; i < 3; ++i) csv += "," + fmt(rads_to_degh(row.state.bg(i)));
        for (int i = 0; i < 3; ++i) csv += "," + fmt(row.state.ba(i));
        for (int i = 0; i < 3; ++i) csv += "," + fmt(ms2_to_ug(row.state.ba(i)));
        for (int i = 0; i < 12; ++i) csv += "," + fmt(row.p_diag(i));
        csv += "\n";
    }
    return csv;
}

ordered_json ekf_terminal_block(const Simulated& sim, const ExperimentConfig& cfg,
                                std::span<const EkfHistoryRow> hist) {
    const EkfHistoryRow& last = hist.back();
    const EarthParams& earth = cfg.scenario.earth;
    ordered_json out;
    out["t"] = last.t;
    out["euler_deg"] = jeuler_deg(last.state.C_bn);
    out["v_n_ms"] = jvec(last.state.v_n);
    out["bg_degh"] = jvec(last.state.bg.unaryExpr([](double v) { return rads_to_degh(v); }));
    out["ba_ms2"] = jvec(last.state.ba);
    out["bg_error_rad_s"] = (last.state.bg - cfg.scenario.true_bg).norm();
    out["ba_error_ms2"] = (last.state.ba - cfg.scenario.true_ba).norm();
    // attitude error against truth at the same instant
    const long k = std::lround(last.t * cfg.scenario.sample_rate);
    out["attitude_error_rad"] = rotation_angle(
        last.state.C_bn, sim.truth[std::min<std::size_t>(k, sim.truth.size() - 1)].C_bn);
    out["static_residuals"] = static_residual_block(sim, last.state.bg, last.state.ba, earth);
    double innov_max = 0.0;
    for (const EkfHistoryRow& row : hist) innov_max = std::max(innov_max, row.innovation.norm());
    out["innovation_max_ms"] = innov_max;
    return out;
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg, const std::string& output_dir) {
    const auto start = std::chrono::steady_clock::now();
    RunSummary rs;

    bool needs_derivatives = false;
    for (ObserverKind k : cfg.observers) {
        if (k == ObserverKind::IdealNcr || k == ObserverKind::IdealNfvr ||
            k == ObserverKind::MultiAxis) {
            needs_derivatives = true;
        }
    }
    const Simulated sim = simulate(cfg, needs_derivatives);

    const std::filesystem::path dir = output_dir.empty() ? cfg.output.directory : output_dir;
    std::filesystem::create_directories(dir);

    ordered_json summary;
    summary["schema_version"] = 1;
    summary["config_name"] = cfg.name;
    summary["description"] = cfg.description;
    summary["scenario"] = ordered_json{
        {"latitude_deg", rad_to_deg(cfg.scenario.earth.latitude)},
        {"altitude_m", cfg.scenario.earth.altitude},
        {"gravity_ms2", cfg.scenario.earth.gravity},
        {"earth_rate_rad_s", cfg.scenario.earth.earth_rate},
        {"duration_s", cfg.scenario.duration},
        {"sample_rate_hz", cfg.scenario.sample_rate},
        {"true_bg_degh", jvec(cfg.scenario.true_bg.unaryExpr(
                              [](double v) { return rads_to_degh(v); }))},
        {"true_ba_ms2", jvec(cfg.scenario.true_ba)},
    };
    summary["observers"] = ordered_json::object();

    for (ObserverKind kind : cfg.observers) {
        switch (kind) {
            case ObserverKind::IdealNcr:
                summary["observers"]["ideal_ncr"] = run_ideal(sim, cfg, false);
                break;
            case ObserverKind::IdealNfvr:
                summary["observers"]["ideal_nfvr"] = run_ideal(sim, cfg, true);
                break;
            case ObserverKind::MultiAxis:
                summary["observers"]["multi_axis"] = run_multi_axis(sim, cfg);
                break;
            case ObserverKind::Multiposition:
                summary["observers"]["multiposition"] = run_multiposition(sim, cfg);
                break;
            case ObserverKind::Ekf: {
                const auto hist = ekf_run(sim.records, cfg.scenario.earth, cfg.ekf);
                ordered_json block;
                block["seed"] = cfg.ekf.seed;
                block["terminal"] = ekf_terminal_block(sim, cfg, hist);
                if (cfg.output.csv) {
                    const auto p = dir / (cfg.name + "_ekf.csv");
                    write_text(p, ekf_history_csv(hist), rs.files_written);
                    block["history_csv"] = p.string();
                }
                summary["observers"]["ekf"] = block;
                break;
            }
        }
    }

    if (cfg.output.json) {
        write_text(dir / (cfg.name + "_summary.json"), summary.dump(2) + "\n", rs.files_written);
    }
    rs.summary = std::move(summary);
    rs.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rs;
}

RunSummary monte_carlo(const ExperimentConfig& cfg, const std::string& output_dir) {
    if (!cfg.monte_carlo || cfg.monte_carlo->runs <= 0) {
        throw ValidationError("monte_carlo: config has no monte_carlo block");
    }
    const auto start = std::chrono::steady_clock::now();
    RunSummary rs;
    const int runs = cfg.monte_carlo->runs;
    const Simulated sim = simulate(cfg, false);
    const EarthParams& earth = cfg.scenario.earth;

    struct RunResult {
        std::uint64_t seed = 0;
        bool ok = false;
        std::string error;
        Vec3 bg = Vec3::Zero(), ba = Vec3::Zero();
        double r_gyro = 0.0, r_accel = 0.0, r_dot = 0.0;  // terminal manifold residuals
    };
    std::vector<RunResult> results(runs);

    // Static averages for the sphere/cone residuals (noiseless statics are
    // constant, so any window works; use the whole stream).
    Vec3 w_avg = Vec3::Zero(), f_avg = Vec3::Zero();
    for (const ImuRecord& r : sim.records) {
        w_avg += r.omega_ib_b;
        f_avg += r.f_b;
    }
    w_avg /= static_cast<double>(sim.records.size());
    f_avg /= static_cast<double>(sim.records.size());

    const unsigned n_workers = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= runs) return;
            RunResult& res = results[i];
            res.seed = cfg.monte_carlo->base_seed + static_cast<std::uint64_t>(i);
            try {
                EkfSettings settings = cfg.ekf;
                settings.seed = res.seed;
                const auto hist = ekf_run(sim.records, earth, settings);
                const NavState& s = hist.back().state;
                res.bg = s.bg;
                res.ba = s.ba;
                res.r_gyro = (w_avg - s.bg).norm() - earth.earth_rate;
                res.r_accel = (f_avg - s.ba).norm() - earth.gravity;
                res.r_dot = (w_avg - s.bg).dot(f_avg - s.ba) -
                            earth.gravity * earth.earth_rate * std::sin(earth.latitude);
                res.ok = true;
            } catch (const std::exception& e) {
                res.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    auto percentile = [](std::vector<double> v, double p) {
        if (v.empty()) return 0.0;
        std::sort(v.begin(), v.end());
        const double idx = p * (static_cast<double>(v.size()) - 1.0);
        const std::size_t lo = static_cast<std::size_t>(idx);
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (idx - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };

    std::vector<double> ag, aa, ad;
    std::string csv = "run,seed,ok,bg_x_rad_s,bg_y_rad_s,bg_z_rad_s,ba_x_ms2,ba_y_ms2,ba_z_ms2,"
                      "r_gyro_norm,r_accel_norm,r_dot\n";
    int failed = 0;
    for (int i = 0; i < runs; ++i) {
        const RunResult& r = results[i];
        if (r.ok) {
            ag.push_back(std::abs(r.r_gyro));
            aa.push_back(std::abs(r.r_accel));
            ad.push_back(std::abs(r.r_dot));
        } else {
            ++failed;
        }
        csv += std::to_string(i) + "," + std::to_string(r.seed) + "," + (r.ok ? "1" : "0");
        for (int c = 0; c < 3; ++c) csv += "," + fmt(r.bg(c));
        for (int c = 0; c < 3; ++c) csv += "," + fmt(r.ba(c));
        csv += "," + fmt(r.r_gyro) + "," + fmt(r.r_accel) + "," + fmt(r.r_dot) + "\n";
    }

    ordered_json summary;
    summary["schema_version"] = 1;
    summary["config_name"] = cfg.name;
    summary["runs"] = runs;
    summary["base_seed"] = cfg.monte_carlo->base_seed;
    summary["failed_runs"] = failed;
    summary["residuals"] = ordered_json{
        {"gyro_norm_rel",
         ordered_json{{"p50", percentile(ag, 0.5) / earth.earth_rate},
                      {"p95", percentile(ag, 0.95) / earth.earth_rate},
                      {"max", ag.empty() ? 0.0 : *std::max_element(ag.begin(), ag.end()) /
                                                     earth.earth_rate}}},
        {"accel_norm_rel",
         ordered_json{{"p50", percentile(aa, 0.5) / earth.gravity},
                      {"p95", percentile(aa, 0.95) / earth.gravity},
                      {"max", aa.empty() ? 0.0 : *std::max_element(aa.begin(), aa.end()) /
                                                     earth.gravity}}},
        {"dot_rel",
         ordered_json{
             {"p50", percentile(ad, 0.5) / (earth.gravity * earth.earth_rate)},
             {"p95", percentile(ad, 0.95) / (earth.gravity * earth.earth_rate)},
             {"max", ad.empty() ? 0.0 : *std::max_element(ad.begin(), ad.end()) /
                                            (earth.gravity * earth.earth_rate)}}},
    };

    const std::filesystem::path dir = output_dir.empty() ? cfg.output.directory : output_dir;
    std::filesystem::create_directories(dir);
    if (cfg.output.csv) write_text(dir / (cfg.name + "_mc_runs.csv"), csv, rs.files_written);
    if (cfg.output.json) {
        write_text(dir / (cfg.name + "_mc_summary.json"), summary.dump(2) + "\n", rs.files_written);
    }
    rs.summary = std::move(summary);
    rs.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rs;
}

RunSummary dump_imu(const ExperimentConfig& cfg, bool with_derivatives,
                    const std::string& output_dir) {
    const auto start = std::chrono::steady_clock::now();
    RunSummary rs;
    const Simulated sim = simulate(cfg, with_derivatives);
    std::string csv = "t,wx,wy,wz,fx,fy,fz";
    if (with_derivatives) {
        csv += ",d1wx,d1wy,d1wz,d1fx,d1fy,d1fz,d2wx,d2wy,d2wz,d2fx,d2fy,d2fz";
    }
    csv += "\n";
    for (const ImuRecord& r : sim.records) {
        csv += fmt(r.t);
        for (int i = 0; i < 3; ++i) csv += "," + fmt(r.omega_ib_b(i));
        for (int i = 0; i < 3; ++i) csv += "," + fmt(r.f_b(i));
        if (with_derivatives) {
            if (r.has_d1) {
                for (int i = 0; i < 3; ++i) csv += "," + fmt(r.d1_omega(i));
                for (int i = 0; i < 3; ++i) csv += "," + fmt(r.d1_f(i));
            } else {
                csv += ",,,,,,";
            }
            if (r.has_d2) {
                for (int i = 0; i < 3; ++i) csv += "," + fmt(r.d2_omega(i));
                for (int i = 0; i < 3; ++i) csv += "," + fmt(r.d2_f(i));
            } else {
                csv += ",,,,,,";
            }
        }
        csv += "\n";
    }
    const std::filesystem::path dir = output_dir.empty() ? cfg.output.directory : output_dir;
    std::filesystem::create_directories(dir);
    write_text(dir / (cfg.name + "_imu.csv"), csv, rs.files_written);
    rs.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rs;
}

}  // namespace insobs
