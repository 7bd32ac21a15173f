#include "insobs/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

namespace insobs {

namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
    throw SchemaError("config: " + path + ": " + what);
}

// Rejects keys outside the allowed set, naming the offender.
void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) schema_fail(path, "expected an object");
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key())) schema_fail(path + "." + item.key(), "unknown key");
    }
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) schema_fail(path, "expected a number");
    return j.get<double>();
}

std::uint64_t get_u64(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !j.is_number_integer()) schema_fail(path, "expected an integer");
    return j.get<std::uint64_t>();
}

Vec3 get_vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) schema_fail(path, "expected an array of 3 numbers");
    return Vec3(get_number(j[0], path), get_number(j[1], path), get_number(j[2], path));
}

EulerAngles get_euler_deg(const json& j, const std::string& path) {
    check_keys(j, path, {"roll", "yaw", "pitch"});
    EulerAngles e;
    if (j.contains("roll")) e.roll = deg_to_rad(get_number(j["roll"], path + ".roll"));
    if (j.contains("yaw")) e.yaw = deg_to_rad(get_number(j["yaw"], path + ".yaw"));
    if (j.contains("pitch")) e.pitch = deg_to_rad(get_number(j["pitch"], path + ".pitch"));
    return e;
}

ScenarioSegment parse_segment(const json& j, const std::string& path) {
    check_keys(j, path,
               {"kind", "axis", "rate_dps", "start_s", "end_s", "rate_bias_dps",
                "rate_amplitude_dps", "rate_frequency_hz", "rate_phase_rad"});
    ScenarioSegment seg;
    if (!j.contains("kind")) schema_fail(path, "missing kind");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "static") {
        seg.kind = SegmentKind::Static;
    } else if (kind == "const_rotation") {
        seg.kind = SegmentKind::ConstRotation;
    } else if (kind == "varying_rate") {
        seg.kind = SegmentKind::FixedAxisVaryingRate;
    } else {
        schema_fail(path + ".kind", "must be static, const_rotation or varying_rate");
    }
    if (!j.contains("start_s") || !j.contains("end_s")) schema_fail(path, "missing start_s/end_s");
    seg.t_start = get_number(j["start_s"], path + ".start_s");
    seg.t_end = get_number(j["end_s"], path + ".end_s");
    if (seg.kind != SegmentKind::Static) {
        if (!j.contains("axis")) schema_fail(path, "missing axis");
        seg.axis_b = get_vec3(j["axis"], path + ".axis");
        const double n = seg.axis_b.norm();
        if (n <= 0.0) throw ValidationError("config: " + path + ".axis: zero axis");
        seg.axis_b /= n;
    }
    if (seg.kind == SegmentKind::ConstRotation) {
        if (!j.contains("rate_dps")) schema_fail(path, "missing rate_dps");
        seg.rate = dps_to_rads(get_number(j["rate_dps"], path + ".rate_dps"));
    }
    if (seg.kind == SegmentKind::FixedAxisVaryingRate) {
        if (!j.contains("rate_bias_dps") || !j.contains("rate_amplitude_dps") ||
            !j.contains("rate_frequency_hz")) {
            schema_fail(path, "varying_rate needs rate_bias_dps, rate_amplitude_dps, rate_frequency_hz");
        }
        seg.profile.bias = dps_to_rads(get_number(j["rate_bias_dps"], path + ".rate_bias_dps"));
        seg.profile.amplitude =
            dps_to_rads(get_number(j["rate_amplitude_dps"], path + ".rate_amplitude_dps"));
        seg.profile.angular_frequency =
            2.0 * kPi * get_number(j["rate_frequency_hz"], path + ".rate_frequency_hz");
        if (j.contains("rate_phase_rad")) {
            seg.profile.phase = get_number(j["rate_phase_rad"], path + ".rate_phase_rad");
        }
    }
    return seg;
}

Scenario parse_scenario(const json& j, NoiseSpec& noise) {
    check_keys(j, "scenario",
               {"latitude_deg", "altitude_m", "initial_euler_deg", "sample_rate_hz", "duration_s",
                "gyro_bias_degh", "accel_bias_ug", "segments", "noise"});
    Scenario s;
    double lat_deg = 28.2204;
    double alt = 60.0;
    if (j.contains("latitude_deg")) lat_deg = get_number(j["latitude_deg"], "scenario.latitude_deg");
    if (j.contains("altitude_m")) alt = get_number(j["altitude_m"], "scenario.altitude_m");
    s.earth = EarthParams::at(deg_to_rad(lat_deg), alt);
    if (j.contains("initial_euler_deg")) {
        s.initial_euler = get_euler_deg(j["initial_euler_deg"], "scenario.initial_euler_deg");
    }
    if (j.contains("sample_rate_hz")) {
        s.sample_rate = get_number(j["sample_rate_hz"], "scenario.sample_rate_hz");
    }
    if (!j.contains("duration_s")) schema_fail("scenario", "missing duration_s");
    s.duration = get_number(j["duration_s"], "scenario.duration_s");

    s.true_bg = Vec3::Constant(degh_to_rads(0.01));
    s.true_ba = Vec3::Constant(ug_to_ms2(50.0));
    if (j.contains("gyro_bias_degh")) {
        s.true_bg = get_vec3(j["gyro_bias_degh"], "scenario.gyro_bias_degh")
                        .unaryExpr([](double v) { return degh_to_rads(v); });
    }
    if (j.contains("accel_bias_ug")) {
        s.true_ba = get_vec3(j["accel_bias_ug"], "scenario.accel_bias_ug")
                        .unaryExpr([](double v) { return ug_to_ms2(v); });
    }
    if (j.contains("segments")) {
        if (!j["segments"].is_array()) schema_fail("scenario.segments", "expected an array");
        int idx = 0;
        for (const json& sj : j["segments"]) {
            s.segments.push_back(parse_segment(sj, "scenario.segments[" + std::to_string(idx) + "]"));
            ++idx;
        }
    }
    if (j.contains("noise")) {
        const json& nj = j["noise"];
        check_keys(nj, "scenario.noise", {"gyro_density", "accel_density", "seed"});
        noise.enabled = true;
        if (nj.contains("gyro_density")) {
            noise.gyro_density = get_number(nj["gyro_density"], "scenario.noise.gyro_density");
        }
        if (nj.contains("accel_density")) {
            noise.accel_density = get_number(nj["accel_density"], "scenario.noise.accel_density");
        }
        if (nj.contains("seed")) noise.seed = get_u64(nj["seed"], "scenario.noise.seed");
    }
    return s;
}

EkfSettings parse_ekf(const json& j) {
    check_keys(j, "ekf",
               {"coarse_duration_s", "init_attitude_sigma_deg", "measurement_rate_hz", "seed",
                "p0_attitude_deg", "p0_velocity_ms", "p0_gyro_bias_degh", "p0_accel_bias_ms2",
                "q_attitude", "q_velocity", "q_gyro_bias", "q_accel_bias", "r_velocity_ms",
                "init_gyro_bias_degh", "init_accel_bias_ms2", "init_accel_bias_ug"});
    EkfSettings e;
    if (j.contains("coarse_duration_s")) {
        e.coarse_duration = get_number(j["coarse_duration_s"], "ekf.coarse_duration_s");
    }
    if (j.contains("init_attitude_sigma_deg")) {
        e.init_attitude_sigma =
            deg_to_rad(get_number(j["init_attitude_sigma_deg"], "ekf.init_attitude_sigma_deg"));
    }
    if (j.contains("measurement_rate_hz")) {
        e.measurement_rate = get_number(j["measurement_rate_hz"], "ekf.measurement_rate_hz");
    }
    if (j.contains("seed")) e.seed = get_u64(j["seed"], "ekf.seed");
    auto sq = [](double v) { return v * v; };
    if (j.contains("p0_attitude_deg")) {
        e.p0_attitude = get_vec3(j["p0_attitude_deg"], "ekf.p0_attitude_deg")
                            .unaryExpr([&](double v) { return sq(deg_to_rad(v)); });
    }
    if (j.contains("p0_velocity_ms")) {
        e.p0_velocity = get_vec3(j["p0_velocity_ms"], "ekf.p0_velocity_ms")
                            .unaryExpr([&](double v) { return sq(v); });
    }
    if (j.contains("p0_gyro_bias_degh")) {
        e.p0_gyro_bias = get_vec3(j["p0_gyro_bias_degh"], "ekf.p0_gyro_bias_degh")
                             .unaryExpr([&](double v) { return sq(degh_to_rads(v)); });
    }
    if (j.contains("p0_accel_bias_ms2")) {
        e.p0_accel_bias = get_vec3(j["p0_accel_bias_ms2"], "ekf.p0_accel_bias_ms2")
                              .unaryExpr([&](double v) { return sq(v); });
    }
    if (j.contains("q_attitude")) e.q_attitude = get_vec3(j["q_attitude"], "ekf.q_attitude");
    if (j.contains("q_velocity")) e.q_velocity = get_vec3(j["q_velocity"], "ekf.q_velocity");
    if (j.contains("q_gyro_bias")) e.q_gyro_bias = get_vec3(j["q_gyro_bias"], "ekf.q_gyro_bias");
    if (j.contains("q_accel_bias")) e.q_accel_bias = get_vec3(j["q_accel_bias"], "ekf.q_accel_bias");
    if (j.contains("r_velocity_ms")) {
        const double r = get_number(j["r_velocity_ms"], "ekf.r_velocity_ms");
        e.r_velocity = Vec3::Constant(r * r);
    }
    if (j.contains("init_gyro_bias_degh")) {
        e.init_bg = get_vec3(j["init_gyro_bias_degh"], "ekf.init_gyro_bias_degh")
                        .unaryExpr([](double v) { return degh_to_rads(v); });
    }
    if (j.contains("init_accel_bias_ms2") && j.contains("init_accel_bias_ug")) {
        schema_fail("ekf", "give init_accel_bias in exactly one unit");
    }
    if (j.contains("init_accel_bias_ms2")) {
        e.init_ba = get_vec3(j["init_accel_bias_ms2"], "ekf.init_accel_bias_ms2");
    }
    if (j.contains("init_accel_bias_ug")) {
        e.init_ba = get_vec3(j["init_accel_bias_ug"], "ekf.init_accel_bias_ug")
                        .unaryExpr([](double v) { return ug_to_ms2(v); });
    }
    return e;
}

ExperimentConfig parse_json(const json& j, const std::string& name) {
    check_keys(j, "<root>",
               {"description", "scenario", "observers", "ekf", "monte_carlo", "output"});
    ExperimentConfig cfg;
    cfg.name = name;
    if (j.contains("description")) cfg.description = j["description"].get<std::string>();
    if (!j.contains("scenario")) schema_fail("<root>", "missing scenario");
    cfg.scenario = parse_scenario(j["scenario"], cfg.noise);

    if (j.contains("observers")) {
        if (!j["observers"].is_array()) schema_fail("observers", "expected an array");
        for (const json& oj : j["observers"]) {
            const std::string o = oj.get<std::string>();
            if (o == "ideal_ncr") {
                cfg.observers.push_back(ObserverKind::IdealNcr);
            } else if (o == "ideal_nfvr") {
                cfg.observers.push_back(ObserverKind::IdealNfvr);
            } else if (o == "multi_axis") {
                cfg.observers.push_back(ObserverKind::MultiAxis);
            } else if (o == "multiposition") {
                cfg.observers.push_back(ObserverKind::Multiposition);
            } else if (o == "ekf") {
                cfg.observers.push_back(ObserverKind::Ekf);
            } else {
                schema_fail("observers", "unknown observer '" + o + "'");
            }
        }
    }
    if (j.contains("ekf")) cfg.ekf = parse_ekf(j["ekf"]);
    if (j.contains("monte_carlo")) {
        const json& mj = j["monte_carlo"];
        check_keys(mj, "monte_carlo", {"runs", "base_seed"});
        MonteCarloSpec mc;
        if (!mj.contains("runs")) schema_fail("monte_carlo", "missing runs");
        mc.runs = static_cast<int>(get_u64(mj["runs"], "monte_carlo.runs"));
        if (mj.contains("base_seed")) mc.base_seed = get_u64(mj["base_seed"], "monte_carlo.base_seed");
        cfg.monte_carlo = mc;
    }
    if (j.contains("output")) {
        const json& oj = j["output"];
        check_keys(oj, "output", {"directory", "formats"});
        if (oj.contains("directory")) cfg.output.directory = oj["directory"].get<std::string>();
        if (oj.contains("formats")) {
            cfg.output.csv = false;
            cfg.output.json = false;
            for (const json& fj : oj["formats"]) {
                const std::string f = fj.get<std::string>();
                if (f == "csv") {
                    cfg.output.csv = true;
                } else if (f == "json") {
                    cfg.output.json = true;
                } else {
                    schema_fail("output.formats", "unknown format '" + f + "'");
                }
            }
        }
    }

    // semantic validation: timeline construction checks segment geometry
    const Timeline tl = build_timeline(cfg.scenario);
    auto has_kind = [&](SegmentKind k) {
        for (const auto& iv : tl.intervals) {
            if (iv.seg.kind == k) return true;
        }
        return false;
    };
    int rotations = 0;
    for (const auto& iv : tl.intervals) {
        if (iv.seg.kind != SegmentKind::Static) ++rotations;
    }
    for (ObserverKind k : cfg.observers) {
        if (k == ObserverKind::IdealNcr && !has_kind(SegmentKind::ConstRotation)) {
            throw ValidationError("config: ideal_ncr requires a const_rotation segment");
        }
        if (k == ObserverKind::IdealNfvr && !has_kind(SegmentKind::FixedAxisVaryingRate)) {
            throw ValidationError("config: ideal_nfvr requires a varying_rate segment");
        }
        if (k == ObserverKind::MultiAxis && rotations < 2) {
            throw ValidationError("config: multi_axis requires at least two rotation segments");
        }
    }
    return cfg;
}

}  // namespace

std::string observer_name(ObserverKind k) {
    switch (k) {
        case ObserverKind::IdealNcr: return "ideal_ncr";
        case ObserverKind::IdealNfvr: return "ideal_nfvr";
        case ObserverKind::MultiAxis: return "multi_axis";
        case ObserverKind::Multiposition: return "multiposition";
        case ObserverKind::Ekf: return "ekf";
    }
    return "?";
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError("config: " + path + ": " + e.what());
    }
    return parse_json(j, std::filesystem::path(path).stem().string());
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& name) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("config: ") + e.what());
    }
    return parse_json(j, name);
}

}  // namespace insobs
