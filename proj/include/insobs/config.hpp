// Experiment configuration: a strict hierarchical key-value (JSON) schema.
// Angles are degrees, rotation rates deg/s, gyro biases deg/h and
// accelerometer biases micro-g in the file; everything is SI radians
// internally, converted only at this boundary.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "insobs/ekf.hpp"
#include "insobs/scenario.hpp"

namespace insobs {

enum class ObserverKind { IdealNcr, IdealNfvr, MultiAxis, Multiposition, Ekf };

std::string observer_name(ObserverKind k);

struct NoiseSpec {
    bool enabled = false;
    double gyro_density = 0.0;   // [rad/s/sqrt(Hz)]
    double accel_density = 0.0;  // [m/s^2/sqrt(Hz)]
    std::uint64_t seed = 0;
};

struct MonteCarloSpec {
    int runs = 0;
    std::uint64_t base_seed = 1;
};

struct OutputSpec {
    std::string directory = "out";
    bool csv = true;
    bool json = true;
};

struct ExperimentConfig {
    std::string name;
    std::string description;
    Scenario scenario;
    NoiseSpec noise;
    std::vector<ObserverKind> observers;
    EkfSettings ekf;
    std::optional<MonteCarloSpec> monte_carlo;
    OutputSpec output;
};

/// Parses and fully validates a config file. Unknown keys raise SchemaError
/// naming the offending field path; semantic violations (overlapping
/// segments, observers incompatible with the segment kinds, polar latitude)
/// raise ValidationError.
ExperimentConfig parse_config(const std::string& path);

/// Same, from an in-memory JSON text (used by tests and list-scenarios).
ExperimentConfig parse_config_text(const std::string& text, const std::string& name);

}  // namespace insobs
