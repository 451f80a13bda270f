#pragma once

#include <cstdint>
#include <string>

#include "fragpes/assembly.hpp"
#include "fragpes/model.hpp"
#include "fragpes/oracle.hpp"
#include "fragpes/sampling.hpp"

namespace fragpes {

/// Parsed pipeline configuration. Defaults follow the method's published
/// values where they exist (cutoffs 1.4 / 7.5 / 4.5 A, rank 3, 10% sampling,
/// inertia factor 2); the rest are repo conventions.
struct PipelineConfig {
    // [input]
    std::string primitive_trajectory;
    std::string target_trajectory;

    // [graph]
    double oh_cutoff = 1.4;
    double oo_cutoff_primitive = 7.5;
    double oo_cutoff_target = 4.5;
    int max_rank = 3;

    // [sampling]
    double fraction = 0.10;
    double inertia_factor = 2.0;
    KMeansParams kmeans;

    // [training]
    TrainConfig training;

    // [oracle]
    OraclePair oracle;

    // [report]
    double report_bin_width = 0.5;  // kcal/mol

    // [output]
    std::string output_directory = "out";
    UnknownKindPolicy unknown_kind_policy = UnknownKindPolicy::Error;

    // [run]
    std::uint64_t seed = 12345;

    double oo_cutoff(const std::string& system) const {
        return system == "target" ? oo_cutoff_target : oo_cutoff_primitive;
    }
};

/// Line-oriented "key = value" file with [section] headers; '#' starts a
/// comment. Unknown keys are config errors.
PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config(const std::string& text);

/// Canonical serialization (sorted keys) used for hashing. Excludes
/// output.directory and graph.max_rank so reruns into another directory and
/// rank sweeps over one model bank stay compatible.
std::string canonical_config(const PipelineConfig& cfg);

/// 16-hex-digit hash over the canonical serialization; artifact headers carry
/// it so stale artifact mixes are rejected.
std::string config_hash(const PipelineConfig& cfg);

}  // namespace fragpes
