#pragma once

#include <string>

#include "fragpes/config.hpp"

namespace fragpes {

/// Pipeline commands. Each reads/writes artifacts under
/// cfg.output_directory; artifact headers carry the config hash so stale
/// mixes are rejected. All commands are deterministic for a fixed config and
/// seed.
void cmd_fragment(const PipelineConfig& cfg, const std::string& system);
void cmd_label(const PipelineConfig& cfg, const std::string& system);
void cmd_train(const PipelineConfig& cfg);
void cmd_transfer(const PipelineConfig& cfg);
void cmd_predict(const PipelineConfig& cfg, const std::string& system);
void cmd_report(const PipelineConfig& cfg, const std::string& system);

/// Artifact paths (relative to cfg.output_directory).
std::string fragments_path(const PipelineConfig& cfg, const std::string& system);
std::string labels_path(const PipelineConfig& cfg, const std::string& system);
std::string models_dir(const PipelineConfig& cfg);
std::string manifest_path(const PipelineConfig& cfg);
std::string predict_path(const PipelineConfig& cfg, const std::string& system);
std::string transfer_trace_path(const PipelineConfig& cfg, const std::string& kind);

}  // namespace fragpes
