#include "fragpes/config.hpp"

#include <fstream>
#include <sstream>

namespace fragpes {

namespace {

void apply_key(PipelineConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value) {
    const std::string full = section.empty() ? key : section + "." + key;
    auto as_double = [&] { return parse_double(value); };
    auto as_int = [&] { return static_cast<int>(parse_long(value)); };

    if (full == "input.primitive_trajectory") cfg.primitive_trajectory = value;
    else if (full == "input.target_trajectory") cfg.target_trajectory = value;
    else if (full == "graph.oh_cutoff") cfg.oh_cutoff = as_double();
    else if (full == "graph.oo_cutoff_primitive") cfg.oo_cutoff_primitive = as_double();
    else if (full == "graph.oo_cutoff_target") cfg.oo_cutoff_target = as_double();
    else if (full == "graph.max_rank") cfg.max_rank = as_int();
    else if (full == "sampling.fraction") cfg.fraction = as_double();
    else if (full == "sampling.inertia_factor") cfg.inertia_factor = as_double();
    else if (full == "sampling.kmeans_batch_size") cfg.kmeans.batch_size = as_int();
    else if (full == "sampling.kmeans_max_iter") cfg.kmeans.max_iter = as_int();
    else if (full == "sampling.kmeans_refine_max_iter") cfg.kmeans.refine_max_iter = as_int();
    else if (full == "training.learning_rate") cfg.training.learning_rate = as_double();
    else if (full == "training.momentum") cfg.training.momentum = as_double();
    else if (full == "training.batch_size") cfg.training.batch_size = as_int();
    else if (full == "training.max_epochs") cfg.training.max_epochs = as_int();
    else if (full == "training.patience") cfg.training.patience = as_int();
    else if (full == "training.min_improvement") cfg.training.min_improvement = as_double();
    else if (full == "training.plateau_halve_after") cfg.training.plateau_halve_after = as_int();
    else if (full == "training.grad_clip") cfg.training.grad_clip = as_double();
    else if (full == "training.fine_tune_lr_scale") cfg.training.fine_tune_lr_scale = as_double();
    else if (full == "training.fine_tune_max_epochs") cfg.training.fine_tune_max_epochs = as_int();
    else if (full == "oracle.reference_depth") cfg.oracle.reference.pair.depth = as_double();
    else if (full == "oracle.reference_r0") cfg.oracle.reference.pair.r0 = as_double();
    else if (full == "oracle.reference_a") cfg.oracle.reference.pair.a = as_double();
    else if (full == "oracle.target_depth") cfg.oracle.target.pair.depth = as_double();
    else if (full == "oracle.target_r0") cfg.oracle.target.pair.r0 = as_double();
    else if (full == "oracle.target_a") cfg.oracle.target.pair.a = as_double();
    else if (full == "oracle.target_threebody_amplitude") {
        if (!cfg.oracle.target.many) cfg.oracle.target.many = ManyBodyTerm{};
        cfg.oracle.target.many->amplitude = as_double();
    } else if (full == "oracle.target_threebody_range") {
        if (!cfg.oracle.target.many) cfg.oracle.target.many = ManyBodyTerm{};
        cfg.oracle.target.many->range = as_double();
    } else if (full == "oracle.energy_unit") {
        if (value == "kcal") {
            // default, nothing to do
        } else if (value == "hartree") {
            cfg.oracle.reference.pair.depth *= kHartreeToKcalPerMol;
            cfg.oracle.target.pair.depth *= kHartreeToKcalPerMol;
            if (cfg.oracle.target.many) cfg.oracle.target.many->amplitude *= kHartreeToKcalPerMol;
        } else {
            throw ConfigError("oracle.energy_unit must be 'kcal' or 'hartree'");
        }
    } else if (full == "report.bin_width") cfg.report_bin_width = as_double();
    else if (full == "output.directory") cfg.output_directory = value;
    else if (full == "output.unknown_kind_policy") {
        if (value == "error") cfg.unknown_kind_policy = UnknownKindPolicy::Error;
        else if (value == "zero") cfg.unknown_kind_policy = UnknownKindPolicy::ZeroFill;
        else throw ConfigError("output.unknown_kind_policy must be 'error' or 'zero'");
    } else if (full == "run.seed") cfg.seed = static_cast<std::uint64_t>(parse_long(value));
    else throw ConfigError("unknown config key: " + full);
}

void validate(const PipelineConfig& cfg) {
    if (!(cfg.oh_cutoff > 0.0) || !(cfg.oo_cutoff_primitive > 0.0) || !(cfg.oo_cutoff_target > 0.0))
        throw ConfigError("cutoffs must be positive");
    if (cfg.max_rank < 0) throw ConfigError("graph.max_rank must be >= 0");
    if (!(cfg.fraction > 0.0 && cfg.fraction <= 1.0))
        throw ConfigError("sampling.fraction must be in (0, 1]");
    if (!(cfg.inertia_factor > 0.0)) throw ConfigError("sampling.inertia_factor must be positive");
    if (cfg.training.patience < 1) throw ConfigError("training.patience must be >= 1");
}

}  // namespace

PipelineConfig parse_config(const std::string& text) {
    PipelineConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": malformed section");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
        apply_key(cfg, section, key, value);
    }
    validate(cfg);
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

// The hash covers only parameters that shape artifact content upstream:
// trajectories, cutoffs, oracle, sampling, training, seed. Runtime toggles
// (max_rank for sweeps, output dir, unknown-kind policy, report binning) stay
// out so reruns that only flip those still accept existing artifacts.
std::string canonical_config(const PipelineConfig& cfg) {
    std::ostringstream out;
    out << "[graph]\n";
    out << "oh_cutoff = " << format_double(cfg.oh_cutoff) << "\n";
    out << "oo_cutoff_primitive = " << format_double(cfg.oo_cutoff_primitive) << "\n";
    out << "oo_cutoff_target = " << format_double(cfg.oo_cutoff_target) << "\n";
    out << "[input]\n";
    out << "primitive_trajectory = " << cfg.primitive_trajectory << "\n";
    out << "target_trajectory = " << cfg.target_trajectory << "\n";
    out << "[oracle]\n";
    out << "reference_a = " << format_double(cfg.oracle.reference.pair.a) << "\n";
    out << "reference_depth = " << format_double(cfg.oracle.reference.pair.depth) << "\n";
    out << "reference_r0 = " << format_double(cfg.oracle.reference.pair.r0) << "\n";
    out << "target_a = " << format_double(cfg.oracle.target.pair.a) << "\n";
    out << "target_depth = " << format_double(cfg.oracle.target.pair.depth) << "\n";
    out << "target_r0 = " << format_double(cfg.oracle.target.pair.r0) << "\n";
    if (cfg.oracle.target.many) {
        out << "target_threebody_amplitude = " << format_double(cfg.oracle.target.many->amplitude)
            << "\n";
        out << "target_threebody_range = " << format_double(cfg.oracle.target.many->range) << "\n";
    }
    out << "[run]\n";
    out << "seed = " << cfg.seed << "\n";
    out << "[sampling]\n";
    out << "fraction = " << format_double(cfg.fraction) << "\n";
    out << "inertia_factor = " << format_double(cfg.inertia_factor) << "\n";
    out << "kmeans_batch_size = " << cfg.kmeans.batch_size << "\n";
    out << "kmeans_max_iter = " << cfg.kmeans.max_iter << "\n";
    out << "kmeans_refine_max_iter = " << cfg.kmeans.refine_max_iter << "\n";
    out << "[training]\n";
    out << "batch_size = " << cfg.training.batch_size << "\n";
    out << "fine_tune_lr_scale = " << format_double(cfg.training.fine_tune_lr_scale) << "\n";
    out << "grad_clip = " << format_double(cfg.training.grad_clip) << "\n";
    out << "fine_tune_max_epochs = " << cfg.training.fine_tune_max_epochs << "\n";
    out << "learning_rate = " << format_double(cfg.training.learning_rate) << "\n";
    out << "max_epochs = " << cfg.training.max_epochs << "\n";
    out << "min_improvement = " << format_double(cfg.training.min_improvement) << "\n";
    out << "momentum = " << format_double(cfg.training.momentum) << "\n";
    out << "patience = " << cfg.training.patience << "\n";
    out << "plateau_halve_after = " << cfg.training.plateau_halve_after << "\n";
    return out.str();
}

std::string config_hash(const PipelineConfig& cfg) {
    const std::uint64_t h = fnv1a64(canonical_config(cfg));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace fragpes
