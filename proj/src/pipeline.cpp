#include "fragpes/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "fragpes/assembly.hpp"
#include "fragpes/dataset.hpp"
#include "fragpes/descriptor.hpp"

namespace fs = std::filesystem;

namespace fragpes {

namespace {

const std::string& check_system(const std::string& system) {
    if (system != "primitive" && system != "target")
        throw ConfigError("system must be 'primitive' or 'target', got '" + system + "'");
    return system;
}

std::string trajectory_path(const PipelineConfig& cfg, const std::string& system) {
    const std::string& p =
        system == "target" ? cfg.target_trajectory : cfg.primitive_trajectory;
    if (p.empty()) throw ConfigError("no trajectory configured for system '" + system + "'");
    return p;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());
}

// Run fn over every index, collecting per-index failure messages so a bad
// frame reports its own number instead of tearing down the worker pool.
void for_each_indexed(std::size_t n, const std::function<void(std::size_t)>& fn,
                      const char* what) {
    std::vector<std::string> errors(n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            try {
                fn(i);
            } catch (const std::exception& ex) {
                errors[i] = ex.what();
            }
        }
    });
    for (std::size_t i = 0; i < n; ++i)
        if (!errors[i].empty())
            throw DataError(std::string(what) + " " + std::to_string(i) + ": " + errors[i]);
}

struct KindData {
    DataMatrix x;
    std::vector<double> y;
    std::vector<std::size_t> row_ids;  // indices into the label row vector
};

std::map<std::string, KindData> group_by_kind(const std::vector<LabeledRow>& rows) {
    std::map<std::string, KindData> kinds;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        KindData& kd = kinds[rows[i].kind];
        if (kd.x.cols() != 0 && kd.x.cols() != rows[i].descriptor.size())
            throw DataError("inconsistent descriptor width for kind " + rows[i].kind);
        kd.x.push_row(rows[i].descriptor);
        kd.y.push_back(rows[i].delta_e);
        kd.row_ids.push_back(i);
    }
    return kinds;
}

std::string kind_file(const PipelineConfig& cfg, const std::string& kind, const char* ext) {
    return models_dir(cfg) + "/" + kind + ext;
}

// Manifest: one sorted line per kind plus the run seed.
struct ManifestEntry {
    double train_mae = 0.0;
    std::size_t train_size = 0;
    int slices_consumed = 0;
    bool cold_start = false;
};

void write_manifest(const PipelineConfig& cfg,
                    const std::map<std::string, ManifestEntry>& entries) {
    std::ofstream out(manifest_path(cfg));
    if (!out) throw DataError("cannot write manifest: " + manifest_path(cfg));
    out << "# fragpes model manifest v1\n";
    out << "# config " << config_hash(cfg) << "\n";
    out << "seed " << cfg.seed << "\n";
    for (const auto& [kind, e] : entries)
        out << "kind " << kind << " file " << kind << ".net cluster " << kind << ".cluster train "
            << kind << ".train train_mae " << format_double(e.train_mae) << " train_size "
            << e.train_size << " slices_consumed " << e.slices_consumed << " cold_start "
            << (e.cold_start ? 1 : 0) << "\n";
}

std::map<std::string, ManifestEntry> read_manifest(const PipelineConfig& cfg) {
    std::map<std::string, ManifestEntry> entries;
    std::ifstream in(manifest_path(cfg));
    if (!in) throw DataError("cannot open manifest (run `fragpes train` first): " +
                             manifest_path(cfg));
    std::string line;
    while (std::getline(in, line)) {
        auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok[0] == "#") {
            if (tok.size() >= 3 && tok[1] == "config" && tok[2] != config_hash(cfg))
                throw DataError("stale manifest (config hash mismatch)");
            continue;
        }
        if (tok[0] != "kind") continue;
        ManifestEntry e;
        std::string kind = tok.at(1);
        for (std::size_t i = 2; i + 1 < tok.size(); i += 2) {
            if (tok[i] == "train_mae") e.train_mae = parse_double(tok[i + 1]);
            else if (tok[i] == "train_size") e.train_size = static_cast<std::size_t>(parse_long(tok[i + 1]));
            else if (tok[i] == "slices_consumed") e.slices_consumed = static_cast<int>(parse_long(tok[i + 1]));
            else if (tok[i] == "cold_start") e.cold_start = parse_long(tok[i + 1]) != 0;
        }
        entries[kind] = e;
    }
    return entries;
}

// Primitive-style selection + training for one kind. Returns the trained
// array; fills the training-set rows and the cluster model.
NNArray train_kind(const PipelineConfig& cfg, const std::string& kind, const KindData& kd,
                   ClusterModel& cluster_out, std::vector<std::size_t>& training_out) {
    const std::size_t m = kd.x.rows();
    if (cfg.fraction >= 1.0) {
        // training set = full set; the trivial cluster model keeps every point
        // as its own centroid
        cluster_out.k = static_cast<int>(m);
        cluster_out.centroids = kd.x;
        cluster_out.assignments.resize(m);
        for (std::size_t i = 0; i < m; ++i) cluster_out.assignments[i] = static_cast<int>(i);
        cluster_out.per_cluster_avg_inertia.assign(m, 0.0);
        cluster_out.avg_inertia = 0.0;
        cluster_out.max_sample_to_centroid_distance = 0.0;
        cluster_out.seed = derive_seed(cfg.seed, "kmeans-" + kind);
        training_out.resize(m);
        for (std::size_t i = 0; i < m; ++i) training_out[i] = i;
    } else {
        int k = static_cast<int>(std::llround(cfg.fraction * static_cast<double>(m)));
        k = std::max(1, std::min<int>(k, static_cast<int>(m)));
        cluster_out = minibatch_kmeans(kd.x, k, cfg.kmeans, derive_seed(cfg.seed, "kmeans-" + kind));
        training_out = select_training_points(kd.x, cluster_out.centroids);
    }

    DataMatrix xtr;
    xtr.set_cols(kd.x.cols());
    std::vector<double> ytr;
    for (std::size_t i : training_out) {
        xtr.push_row(kd.x.row_span(i));
        ytr.push_back(kd.y[i]);
    }
    TrainConfig tc = cfg.training;
    tc.seed = derive_seed(cfg.seed, "train-" + kind);
    return train_array(kind, xtr, ytr, tc);
}

std::vector<LabeledRow> training_rows(const std::vector<LabeledRow>& all,
                                      const KindData& kd,
                                      const std::vector<std::size_t>& training) {
    std::vector<LabeledRow> out;
    out.reserve(training.size());
    for (std::size_t i : training) out.push_back(all[kd.row_ids[i]]);
    return out;
}

}  // namespace

std::string fragments_path(const PipelineConfig& cfg, const std::string& system) {
    return cfg.output_directory + "/fragments_" + system + "_r" + std::to_string(cfg.max_rank) +
           ".txt";
}
std::string labels_path(const PipelineConfig& cfg, const std::string& system) {
    return cfg.output_directory + "/labels_" + system + "_r" + std::to_string(cfg.max_rank) +
           ".txt";
}
std::string models_dir(const PipelineConfig& cfg) { return cfg.output_directory + "/models"; }
std::string manifest_path(const PipelineConfig& cfg) { return models_dir(cfg) + "/manifest.txt"; }
std::string predict_path(const PipelineConfig& cfg, const std::string& system) {
    return cfg.output_directory + "/predict_" + system + "_r" + std::to_string(cfg.max_rank) +
           ".txt";
}
std::string transfer_trace_path(const PipelineConfig& cfg, const std::string& kind) {
    return cfg.output_directory + "/transfer/" + kind + "_trace.txt";
}

void cmd_fragment(const PipelineConfig& cfg, const std::string& system) {
    check_system(system);
    ensure_dir(cfg.output_directory);
    const auto frames = load_xyz_file(trajectory_path(cfg, system));
    if (frames.empty())
        std::cerr << "warning: empty trajectory for system '" << system << "'\n";

    std::vector<std::vector<FragmentRecord>> per_frame(frames.size());
    const double oo = cfg.oo_cutoff(system);
    for_each_indexed(
        frames.size(),
        [&](std::size_t fi) {
            const Geometry& g = frames[fi];
            const auto nodes = assign_nodes(g, cfg.oh_cutoff);
            const FragGraph graph = fragment_graph(g, nodes, oo, cfg.max_rank);
            for (int r = 0; r <= graph.max_rank; ++r) {
                const auto& set = graph.simplex_sets[static_cast<std::size_t>(r)];
                for (std::size_t i = 0; i < set.size(); ++i) {
                    FragmentRecord rec;
                    rec.system = system;
                    rec.frame = static_cast<int>(fi);
                    rec.rank = r;
                    rec.node_ids = set[i].node_ids;
                    rec.kind = set[i].kind;
                    rec.multiplicity = graph.multiplicities[static_cast<std::size_t>(r)][i];
                    rec.geometry =
                        extract_fragment(g, set[i], nodes, {system, static_cast<int>(fi)}).geometry;
                    per_frame[fi].push_back(std::move(rec));
                }
            }
        },
        "frame");

    std::vector<FragmentRecord> records;
    for (auto& v : per_frame)
        for (auto& rec : v) records.push_back(std::move(rec));

    DatasetMeta meta{config_hash(cfg), system, cfg.max_rank};
    write_fragment_dataset(fragments_path(cfg, system), records, meta);

    std::map<std::string, std::size_t> counts;
    for (const auto& rec : records) ++counts[rec.kind];
    std::cout << "fragment: system=" << system << " frames=" << frames.size()
              << " fragments=" << records.size() << "\n";
    for (const auto& [kind, n] : counts) std::cout << "  " << kind << " " << n << "\n";
}

void cmd_label(const PipelineConfig& cfg, const std::string& system) {
    check_system(system);
    DatasetMeta meta;
    const auto records =
        read_fragment_dataset(fragments_path(cfg, system), &meta, config_hash(cfg));

    std::vector<LabeledRow> rows(records.size());
    for_each_indexed(
        records.size(),
        [&](std::size_t i) {
            const FragmentRecord& rec = records[i];
            LabeledRow row;
            row.kind = rec.kind;
            row.system = rec.system;
            row.frame = rec.frame;
            row.rank = rec.rank;
            row.multiplicity = rec.multiplicity;
            row.descriptor = descriptor_vector(rec.geometry, rec.kind).values;
            row.delta_e = cfg.oracle.delta_label(rec.geometry);
            rows[i] = std::move(row);
        },
        "fragment record");

    write_label_dataset(labels_path(cfg, system), rows, meta);
    std::cout << "label: system=" << system << " rows=" << rows.size() << "\n";
}

void cmd_train(const PipelineConfig& cfg) {
    DatasetMeta meta;
    const auto rows = read_label_dataset(labels_path(cfg, "primitive"), &meta, config_hash(cfg));
    const auto kinds = group_by_kind(rows);
    ensure_dir(models_dir(cfg));

    std::map<std::string, ManifestEntry> manifest;
    const std::string hash = config_hash(cfg);
    for (const auto& [kind, kd] : kinds) {
        if (kd.x.rows() < 3) {
            std::cerr << "warning: kind " << kind << " has only " << kd.x.rows()
                      << " samples; skipped\n";
            continue;
        }
        ClusterModel cluster;
        std::vector<std::size_t> training;
        NNArray arr = train_kind(cfg, kind, kd, cluster, training);

        DataMatrix xtr;
        xtr.set_cols(kd.x.cols());
        std::vector<double> ytr;
        for (std::size_t i : training) {
            xtr.push_row(kd.x.row_span(i));
            ytr.push_back(kd.y[i]);
        }
        ManifestEntry e;
        e.train_mae = array_mae(arr, xtr, ytr);
        e.train_size = training.size();
        manifest[kind] = e;

        save_array(kind_file(cfg, kind, ".net"), arr, hash);
        save_cluster_model(kind_file(cfg, kind, ".cluster"), cluster, kind, hash);
        write_label_dataset(kind_file(cfg, kind, ".train"), training_rows(rows, kd, training),
                            {hash, "training", meta.rank});
        std::cout << "train: kind=" << kind << " samples=" << kd.x.rows()
                  << " training=" << training.size() << " mae=" << format_double(e.train_mae)
                  << "\n";
    }
    write_manifest(cfg, manifest);
}

void cmd_transfer(const PipelineConfig& cfg) {
    DatasetMeta meta;
    const auto rows = read_label_dataset(labels_path(cfg, "target"), &meta, config_hash(cfg));
    const auto kinds = group_by_kind(rows);
    auto manifest = read_manifest(cfg);
    ensure_dir(cfg.output_directory + "/transfer");
    const std::string hash = config_hash(cfg);

    for (const auto& [kind, kd] : kinds) {
        std::ofstream trace(transfer_trace_path(cfg, kind));
        if (!trace) throw DataError("cannot write transfer trace for kind " + kind);
        trace << "# fragpes transfer trace v1\n";
        trace << "# config " << hash << "\n";
        trace << "# kind " << kind << "\n";
        trace << "# columns: slice samples added mae_slice_pre mae_slice_post mae_train_post\n";

        const bool have_model = fs::exists(kind_file(cfg, kind, ".net"));
        if (!have_model) {
            // Cold start: no primitive model for this kind; train on the
            // target data the primitive way.
            std::cerr << "warning: no model for kind " << kind << "; cold start\n";
            if (kd.x.rows() < 3) {
                std::cerr << "warning: kind " << kind << " has only " << kd.x.rows()
                          << " samples; skipped\n";
                continue;
            }
            ClusterModel cluster;
            std::vector<std::size_t> training;
            NNArray arr = train_kind(cfg, kind, kd, cluster, training);
            DataMatrix xtr;
            xtr.set_cols(kd.x.cols());
            std::vector<double> ytr;
            for (std::size_t i : training) {
                xtr.push_row(kd.x.row_span(i));
                ytr.push_back(kd.y[i]);
            }
            ManifestEntry e;
            e.train_mae = array_mae(arr, xtr, ytr);
            e.train_size = training.size();
            e.cold_start = true;
            manifest[kind] = e;
            save_array(kind_file(cfg, kind, ".net"), arr, hash);
            save_cluster_model(kind_file(cfg, kind, ".cluster"), cluster, kind, hash);
            write_label_dataset(kind_file(cfg, kind, ".train"), training_rows(rows, kd, training),
                                {hash, "training", meta.rank});
            trace << "cold_start samples " << kd.x.rows() << " training " << training.size()
                  << "\n";
            continue;
        }

        NNArray arr = load_array(kind_file(cfg, kind, ".net"), hash);
        std::string cluster_kind;
        const ClusterModel primitive =
            load_cluster_model(kind_file(cfg, kind, ".cluster"), &cluster_kind, hash);
        if (!(primitive.max_sample_to_centroid_distance > 0.0)) {
            // primitive data collapsed onto its centroids; no slice geometry
            std::cerr << "warning: kind " << kind
                      << " has zero slice width; transfer skipped\n";
            trace << "no_slice_geometry samples " << kd.x.rows() << "\n";
            continue;
        }
        auto cumulative_rows = read_label_dataset(kind_file(cfg, kind, ".train"), nullptr, hash);

        DataMatrix xcum;
        xcum.set_cols(kd.x.cols());
        std::vector<double> ycum;
        for (const auto& row : cumulative_rows) {
            xcum.push_row(row.descriptor);
            ycum.push_back(row.delta_e);
        }

        const SlicePartition part = assign_slices(kd.x, primitive);
        std::vector<std::vector<std::size_t>> by_slice(static_cast<std::size_t>(part.max_slice) + 1);
        for (std::size_t i = 0; i < kd.x.rows(); ++i)
            by_slice[static_cast<std::size_t>(part.slice_of[i])].push_back(i);

        for (int s = 1; s <= part.max_slice; ++s) {
            const auto& members = by_slice[static_cast<std::size_t>(s)];
            if (members.empty()) {
                trace << "slice " << s << " 0 0 nan nan nan\n";
                continue;
            }
            DataMatrix xs;
            xs.set_cols(kd.x.cols());
            std::vector<double> ys;
            for (std::size_t i : members) {
                xs.push_row(kd.x.row_span(i));
                ys.push_back(kd.y[i]);
            }
            const double mae_pre = array_mae(arr, xs, ys);
            if (s == 1) {
                // inside the learned region; the primitive model stands
                trace << "slice 1 " << members.size() << " 0 " << format_double(mae_pre) << ' '
                      << format_double(mae_pre) << ' ' << format_double(array_mae(arr, xcum, ycum))
                      << "\n";
                continue;
            }
            const SliceClusterResult rsc = recursive_slice_clustering(
                xs, primitive.avg_inertia,
                derive_seed(cfg.seed, "slice-" + kind + "-" + std::to_string(s)), cfg.kmeans,
                cfg.inertia_factor);

            DataMatrix xtr;
            xtr.set_cols(kd.x.cols());
            std::vector<double> ytr;
            for (std::size_t li : rsc.training_indices) {
                xtr.push_row(xs.row_span(li));
                ytr.push_back(ys[li]);
                xcum.push_row(xs.row_span(li));
                ycum.push_back(ys[li]);
                cumulative_rows.push_back(rows[kd.row_ids[members[li]]]);
            }

            TrainConfig tc = cfg.training;
            tc.seed = derive_seed(cfg.seed, "transfer-" + kind + "-" + std::to_string(s));
            transfer_slice(arr, xtr, ytr, xcum, ycum, tc);

            trace << "slice " << s << ' ' << members.size() << ' ' << rsc.training_indices.size()
                  << ' ' << format_double(mae_pre) << ' ' << format_double(array_mae(arr, xs, ys))
                  << ' ' << format_double(array_mae(arr, xcum, ycum)) << "\n";
        }

        save_array(kind_file(cfg, kind, ".net"), arr, hash);
        write_label_dataset(kind_file(cfg, kind, ".train"), cumulative_rows,
                            {hash, "training", meta.rank});
        auto& entry = manifest[kind];
        entry.train_size = cumulative_rows.size();
        entry.slices_consumed = part.max_slice;
        entry.train_mae = array_mae(arr, xcum, ycum);
        std::cout << "transfer: kind=" << kind << " slices=" << part.max_slice
                  << " training=" << cumulative_rows.size() << "\n";
    }
    write_manifest(cfg, manifest);
}

void cmd_predict(const PipelineConfig& cfg, const std::string& system) {
    check_system(system);
    ensure_dir(cfg.output_directory);
    const auto manifest = read_manifest(cfg);
    ModelBank bank;
    const std::string hash = config_hash(cfg);
    for (const auto& [kind, e] : manifest)
        bank.arrays[kind] = load_array(kind_file(cfg, kind, ".net"), hash);

    const auto frames = load_xyz_file(trajectory_path(cfg, system));
    const double oo = cfg.oo_cutoff(system);
    std::vector<PredictRow> out(frames.size());
    for_each_indexed(
        frames.size(),
        [&](std::size_t fi) {
            const Geometry& g = frames[fi];
            const auto nodes = assign_nodes(g, cfg.oh_cutoff);
            const FragGraph graph = fragment_graph(g, nodes, oo, cfg.max_rank);
            std::vector<Fragment> fragments;
            std::vector<int> mult;
            for (int r = 0; r <= graph.max_rank; ++r) {
                const auto& set = graph.simplex_sets[static_cast<std::size_t>(r)];
                for (std::size_t i = 0; i < set.size(); ++i) {
                    fragments.push_back(
                        extract_fragment(g, set[i], nodes, {system, static_cast<int>(fi)}));
                    mult.push_back(graph.multiplicities[static_cast<std::size_t>(r)][i]);
                }
            }
            const double e_ref = cfg.oracle.reference.energy(g);
            const EnergyBreakdown bd =
                assemble_ml(e_ref, fragments, mult, bank, cfg.unknown_kind_policy);
            PredictRow row;
            row.frame = static_cast<int>(fi);
            row.e_ref = e_ref;
            row.e_ml = bd.total;
            row.e_exact = cfg.oracle.target.energy(g);
            row.error = row.e_ml - row.e_exact;
            out[fi] = row;
        },
        "frame");

    write_predict_report(predict_path(cfg, system), out, {hash, system, cfg.max_rank});
    double mae = 0.0;
    for (const auto& r : out) mae += std::abs(r.error);
    if (!out.empty()) mae /= static_cast<double>(out.size());
    std::cout << "predict: system=" << system << " frames=" << out.size()
              << " mae=" << format_double(mae) << "\n";
}

void cmd_report(const PipelineConfig& cfg, const std::string& system) {
    check_system(system);
    DatasetMeta meta;
    const auto rows = read_predict_report(predict_path(cfg, system), &meta, config_hash(cfg));
    std::vector<double> pred(rows.size());
    std::vector<double> exact(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        pred[i] = rows[i].e_ml;
        exact[i] = rows[i].e_exact;
    }
    const ErrorReport rep = error_report(pred, exact, cfg.report_bin_width);

    const std::string stem =
        cfg.output_directory + "/report_" + system + "_r" + std::to_string(cfg.max_rank);
    {
        std::ofstream out(stem + "_summary.txt");
        out << "# fragpes report summary v1\n";
        out << "# config " << config_hash(cfg) << "\n";
        out << "frames " << rep.count << "\n";
        out << "mae " << format_double(rep.mae) << "\n";
        out << "max_abs_error " << format_double(rep.max_abs_error) << "\n";
    }
    {
        std::ofstream out(stem + "_hist.txt");
        out << "# fragpes report histogram v1\n";
        out << "# config " << config_hash(cfg) << "\n";
        out << "# columns: bin_lower_edge count\n";
        for (const auto& [edge, count] : rep.histogram)
            out << format_double(edge) << ' ' << count << "\n";
    }
    {
        // significance weights aggregated over the whole fragment dataset
        const auto records =
            read_fragment_dataset(fragments_path(cfg, system), nullptr, config_hash(cfg));
        std::map<std::string, double> by_kind;
        std::map<int, double> by_rank;
        double total = 0.0;
        for (const auto& rec : records) {
            const double am = std::abs(static_cast<double>(rec.multiplicity));
            by_kind[rec.kind] += am;
            by_rank[rec.rank] += am;
            total += am;
        }
        std::ofstream out(stem + "_weights.txt");
        out << "# fragpes report weights v1\n";
        out << "# config " << config_hash(cfg) << "\n";
        out << "# columns: scope name weight\n";
        for (const auto& [kind, w] : by_kind)
            out << "kind " << kind << ' ' << format_double(total > 0 ? w / total : 0.0) << "\n";
        for (const auto& [rank, w] : by_rank)
            out << "rank " << rank << ' ' << format_double(total > 0 ? w / total : 0.0) << "\n";
    }
    std::cout << "report: system=" << system << " mae=" << format_double(rep.mae)
              << " max=" << format_double(rep.max_abs_error) << "\n";
}

}  // namespace fragpes
