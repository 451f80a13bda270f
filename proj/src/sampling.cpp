#include "fragpes/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace fragpes {

namespace {

// Nearest centroid of one row; ties resolve to the lower cluster id.
int nearest_centroid(std::span<const double> x, const DataMatrix& centroids, double* dist2_out) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
        const double d = squared_distance(x, centroids.row_span(c));
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    if (dist2_out) *dist2_out = best_d;
    return best;
}

// Parallel assignment pass; distances are written per sample so downstream
// reductions stay independent of the thread count.
void assign_all(const DataMatrix& data, const DataMatrix& centroids, std::vector<int>& assign,
                std::vector<double>& dist2) {
    const std::size_t m = data.rows();
    assign.resize(m);
    dist2.resize(m);
    parallel_for(m, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            assign[i] = nearest_centroid(data.row_span(i), centroids, &dist2[i]);
    });
}

// Move empty clusters onto the farthest samples of the most populated
// clusters. Bounded rounds: exact duplicate points can make an empty cluster
// unavoidable, in which case it stays empty.
bool reseed_empty_clusters(DataMatrix& centroids, const DataMatrix& data,
                           std::vector<int>& assign, std::vector<double>& dist2) {
    const std::size_t k = centroids.rows();
    bool changed = false;
    for (std::size_t round = 0; round <= k; ++round) {
        std::vector<std::size_t> count(k, 0);
        for (int a : assign) ++count[static_cast<std::size_t>(a)];
        std::vector<std::size_t> empties;
        for (std::size_t c = 0; c < k; ++c)
            if (count[c] == 0) empties.push_back(c);
        if (empties.empty()) break;

        std::vector<char> taken(data.rows(), 0);
        bool any = false;
        for (std::size_t e : empties) {
            // farthest sample whose cluster can spare a point; ties to lower index
            std::size_t far_idx = data.rows();
            double far_d = -1.0;
            for (std::size_t i = 0; i < data.rows(); ++i) {
                if (taken[i] || count[static_cast<std::size_t>(assign[i])] < 2) continue;
                if (dist2[i] > far_d) {
                    far_d = dist2[i];
                    far_idx = i;
                }
            }
            if (far_idx == data.rows()) break;
            taken[far_idx] = 1;
            --count[static_cast<std::size_t>(assign[far_idx])];
            ++count[e];
            auto src = data.row_span(far_idx);
            std::copy(src.begin(), src.end(), centroids.row_span(e).begin());
            any = true;
        }
        if (!any) break;
        assign_all(data, centroids, assign, dist2);
        changed = true;
    }
    return changed;
}

void finalize_model(ClusterModel& model, const DataMatrix& data) {
    std::vector<double> dist2;
    assign_all(data, model.centroids, model.assignments, dist2);
    reseed_empty_clusters(model.centroids, data, model.assignments, dist2);

    const std::size_t k = model.centroids.rows();
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    double total = 0.0;
    double max_d2 = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const auto c = static_cast<std::size_t>(model.assignments[i]);
        sum[c] += dist2[i];
        ++count[c];
        total += dist2[i];
        max_d2 = std::max(max_d2, dist2[i]);
    }
    model.per_cluster_avg_inertia.assign(k, 0.0);
    for (std::size_t c = 0; c < k; ++c)
        if (count[c] > 0) model.per_cluster_avg_inertia[c] = sum[c] / static_cast<double>(count[c]);
    model.avg_inertia = total / static_cast<double>(data.rows());
    model.max_sample_to_centroid_distance = std::sqrt(max_d2);
}

}  // namespace

int lloyd_refine(ClusterModel& model, const DataMatrix& data, int max_iter, double tol) {
    const std::size_t k = model.centroids.rows();
    const std::size_t dim = data.cols();
    std::vector<int> assign;
    std::vector<double> dist2;
    int iters = 0;
    for (; iters < max_iter; ++iters) {
        assign_all(data, model.centroids, assign, dist2);
        reseed_empty_clusters(model.centroids, data, assign, dist2);
        DataMatrix means(k, dim, 0.0);
        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < data.rows(); ++i) {
            const auto c = static_cast<std::size_t>(assign[i]);
            const double* r = data.row(i);
            double* m = means.row(c);
            for (std::size_t d = 0; d < dim; ++d) m[d] += r[d];
            ++count[c];
        }
        double movement = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] == 0) continue;
            double* m = means.row(c);
            for (std::size_t d = 0; d < dim; ++d) m[d] /= static_cast<double>(count[c]);
            movement = std::max(movement, std::sqrt(squared_distance(means.row_span(c),
                                                                     model.centroids.row_span(c))));
            std::copy(m, m + dim, model.centroids.row(c));
        }
        if (movement < tol) {
            ++iters;
            break;
        }
    }
    return iters;
}

ClusterModel minibatch_kmeans(const DataMatrix& data, int k, const KMeansParams& params,
                              std::uint64_t seed) {
    const std::size_t m = data.rows();
    if (m == 0) throw DataError("k-means: empty data");
    if (k < 1 || static_cast<std::size_t>(k) > m)
        throw DataError("k-means: k must be in [1, #samples], got k=" + std::to_string(k) +
                        " for " + std::to_string(m) + " samples");
    if (params.batch_size < 1) throw ConfigError("k-means: batch_size must be >= 1");

    ClusterModel model;
    model.k = k;
    model.seed = seed;
    Rng rng(seed);

    // Initial centroids: k distinct samples (partial Fisher-Yates).
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
        const std::size_t j = i + rng.index(m - i);
        std::swap(idx[i], idx[j]);
    }
    model.centroids = DataMatrix(static_cast<std::size_t>(k), data.cols());
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
        auto src = data.row_span(idx[c]);
        std::copy(src.begin(), src.end(), model.centroids.row(c));
    }

    if (static_cast<std::size_t>(k) == m) {
        // Every point is its own centroid; skip the stochastic phase.
        finalize_model(model, data);
        return model;
    }

    // Streaming phase: per-centroid learning rate 1/(times updated).
    std::vector<std::size_t> updates(static_cast<std::size_t>(k), 0);
    DataMatrix snapshot = model.centroids;
    for (int it = 0; it < params.max_iter; ++it) {
        snapshot = model.centroids;
        for (int b = 0; b < params.batch_size; ++b) {
            const std::size_t i = rng.index(m);
            const int c = nearest_centroid(data.row_span(i), model.centroids, nullptr);
            const auto cc = static_cast<std::size_t>(c);
            ++updates[cc];
            const double eta = 1.0 / static_cast<double>(updates[cc]);
            double* ctr = model.centroids.row(cc);
            const double* x = data.row(i);
            for (std::size_t d = 0; d < data.cols(); ++d) ctr[d] += eta * (x[d] - ctr[d]);
        }
        double movement = 0.0;
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c)
            movement = std::max(movement, std::sqrt(squared_distance(
                                              snapshot.row_span(c), model.centroids.row_span(c))));
        if (movement < params.tol) break;
    }

    lloyd_refine(model, data, params.refine_max_iter, params.tol);
    finalize_model(model, data);
    return model;
}

double average_inertia(const ClusterModel& model, const DataMatrix& data) {
    if (model.assignments.size() != data.rows())
        throw DataError("average_inertia: assignments incomplete");
    double total = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i)
        total += squared_distance(data.row_span(i),
                                  model.centroids.row_span(static_cast<std::size_t>(model.assignments[i])));
    return total / static_cast<double>(data.rows());
}

std::vector<std::size_t> select_training_points(const DataMatrix& data,
                                                const DataMatrix& centroids) {
    if (centroids.rows() == 0) throw DataError("select_training_points: no centroids");
    std::vector<std::size_t> nearest(centroids.rows());
    parallel_for(centroids.rows(), [&](std::size_t b, std::size_t e) {
        for (std::size_t c = b; c < e; ++c) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < data.rows(); ++i) {
                const double d = squared_distance(data.row_span(i), centroids.row_span(c));
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            nearest[c] = best;
        }
    });
    std::sort(nearest.begin(), nearest.end());
    nearest.erase(std::unique(nearest.begin(), nearest.end()), nearest.end());
    return nearest;
}

SlicePartition assign_slices(const DataMatrix& data, const ClusterModel& primitive) {
    SlicePartition part;
    part.primitive_centroids = primitive.centroids;
    part.slice_width = primitive.max_sample_to_centroid_distance;
    if (!(part.slice_width > 0.0))
        throw DataError("slice width is zero: primitive data collapsed onto its centroids");
    part.slice_of.resize(data.rows());
    parallel_for(data.rows(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            double d2 = 0.0;
            nearest_centroid(data.row_span(i), part.primitive_centroids, &d2);
            part.slice_of[i] = static_cast<int>(std::floor(std::sqrt(d2) / part.slice_width)) + 1;
        }
    });
    part.max_slice = 0;
    for (int s : part.slice_of) part.max_slice = std::max(part.max_slice, s);
    return part;
}

int recursive_child_count(double eta, double eta0) {
    return std::max<int>(2, static_cast<int>(std::ceil(eta / eta0)));
}

SliceClusterResult recursive_slice_clustering(const DataMatrix& slice_data, double eta0,
                                              std::uint64_t seed, const KMeansParams& params,
                                              double inertia_factor) {
    if (slice_data.rows() == 0) throw DataError("recursive clustering: empty slice");
    if (!(eta0 > 0.0)) throw DataError("recursive clustering: eta0 must be positive");

    SliceClusterResult result;
    const double threshold = inertia_factor * eta0;

    struct Job {
        std::vector<std::size_t> members;  // indices into slice_data
        int round = 1;
        int requested_k = 0;  // child cluster count chosen by the parent
    };
    std::deque<Job> queue;
    {
        Job root;
        root.members.resize(slice_data.rows());
        std::iota(root.members.begin(), root.members.end(), 0);
        root.round = 1;
        queue.push_back(std::move(root));
    }

    std::uint64_t job_counter = 0;
    while (!queue.empty()) {
        Job job = std::move(queue.front());
        queue.pop_front();
        result.rounds = std::max(result.rounds, job.round);

        DataMatrix local(0, 0);
        local.set_cols(slice_data.cols());
        for (std::size_t i : job.members) local.push_row(slice_data.row_span(i));

        int k;
        if (job.round == 1) {
            k = std::max<int>(1, static_cast<int>(std::llround(std::sqrt(
                                     static_cast<double>(job.members.size())))));
        } else {
            // child count was decided by the parent and stashed in the job
            k = job.requested_k;
        }
        k = std::min<int>(k, static_cast<int>(job.members.size()));

        const ClusterModel sub =
            minibatch_kmeans(local, k, params, derive_seed(seed, "slice-job-" + std::to_string(job_counter++)));

        // Partition members by cluster and either accept or re-cluster.
        std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(sub.k));
        for (std::size_t i = 0; i < job.members.size(); ++i)
            groups[static_cast<std::size_t>(sub.assignments[i])].push_back(job.members[i]);

        for (std::size_t c = 0; c < groups.size(); ++c) {
            if (groups[c].empty()) continue;
            const double eta = sub.per_cluster_avg_inertia[c];
            if (eta > threshold && groups[c].size() > 1) {
                Job child;
                child.members = groups[c];
                child.round = job.round + 1;
                child.requested_k = recursive_child_count(eta, eta0);
                queue.push_back(std::move(child));
            } else {
                if (eta > threshold && groups[c].size() == 1)
                    ++result.singleton_recluster_count;  // size-1 never recurses
                SliceCluster fc;
                fc.centroid.assign(sub.centroids.row(c), sub.centroids.row(c) + sub.centroids.cols());
                fc.avg_inertia = eta;
                fc.size = static_cast<int>(groups[c].size());
                fc.round = job.round;
                result.final_clusters.push_back(std::move(fc));
                // training point: nearest member to the centroid
                std::size_t best = groups[c][0];
                double best_d = std::numeric_limits<double>::infinity();
                for (std::size_t gi : groups[c]) {
                    const double d = squared_distance(slice_data.row_span(gi),
                                                      std::span<const double>(
                                                          result.final_clusters.back().centroid));
                    if (d < best_d) {
                        best_d = d;
                        best = gi;
                    }
                }
                result.training_indices.push_back(best);
            }
        }
    }
    std::sort(result.training_indices.begin(), result.training_indices.end());
    result.training_indices.erase(
        std::unique(result.training_indices.begin(), result.training_indices.end()),
        result.training_indices.end());
    return result;
}

void save_cluster_model(const std::string& path, const ClusterModel& model,
                        const std::string& kind, const std::string& config_hash) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write cluster model: " + path);
    out << "# fragpes cluster model v1\n";
    out << "# config " << config_hash << "\n";
    out << "kind " << kind << "\n";
    out << "k " << model.k << "\n";
    out << "dim " << model.centroids.cols() << "\n";
    out << "seed " << model.seed << "\n";
    out << "avg_inertia " << format_double(model.avg_inertia) << "\n";
    out << "max_dist " << format_double(model.max_sample_to_centroid_distance) << "\n";
    for (std::size_t c = 0; c < model.centroids.rows(); ++c) {
        out << "centroid";
        for (std::size_t d = 0; d < model.centroids.cols(); ++d)
            out << ' ' << format_double(model.centroids.at(c, d));
        out << "\n";
    }
    out << "percluster";
    for (double v : model.per_cluster_avg_inertia) out << ' ' << format_double(v);
    out << "\n";
}

ClusterModel load_cluster_model(const std::string& path, std::string* kind_out,
                                const std::string& expect_config_hash) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open cluster model: " + path);
    ClusterModel model;
    std::string line;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok[0] == "#") {
            if (tok.size() >= 3 && tok[1] == "config" && !expect_config_hash.empty() &&
                tok[2] != expect_config_hash)
                throw DataError("stale cluster model (config hash mismatch): " + path);
            continue;
        }
        if (tok[0] == "kind" && kind_out) *kind_out = tok.at(1);
        else if (tok[0] == "k") model.k = static_cast<int>(parse_long(tok.at(1)));
        else if (tok[0] == "dim") dim = static_cast<std::size_t>(parse_long(tok.at(1)));
        else if (tok[0] == "seed") model.seed = static_cast<std::uint64_t>(parse_long(tok.at(1)));
        else if (tok[0] == "avg_inertia") model.avg_inertia = parse_double(tok.at(1));
        else if (tok[0] == "max_dist") model.max_sample_to_centroid_distance = parse_double(tok.at(1));
        else if (tok[0] == "centroid") {
            if (tok.size() != dim + 1) throw DataError("cluster model centroid width mismatch");
            std::vector<double> row(dim);
            for (std::size_t d = 0; d < dim; ++d) row[d] = parse_double(tok[d + 1]);
            model.centroids.set_cols(dim);
            model.centroids.push_row(row);
        } else if (tok[0] == "percluster") {
            for (std::size_t i = 1; i < tok.size(); ++i)
                model.per_cluster_avg_inertia.push_back(parse_double(tok[i]));
        }
    }
    if (model.centroids.rows() != static_cast<std::size_t>(model.k))
        throw DataError("cluster model corrupt: centroid count != k");
    return model;
}

}  // namespace fragpes
