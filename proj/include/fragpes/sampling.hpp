#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fragpes/util.hpp"

namespace fragpes {

struct KMeansParams {
    int batch_size = 256;
    int max_iter = 150;        // mini-batch iterations
    int refine_max_iter = 25;  // full-batch polish iterations
    double tol = 1e-6;         // centroid movement convergence threshold
};

/// Result of clustering one fragment kind's descriptor rows.
struct ClusterModel {
    int k = 0;
    DataMatrix centroids;
    std::vector<int> assignments;                // sample -> cluster id
    std::vector<double> per_cluster_avg_inertia; // mean squared distance per cluster
    double avg_inertia = 0.0;                    // eta_0: (1/M) sum of squared distances
    double max_sample_to_centroid_distance = 0.0;
    std::uint64_t seed = 0;
};

/// Streaming mini-batch k-means followed by a full-batch polish and a final
/// assignment pass. Deterministic for a fixed seed.
ClusterModel minibatch_kmeans(const DataMatrix& data, int k, const KMeansParams& params,
                              std::uint64_t seed);

/// Standard full-batch k-means updates on an existing model; never increases
/// total inertia (up to empty-cluster reseeding). Returns iterations run.
int lloyd_refine(ClusterModel& model, const DataMatrix& data, int max_iter, double tol);

/// Recompute the average inertia of a model against its data (stored
/// centroids, nearest assignment).
double average_inertia(const ClusterModel& model, const DataMatrix& data);

/// Index of the nearest data row to each centroid (ties to the lower index),
/// deduplicated and sorted.
std::vector<std::size_t> select_training_points(const DataMatrix& data, const DataMatrix& centroids);

/// One-dimensional shell partition of descriptor space around the primitive
/// training centroids. Slice s = floor(d/width) + 1.
struct SlicePartition {
    DataMatrix primitive_centroids;
    double slice_width = 0.0;
    std::vector<int> slice_of;  // per sample, >= 1
    int max_slice = 0;
};

SlicePartition assign_slices(const DataMatrix& data, const ClusterModel& primitive);

struct SliceCluster {
    std::vector<double> centroid;
    double avg_inertia = 0.0;
    int size = 0;
    int round = 1;  // recursion round that produced this final cluster
};

struct SliceClusterResult {
    int slice_id = 0;
    std::vector<SliceCluster> final_clusters;
    std::vector<std::size_t> training_indices;  // into the slice data
    int rounds = 0;
    int singleton_recluster_count = 0;  // must stay 0
};

/// Child cluster count when a cluster fails the inertia threshold:
/// ceil(eta/eta0) with a floor of 2 so a re-clustering always refines.
int recursive_child_count(double eta, double eta0);

/// Recursive mini-batch k-means inside one slice: round 1 uses
/// k = max(1, round(sqrt(M))); any cluster with eta > inertia_factor * eta0 is
/// re-clustered into recursive_child_count(eta, eta0) children until all pass.
SliceClusterResult recursive_slice_clustering(const DataMatrix& slice_data, double eta0,
                                              std::uint64_t seed, const KMeansParams& params = {},
                                              double inertia_factor = 2.0);

/// Text persistence (centroids, width, eta0, seed) so later runs can assign
/// slices without re-clustering.
void save_cluster_model(const std::string& path, const ClusterModel& model,
                        const std::string& kind, const std::string& config_hash);
ClusterModel load_cluster_model(const std::string& path, std::string* kind_out,
                                const std::string& expect_config_hash);

}  // namespace fragpes
