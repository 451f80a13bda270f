#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fragpes/descriptor.hpp"
#include "fragpes/util.hpp"

namespace fragpes {

/// Feedforward net with Gaussian hidden activations exp(-(w.x)^2) and a
/// linear output layer with its own bias. The canonical shape for d input
/// features is [d+1, 4d, 4d, 4d, 4d, 1]; the input carries an appended bias 1
/// that lets the units place their Gaussians.
struct GaussianNet {
    int features = 0;
    std::vector<DataMatrix> hidden;  // weight matrices, rows = layer width
    std::vector<double> out_w;
    double out_b = 0.0;

    std::size_t input_width() const { return static_cast<std::size_t>(features) + 1; }
};

/// Canonical 4-hidden-layer net, width 4*d, weights uniform in
/// [-1/sqrt(fan_in), +1/sqrt(fan_in)].
GaussianNet make_gaussian_net(int features, std::uint64_t seed);

/// Test hook: a bare linear net (no hidden layers) over [v; 1].
GaussianNet make_linear_net(int features, std::uint64_t seed);

/// One hidden layer: out_a = exp(-(W_a . x)^2).
std::vector<double> gaussian_layer_forward(std::span<const double> x, const DataMatrix& w);

double net_forward(const GaussianNet& net, std::span<const double> v);

struct TrainConfig {
    double learning_rate = 0.05;
    double momentum = 0.9;
    int batch_size = 16;
    int max_epochs = 300;
    int patience = 20;               // epochs without significant improvement
    double min_improvement = 1e-7;   // squared-kcal/mol units
    int plateau_halve_after = 10;    // halve the step after this many flat epochs
    double grad_clip = 10.0;         // global gradient norm cap, 0 = off
    double fine_tune_lr_scale = 0.1;
    int fine_tune_max_epochs = 0;  // 0 = inherit max_epochs
    std::uint64_t seed = 0;
};

struct TrainTrace {
    std::vector<double> epoch_loss;  // full-dataset MSE after each epoch
    int best_epoch = -1;
    double best_loss = 0.0;
};

/// SGD with momentum and step-halving on plateau; stops when the best loss
/// fails to improve by min_improvement for `patience` consecutive epochs.
/// The returned net carries the best weights seen. NaN loss raises
/// NumericError.
TrainTrace train_network(GaussianNet& net, const DataMatrix& x, std::span<const double> y,
                         const TrainConfig& cfg);

/// Ordered pair of nets predicting a fragment delta-energy as a residual sum.
struct NNArray {
    std::string kind;
    int features = 0;
    std::vector<GaussianNet> members;
};

double array_predict_raw(const NNArray& arr, std::span<const double> v);
double array_predict(const NNArray& arr, const DescriptorVector& v);

/// Member 1 learns the raw labels, member 2 the residuals. The trained array
/// never fits the training set worse than member 1 alone.
NNArray train_array(const std::string& kind, const DataMatrix& x, std::span<const double> y,
                    const TrainConfig& cfg);

/// Warm-start continuation: members re-train in sequence on the residual of
/// the members before them.
void continue_train_array(NNArray& arr, const DataMatrix& x, std::span<const double> y,
                          const TrainConfig& cfg);

/// Two-phase slice transfer: adapt on the new slice's training set, then
/// fine-tune on the cumulative training set at a reduced learning rate.
void transfer_slice(NNArray& arr, const DataMatrix& slice_x, std::span<const double> slice_y,
                    const DataMatrix& cumulative_x, std::span<const double> cumulative_y,
                    const TrainConfig& cfg);

/// Max relative deviation between analytic loss gradients and central finite
/// differences on every weight, loss = (net(x) - y)^2.
double gradient_check(const GaussianNet& net, std::span<const double> x, double y, double h);

double net_mse(const GaussianNet& net, const DataMatrix& x, std::span<const double> y);
double array_mse(const NNArray& arr, const DataMatrix& x, std::span<const double> y);
double array_mae(const NNArray& arr, const DataMatrix& x, std::span<const double> y);

void save_array(const std::string& path, const NNArray& arr, const std::string& config_hash);
NNArray load_array(const std::string& path, const std::string& expect_config_hash);

/// One trained array per fragment kind.
struct ModelBank {
    std::map<std::string, NNArray> arrays;

    const NNArray* find(const std::string& kind) const {
        auto it = arrays.find(kind);
        return it == arrays.end() ? nullptr : &it->second;
    }
};

}  // namespace fragpes
