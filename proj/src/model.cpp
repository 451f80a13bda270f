#include "fragpes/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace fragpes {

namespace {

void init_matrix(DataMatrix& w, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
    for (double& v : w.raw()) v = rng.uniform(-bound, bound);
}

// Per-sample forward pass keeping every layer's pre-activation and activation
// for backprop.
struct Workspace {
    std::vector<std::vector<double>> z;  // per hidden layer
    std::vector<std::vector<double>> a;  // a[0] = input with bias, a[l+1] = activations
    std::vector<std::vector<double>> delta;
};

double forward_ws(const GaussianNet& net, std::span<const double> v, Workspace& ws) {
    const std::size_t layers = net.hidden.size();
    ws.z.resize(layers);
    ws.a.resize(layers + 1);
    ws.a[0].assign(v.begin(), v.end());
    ws.a[0].push_back(1.0);  // appended bias
    for (std::size_t l = 0; l < layers; ++l) {
        const DataMatrix& w = net.hidden[l];
        auto& z = ws.z[l];
        auto& a = ws.a[l + 1];
        z.resize(w.rows());
        a.resize(w.rows());
        const auto& in = ws.a[l];
        for (std::size_t r = 0; r < w.rows(); ++r) {
            const double* row = w.row(r);
            double s = 0.0;
            for (std::size_t c = 0; c < w.cols(); ++c) s += row[c] * in[c];
            z[r] = s;
            a[r] = std::exp(-s * s);
        }
    }
    const auto& last = ws.a[layers];
    double out = net.out_b;
    for (std::size_t i = 0; i < net.out_w.size(); ++i) out += net.out_w[i] * last[i];
    return out;
}

struct NetGrad {
    std::vector<DataMatrix> hidden;
    std::vector<double> out_w;
    double out_b = 0.0;

    explicit NetGrad(const GaussianNet& net) { reset(net); }
    void reset(const GaussianNet& net) {
        hidden.clear();
        for (const auto& w : net.hidden) hidden.emplace_back(w.rows(), w.cols(), 0.0);
        out_w.assign(net.out_w.size(), 0.0);
        out_b = 0.0;
    }
};

// Accumulate dL/dw for one sample given dL/dy_hat = factor.
void backward_ws(const GaussianNet& net, const Workspace& ws, double factor, NetGrad& grad) {
    const std::size_t layers = net.hidden.size();
    const auto& last = ws.a[layers];
    for (std::size_t i = 0; i < net.out_w.size(); ++i) grad.out_w[i] += factor * last[i];
    grad.out_b += factor;

    if (layers == 0) return;
    std::vector<double> delta(net.out_w.size());
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = factor * net.out_w[i];

    for (std::size_t l = layers; l-- > 0;) {
        const DataMatrix& w = net.hidden[l];
        const auto& z = ws.z[l];
        const auto& a = ws.a[l + 1];
        const auto& in = ws.a[l];
        // d a/d z for the Gaussian unit: -2 z exp(-z^2)
        std::vector<double> dz(w.rows());
        for (std::size_t r = 0; r < w.rows(); ++r) dz[r] = delta[r] * (-2.0 * z[r] * a[r]);
        DataMatrix& gw = grad.hidden[l];
        for (std::size_t r = 0; r < w.rows(); ++r) {
            double* grow = gw.row(r);
            const double d = dz[r];
            for (std::size_t c = 0; c < w.cols(); ++c) grow[c] += d * in[c];
        }
        if (l > 0) {
            std::vector<double> prev(w.cols(), 0.0);
            for (std::size_t r = 0; r < w.rows(); ++r) {
                const double d = dz[r];
                const double* row = w.row(r);
                for (std::size_t c = 0; c < w.cols(); ++c) prev[c] += d * row[c];
            }
            delta = std::move(prev);
        }
    }
}

struct Momentum {
    std::vector<DataMatrix> hidden;
    std::vector<double> out_w;
    double out_b = 0.0;

    explicit Momentum(const GaussianNet& net) {
        for (const auto& w : net.hidden) hidden.emplace_back(w.rows(), w.cols(), 0.0);
        out_w.assign(net.out_w.size(), 0.0);
    }
};

double grad_norm(const NetGrad& grad) {
    double s = grad.out_b * grad.out_b;
    for (const auto& gw : grad.hidden)
        for (double g : gw.raw()) s += g * g;
    for (double g : grad.out_w) s += g * g;
    return std::sqrt(s);
}

void clip_grad(NetGrad& grad, double cap) {
    if (cap <= 0.0) return;
    const double norm = grad_norm(grad);
    if (norm <= cap) return;
    const double scale = cap / norm;
    for (auto& gw : grad.hidden)
        for (double& g : gw.raw()) g *= scale;
    for (double& g : grad.out_w) g *= scale;
    grad.out_b *= scale;
}

void apply_update(GaussianNet& net, const NetGrad& grad, Momentum& mom, double lr, double mu) {
    for (std::size_t l = 0; l < net.hidden.size(); ++l) {
        auto& w = net.hidden[l].raw();
        auto& v = mom.hidden[l].raw();
        const auto& g = grad.hidden[l].raw();
        for (std::size_t i = 0; i < w.size(); ++i) {
            v[i] = mu * v[i] - lr * g[i];
            w[i] += v[i];
        }
    }
    for (std::size_t i = 0; i < net.out_w.size(); ++i) {
        mom.out_w[i] = mu * mom.out_w[i] - lr * grad.out_w[i];
        net.out_w[i] += mom.out_w[i];
    }
    mom.out_b = mu * mom.out_b - lr * grad.out_b;
    net.out_b += mom.out_b;
}

}  // namespace

GaussianNet make_gaussian_net(int features, std::uint64_t seed) {
    if (features < 1) throw ConfigError("network needs at least one feature");
    GaussianNet net;
    net.features = features;
    Rng rng(seed);
    const std::size_t width = 4 * static_cast<std::size_t>(features);
    std::size_t in = net.input_width();
    for (int l = 0; l < 4; ++l) {
        net.hidden.emplace_back(width, in);
        init_matrix(net.hidden.back(), rng);
        in = width;
    }
    net.out_w.resize(width);
    const double bound = 1.0 / std::sqrt(static_cast<double>(width));
    for (double& v : net.out_w) v = rng.uniform(-bound, bound);
    net.out_b = 0.0;
    return net;
}

GaussianNet make_linear_net(int features, std::uint64_t seed) {
    if (features < 1) throw ConfigError("network needs at least one feature");
    GaussianNet net;
    net.features = features;
    Rng rng(seed);
    net.out_w.resize(net.input_width());
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.out_w.size()));
    for (double& v : net.out_w) v = rng.uniform(-bound, bound);
    net.out_b = 0.0;
    return net;
}

std::vector<double> gaussian_layer_forward(std::span<const double> x, const DataMatrix& w) {
    if (x.size() != w.cols()) throw DataError("gaussian_layer_forward: dimension mismatch");
    std::vector<double> out(w.rows());
    for (std::size_t r = 0; r < w.rows(); ++r) {
        const double* row = w.row(r);
        double s = 0.0;
        for (std::size_t c = 0; c < w.cols(); ++c) s += row[c] * x[c];
        out[r] = std::exp(-s * s);
    }
    return out;
}

double net_forward(const GaussianNet& net, std::span<const double> v) {
    if (v.size() != static_cast<std::size_t>(net.features))
        throw DataError("net_forward: feature count mismatch");
    Workspace ws;
    return forward_ws(net, v, ws);
}

double net_mse(const GaussianNet& net, const DataMatrix& x, std::span<const double> y) {
    std::vector<double> se(x.rows());
    parallel_for(x.rows(), [&](std::size_t b, std::size_t e) {
        Workspace ws;
        for (std::size_t i = b; i < e; ++i) {
            const double d = forward_ws(net, x.row_span(i), ws) - y[i];
            se[i] = d * d;
        }
    });
    double s = 0.0;
    for (double v : se) s += v;
    return s / static_cast<double>(x.rows());
}

TrainTrace train_network(GaussianNet& net, const DataMatrix& x, std::span<const double> y,
                         const TrainConfig& cfg) {
    const std::size_t m = x.rows();
    if (m == 0) throw DataError("train_network: empty dataset");
    if (y.size() != m) throw DataError("train_network: label count mismatch");
    if (x.cols() != static_cast<std::size_t>(net.features))
        throw DataError("train_network: feature count mismatch");

    Rng rng(cfg.seed);
    Momentum mom(net);
    NetGrad grad(net);
    Workspace ws;
    double lr = cfg.learning_rate;

    TrainTrace trace;
    // the incoming weights are the baseline candidate; a warm start that never
    // improves comes back unchanged
    GaussianNet best = net;
    double best_loss = net_mse(net, x, y);
    trace.best_epoch = -1;
    int flat_epochs = 0;

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);

    const int batch = std::max(1, cfg.batch_size);
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < m; start += static_cast<std::size_t>(batch)) {
            const std::size_t stop = std::min(m, start + static_cast<std::size_t>(batch));
            grad.reset(net);
            const double scale = 2.0 / static_cast<double>(stop - start);
            for (std::size_t bi = start; bi < stop; ++bi) {
                const std::size_t i = order[bi];
                const double pred = forward_ws(net, x.row_span(i), ws);
                backward_ws(net, ws, scale * (pred - y[i]), grad);
            }
            clip_grad(grad, cfg.grad_clip);
            apply_update(net, grad, mom, lr, cfg.momentum);
        }

        const double loss = net_mse(net, x, y);
        if (!std::isfinite(loss))
            throw NumericError("training diverged: non-finite loss at epoch " +
                               std::to_string(epoch));
        trace.epoch_loss.push_back(loss);

        if (loss < best_loss) {
            if (best_loss - loss > cfg.min_improvement) flat_epochs = -1;  // significant step
            best_loss = loss;
            trace.best_epoch = epoch;
            best = net;
        }
        ++flat_epochs;
        if (flat_epochs > 0 && cfg.plateau_halve_after > 0 &&
            flat_epochs % cfg.plateau_halve_after == 0) {
            // halve the step and resume from the best weights with fresh
            // momentum; this walks oscillation floors downward
            lr *= 0.5;
            net = best;
            mom = Momentum(net);
        }
        if (flat_epochs >= cfg.patience) break;
    }

    net = std::move(best);
    trace.best_loss = best_loss;
    return trace;
}

double array_predict_raw(const NNArray& arr, std::span<const double> v) {
    if (v.size() != static_cast<std::size_t>(arr.features))
        throw DataError("array_predict: descriptor length mismatch for kind " + arr.kind);
    double sum = 0.0;
    Workspace ws;
    for (const auto& net : arr.members) sum += forward_ws(net, v, ws);
    return sum;
}

double array_predict(const NNArray& arr, const DescriptorVector& v) {
    if (v.kind != arr.kind)
        throw DataError("array_predict: kind mismatch: model " + arr.kind + ", descriptor " +
                        v.kind);
    return array_predict_raw(arr, v.values);
}

double array_mse(const NNArray& arr, const DataMatrix& x, std::span<const double> y) {
    std::vector<double> se(x.rows());
    parallel_for(x.rows(), [&](std::size_t b, std::size_t e) {
        Workspace ws;
        for (std::size_t i = b; i < e; ++i) {
            double pred = 0.0;
            for (const auto& net : arr.members) pred += forward_ws(net, x.row_span(i), ws);
            const double d = pred - y[i];
            se[i] = d * d;
        }
    });
    double s = 0.0;
    for (double v : se) s += v;
    return s / static_cast<double>(x.rows());
}

double array_mae(const NNArray& arr, const DataMatrix& x, std::span<const double> y) {
    std::vector<double> ae(x.rows());
    parallel_for(x.rows(), [&](std::size_t b, std::size_t e) {
        Workspace ws;
        for (std::size_t i = b; i < e; ++i) {
            double pred = 0.0;
            for (const auto& net : arr.members) pred += forward_ws(net, x.row_span(i), ws);
            ae[i] = std::abs(pred - y[i]);
        }
    });
    double s = 0.0;
    for (double v : ae) s += v;
    return s / static_cast<double>(x.rows());
}

namespace {
std::vector<double> residual_labels(const NNArray& arr, std::size_t upto, const DataMatrix& x,
                                    std::span<const double> y) {
    std::vector<double> r(y.begin(), y.end());
    Workspace ws;
    for (std::size_t mi = 0; mi < upto && mi < arr.members.size(); ++mi)
        for (std::size_t i = 0; i < x.rows(); ++i)
            r[i] -= forward_ws(arr.members[mi], x.row_span(i), ws);
    return r;
}
}  // namespace

NNArray train_array(const std::string& kind, const DataMatrix& x, std::span<const double> y,
                    const TrainConfig& cfg) {
    if (x.rows() == 0) throw DataError("train_array: empty dataset");
    NNArray arr;
    arr.kind = kind;
    arr.features = static_cast<int>(x.cols());

    TrainConfig c0 = cfg;
    c0.seed = derive_seed(cfg.seed, "member-0");
    arr.members.push_back(make_gaussian_net(arr.features, derive_seed(cfg.seed, "init-0")));
    train_network(arr.members[0], x, y, c0);

    const std::vector<double> res = residual_labels(arr, 1, x, y);
    double res_mse = 0.0;
    for (double r : res) res_mse += r * r;
    res_mse /= static_cast<double>(res.size());

    TrainConfig c1 = cfg;
    c1.seed = derive_seed(cfg.seed, "member-1");
    arr.members.push_back(make_gaussian_net(arr.features, derive_seed(cfg.seed, "init-1")));
    const TrainTrace t1 = train_network(arr.members[1], x, res, c1);

    // The residual member must not hurt: fall back to a null contribution if
    // it failed to beat the zero predictor.
    if (t1.best_loss > res_mse) {
        std::fill(arr.members[1].out_w.begin(), arr.members[1].out_w.end(), 0.0);
        arr.members[1].out_b = 0.0;
    }
    return arr;
}

void continue_train_array(NNArray& arr, const DataMatrix& x, std::span<const double> y,
                          const TrainConfig& cfg) {
    if (x.cols() != static_cast<std::size_t>(arr.features))
        throw DataError("continue_train_array: feature count mismatch for kind " + arr.kind);
    std::vector<double> residual(y.begin(), y.end());
    Workspace ws;
    for (std::size_t mi = 0; mi < arr.members.size(); ++mi) {
        TrainConfig c = cfg;
        c.seed = derive_seed(cfg.seed, "continue-" + std::to_string(mi));
        train_network(arr.members[mi], x, residual, c);
        for (std::size_t i = 0; i < x.rows(); ++i)
            residual[i] -= forward_ws(arr.members[mi], x.row_span(i), ws);
    }
}

void transfer_slice(NNArray& arr, const DataMatrix& slice_x, std::span<const double> slice_y,
                    const DataMatrix& cumulative_x, std::span<const double> cumulative_y,
                    const TrainConfig& cfg) {
    TrainConfig adapt = cfg;
    adapt.seed = derive_seed(cfg.seed, "transfer-adapt");
    continue_train_array(arr, slice_x, slice_y, adapt);

    TrainConfig tune = cfg;
    tune.seed = derive_seed(cfg.seed, "transfer-tune");
    tune.learning_rate = cfg.learning_rate * cfg.fine_tune_lr_scale;
    if (cfg.fine_tune_max_epochs > 0) tune.max_epochs = cfg.fine_tune_max_epochs;
    continue_train_array(arr, cumulative_x, cumulative_y, tune);
}

double gradient_check(const GaussianNet& net, std::span<const double> x, double y, double h) {
    if (!(h >= 1e-6 && h <= 1e-4)) throw ConfigError("gradient_check: h must be in [1e-6, 1e-4]");

    Workspace ws;
    GaussianNet work = net;
    const double pred = forward_ws(work, x, ws);
    NetGrad grad(work);
    backward_ws(work, ws, 2.0 * (pred - y), grad);

    // scale the comparison floor by the gradient magnitude: the difference
    // quotient carries cancellation noise ~ ulp(loss)/h, which is itself
    // proportional to the squared gradient scale
    double grad_scale = std::abs(grad.out_b);
    for (const auto& gw : grad.hidden)
        for (double g : gw.raw()) grad_scale = std::max(grad_scale, std::abs(g));
    for (double g : grad.out_w) grad_scale = std::max(grad_scale, std::abs(g));
    const double floor = std::max(1e-6, 1e-4 * grad_scale);

    auto loss_at = [&](GaussianNet& n) {
        const double p = forward_ws(n, x, ws);
        return (p - y) * (p - y);
    };
    auto check_one = [&](double* w, double analytic) {
        const double saved = *w;
        *w = saved + h;
        const double lp = loss_at(work);
        *w = saved - h;
        const double lm = loss_at(work);
        *w = saved;
        const double numeric = (lp - lm) / (2.0 * h);
        const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
        return std::abs(analytic - numeric) / denom;
    };

    double worst = 0.0;
    for (std::size_t l = 0; l < work.hidden.size(); ++l) {
        auto& w = work.hidden[l].raw();
        const auto& g = grad.hidden[l].raw();
        for (std::size_t i = 0; i < w.size(); ++i) worst = std::max(worst, check_one(&w[i], g[i]));
    }
    for (std::size_t i = 0; i < work.out_w.size(); ++i)
        worst = std::max(worst, check_one(&work.out_w[i], grad.out_w[i]));
    worst = std::max(worst, check_one(&work.out_b, grad.out_b));
    return worst;
}

void save_array(const std::string& path, const NNArray& arr, const std::string& config_hash) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path);
    out << "# fragpes model v1\n";
    out << "# config " << config_hash << "\n";
    out << "kind " << arr.kind << "\n";
    out << "features " << arr.features << "\n";
    out << "members " << arr.members.size() << "\n";
    for (const auto& net : arr.members) {
        out << "net hidden " << net.hidden.size() << "\n";
        for (const auto& w : net.hidden) {
            out << "matrix " << w.rows() << ' ' << w.cols() << "\n";
            for (std::size_t r = 0; r < w.rows(); ++r) {
                for (std::size_t c = 0; c < w.cols(); ++c) {
                    if (c) out << ' ';
                    out << format_double(w.at(r, c));
                }
                out << "\n";
            }
        }
        out << "output " << net.out_w.size() << "\n";
        for (std::size_t i = 0; i < net.out_w.size(); ++i) {
            if (i) out << ' ';
            out << format_double(net.out_w[i]);
        }
        out << "\n";
        out << "bias " << format_double(net.out_b) << "\n";
    }
}

NNArray load_array(const std::string& path, const std::string& expect_config_hash) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path);
    NNArray arr;
    std::string line;
    std::size_t expected_members = 0;
    while (std::getline(in, line)) {
        auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok[0] == "#") {
            if (tok.size() >= 3 && tok[1] == "config" && !expect_config_hash.empty() &&
                tok[2] != expect_config_hash)
                throw DataError("stale model file (config hash mismatch): " + path);
            continue;
        }
        if (tok[0] == "kind") arr.kind = tok.at(1);
        else if (tok[0] == "features") arr.features = static_cast<int>(parse_long(tok.at(1)));
        else if (tok[0] == "members") expected_members = static_cast<std::size_t>(parse_long(tok.at(1)));
        else if (tok[0] == "net") {
            GaussianNet net;
            net.features = arr.features;
            const std::size_t nhidden = static_cast<std::size_t>(parse_long(tok.at(2)));
            for (std::size_t l = 0; l < nhidden; ++l) {
                if (!std::getline(in, line)) throw DataError("model file truncated: " + path);
                auto mt = split_ws(line);
                if (mt.size() != 3 || mt[0] != "matrix")
                    throw DataError("model file corrupt (matrix header): " + path);
                const std::size_t rows = static_cast<std::size_t>(parse_long(mt[1]));
                const std::size_t cols = static_cast<std::size_t>(parse_long(mt[2]));
                DataMatrix w(rows, cols);
                for (std::size_t r = 0; r < rows; ++r) {
                    if (!std::getline(in, line)) throw DataError("model file truncated: " + path);
                    auto vt = split_ws(line);
                    if (vt.size() != cols) throw DataError("model file corrupt (matrix row): " + path);
                    for (std::size_t c = 0; c < cols; ++c) w.at(r, c) = parse_double(vt[c]);
                }
                net.hidden.push_back(std::move(w));
            }
            if (!std::getline(in, line)) throw DataError("model file truncated: " + path);
            auto ot = split_ws(line);
            if (ot.size() != 2 || ot[0] != "output")
                throw DataError("model file corrupt (output header): " + path);
            const std::size_t nw = static_cast<std::size_t>(parse_long(ot[1]));
            if (!std::getline(in, line)) throw DataError("model file truncated: " + path);
            auto wt = split_ws(line);
            if (wt.size() != nw) throw DataError("model file corrupt (output row): " + path);
            net.out_w.resize(nw);
            for (std::size_t i = 0; i < nw; ++i) net.out_w[i] = parse_double(wt[i]);
            if (!std::getline(in, line)) throw DataError("model file truncated: " + path);
            auto bt = split_ws(line);
            if (bt.size() != 2 || bt[0] != "bias")
                throw DataError("model file corrupt (bias): " + path);
            net.out_b = parse_double(bt[1]);
            arr.members.push_back(std::move(net));
        }
    }
    if (arr.members.size() != expected_members)
        throw DataError("model file corrupt (member count): " + path);
    return arr;
}

}  // namespace fragpes
