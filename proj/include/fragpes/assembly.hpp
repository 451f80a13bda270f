#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fragpes/geometry.hpp"
#include "fragpes/model.hpp"

namespace fragpes {

/// Multiplicity-weighted sum over simplex energies; energies indexed
/// [rank][simplex index], a missing entry is a data error.
double assemble_exact(const FragGraph& graph,
                      const std::vector<std::vector<std::optional<double>>>& energies);

enum class UnknownKindPolicy {
    Error,    // fail on a fragment kind with no model
    ZeroFill  // contribute 0 and count the occurrence
};

struct EnergyBreakdown {
    struct Term {
        int rank = 0;
        int index = 0;
        std::string kind;
        int multiplicity = 0;
        double delta_e = 0.0;  // model output, kcal/mol
    };
    double ref_energy = 0.0;
    std::vector<Term> terms;
    std::vector<double> per_rank_sum;  // sum of M * dE per rank
    double total = 0.0;                // ref + sum over ranks
    int unknown_kind_count = 0;
};

/// Core accumulation total = ref + sum_r sum_a M * dE with the delta source
/// abstracted; assemble_ml plugs in the model bank, tests can plug in an
/// exact oracle.
EnergyBreakdown assemble_with(double ref_energy, std::span<const Fragment> fragments,
                              std::span<const int> multiplicities,
                              const std::function<double(const Fragment&)>& delta_fn);

/// Predict every fragment's delta-energy through its descriptor and sum per
/// Eq. total = ref + sum_r sum_a M * dE.
EnergyBreakdown assemble_ml(double ref_energy, std::span<const Fragment> fragments,
                            std::span<const int> multiplicities, const ModelBank& bank,
                            UnknownKindPolicy policy = UnknownKindPolicy::Error);

struct ErrorDecomposition {
    std::vector<double> per_fragment;  // M * (dE_ml - dE_true), breakdown order
    double total = 0.0;
};

/// Error of the ML assembly against true per-fragment deltas; the total
/// equals assemble_ml total minus the exact total by construction.
ErrorDecomposition ml_error_decomposition(const EnergyBreakdown& breakdown,
                                          std::span<const double> true_deltas);

struct WeightReport {
    std::map<std::string, double> by_kind;  // omega_{f_r,R}
    std::vector<double> by_rank;            // omega_{r,R}
    double total_abs_multiplicity = 0.0;
};

/// Relative significance weights: share of |M| per fragment kind and per rank.
WeightReport fragment_weights(const FragGraph& graph);

struct ErrorReport {
    double mae = 0.0;
    double max_abs_error = 0.0;
    std::size_t count = 0;
    double bin_width = 0.0;
    std::vector<std::pair<double, std::size_t>> histogram;  // (bin lower edge, count) of |error|
};

ErrorReport error_report(std::span<const double> predictions, std::span<const double> references,
                         double bin_width);

struct CostEstimate {
    long long training_samples = 0;  // (3N - 6)^2
    double relative_cc_cost = 0.0;   // frames * electrons^6
};

CostEstimate cost_estimate(int n_atoms, int n_electrons, long long n_frames);

}  // namespace fragpes
