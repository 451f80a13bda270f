#include "fragpes/assembly.hpp"

#include <algorithm>
#include <cmath>

#include "fragpes/descriptor.hpp"

namespace fragpes {

double assemble_exact(const FragGraph& graph,
                      const std::vector<std::vector<std::optional<double>>>& energies) {
    double total = 0.0;
    for (int r = 0; r <= graph.max_rank; ++r) {
        const auto& set = graph.simplex_sets[static_cast<std::size_t>(r)];
        const auto& mult = graph.multiplicities[static_cast<std::size_t>(r)];
        for (std::size_t i = 0; i < set.size(); ++i) {
            if (static_cast<std::size_t>(r) >= energies.size() || i >= energies[static_cast<std::size_t>(r)].size() ||
                !energies[static_cast<std::size_t>(r)][i].has_value())
                throw DataError("assemble_exact: missing energy for rank " + std::to_string(r) +
                                " simplex " + std::to_string(i));
            total += static_cast<double>(mult[i]) * *energies[static_cast<std::size_t>(r)][i];
        }
    }
    return total;
}

EnergyBreakdown assemble_with(double ref_energy, std::span<const Fragment> fragments,
                              std::span<const int> multiplicities,
                              const std::function<double(const Fragment&)>& delta_fn) {
    if (fragments.size() != multiplicities.size())
        throw DataError("assemble: fragments/multiplicities length mismatch");
    EnergyBreakdown out;
    out.ref_energy = ref_energy;
    int max_rank = 0;
    for (const Fragment& f : fragments) max_rank = std::max(max_rank, f.simplex.rank);
    out.per_rank_sum.assign(static_cast<std::size_t>(max_rank) + 1, 0.0);

    for (std::size_t i = 0; i < fragments.size(); ++i) {
        const Fragment& f = fragments[i];
        EnergyBreakdown::Term term;
        term.rank = f.simplex.rank;
        term.index = static_cast<int>(i);
        term.kind = f.simplex.kind;
        term.multiplicity = multiplicities[i];
        term.delta_e = delta_fn(f);
        out.per_rank_sum[static_cast<std::size_t>(term.rank)] +=
            static_cast<double>(term.multiplicity) * term.delta_e;
        out.terms.push_back(std::move(term));
    }
    out.total = out.ref_energy;
    for (double s : out.per_rank_sum) out.total += s;
    return out;
}

EnergyBreakdown assemble_ml(double ref_energy, std::span<const Fragment> fragments,
                            std::span<const int> multiplicities, const ModelBank& bank,
                            UnknownKindPolicy policy) {
    int unknown = 0;
    EnergyBreakdown out = assemble_with(
        ref_energy, fragments, multiplicities, [&](const Fragment& f) -> double {
            const NNArray* model = bank.find(f.simplex.kind);
            if (model == nullptr) {
                if (policy == UnknownKindPolicy::Error)
                    throw DataError("no model for fragment kind '" + f.simplex.kind + "'");
                ++unknown;
                return 0.0;
            }
            return array_predict(*model, descriptor_vector(f));
        });
    out.unknown_kind_count = unknown;
    return out;
}

ErrorDecomposition ml_error_decomposition(const EnergyBreakdown& breakdown,
                                          std::span<const double> true_deltas) {
    if (true_deltas.size() != breakdown.terms.size())
        throw DataError("ml_error_decomposition: delta count mismatch");
    ErrorDecomposition out;
    out.per_fragment.resize(breakdown.terms.size());
    for (std::size_t i = 0; i < breakdown.terms.size(); ++i) {
        const auto& t = breakdown.terms[i];
        out.per_fragment[i] =
            static_cast<double>(t.multiplicity) * (t.delta_e - true_deltas[i]);
        out.total += out.per_fragment[i];
    }
    return out;
}

WeightReport fragment_weights(const FragGraph& graph) {
    WeightReport report;
    report.by_rank.assign(static_cast<std::size_t>(graph.max_rank) + 1, 0.0);
    for (int r = 0; r <= graph.max_rank; ++r) {
        const auto& set = graph.simplex_sets[static_cast<std::size_t>(r)];
        const auto& mult = graph.multiplicities[static_cast<std::size_t>(r)];
        for (std::size_t i = 0; i < set.size(); ++i) {
            const double am = std::abs(static_cast<double>(mult[i]));
            report.by_kind[set[i].kind] += am;
            report.by_rank[static_cast<std::size_t>(r)] += am;
            report.total_abs_multiplicity += am;
        }
    }
    if (report.total_abs_multiplicity > 0.0) {
        for (auto& [kind, w] : report.by_kind) w /= report.total_abs_multiplicity;
        for (double& w : report.by_rank) w /= report.total_abs_multiplicity;
    }
    return report;
}

ErrorReport error_report(std::span<const double> predictions, std::span<const double> references,
                         double bin_width) {
    if (predictions.size() != references.size())
        throw DataError("error_report: sequence length mismatch");
    ErrorReport rep;
    rep.count = predictions.size();
    rep.bin_width = bin_width;
    if (rep.count == 0) return rep;
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double err = std::abs(predictions[i] - references[i]);
        sum += err;
        rep.max_abs_error = std::max(rep.max_abs_error, err);
    }
    rep.mae = sum / static_cast<double>(rep.count);
    if (bin_width > 0.0) {
        const std::size_t nbins =
            static_cast<std::size_t>(std::floor(rep.max_abs_error / bin_width)) + 1;
        std::vector<std::size_t> counts(nbins, 0);
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            const double err = std::abs(predictions[i] - references[i]);
            std::size_t b = static_cast<std::size_t>(std::floor(err / bin_width));
            if (b >= nbins) b = nbins - 1;
            ++counts[b];
        }
        for (std::size_t b = 0; b < nbins; ++b)
            rep.histogram.emplace_back(static_cast<double>(b) * bin_width, counts[b]);
    }
    return rep;
}

CostEstimate cost_estimate(int n_atoms, int n_electrons, long long n_frames) {
    if (n_atoms < 3) throw DataError("cost_estimate: need at least 3 atoms");
    if (n_electrons < 1 || n_frames < 1)
        throw DataError("cost_estimate: electron and frame counts must be positive");
    CostEstimate est;
    const long long dof = 3ll * n_atoms - 6ll;
    est.training_samples = dof * dof;
    const double e = static_cast<double>(n_electrons);
    est.relative_cc_cost = static_cast<double>(n_frames) * e * e * e * e * e * e;
    return est;
}

}  // namespace fragpes
