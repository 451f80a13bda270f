#include "fragpes/oracle.hpp"

#include <cmath>

namespace fragpes {

namespace {
std::vector<int> oxygen_indices(const Geometry& g) {
    std::vector<int> ox;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.atoms[i].element == "O") ox.push_back(static_cast<int>(i));
    return ox;
}
}  // namespace

double pair_potential_energy(const Geometry& g, const MorsePotential& pot) {
    const auto ox = oxygen_indices(g);
    double e = 0.0;
    for (std::size_t i = 0; i < ox.size(); ++i)
        for (std::size_t j = i + 1; j < ox.size(); ++j)
            e += pot.energy(g.distance(static_cast<std::size_t>(ox[i]), static_cast<std::size_t>(ox[j])));
    return e;
}

double manybody_potential_energy(const Geometry& g, const ManyBodyTerm& term) {
    if (term.order < 2) throw ConfigError("many-body order must be >= 2");
    const auto ox = oxygen_indices(g);
    const int n = static_cast<int>(ox.size());
    const int k = term.order;
    if (n < k || term.amplitude == 0.0) return 0.0;

    // Iterate over all k-subsets of oxygens with a rolling index vector.
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    double e = 0.0;
    while (true) {
        double w = term.amplitude;
        for (int i = 0; i < k && w != 0.0; ++i)
            for (int j = i + 1; j < k && w != 0.0; ++j)
                w *= term.switch_fn(g.distance(static_cast<std::size_t>(ox[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])]),
                                               static_cast<std::size_t>(ox[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])])));
        e += w;
        // advance combination
        int pos = k - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
        for (int i = pos + 1; i < k; ++i) idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i) - 1] + 1;
    }
    return e;
}

}  // namespace fragpes
