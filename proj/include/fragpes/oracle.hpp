#pragma once

#include <optional>

#include "fragpes/geometry.hpp"

namespace fragpes {

/// Morse pair term D*((1 - exp(-a(r-r0)))^2 - 1), evaluated over O-O pairs.
struct MorsePotential {
    double depth = 5.0;  // kcal/mol
    double r0 = 2.8;     // A
    double a = 1.5;      // 1/A

    double energy(double r) const {
        const double u = 1.0 - std::exp(-a * (r - r0));
        return depth * (u * u - 1.0);
    }
};

/// Compactly supported k-body term: amplitude * prod over pairs of s(r),
/// s(r) = (1 - (r/range)^2)^2 for r < range, else 0.
struct ManyBodyTerm {
    int order = 3;
    double amplitude = 0.0;  // kcal/mol
    double range = 4.5;      // A

    double switch_fn(double r) const {
        if (r >= range) return 0.0;
        const double x = r / range;
        const double w = 1.0 - x * x;
        return w * w;
    }
};

double pair_potential_energy(const Geometry& g, const MorsePotential& pot);
double manybody_potential_energy(const Geometry& g, const ManyBodyTerm& term);

/// Synthetic stand-in for an electronic-structure level: a pair potential
/// plus an optional many-body term, acting on oxygen positions only.
struct OraclePotential {
    MorsePotential pair;
    std::optional<ManyBodyTerm> many;

    double energy(const Geometry& g) const {
        double e = pair_potential_energy(g, pair);
        if (many && many->amplitude != 0.0) e += manybody_potential_energy(g, *many);
        return e;
    }
};

/// Reference/target level pair; delta labels are target minus reference.
struct OraclePair {
    OraclePotential reference;
    OraclePotential target;

    double delta_label(const Geometry& g) const { return target.energy(g) - reference.energy(g); }
    double delta_label(const Fragment& f) const { return delta_label(f.geometry); }
};

}  // namespace fragpes
