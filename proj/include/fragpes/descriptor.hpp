#pragma once

#include <array>
#include <string>
#include <vector>

#include "fragpes/geometry.hpp"

namespace fragpes {

/// Center-of-mass / principal-inertia frame of a fragment. Axes are ordered
/// by ascending |moment|; axis signs follow the third-moment convention (see
/// canonical_frame).
struct CanonicalFrame {
    std::array<double, 3> origin{};
    std::array<std::array<double, 3>, 3> axes{};  // axes[k][xyz]
    std::array<double, 3> moments{};              // amu * A^2, same order as axes
    bool degenerate = false;  // two |moments| within 1e-6 relative
};

CanonicalFrame canonical_frame(const Geometry& g);
CanonicalFrame canonical_frame(const Fragment& f);

/// Atom permutation: sort by (mass asc, axis-1 projection asc, axis-2, axis-3,
/// original index).
std::vector<int> canonical_atom_order(const Geometry& g, const CanonicalFrame& frame);
std::vector<int> canonical_atom_order(const Fragment& f, const CanonicalFrame& frame);

/// Flattened upper-triangle inter-atomic distances in canonical atom order.
struct DescriptorVector {
    std::string kind;
    std::vector<double> values;  // n(n-1)/2 entries, all > 0
    bool degenerate_frame = false;
};

DescriptorVector descriptor_vector(const Geometry& g, const std::string& kind);
DescriptorVector descriptor_vector(const Fragment& f);

namespace detail {
/// Cyclic Jacobi eigensolver for a symmetric 3x3 matrix. Eigenvalues ascend;
/// eigenvectors are the matching columns, orthonormal.
void symmetric_eigen3(const std::array<std::array<double, 3>, 3>& a, std::array<double, 3>& evals,
                      std::array<std::array<double, 3>, 3>& evecs);
}  // namespace detail

}  // namespace fragpes
