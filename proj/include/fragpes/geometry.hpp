#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fragpes/util.hpp"

namespace fragpes {

struct Atom {
    std::string element;
    double mass = 0.0;            // amu
    std::array<double, 3> pos{};  // Angstrom
};

/// A molecular geometry: an ordered list of atoms. Atom order is identity;
/// every downstream index refers back to it.
struct Geometry {
    std::vector<Atom> atoms;
    std::optional<int> frame_id;

    std::size_t size() const { return atoms.size(); }
    double distance(std::size_t i, std::size_t j) const;
};

/// Standard atomic mass for an element symbol; throws DataError for symbols
/// outside the supported table.
double atomic_mass(const std::string& element);

/// Parse XYZ text: count line, comment line, then "symbol x y z" rows.
/// Concatenated frames are split and numbered 0,1,...
std::vector<Geometry> parse_xyz_frames(const std::string& text);

/// Single-frame convenience wrapper; throws if the text holds != 1 frame.
Geometry parse_xyz(const std::string& text);

std::vector<Geometry> load_xyz_file(const std::string& path);

/// A molecular unit: one oxygen plus its attached hydrogens.
struct Node {
    std::vector<int> atom_indices;  // sorted
    std::string kind;               // e.g. "H2O", "H3O+"
    int charge = 0;
};

/// Partition atoms into oxygen-centered units. Each H goes to its nearest O
/// within oh_cutoff (ties to the lower O index). Orphan hydrogens and
/// non-O/H elements are data errors.
std::vector<Node> assign_nodes(const Geometry& g, double oh_cutoff);

/// An (r+1)-clique of nodes: rank 0 = node, 1 = edge, 2 = face, ...
struct Simplex {
    int rank = 0;
    std::vector<int> node_ids;  // sorted, size = rank + 1
    std::string kind;
};

struct FragGraph {
    std::vector<Node> nodes;
    std::vector<std::pair<int, int>> edges;            // i < j
    std::vector<std::vector<Simplex>> simplex_sets;    // [rank][index]
    std::vector<std::vector<int>> multiplicities;      // parallel to simplex_sets
    int max_rank = 0;

    bool adjacent(int i, int j) const { return adjacency_[static_cast<std::size_t>(i) * nodes.size() + j] != 0; }
    std::vector<unsigned char> adjacency_;  // row-major n x n
};

/// Build the node/edge graph: edge (i,j) iff the minimum O-O distance between
/// the two units is <= oo_cutoff. Ranks 0-1 of simplex_sets are populated.
FragGraph build_graph(const Geometry& g, const std::vector<Node>& nodes, double oo_cutoff);

/// Fill simplex_sets with all (r+1)-cliques for r = 0..max_rank.
void enumerate_simplexes(FragGraph& graph, int max_rank);

/// Inclusion-exclusion multiplicities: M(a_r) = sum_{m=r..R} (-1)^{m+r} p^{r,m}
/// where p^{r,m} counts rank-m simplexes containing a_r.
void compute_multiplicities(FragGraph& graph);

/// One-call pipeline for a frame.
FragGraph fragment_graph(const Geometry& g, const std::vector<Node>& nodes, double oo_cutoff,
                         int max_rank);

struct FragmentSource {
    std::string system;
    std::optional<int> frame_id;
};

struct Fragment {
    Geometry geometry;  // atoms of the simplex's node union, original order kept
    Simplex simplex;
    FragmentSource source;
};

Fragment extract_fragment(const Geometry& g, const Simplex& simplex,
                          const std::vector<Node>& nodes, FragmentSource source = {});

/// Canonical formula string (Hill order, charge as trailing +/- marks).
std::string formula_string(const std::map<std::string, int>& element_counts, int charge);

/// Inverse of formula_string.
std::map<std::string, int> parse_formula(const std::string& kind, int* charge_out = nullptr);

/// Formula of a set of nodes' union.
std::string union_kind(const Geometry& g, const std::vector<Node>& nodes,
                       const std::vector<int>& node_ids);

/// Build a graph directly from an edge list (placeholder nodes); used for
/// combinatorial work that does not need coordinates.
FragGraph graph_from_edges(std::size_t n_nodes, const std::vector<std::pair<int, int>>& edges,
                           int max_rank);

}  // namespace fragpes
