#include "fragpes/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace fragpes {

double Geometry::distance(std::size_t i, std::size_t j) const {
    const auto& a = atoms[i].pos;
    const auto& b = atoms[j].pos;
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double atomic_mass(const std::string& element) {
    static const std::unordered_map<std::string, double> table = {
        {"H", 1.008},   {"He", 4.0026}, {"Li", 6.94},   {"Be", 9.0122}, {"B", 10.81},
        {"C", 12.011},  {"N", 14.007},  {"O", 15.999},  {"F", 18.998},  {"Ne", 20.180},
        {"Na", 22.990}, {"Mg", 24.305}, {"Al", 26.982}, {"Si", 28.085}, {"P", 30.974},
        {"S", 32.06},   {"Cl", 35.45},  {"Ar", 39.95},
    };
    auto it = table.find(element);
    if (it == table.end()) throw DataError("unknown element symbol: '" + element + "'");
    return it->second;
}

std::vector<Geometry> parse_xyz_frames(const std::string& text) {
    std::vector<Geometry> frames;
    std::istringstream in(text);
    std::string line;
    int frame = 0;
    while (std::getline(in, line)) {
        const std::string counttok = trim(line);
        if (counttok.empty()) continue;  // blank padding between frames
        long n = 0;
        try {
            n = parse_long(counttok);
        } catch (const DataError&) {
            throw DataError("xyz: expected atom count, got '" + counttok + "'");
        }
        if (n < 0) throw DataError("xyz: negative atom count");
        if (!std::getline(in, line) && n > 0)
            throw DataError("xyz: missing comment line in frame " + std::to_string(frame));
        Geometry g;
        g.frame_id = frame;
        g.atoms.reserve(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i) {
            if (!std::getline(in, line))
                throw DataError("xyz: frame " + std::to_string(frame) + " declares " +
                                std::to_string(n) + " atoms but ends after " + std::to_string(i));
            auto tok = split_ws(line);
            if (tok.size() < 4)
                throw DataError("xyz: malformed atom line in frame " + std::to_string(frame) +
                                ": '" + trim(line) + "'");
            Atom a;
            a.element = tok[0];
            a.mass = atomic_mass(a.element);
            for (int c = 0; c < 3; ++c) a.pos[c] = parse_double(tok[1 + c]);
            if (!std::isfinite(a.pos[0]) || !std::isfinite(a.pos[1]) || !std::isfinite(a.pos[2]))
                throw DataError("xyz: non-finite coordinate in frame " + std::to_string(frame));
            g.atoms.push_back(std::move(a));
        }
        frames.push_back(std::move(g));
        ++frame;
    }
    return frames;
}

Geometry parse_xyz(const std::string& text) {
    auto frames = parse_xyz_frames(text);
    if (frames.size() != 1)
        throw DataError("expected exactly one xyz frame, found " + std::to_string(frames.size()));
    return std::move(frames.front());
}

std::vector<Geometry> load_xyz_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open trajectory file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_xyz_frames(buf.str());
}

std::string formula_string(const std::map<std::string, int>& element_counts, int charge) {
    // Hill order: C first, then H, then the rest alphabetically. Without C the
    // whole list is alphabetical, which puts H before O as in "H2O".
    std::string out;
    auto append = [&out](const std::string& el, int n) {
        if (n <= 0) return;
        out += el;
        if (n > 1) out += std::to_string(n);
    };
    auto counts = element_counts;
    if (counts.count("C")) {
        append("C", counts["C"]);
        counts.erase("C");
        if (counts.count("H")) {
            append("H", counts["H"]);
            counts.erase("H");
        }
    }
    for (const auto& [el, n] : counts) append(el, n);
    for (int i = 0; i < charge; ++i) out += '+';
    for (int i = 0; i > charge; --i) out += '-';
    return out;
}

std::vector<Node> assign_nodes(const Geometry& g, double oh_cutoff) {
    if (oh_cutoff <= 0.0) throw ConfigError("oh_cutoff must be positive");
    std::vector<int> oxygens;
    std::vector<int> hydrogens;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const std::string& el = g.atoms[i].element;
        if (el == "O") {
            oxygens.push_back(static_cast<int>(i));
        } else if (el == "H") {
            hydrogens.push_back(static_cast<int>(i));
        } else {
            throw DataError("unsupported element '" + el +
                            "' at atom " + std::to_string(i) +
                            ": node assignment handles O/H systems only");
        }
    }
    std::vector<std::vector<int>> attached(oxygens.size());
    for (int h : hydrogens) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < oxygens.size(); ++k) {
            const double d = g.distance(static_cast<std::size_t>(h),
                                        static_cast<std::size_t>(oxygens[k]));
            // strict < keeps the first (lowest O index) on exact ties
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(k);
            }
        }
        if (best < 0 || best_d > oh_cutoff)
            throw DataError("orphan hydrogen: atom " + std::to_string(h) +
                            " has no oxygen within " + format_double(oh_cutoff) + " A");
        attached[static_cast<std::size_t>(best)].push_back(h);
    }
    std::vector<Node> nodes;
    nodes.reserve(oxygens.size());
    for (std::size_t k = 0; k < oxygens.size(); ++k) {
        Node n;
        n.atom_indices.push_back(oxygens[k]);
        for (int h : attached[k]) n.atom_indices.push_back(h);
        std::sort(n.atom_indices.begin(), n.atom_indices.end());
        const int nh = static_cast<int>(attached[k].size());
        n.charge = nh - 2;
        n.kind = formula_string({{"H", nh}, {"O", 1}}, n.charge);
        nodes.push_back(std::move(n));
    }
    return nodes;
}

std::map<std::string, int> parse_formula(const std::string& kind, int* charge_out) {
    std::map<std::string, int> counts;
    int charge = 0;
    std::size_t i = 0;
    while (i < kind.size()) {
        const char c = kind[i];
        if (c == '+') {
            ++charge;
            ++i;
            continue;
        }
        if (c == '-') {
            --charge;
            ++i;
            continue;
        }
        if (!std::isupper(static_cast<unsigned char>(c)))
            throw DataError("malformed formula: '" + kind + "'");
        std::string el(1, c);
        ++i;
        while (i < kind.size() && std::islower(static_cast<unsigned char>(kind[i]))) el += kind[i++];
        int n = 0;
        while (i < kind.size() && std::isdigit(static_cast<unsigned char>(kind[i])))
            n = n * 10 + (kind[i++] - '0');
        counts[el] += (n == 0 ? 1 : n);
    }
    if (charge_out) *charge_out = charge;
    return counts;
}

std::string union_kind(const Geometry& g, const std::vector<Node>& nodes,
                       const std::vector<int>& node_ids) {
    std::map<std::string, int> counts;
    int charge = 0;
    for (int id : node_ids) {
        const Node& n = nodes[static_cast<std::size_t>(id)];
        charge += n.charge;
        for (int a : n.atom_indices) counts[g.atoms[static_cast<std::size_t>(a)].element] += 1;
    }
    return formula_string(counts, charge);
}

FragGraph build_graph(const Geometry& g, const std::vector<Node>& nodes, double oo_cutoff) {
    if (oo_cutoff <= 0.0) throw ConfigError("oo_cutoff must be positive");
    FragGraph graph;
    graph.nodes = nodes;
    const std::size_t n = nodes.size();
    graph.adjacency_.assign(n * n, 0);

    // Edge criterion is the minimum O-O distance between the units.
    std::vector<std::vector<int>> node_oxygens(n);
    for (std::size_t i = 0; i < n; ++i)
        for (int a : nodes[i].atom_indices)
            if (g.atoms[static_cast<std::size_t>(a)].element == "O")
                node_oxygens[i].push_back(a);

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double dmin = std::numeric_limits<double>::infinity();
            for (int a : node_oxygens[i])
                for (int b : node_oxygens[j])
                    dmin = std::min(dmin, g.distance(static_cast<std::size_t>(a),
                                                     static_cast<std::size_t>(b)));
            if (dmin <= oo_cutoff) {
                graph.edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
                graph.adjacency_[i * n + j] = 1;
                graph.adjacency_[j * n + i] = 1;
            }
        }
    }

    graph.simplex_sets.assign(2, {});
    graph.max_rank = 1;
    for (std::size_t i = 0; i < n; ++i) {
        Simplex s;
        s.rank = 0;
        s.node_ids = {static_cast<int>(i)};
        s.kind = nodes[i].kind;
        graph.simplex_sets[0].push_back(std::move(s));
    }
    for (const auto& [i, j] : graph.edges) {
        Simplex s;
        s.rank = 1;
        s.node_ids = {i, j};
        s.kind = union_kind(g, nodes, s.node_ids);
        graph.simplex_sets[1].push_back(std::move(s));
    }
    return graph;
}

void enumerate_simplexes(FragGraph& graph, int max_rank) {
    if (max_rank < 0) throw ConfigError("max rank must be >= 0");
    const std::size_t n = graph.nodes.size();

    // Element counts per node, recovered from the node kind so this also works
    // for graphs constructed without a geometry.
    std::vector<std::map<std::string, int>> node_counts(n);
    std::vector<int> node_charge(n);
    for (std::size_t i = 0; i < n; ++i)
        node_counts[i] = parse_formula(graph.nodes[i].kind, &node_charge[i]);
    auto clique_kind = [&](const std::vector<int>& ids) {
        std::map<std::string, int> counts;
        int charge = 0;
        for (int id : ids) {
            charge += node_charge[static_cast<std::size_t>(id)];
            for (const auto& [el, c] : node_counts[static_cast<std::size_t>(id)]) counts[el] += c;
        }
        return formula_string(counts, charge);
    };

    graph.max_rank = max_rank;
    graph.simplex_sets.resize(static_cast<std::size_t>(max_rank) + 1);
    for (int r = 2; r <= max_rank; ++r) {
        auto& prev = graph.simplex_sets[static_cast<std::size_t>(r) - 1];
        auto& cur = graph.simplex_sets[static_cast<std::size_t>(r)];
        cur.clear();
        for (const Simplex& s : prev) {
            // extend by node ids greater than the current maximum; candidate
            // must be adjacent to every member (clique property)
            const int last = s.node_ids.back();
            for (int cand = last + 1; cand < static_cast<int>(n); ++cand) {
                bool ok = true;
                for (int m : s.node_ids) {
                    if (!graph.adjacent(m, cand)) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) continue;
                Simplex t;
                t.rank = r;
                t.node_ids = s.node_ids;
                t.node_ids.push_back(cand);
                t.kind = clique_kind(t.node_ids);
                cur.push_back(std::move(t));
            }
        }
    }
    // Trim ranks above max_rank if the graph was built deeper before.
    graph.simplex_sets.resize(static_cast<std::size_t>(max_rank) + 1);
}

void compute_multiplicities(FragGraph& graph) {
    const int R = graph.max_rank;
    graph.multiplicities.assign(static_cast<std::size_t>(R) + 1, {});
    // index lookup: sorted node-id tuple -> position within its rank
    std::vector<std::map<std::vector<int>, int>> index(static_cast<std::size_t>(R) + 1);
    for (int r = 0; r <= R; ++r) {
        const auto& set = graph.simplex_sets[static_cast<std::size_t>(r)];
        graph.multiplicities[static_cast<std::size_t>(r)].assign(set.size(), 0);
        for (std::size_t i = 0; i < set.size(); ++i)
            index[static_cast<std::size_t>(r)][set[i].node_ids] = static_cast<int>(i);
    }

    // M(a_r) = sum_{m>=r} (-1)^{m+r} p^{r,m}. Every (s+1)-subset of a rank-m
    // clique is itself a clique and therefore present in V_s, so we can push
    // the alternating contribution of each simplex down to all its subsets.
    std::vector<int> subset;
    for (int m = 0; m <= R; ++m) {
        for (const Simplex& beta : graph.simplex_sets[static_cast<std::size_t>(m)]) {
            const int nmem = m + 1;
            for (unsigned mask = 1; mask < (1u << nmem); ++mask) {
                subset.clear();
                for (int b = 0; b < nmem; ++b)
                    if (mask & (1u << b)) subset.push_back(beta.node_ids[static_cast<std::size_t>(b)]);
                const int s = static_cast<int>(subset.size()) - 1;
                const int sign = ((m - s) % 2 == 0) ? 1 : -1;
                auto it = index[static_cast<std::size_t>(s)].find(subset);
                if (it == index[static_cast<std::size_t>(s)].end())
                    throw NumericError("simplex sets are not subset-closed; enumeration bug");
                graph.multiplicities[static_cast<std::size_t>(s)][static_cast<std::size_t>(it->second)] += sign;
            }
        }
    }
}

FragGraph fragment_graph(const Geometry& g, const std::vector<Node>& nodes, double oo_cutoff,
                         int max_rank) {
    FragGraph graph = build_graph(g, nodes, oo_cutoff);
    enumerate_simplexes(graph, max_rank);
    compute_multiplicities(graph);
    return graph;
}

FragGraph graph_from_edges(std::size_t n_nodes, const std::vector<std::pair<int, int>>& edges,
                           int max_rank) {
    FragGraph graph;
    graph.nodes.resize(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        graph.nodes[i].atom_indices = {static_cast<int>(i)};
        graph.nodes[i].kind = "X";
        graph.nodes[i].charge = 0;
    }
    graph.adjacency_.assign(n_nodes * n_nodes, 0);
    graph.simplex_sets.assign(2, {});
    for (std::size_t i = 0; i < n_nodes; ++i) {
        Simplex s;
        s.rank = 0;
        s.node_ids = {static_cast<int>(i)};
        s.kind = "X";
        graph.simplex_sets[0].push_back(std::move(s));
    }
    for (auto [a, b] : edges) {
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        const std::size_t ia = static_cast<std::size_t>(a);
        const std::size_t ib = static_cast<std::size_t>(b);
        if (graph.adjacency_[ia * n_nodes + ib]) continue;
        graph.adjacency_[ia * n_nodes + ib] = 1;
        graph.adjacency_[ib * n_nodes + ia] = 1;
        graph.edges.emplace_back(a, b);
        Simplex s;
        s.rank = 1;
        s.node_ids = {a, b};
        s.kind = "X2";
        graph.simplex_sets[1].push_back(std::move(s));
    }
    std::sort(graph.edges.begin(), graph.edges.end());
    std::sort(graph.simplex_sets[1].begin(), graph.simplex_sets[1].end(),
              [](const Simplex& x, const Simplex& y) { return x.node_ids < y.node_ids; });
    graph.max_rank = 1;
    enumerate_simplexes(graph, max_rank);
    compute_multiplicities(graph);
    return graph;
}

Fragment extract_fragment(const Geometry& g, const Simplex& simplex,
                          const std::vector<Node>& nodes, FragmentSource source) {
    Fragment f;
    f.simplex = simplex;
    f.source = std::move(source);
    f.geometry.frame_id = g.frame_id;
    std::vector<int> atom_ids;
    for (int id : simplex.node_ids)
        for (int a : nodes[static_cast<std::size_t>(id)].atom_indices) atom_ids.push_back(a);
    std::sort(atom_ids.begin(), atom_ids.end());
    f.geometry.atoms.reserve(atom_ids.size());
    for (int a : atom_ids) f.geometry.atoms.push_back(g.atoms[static_cast<std::size_t>(a)]);
    return f;
}

}  // namespace fragpes
