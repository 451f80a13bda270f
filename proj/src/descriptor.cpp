#include "fragpes/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fragpes {

namespace detail {

void symmetric_eigen3(const std::array<std::array<double, 3>, 3>& a, std::array<double, 3>& evals,
                      std::array<std::array<double, 3>, 3>& evecs) {
    // Work matrix and accumulated rotations.
    double m[3][3];
    double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = std::abs(m[0][1]) + std::abs(m[0][2]) + std::abs(m[1][2]);
        if (off == 0.0) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (m[p][q] == 0.0) continue;
                const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    const double mkp = m[k][p];
                    const double mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double mpk = m[p][k];
                    const double mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for (int k = 0; k < 3; ++k) {
                    const double vkp = v[k][p];
                    const double vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    int order[3] = {0, 1, 2};
    std::sort(order, order + 3, [&](int x, int y) { return m[x][x] < m[y][y]; });
    for (int k = 0; k < 3; ++k) {
        evals[static_cast<std::size_t>(k)] = m[order[k]][order[k]];
        for (int r = 0; r < 3; ++r)
            evecs[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)] = v[r][order[k]];
    }
}

}  // namespace detail

CanonicalFrame canonical_frame(const Geometry& g) {
    if (g.size() < 2) throw DataError("canonical frame needs at least 2 atoms");

    CanonicalFrame frame;
    double mtot = 0.0;
    for (const Atom& a : g.atoms) {
        if (!(a.mass > 0.0)) throw DataError("non-positive atomic mass");
        mtot += a.mass;
        for (int c = 0; c < 3; ++c) frame.origin[static_cast<std::size_t>(c)] += a.mass * a.pos[static_cast<std::size_t>(c)];
    }
    for (double& c : frame.origin) c /= mtot;

    // Inertia tensor about the center of mass.
    std::array<std::array<double, 3>, 3> inertia{};
    for (const Atom& a : g.atoms) {
        const double x = a.pos[0] - frame.origin[0];
        const double y = a.pos[1] - frame.origin[1];
        const double z = a.pos[2] - frame.origin[2];
        const double r2 = x * x + y * y + z * z;
        const double d[3] = {x, y, z};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                inertia[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
                    a.mass * ((i == j ? r2 : 0.0) - d[i] * d[j]);
    }

    std::array<double, 3> evals{};
    std::array<std::array<double, 3>, 3> evecs{};
    detail::symmetric_eigen3(inertia, evals, evecs);

    // Order axes by ascending |moment|; the smallest one is the major axis.
    int order[3] = {0, 1, 2};
    std::sort(order, order + 3, [&](int x, int y) {
        return std::abs(evals[static_cast<std::size_t>(x)]) < std::abs(evals[static_cast<std::size_t>(y)]);
    });
    for (int k = 0; k < 3; ++k) {
        frame.moments[static_cast<std::size_t>(k)] = evals[static_cast<std::size_t>(order[k])];
        frame.axes[static_cast<std::size_t>(k)] = evecs[static_cast<std::size_t>(order[k])];
    }

    double max_abs = 0.0;
    for (double m : frame.moments) max_abs = std::max(max_abs, std::abs(m));
    for (int i = 0; i < 3 && !frame.degenerate; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double diff = std::abs(std::abs(frame.moments[static_cast<std::size_t>(i)]) -
                                         std::abs(frame.moments[static_cast<std::size_t>(j)]));
            if (diff < 1e-6 * std::max(max_abs, 1e-30)) {
                frame.degenerate = true;
                break;
            }
        }
    if (max_abs == 0.0) frame.degenerate = true;

    // Fix each axis sign: mass-weighted third moment of projections >= 0;
    // fallback to the projection of the lowest-index heaviest atom.
    int heaviest = 0;
    for (std::size_t i = 1; i < g.size(); ++i)
        if (g.atoms[i].mass > g.atoms[static_cast<std::size_t>(heaviest)].mass) heaviest = static_cast<int>(i);
    for (int k = 0; k < 3; ++k) {
        auto& axis = frame.axes[static_cast<std::size_t>(k)];
        double third = 0.0;
        for (const Atom& a : g.atoms) {
            double p = 0.0;
            for (int c = 0; c < 3; ++c)
                p += (a.pos[static_cast<std::size_t>(c)] - frame.origin[static_cast<std::size_t>(c)]) * axis[static_cast<std::size_t>(c)];
            third += a.mass * p * p * p;
        }
        bool flip = false;
        if (third < -1e-9) {
            flip = true;
        } else if (third <= 1e-9) {
            const Atom& h = g.atoms[static_cast<std::size_t>(heaviest)];
            double p = 0.0;
            for (int c = 0; c < 3; ++c)
                p += (h.pos[static_cast<std::size_t>(c)] - frame.origin[static_cast<std::size_t>(c)]) * axis[static_cast<std::size_t>(c)];
            flip = p < 0.0;
        }
        if (flip)
            for (double& c : axis) c = -c;
    }
    return frame;
}

CanonicalFrame canonical_frame(const Fragment& f) { return canonical_frame(f.geometry); }

std::vector<int> canonical_atom_order(const Geometry& g, const CanonicalFrame& frame) {
    const std::size_t n = g.size();
    std::vector<std::array<double, 3>> proj(n);
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < 3; ++k) {
            double p = 0.0;
            for (int c = 0; c < 3; ++c)
                p += (g.atoms[i].pos[static_cast<std::size_t>(c)] - frame.origin[static_cast<std::size_t>(c)]) *
                     frame.axes[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
            proj[i][static_cast<std::size_t>(k)] = p;
        }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& ga = g.atoms[static_cast<std::size_t>(a)];
        const auto& gb = g.atoms[static_cast<std::size_t>(b)];
        if (ga.mass != gb.mass) return ga.mass < gb.mass;
        for (int k = 0; k < 3; ++k) {
            const double pa = proj[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)];
            const double pb = proj[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)];
            if (pa != pb) return pa < pb;
        }
        return a < b;
    });
    return order;
}

std::vector<int> canonical_atom_order(const Fragment& f, const CanonicalFrame& frame) {
    return canonical_atom_order(f.geometry, frame);
}

DescriptorVector descriptor_vector(const Geometry& g, const std::string& kind) {
    if (g.size() < 2) throw DataError("descriptor needs at least 2 atoms");
    const CanonicalFrame frame = canonical_frame(g);
    const std::vector<int> order = canonical_atom_order(g, frame);
    DescriptorVector d;
    d.kind = kind;
    d.degenerate_frame = frame.degenerate;
    const std::size_t n = g.size();
    d.values.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            d.values.push_back(g.distance(static_cast<std::size_t>(order[i]),
                                          static_cast<std::size_t>(order[j])));
    return d;
}

DescriptorVector descriptor_vector(const Fragment& f) {
    return descriptor_vector(f.geometry, f.simplex.kind);
}

}  // namespace fragpes
