#include <algorithm>
#include <array>
#include <cmath>

#include "doctest.h"
#include "fragpes/descriptor.hpp"
#include "fragpes/util.hpp"

using namespace fragpes;

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

// Closed-form symmetric 3x3 eigensolver (trigonometric route), independent of
// the Jacobi iteration used by the implementation.
void eigen3_closed_form(const Mat3& a, Vec3& evals, Mat3& evecs) {
    const double p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if (p1 == 0.0) {
        evals = {a[0][0], a[1][1], a[2][2]};
        evecs = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    } else {
        const double q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
        const double p2 = (a[0][0] - q) * (a[0][0] - q) + (a[1][1] - q) * (a[1][1] - q) +
                          (a[2][2] - q) * (a[2][2] - q) + 2.0 * p1;
        const double p = std::sqrt(p2 / 6.0);
        Mat3 b{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) b[i][j] = (a[i][j] - (i == j ? q : 0.0)) / p;
        const double detb = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                            b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                            b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
        double r = detb / 2.0;
        r = std::clamp(r, -1.0, 1.0);
        const double phi = std::acos(r) / 3.0;
        const double two_pi_3 = 2.0943951023931953;
        evals[2] = q + 2.0 * p * std::cos(phi);
        evals[0] = q + 2.0 * p * std::cos(phi + 2.0 * two_pi_3);
        evals[1] = 3.0 * q - evals[0] - evals[2];
        // eigenvector of lambda: cross product of two rows of (A - lambda I)
        for (int k = 0; k < 3; ++k) {
            Mat3 m = a;
            for (int i = 0; i < 3; ++i) m[i][i] -= evals[k];
            Vec3 best{0, 0, 0};
            double best_norm = -1.0;
            for (int r1 = 0; r1 < 3; ++r1)
                for (int r2 = r1 + 1; r2 < 3; ++r2) {
                    const Vec3 c = {m[r1][1] * m[r2][2] - m[r1][2] * m[r2][1],
                                    m[r1][2] * m[r2][0] - m[r1][0] * m[r2][2],
                                    m[r1][0] * m[r2][1] - m[r1][1] * m[r2][0]};
                    const double n = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
                    if (n > best_norm) {
                        best_norm = n;
                        best = c;
                    }
                }
            const double n = std::sqrt(best_norm);
            for (int i = 0; i < 3; ++i) evecs[k][i] = best[i] / n;
        }
    }
}

Mat3 inertia_tensor(const Geometry& g) {
    double mtot = 0.0;
    Vec3 com{0, 0, 0};
    for (const auto& a : g.atoms) {
        mtot += a.mass;
        for (int c = 0; c < 3; ++c) com[c] += a.mass * a.pos[c];
    }
    for (auto& c : com) c /= mtot;
    Mat3 t{};
    for (const auto& a : g.atoms) {
        const Vec3 d = {a.pos[0] - com[0], a.pos[1] - com[1], a.pos[2] - com[2]};
        const double r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) t[i][j] += a.mass * ((i == j ? r2 : 0.0) - d[i] * d[j]);
    }
    return t;
}

Geometry standard_water() {
    Geometry g;
    g.atoms.push_back({"O", atomic_mass("O"), {0.0, 0.0, 0.0}});
    g.atoms.push_back({"H", atomic_mass("H"), {0.9572, 0.0, 0.0}});
    g.atoms.push_back({"H", atomic_mass("H"), {-0.2399872, 0.9266272, 0.0}});
    return g;
}

Mat3 random_rotation(Rng& rng) {
    // quaternion -> rotation matrix
    double q[4];
    double n = 0.0;
    for (double& v : q) {
        v = rng.normal();
        n += v * v;
    }
    n = std::sqrt(n);
    for (double& v : q) v /= n;
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
             {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
             {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

Geometry transformed(const Geometry& g, const Mat3& rot, const Vec3& shift) {
    Geometry out = g;
    for (std::size_t i = 0; i < g.size(); ++i)
        for (int r = 0; r < 3; ++r)
            out.atoms[i].pos[r] = rot[r][0] * g.atoms[i].pos[0] + rot[r][1] * g.atoms[i].pos[1] +
                                  rot[r][2] * g.atoms[i].pos[2] + shift[r];
    return out;
}

Geometry permuted_identical(const Geometry& g, Rng& rng) {
    // shuffle atom order within each element class
    std::vector<int> order(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) order[i] = static_cast<int>(i);
    for (const char* el : {"H", "O"}) {
        std::vector<std::size_t> slots;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (g.atoms[i].element == el) slots.push_back(i);
        for (std::size_t i = slots.size(); i > 1; --i) {
            const std::size_t j = rng.index(i);
            std::swap(order[slots[i - 1]], order[slots[j]]);
        }
    }
    Geometry out = g;
    for (std::size_t i = 0; i < g.size(); ++i) out.atoms[i] = g.atoms[static_cast<std::size_t>(order[i])];
    return out;
}

// Random O/H fragment with generic geometry; regenerates while the inertia
// spectrum is flagged degenerate (the invariance contract excludes those).
Geometry random_fragment(Rng& rng, int natoms) {
    while (true) {
        Geometry g;
        for (int i = 0; i < natoms; ++i) {
            const bool oxygen = (i % 3 == 0);
            Atom a;
            a.element = oxygen ? "O" : "H";
            a.mass = atomic_mass(a.element);
            bool placed = false;
            for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
                for (int c = 0; c < 3; ++c) a.pos[static_cast<std::size_t>(c)] = rng.uniform(-2.5, 2.5);
                placed = true;
                for (const auto& other : g.atoms) {
                    const double dx = a.pos[0] - other.pos[0];
                    const double dy = a.pos[1] - other.pos[1];
                    const double dz = a.pos[2] - other.pos[2];
                    if (dx * dx + dy * dy + dz * dz < 0.45) placed = false;
                }
            }
            g.atoms.push_back(a);
        }
        if (natoms == 2) return g;
        if (!canonical_frame(g).degenerate) return g;
    }
}

}  // namespace

TEST_SUITE("descriptor") {

TEST_CASE("linear rotor: origin at midpoint, major axis along the bond") {
    Geometry g;
    g.atoms.push_back({"H", atomic_mass("H"), {1.0, 0.0, 0.0}});
    g.atoms.push_back({"H", atomic_mass("H"), {-1.0, 0.0, 0.0}});
    const CanonicalFrame f = canonical_frame(g);
    CHECK(f.origin[0] == doctest::Approx(0.0));
    CHECK(f.origin[1] == doctest::Approx(0.0));
    CHECK(std::abs(f.moments[0]) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(f.axes[0][0]) == doctest::Approx(1.0));
    CHECK(std::abs(f.axes[0][1]) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("water monomer axes match the closed-form eigensolver oracle") {
    const Geometry g = standard_water();
    const CanonicalFrame f = canonical_frame(g);

    Vec3 evals;
    Mat3 evecs;
    eigen3_closed_form(inertia_tensor(g), evals, evecs);
    // oracle eigenvalues ascend; match to the frame's |moment| ordering
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(evals[a]) < std::abs(evals[b]); });
    for (int k = 0; k < 3; ++k) {
        CHECK(f.moments[static_cast<std::size_t>(k)] ==
              doctest::Approx(evals[order[static_cast<std::size_t>(k)]]).epsilon(1e-8));
        double dot = 0.0;
        for (int c = 0; c < 3; ++c)
            dot += f.axes[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)] *
                   evecs[order[static_cast<std::size_t>(k)]][static_cast<std::size_t>(c)];
        CHECK(std::abs(dot) == doctest::Approx(1.0).epsilon(1e-8));
    }
    // water is an asymmetric top; the frame must not be flagged
    CHECK_FALSE(f.degenerate);
}

TEST_CASE("moments are invariant under rigid rotation") {
    Rng rng(555);
    const Geometry g = random_fragment(rng, 6);
    const CanonicalFrame base = canonical_frame(g);
    for (int trial = 0; trial < 25; ++trial) {
        const Geometry moved = transformed(g, random_rotation(rng), {0, 0, 0});
        const CanonicalFrame f = canonical_frame(moved);
        for (int k = 0; k < 3; ++k)
            CHECK(f.moments[static_cast<std::size_t>(k)] ==
                  doctest::Approx(base.moments[static_cast<std::size_t>(k)]).epsilon(1e-9));
    }
}

TEST_CASE("canonical frame requires two atoms") {
    Geometry g;
    g.atoms.push_back({"O", atomic_mass("O"), {0, 0, 0}});
    CHECK_THROWS_AS(canonical_frame(g), DataError);
}

TEST_CASE("canonical order: masses ascend, then the major-axis projection") {
    const Geometry g = standard_water();
    const CanonicalFrame f = canonical_frame(g);
    const auto order = canonical_atom_order(g, f);
    REQUIRE(order.size() == 3);
    CHECK(g.atoms[static_cast<std::size_t>(order[0])].element == "H");
    CHECK(g.atoms[static_cast<std::size_t>(order[1])].element == "H");
    CHECK(g.atoms[static_cast<std::size_t>(order[2])].element == "O");
}

TEST_CASE("equal masses at mirror positions: the negative projection leads") {
    Geometry g;
    g.atoms.push_back({"H", atomic_mass("H"), {1.0, 0.0, 0.0}});
    g.atoms.push_back({"H", atomic_mass("H"), {-1.0, 0.0, 0.0}});
    const CanonicalFrame f = canonical_frame(g);
    const auto order = canonical_atom_order(g, f);
    double p = 0.0;
    for (int c = 0; c < 3; ++c)
        p += g.atoms[static_cast<std::size_t>(order[0])].pos[static_cast<std::size_t>(c)] *
             f.axes[0][static_cast<std::size_t>(c)];
    CHECK(p < 0.0);
}

TEST_CASE("descriptor of a diatomic is its bond length") {
    Geometry g;
    g.atoms.push_back({"O", atomic_mass("O"), {0, 0, 0}});
    g.atoms.push_back({"H", atomic_mass("H"), {0.96, 0, 0}});
    const DescriptorVector d = descriptor_vector(g, "HO-");
    REQUIRE(d.values.size() == 1);
    CHECK(d.values[0] == doctest::Approx(0.96));
}

TEST_CASE("descriptor length is n(n-1)/2") {
    Rng rng(808);
    for (int n : {2, 3, 5, 8, 13}) {
        const Geometry g = random_fragment(rng, n);
        const DescriptorVector d = descriptor_vector(g, "X");
        CHECK(d.values.size() == static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) - 1) / 2);
        CHECK(std::all_of(d.values.begin(), d.values.end(), [](double v) { return v > 0.0; }));
    }
}

TEST_CASE("swapping input order of identical atoms leaves the vector unchanged") {
    // slightly asymmetric water so projections are generic
    Geometry g;
    g.atoms.push_back({"O", atomic_mass("O"), {0.0, 0.0, 0.0}});
    g.atoms.push_back({"H", atomic_mass("H"), {0.96, 0.0, 0.0}});
    g.atoms.push_back({"H", atomic_mass("H"), {-0.30, 0.99, 0.05}});
    Geometry swapped = g;
    std::swap(swapped.atoms[1], swapped.atoms[2]);

    const auto a = descriptor_vector(g, "H2O").values;
    const auto b = descriptor_vector(swapped, "H2O").values;
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));

    const auto order_a = canonical_atom_order(g, canonical_frame(g));
    const auto order_b = canonical_atom_order(swapped, canonical_frame(swapped));
    for (std::size_t i = 0; i < order_a.size(); ++i)
        CHECK(g.atoms[static_cast<std::size_t>(order_a[i])].pos[0] ==
              doctest::Approx(swapped.atoms[static_cast<std::size_t>(order_b[i])].pos[0]));
}

TEST_CASE("rigid motion plus identical-atom permutation preserves the vector") {
    Rng rng(161803);
    for (int trial = 0; trial < 150; ++trial) {
        const int n = 2 + static_cast<int>(rng.index(12));
        const Geometry g = random_fragment(rng, n);
        const auto base = descriptor_vector(g, "X").values;

        Geometry moved = transformed(g, random_rotation(rng),
                                     {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)});
        moved = permuted_identical(moved, rng);
        const auto got = descriptor_vector(moved, "X").values;

        REQUIRE(got.size() == base.size());
        double worst = 0.0;
        for (std::size_t i = 0; i < base.size(); ++i)
            worst = std::max(worst, std::abs(base[i] - got[i]));
        CHECK(worst <= 1e-8);
    }
}

TEST_CASE("degenerate spectra are flagged, not fatal") {
    // two equal masses: a symmetric rotor with two equal |moments|
    Geometry g;
    g.atoms.push_back({"H", atomic_mass("H"), {1.0, 0.0, 0.0}});
    g.atoms.push_back({"H", atomic_mass("H"), {-1.0, 0.0, 0.0}});
    const CanonicalFrame f = canonical_frame(g);
    CHECK(f.degenerate);
    const DescriptorVector d = descriptor_vector(g, "H2");
    CHECK(d.degenerate_frame);
    CHECK(d.values[0] == doctest::Approx(2.0));
}

}  // TEST_SUITE
