#include "fnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace fnet {

namespace {

Vec3 lattice_shift(const Mat3& cell, int m0, int m1, int m2) {
    return cell.row(0) * static_cast<double>(m0) + cell.row(1) * static_cast<double>(m1) +
           cell.row(2) * static_cast<double>(m2);
}

}  // namespace

std::array<double, 3> cell_heights(const Mat3& cell) {
    const double volume = std::abs(cell.det());
    std::array<double, 3> h{};
    for (int i = 0; i < 3; ++i) {
        const Vec3 cross = cell.row((i + 1) % 3).cross(cell.row((i + 2) % 3));
        const double area = cross.norm();
        h[i] = area > 0.0 ? volume / area : 0.0;
    }
    return h;
}

std::vector<Vec3> wrap_positions(const std::vector<Vec3>& positions, const Mat3& cell,
                                 const std::array<bool, 3>& pbc) {
    if (!pbc[0] && !pbc[1] && !pbc[2]) return positions;
    const Mat3 inv = cell.inverse();
    std::vector<Vec3> out;
    out.reserve(positions.size());
    for (const Vec3& p : positions) {
        const Vec3 frac = p * inv;
        int k[3] = {0, 0, 0};
        for (int i = 0; i < 3; ++i)
            if (pbc[i]) k[i] = static_cast<int>(std::floor(frac[i]));
        if (k[0] == 0 && k[1] == 0 && k[2] == 0)
            out.push_back(p);
        else
            out.push_back(p - lattice_shift(cell, k[0], k[1], k[2]));
    }
    return out;
}

Vec3 minimum_image_displacement(const Vec3& pos_s, const Vec3& pos_t, const Mat3& cell,
                                const std::array<bool, 3>& pbc) {
    const Vec3 delta = pos_t - pos_s;
    if (!pbc[0] && !pbc[1] && !pbc[2]) return delta;
    if (cell.det() == 0.0)
        throw std::invalid_argument("minimum_image_displacement: singular cell with pbc");

    const Vec3 frac = delta * cell.inverse();
    int base[3] = {0, 0, 0};
    for (int i = 0; i < 3; ++i)
        if (pbc[i]) base[i] = static_cast<int>(std::llround(frac[i]));

    Vec3 best = delta;
    double best_r2 = -1.0;
    const int lo0 = pbc[0] ? base[0] - 2 : 0, hi0 = pbc[0] ? base[0] + 2 : 0;
    const int lo1 = pbc[1] ? base[1] - 2 : 0, hi1 = pbc[1] ? base[1] + 2 : 0;
    const int lo2 = pbc[2] ? base[2] - 2 : 0, hi2 = pbc[2] ? base[2] + 2 : 0;
    for (int m0 = lo0; m0 <= hi0; ++m0)
        for (int m1 = lo1; m1 <= hi1; ++m1)
            for (int m2 = lo2; m2 <= hi2; ++m2) {
                const Vec3 d = delta - lattice_shift(cell, m0, m1, m2);
                const double r2 = d.norm2();
                if (best_r2 < 0.0 || r2 < best_r2) {
                    best_r2 = r2;
                    best = d;
                }
            }
    return best;
}

RadiusGraph build_radius_graph(const AtomicStructure& structure, double cutoff) {
    if (!(cutoff > 0.0))
        throw std::invalid_argument("build_radius_graph: cutoff must be positive");
    for (const Vec3& p : structure.positions)
        if (!p.finite())
            throw std::invalid_argument("build_radius_graph: non-finite position");
    if (structure.any_pbc() && structure.cell.det() == 0.0)
        throw std::invalid_argument("build_radius_graph: singular cell with pbc");

    const int n = structure.size();
    RadiusGraph graph;
    graph.cutoff = cutoff;
    graph.neighbor_counts.assign(n, 0);
    if (n == 0) return graph;

    const std::vector<Vec3> pos =
        wrap_positions(structure.positions, structure.cell, structure.pbc);

    // Image search range per periodic axis, from the cutoff and cell heights.
    const std::array<double, 3> heights = cell_heights(structure.cell);
    int range[3] = {0, 0, 0};
    for (int i = 0; i < 3; ++i)
        if (structure.pbc[i]) {
            if (!(heights[i] > 0.0))
                throw std::invalid_argument("build_radius_graph: degenerate cell height");
            range[i] = static_cast<int>(std::ceil(cutoff / heights[i]));
        }

    // Source replicas: every atom shifted by every candidate image offset.
    struct Replica {
        Vec3 q;
        int atom;
        std::array<int, 3> image;
    };
    std::vector<Replica> replicas;
    replicas.reserve(static_cast<std::size_t>(n) * (2 * range[0] + 1) * (2 * range[1] + 1) *
                     (2 * range[2] + 1));
    for (int m0 = -range[0]; m0 <= range[0]; ++m0)
        for (int m1 = -range[1]; m1 <= range[1]; ++m1)
            for (int m2 = -range[2]; m2 <= range[2]; ++m2) {
                const Vec3 shift = lattice_shift(structure.cell, m0, m1, m2);
                for (int a = 0; a < n; ++a)
                    replicas.push_back({pos[a] + shift, a, {m0, m1, m2}});
            }

    // Uniform cell list with bucket edge = cutoff over the replica bounding box.
    Vec3 lo = replicas[0].q, hi = replicas[0].q;
    for (const auto& r : replicas)
        for (int i = 0; i < 3; ++i) {
            lo[i] = std::min(lo[i], r.q[i]);
            hi[i] = std::max(hi[i], r.q[i]);
        }
    int dims[3];
    for (int i = 0; i < 3; ++i)
        dims[i] = std::max(1, static_cast<int>(std::floor((hi[i] - lo[i]) / cutoff)) + 1);
    auto bucket_of = [&](const Vec3& q, int axis) {
        int b = static_cast<int>(std::floor((q[axis] - lo[axis]) / cutoff));
        return std::clamp(b, 0, dims[axis] - 1);
    };
    auto flat = [&](int bx, int by, int bz) { return (bx * dims[1] + by) * dims[2] + bz; };

    std::vector<std::vector<int>> buckets(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
    for (int i = 0; i < static_cast<int>(replicas.size()); ++i)
        buckets[flat(bucket_of(replicas[i].q, 0), bucket_of(replicas[i].q, 1),
                     bucket_of(replicas[i].q, 2))]
            .push_back(i);

    const double cutoff2 = cutoff * cutoff;
    for (int t = 0; t < n; ++t) {
        const int bx = bucket_of(pos[t], 0), by = bucket_of(pos[t], 1), bz = bucket_of(pos[t], 2);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    const int cx = bx + dx, cy = by + dy, cz = bz + dz;
                    if (cx < 0 || cy < 0 || cz < 0 || cx >= dims[0] || cy >= dims[1] ||
                        cz >= dims[2])
                        continue;
                    for (int ri : buckets[flat(cx, cy, cz)]) {
                        const Replica& rep = replicas[ri];
                        const Vec3 d = (pos[t] - pos[rep.atom]) -
                                       lattice_shift(structure.cell, rep.image[0],
                                                     rep.image[1], rep.image[2]);
                        const double r2 = d.norm2();
                        if (r2 > 0.0 && r2 <= cutoff2)
                            graph.edges.push_back({rep.atom, t, d, rep.image});
                    }
                }
    }

    std::sort(graph.edges.begin(), graph.edges.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.dst, a.src, a.image) < std::tie(b.dst, b.src, b.image);
    });
    for (const Edge& e : graph.edges) ++graph.neighbor_counts[e.dst];
    return graph;
}

std::vector<std::array<double, kEdgeFeatureDim>> compute_edge_features(
    const RadiusGraph& graph, const std::vector<int>& atomic_numbers,
    const RadiiTable& radii, double cutoff) {
    std::vector<std::array<double, kEdgeFeatureDim>> features;
    features.reserve(graph.edges.size());
    for (const Edge& e : graph.edges) {
        const double r = e.disp.norm();
        if (r == 0.0) throw std::domain_error("compute_edge_features: degenerate zero-length edge");
        const double a_s = radii.radius(atomic_numbers.at(e.src));
        const double a_t = radii.radius(atomic_numbers.at(e.dst));
        features.push_back({e.disp.x / r, e.disp.y / r, e.disp.z / r, r / cutoff,
                            (r - a_s) / cutoff, (r - a_t) / cutoff,
                            (r - a_s - a_t) / cutoff});
    }
    return features;
}

}  // namespace fnet
