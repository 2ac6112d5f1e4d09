#pragma once

#include <array>
#include <vector>

#include "fnet/elements.hpp"
#include "fnet/structure.hpp"

namespace fnet {

// One directed edge source -> target. `image` is the lattice-offset of the
// source replica the displacement was measured from, so a pair may appear
// once per periodic image within the cutoff.
struct Edge {
    int src = 0;
    int dst = 0;
    Vec3 disp;                    // points from source replica to target
    std::array<int, 3> image{0, 0, 0};
};

struct RadiusGraph {
    std::vector<Edge> edges;            // sorted by (dst, src, image)
    std::vector<int> neighbor_counts;   // incoming edges per target atom
    double cutoff = 0.0;
};

// Shortest displacement from s to t over periodic images (minimum-image
// convention); non-periodic axes use the raw difference. Throws
// std::invalid_argument when the cell is singular while any axis is periodic.
Vec3 minimum_image_displacement(const Vec3& pos_s, const Vec3& pos_t, const Mat3& cell,
                                const std::array<bool, 3>& pbc);

// All directed edges with 0 < |d| <= cutoff, one per periodic image of the
// source. Positions are canonically wrapped into the cell along periodic
// axes before the search, so image offsets refer to wrapped coordinates.
// Deterministic ordering: sorted by (target, source, image offset).
RadiusGraph build_radius_graph(const AtomicStructure& structure, double cutoff);

// 7-vector per edge: [ n_x, n_y, n_z, |d|/c, (|d|-a_s)/c, (|d|-a_t)/c,
// (|d|-a_s-a_t)/c ] with n = d/|d| and a_* the Slater radii.
inline constexpr int kEdgeFeatureDim = 7;
std::vector<std::array<double, kEdgeFeatureDim>> compute_edge_features(
    const RadiusGraph& graph, const std::vector<int>& atomic_numbers,
    const RadiiTable& radii, double cutoff);

// Positions wrapped into the unit cell along periodic axes (fractional
// coordinate in [0,1)); non-periodic axes pass through.
std::vector<Vec3> wrap_positions(const std::vector<Vec3>& positions, const Mat3& cell,
                                 const std::array<bool, 3>& pbc);

// Distance between opposite cell faces along each lattice direction.
std::array<double, 3> cell_heights(const Mat3& cell);

}  // namespace fnet
