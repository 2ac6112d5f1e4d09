#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fnet/vec3.hpp"

namespace fnet {

// A periodic atomic structure: slab plus adsorbate in the usual surface
// convention (x,y periodic, z open, bottom slab layers fixed).
struct AtomicStructure {
    std::vector<int> atomic_numbers;        // 1..118
    std::vector<Vec3> positions;            // angstrom
    Mat3 cell;                              // rows are lattice vectors
    std::array<bool, 3> pbc{true, true, false};
    std::vector<std::uint8_t> fixed_mask;   // 1 = fixed slab atom
    std::optional<std::vector<Vec3>> forces;  // eV/angstrom
    std::vector<int> tags;                  // 0 subsurface, 1 surface, 2 adsorbate
    std::optional<double> energy;           // eV
    std::map<std::string, std::string> extra_header;  // unknown file keys, preserved

    int size() const { return static_cast<int>(atomic_numbers.size()); }
    bool any_pbc() const { return pbc[0] || pbc[1] || pbc[2]; }
    int free_count() const {
        int n = 0;
        for (auto f : fixed_mask) n += (f == 0);
        return n;
    }

    // Throws std::invalid_argument when field sizes disagree, positions are
    // non-finite, or the cell is singular while an axis is periodic.
    void validate() const;
};

// Rotates positions, cell rows, and forces (when present) by the same
// rotation matrix; atomic numbers, fixed mask, and tags are untouched.
AtomicStructure rotate_structure(const AtomicStructure& s, double angle, const Vec3& axis);

}  // namespace fnet
