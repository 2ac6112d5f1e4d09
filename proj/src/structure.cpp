#include "fnet/structure.hpp"

#include <stdexcept>

#include "fnet/elements.hpp"

namespace fnet {

void AtomicStructure::validate() const {
    const std::size_t n = atomic_numbers.size();
    if (positions.size() != n || fixed_mask.size() != n)
        throw std::invalid_argument("AtomicStructure: field sizes disagree");
    if (forces && forces->size() != n)
        throw std::invalid_argument("AtomicStructure: forces size disagrees");
    if (!tags.empty() && tags.size() != n)
        throw std::invalid_argument("AtomicStructure: tags size disagrees");
    for (const auto& p : positions)
        if (!p.finite()) throw std::invalid_argument("AtomicStructure: non-finite position");
    for (int z : atomic_numbers)
        if (z < 1 || z > kMaxAtomicNumber)
            throw std::invalid_argument("AtomicStructure: atomic number out of range");
    if (any_pbc() && cell.det() == 0.0)
        throw std::invalid_argument("AtomicStructure: singular cell with periodic axis");
}

AtomicStructure rotate_structure(const AtomicStructure& s, double angle, const Vec3& axis) {
    const Mat3 r = rotation_about_axis(axis, angle);
    AtomicStructure out = s;
    for (auto& p : out.positions) p = rotate(r, p);
    out.cell = Mat3::from_rows(rotate(r, s.cell.row(0)), rotate(r, s.cell.row(1)),
                               rotate(r, s.cell.row(2)));
    if (out.forces)
        for (auto& f : *out.forces) f = rotate(r, f);
    return out;
}

}  // namespace fnet
