#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace fnet {

inline constexpr int kMaxAtomicNumber = 118;

// "H", "He", ... ; throws std::invalid_argument outside 1..118.
const std::string& element_symbol(int z);

// Inverse lookup; returns 0 for unknown symbols.
int element_from_symbol(const std::string& symbol);

// Slater (1964) empirical atomic radii in angstrom. Elements without a
// tabulated value (noble gases, Z > 86) fall back to 1.0 A; the first
// use of such an element prints a one-time warning to stderr.
class RadiiTable {
public:
    RadiiTable();

    double radius(int z) const;
    bool has_tabulated(int z) const;

    // Plain-text override file, one "symbol_or_Z radius_angstrom" pair
    // per line; '#' starts a comment. Throws on malformed lines.
    void load_overrides(const std::string& path);
    void set_radius(int z, double radius);

private:
    std::array<double, kMaxAtomicNumber + 1> radii_{};
    std::array<bool, kMaxAtomicNumber + 1> tabulated_{};
};

const RadiiTable& default_radii();

int element_period(int z);
int element_group(int z);   // 1..18, lanthanides/actinides -> 3
int valence_electrons(int z);

// Fixed per-element input features, each clamped to [0, 1]:
//   [ Z/100, period/7, group/18, slater_radius/2, electronegativity/4,
//     ionization_energy/25, (electron_affinity+1)/5, valence/8, mass/250 ]
inline constexpr int kNodeFeatureDim = 9;
std::array<double, kNodeFeatureDim> node_features(int z);

}  // namespace fnet
