#include "fnet/elements.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace fnet {

namespace {

const std::array<std::string, kMaxAtomicNumber + 1> kSymbols = {
    "X",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na",
    "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",
    "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br",
    "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag",
    "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu",
    "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
    "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am",
    "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh",
    "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

// Slater, J. Chem. Phys. 41, 3199 (1964): empirical atomic radii in
// angstrom. Noble gases are absent from the original table.
struct ZRadius { int z; double r; };
const ZRadius kSlaterRadii[] = {
    {1, 0.25},  {3, 1.45},  {4, 1.05},  {5, 0.85},  {6, 0.70},  {7, 0.65},
    {8, 0.60},  {9, 0.50},  {11, 1.80}, {12, 1.50}, {13, 1.25}, {14, 1.10},
    {15, 1.00}, {16, 1.00}, {17, 1.00}, {19, 2.20}, {20, 1.80}, {21, 1.60},
    {22, 1.40}, {23, 1.35}, {24, 1.40}, {25, 1.40}, {26, 1.40}, {27, 1.35},
    {28, 1.35}, {29, 1.35}, {30, 1.35}, {31, 1.30}, {32, 1.25}, {33, 1.15},
    {34, 1.15}, {35, 1.15}, {37, 2.35}, {38, 2.00}, {39, 1.80}, {40, 1.55},
    {41, 1.45}, {42, 1.45}, {43, 1.35}, {44, 1.30}, {45, 1.35}, {46, 1.40},
    {47, 1.60}, {48, 1.55}, {49, 1.55}, {50, 1.45}, {51, 1.45}, {52, 1.40},
    {53, 1.40}, {55, 2.60}, {56, 2.15}, {57, 1.95}, {58, 1.85}, {59, 1.85},
    {60, 1.85}, {61, 1.85}, {62, 1.85}, {63, 1.85}, {64, 1.80}, {65, 1.75},
    {66, 1.75}, {67, 1.75}, {68, 1.75}, {69, 1.75}, {70, 1.75}, {71, 1.75},
    {72, 1.55}, {73, 1.45}, {74, 1.35}, {75, 1.35}, {76, 1.30}, {77, 1.35},
    {78, 1.35}, {79, 1.35}, {80, 1.50}, {81, 1.90}, {82, 1.80}, {83, 1.60},
    {84, 1.90}};

// Pauling electronegativities; zero where undefined (noble gases).
const double kElectronegativity[87] = {
    0,    2.20, 0,    0.98, 1.57, 2.04, 2.55, 3.04, 3.44, 3.98, 0,    0.93,
    1.31, 1.61, 1.90, 2.19, 2.58, 3.16, 0,    0.82, 1.00, 1.36, 1.54, 1.63,
    1.66, 1.55, 1.83, 1.88, 1.91, 1.90, 1.65, 1.81, 2.01, 2.18, 2.55, 2.96,
    3.00, 0.82, 0.95, 1.22, 1.33, 1.60, 2.16, 1.90, 2.20, 2.28, 2.20, 1.93,
    1.69, 1.78, 1.96, 2.05, 2.10, 2.66, 2.60, 0.79, 0.89, 1.10, 1.12, 1.13,
    1.14, 1.13, 1.17, 1.20, 1.20, 1.20, 1.22, 1.23, 1.24, 1.25, 1.10, 1.27,
    1.30, 1.50, 2.36, 1.90, 2.20, 2.20, 2.28, 2.54, 2.00, 1.62, 1.87, 2.02,
    2.00, 2.20, 0};

// First ionization energies, eV.
const double kIonizationEnergy[87] = {
    0,      13.598, 24.587, 5.392,  9.323,  8.298,  11.260, 14.534, 13.618,
    17.423, 21.565, 5.139,  7.646,  5.986,  8.152,  10.487, 10.360, 12.968,
    15.760, 4.341,  6.113,  6.561,  6.828,  6.746,  6.767,  7.434,  7.902,
    7.881,  7.640,  7.726,  9.394,  5.999,  7.899,  9.789,  9.752,  11.814,
    14.000, 4.177,  5.695,  6.217,  6.634,  6.759,  7.092,  7.280,  7.360,
    7.459,  8.337,  7.576,  8.994,  5.786,  7.344,  8.608,  9.010,  10.451,
    12.130, 3.894,  5.212,  5.577,  5.539,  5.473,  5.525,  5.582,  5.644,
    5.670,  6.150,  5.864,  5.939,  6.021,  6.108,  6.184,  6.254,  5.426,
    6.825,  7.550,  7.864,  7.834,  8.438,  8.967,  8.959,  9.226,  10.438,
    6.108,  7.417,  7.286,  8.414,  9.318,  10.749};

// Electron affinities, eV; unstable anions entered as zero.
const double kElectronAffinity[87] = {
    0,     0.754, 0,     0.618, 0,     0.280, 1.262, 0,     1.461, 3.401,
    0,     0.548, 0,     0.433, 1.390, 0.746, 2.077, 3.613, 0,     0.501,
    0.025, 0.188, 0.079, 0.525, 0.666, 0,     0.151, 0.662, 1.156, 1.235,
    0,     0.430, 1.233, 0.804, 2.021, 3.364, 0,     0.486, 0.048, 0.307,
    0.426, 0.893, 0.748, 0.550, 1.050, 1.137, 0.562, 1.302, 0,     0.404,
    1.112, 1.046, 1.971, 3.059, 0,     0.472, 0.145, 0.470, 0.500, 0.500,
    0.100, 0.120, 0.160, 0.120, 0.140, 0.150, 0.350, 0.340, 0.310, 1.030,
    0,     0.340, 0.017, 0.322, 0.816, 0.150, 1.078, 1.564, 2.128, 2.309,
    0,     0.377, 0.356, 0.942, 1.400, 2.300, 0};

// Standard atomic weights.
const double kAtomicMass[87] = {
    0,       1.008,   4.003,   6.940,   9.012,   10.810,  12.011,  14.007,
    15.999,  18.998,  20.180,  22.990,  24.305,  26.982,  28.085,  30.974,
    32.060,  35.450,  39.948,  39.098,  40.078,  44.956,  47.867,  50.942,
    51.996,  54.938,  55.845,  58.933,  58.693,  63.546,  65.380,  69.723,
    72.630,  74.922,  78.971,  79.904,  83.798,  85.468,  87.620,  88.906,
    91.224,  92.906,  95.950,  98.000,  101.070, 102.906, 106.420, 107.868,
    112.414, 114.818, 118.710, 121.760, 127.600, 126.904, 131.293, 132.905,
    137.327, 138.905, 140.116, 140.908, 144.242, 145.000, 150.360, 151.964,
    157.250, 158.925, 162.500, 164.930, 167.259, 168.934, 173.045, 174.967,
    178.490, 180.948, 183.840, 186.207, 190.230, 192.217, 195.084, 196.967,
    200.592, 204.380, 207.200, 208.980, 209.000, 210.000, 222.000};

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

const std::string& element_symbol(int z) {
    if (z < 1 || z > kMaxAtomicNumber)
        throw std::invalid_argument("element_symbol: atomic number out of range: " +
                                    std::to_string(z));
    return kSymbols[z];
}

int element_from_symbol(const std::string& symbol) {
    static const std::unordered_map<std::string, int> lookup = [] {
        std::unordered_map<std::string, int> m;
        for (int z = 1; z <= kMaxAtomicNumber; ++z) m[kSymbols[z]] = z;
        return m;
    }();
    auto it = lookup.find(symbol);
    return it == lookup.end() ? 0 : it->second;
}

RadiiTable::RadiiTable() {
    radii_.fill(1.0);
    tabulated_.fill(false);
    for (const auto& e : kSlaterRadii) {
        radii_[e.z] = e.r;
        tabulated_[e.z] = true;
    }
}

double RadiiTable::radius(int z) const {
    if (z < 1 || z > kMaxAtomicNumber)
        throw std::invalid_argument("RadiiTable::radius: atomic number out of range: " +
                                    std::to_string(z));
    if (!tabulated_[z]) {
        static std::mutex mu;
        static std::set<int> warned;
        std::lock_guard<std::mutex> lock(mu);
        if (warned.insert(z).second)
            std::fprintf(stderr,
                         "warning: no tabulated atomic radius for %s (Z=%d), using 1.0 A\n",
                         kSymbols[z].c_str(), z);
    }
    return radii_[z];
}

bool RadiiTable::has_tabulated(int z) const {
    return z >= 1 && z <= kMaxAtomicNumber && tabulated_[z];
}

void RadiiTable::set_radius(int z, double radius) {
    if (z < 1 || z > kMaxAtomicNumber)
        throw std::invalid_argument("RadiiTable::set_radius: atomic number out of range");
    if (!(radius > 0))
        throw std::invalid_argument("RadiiTable::set_radius: radius must be positive");
    radii_[z] = radius;
    tabulated_[z] = true;
}

void RadiiTable::load_overrides(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open radii file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string key;
        double r;
        if (!(ss >> key)) continue;  // blank line
        if (!(ss >> r))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'element radius'");
        int z = element_from_symbol(key);
        if (z == 0) {
            try {
                z = std::stoi(key);
            } catch (...) {
                z = 0;
            }
        }
        if (z < 1 || z > kMaxAtomicNumber)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": unknown element '" + key + "'");
        set_radius(z, r);
    }
}

const RadiiTable& default_radii() {
    static const RadiiTable table;
    return table;
}

int element_period(int z) {
    if (z <= 2) return 1;
    if (z <= 10) return 2;
    if (z <= 18) return 3;
    if (z <= 36) return 4;
    if (z <= 54) return 5;
    if (z <= 86) return 6;
    return 7;
}

int element_group(int z) {
    if (z == 1) return 1;
    if (z == 2) return 18;
    static const int start[] = {3, 11, 19, 37, 55, 87};  // alkali of periods 2..7
    const int p = element_period(z);  // >= 2 here: H and He handled above
    const int offset = z - start[std::max(0, p - 2)];
    if (p <= 3) return offset < 2 ? offset + 1 : offset + 11;
    if (p <= 5) return offset + 1;
    // periods 6,7: lanthanide/actinide block collapses onto group 3
    if (offset < 2) return offset + 1;
    if (offset <= 16) return 3;
    return offset - 13;
}

int valence_electrons(int z) {
    if (z == 2) return 2;
    int g = element_group(z);
    if (g <= 12) return g;
    return g - 10;
}

std::array<double, kNodeFeatureDim> node_features(int z) {
    if (z < 1 || z > kMaxAtomicNumber)
        throw std::invalid_argument("node_features: atomic number out of range");
    const bool in_table = z <= 86;
    std::array<double, kNodeFeatureDim> f{};
    f[0] = clamp01(z / 100.0);
    f[1] = clamp01(element_period(z) / 7.0);
    f[2] = clamp01(element_group(z) / 18.0);
    f[3] = clamp01(default_radii().radius(z) / 2.0);
    f[4] = clamp01((in_table ? kElectronegativity[z] : 1.5) / 4.0);
    f[5] = clamp01((in_table ? kIonizationEnergy[z] : 6.0) / 25.0);
    f[6] = clamp01(((in_table ? kElectronAffinity[z] : 0.5) + 1.0) / 5.0);
    f[7] = clamp01(valence_electrons(z) / 8.0);
    f[8] = clamp01((in_table ? kAtomicMass[z] : 2.5 * z) / 250.0);
    return f;
}

}  // namespace fnet
