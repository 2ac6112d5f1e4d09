#pragma once

#include <span>
#include <string>
#include <vector>

#include "fnet/relax.hpp"
#include "fnet/structure.hpp"

namespace fnet {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
// Strict f64 parse; throws DataError (with `where` in the message) on
// malformed or non-finite input.
double parse_double(const std::string& token, const std::string& where);

// Whole-file write via temp file + rename, so interrupted runs never leave
// a partial artifact behind.
void atomic_write_file(const std::string& path, const std::string& contents);

// Plain-text structure records:
//   line 1: atom count N
//   line 2: key=value header -- cell="ax ay az bx by bz cx cy cz",
//           pbc="T T F", optional energy=<eV>; unknown keys are preserved
//   N body lines: symbol x y z [fx fy fz] fixed_flag tag
// Forces are present iff the body lines carry 9 fields. Round trips exactly
// for all finite values. Parse errors carry path:line locations.
std::vector<AtomicStructure> parse_structures(const std::string& path);
void write_structures(std::span<const AtomicStructure> structures, const std::string& path);
std::string structure_to_string(const AtomicStructure& s);

// One structure file per step plus trajectory.csv of (step, max_force, energy).
void write_trajectory(const RelaxationTrajectory& traj, const std::string& dir);

}  // namespace fnet
