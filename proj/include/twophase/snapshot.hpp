#pragma once

// Plain-text field snapshots used for checkpoints and restarts.
//
// A snapshot is a sequence of field blocks. Each block is a header line
//   dim N t name
// followed by N^dim values, one per line, in flat cell order (axis 0
// fastest), printed with 17 significant digits. A state snapshot holds the
// blocks n, v.0 .. v.{dim-1}, rho, u.0 .. u.{dim-1} in that order.

#include <iosfwd>
#include <string>

#include "twophase/model.hpp"

namespace twophase {

void write_field(std::ostream& os, const ScalarField& f, double t, const std::string& name);

void write_snapshot(std::ostream& os, const State& s);
/// Throws IoError if the file cannot be written.
void write_snapshot(const std::string& path, const State& s);

/// Throws IoError on malformed input, mismatched headers or missing blocks.
State read_snapshot(std::istream& is);
State read_snapshot(const std::string& path);

} // namespace twophase
