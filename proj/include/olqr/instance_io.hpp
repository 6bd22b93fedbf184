#pragma once

#include <iosfwd>
#include <string>

#include "olqr/model.hpp"

namespace olqr {

// Plain-text instance format, one record per line:
//
//   olqr-instance 1
//   dims <n> <n_u> <n_d>
//   horizon <T>
//   seed <seed>
//   profile <name>
//   A <n*n values, row-major>
//   Bu <n*n_u values>          Bd <n*n_d values>
//   Qmin / Qmax <n*n values>   Rmin / Rmax <n_u*n_u values>
//   x1 <n values>
//   Q <t> <n*n values>         for t = 1..T
//   R <t> <n_u*n_u values>     for t = 1..T-1
//   d <t> <n_d values>         for t = 1..T-1
//
// Floats are written with 17 significant digits, so a save/load cycle
// reproduces every matrix bit for bit. Lines starting with '#' are ignored.
void write_instance(std::ostream& out, const Instance& inst);
Instance read_instance(std::istream& in);

void save_instance(const std::string& path, const Instance& inst);
Instance load_instance(const std::string& path);

// "%.17g"
std::string format_double(double value);

}  // namespace olqr
