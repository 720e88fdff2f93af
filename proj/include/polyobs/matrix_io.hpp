#ifndef POLYOBS_MATRIX_IO_HPP
#define POLYOBS_MATRIX_IO_HPP

#include <iosfwd>
#include <string>

#include "polyobs/matrix_core.hpp"

namespace polyobs {

// Plain-text matrix format: a "rows cols" header line followed by one line
// per row of space-separated decimals. Matrices with a zero dimension have no
// data lines. Values are written with 17 significant digits so that a write
// followed by a read reproduces every entry bit for bit.

void write_matrix(std::ostream& os, const MatrixXd& M);
std::string format_matrix(const MatrixXd& M);

/// Reads one matrix starting at the next non-blank, non-comment line.
/// `line_no` is advanced past every consumed line and used in error messages.
MatrixXd read_matrix(std::istream& is, int& line_no);
MatrixXd parse_matrix(const std::string& text);

/// Shortest round-tripping rendering of a double (17 significant digits).
std::string format_double(double v);

}  // namespace polyobs

#endif  // POLYOBS_MATRIX_IO_HPP
