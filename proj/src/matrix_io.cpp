#include "polyobs/matrix_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace polyobs {
namespace {

bool is_blank_or_comment(const std::string& line) {
  for (char ch : line) {
    if (ch == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(ch))) return false;
  }
  return true;
}

[[noreturn]] void parse_error(int line_no, const std::string& msg) {
  std::ostringstream os;
  os << "line " << line_no << ": " << msg;
  throw Error(ErrorCode::Parse, os.str());
}

}  // namespace

std::string format_double(double v) {
  if (v == 0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix(std::ostream& os, const MatrixXd& M) {
  os << M.rows() << ' ' << M.cols() << '\n';
  if (M.cols() == 0) return;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(M(i, j));
    }
    os << '\n';
  }
}

std::string format_matrix(const MatrixXd& M) {
  std::ostringstream os;
  write_matrix(os, M);
  return os.str();
}

MatrixXd read_matrix(std::istream& is, int& line_no) {
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!is_blank_or_comment(line)) {
      have_header = true;
      break;
    }
  }
  if (!have_header) parse_error(line_no, "expected matrix header \"rows cols\"");
  std::istringstream hs(line);
  long rows = -1, cols = -1;
  std::string extra;
  if (!(hs >> rows >> cols) || (hs >> extra) || rows < 0 || cols < 0) {
    parse_error(line_no, "malformed matrix header \"" + line + "\"");
  }
  MatrixXd M(rows, cols);
  if (cols == 0 || rows == 0) return M;
  for (long i = 0; i < rows; ++i) {
    do {
      if (!std::getline(is, line)) parse_error(line_no + 1, "unexpected end of matrix data");
      ++line_no;
    } while (is_blank_or_comment(line));
    std::istringstream ls(line);
    for (long j = 0; j < cols; ++j) {
      std::string tok;
      if (!(ls >> tok)) parse_error(line_no, "too few entries in matrix row");
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0' || !std::isfinite(v)) {
        parse_error(line_no, "invalid matrix entry \"" + tok + "\"");
      }
      M(i, j) = v;
    }
    std::string rest;
    if (ls >> rest) parse_error(line_no, "too many entries in matrix row");
  }
  return M;
}

MatrixXd parse_matrix(const std::string& text) {
  std::istringstream is(text);
  int line_no = 0;
  return read_matrix(is, line_no);
}

}  // namespace polyobs
