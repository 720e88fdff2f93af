#include "polyobs/set_geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <vector>

#include "polyobs/lp_solver.hpp"
#include "polyobs/matrix_io.hpp"

namespace polyobs {

using Eigen::Index;

bool contains(const PolytopeH& poly, const VectorXd& x, double tol) {
  if (x.size() != poly.dim()) throw Error(ErrorCode::BadSize, "contains: dimension mismatch");
  if (poly.rows() == 0) return true;
  return ((poly.H * x - poly.k).array() <= tol).all();
}

double volume_box(const IntervalBox& b) {
  double v = 1.0;
  for (Index i = 0; i < b.dim(); ++i) v *= std::max(0.0, b.hi(i) - b.lo(i));
  return v;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr Index kChunk = 1024;

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t bits = splitmix64(splitmix64(seed) ^ index);
  return double(bits >> 11) * 0x1.0p-53;
}

UnitCubeSampler::UnitCubeSampler(Index dim, Index samples, std::uint64_t seed)
    : unit_(samples, dim) {
  for (Index i = 0; i < samples; ++i) {
    for (Index d = 0; d < dim; ++d) {
      unit_(i, d) = counter_uniform(seed, std::uint64_t(i) * std::uint64_t(dim) + std::uint64_t(d));
    }
  }
}

Eigen::Array<bool, Eigen::Dynamic, 1> UnitCubeSampler::accepted(const PolytopeH& poly,
                                                                const IntervalBox& region) const {
  if (poly.dim() != dim() || region.dim() != dim()) {
    throw Error(ErrorCode::BadSize, "UnitCubeSampler: dimension mismatch");
  }
  const Index N = samples();
  Eigen::Array<bool, Eigen::Dynamic, 1> hit(N);
  if (poly.rows() == 0) {
    hit.setConstant(true);
    return hit;
  }
  // Row r of H (lo + w u) - k is (H lo - k)_r + sum_d (w_d H_rd) u_d; the
  // running max over rows is kept per sample. A row whose negation also
  // appears (a slab) shares the projection with its partner.
  const Index R = poly.rows();
  const MatrixXd G = poly.H * region.width().asDiagonal();
  const VectorXd offset = poly.H * region.lo - poly.k;
  std::vector<Index> partner(R, -1);
  for (Index r = 0; r < R; ++r) {
    if (partner[r] >= 0) continue;
    for (Index q = r + 1; q < R; ++q) {
      if (partner[q] < 0 && poly.H.row(q) == -poly.H.row(r)) {
        partner[r] = q;
        partner[q] = r;
        break;
      }
    }
  }
  Eigen::ArrayXd worst, proj;
  for (Index start = 0; start < N; start += kChunk) {
    const Index len = std::min(kChunk, N - start);
    const auto U = unit_.middleRows(start, len).array();
    worst.setConstant(len, -std::numeric_limits<double>::infinity());
    for (Index r = 0; r < R; ++r) {
      const Index q = partner[r];
      if (q >= 0 && q < r) continue;
      if (dim() == 0) {
        proj.setZero(len);
      } else {
        proj = G(r, 0) * U.col(0);
      }
      for (Index d = 1; d < dim(); ++d) proj += G(r, d) * U.col(d);
      if (q >= 0) {
        worst = worst.max(proj + offset(r)).max(offset(q) - proj);
      } else {
        worst = worst.max(proj + offset(r));
      }
    }
    hit.segment(start, len) = worst <= 0;
  }
  return hit;
}

VolumeEstimate UnitCubeSampler::volume(const PolytopeH& poly, const IntervalBox& bbox) const {
  const auto hit = accepted(poly, bbox);
  const double N = double(samples());
  const double p = double(hit.count()) / N;
  const double vb = volume_box(bbox);
  return {vb * p, vb * std::sqrt(p * (1 - p) / N)};
}

std::pair<long, long> UnitCubeSampler::escapes(const PolytopeH& poly, const IntervalBox& region,
                                               const IntervalBox& box, double tol) const {
  const auto hit = accepted(poly, region);
  const VectorXd width = region.width();
  long inside = 0, escaped = 0;
  for (Index i = 0; i < samples(); ++i) {
    if (!hit(i)) continue;
    ++inside;
    for (Index d = 0; d < dim(); ++d) {
      const double x = region.lo(d) + width(d) * unit_(i, d);
      if (x < box.lo(d) - tol || x > box.hi(d) + tol) {
        ++escaped;
        break;
      }
    }
  }
  return {escaped, inside};
}

VolumeEstimate volume_mc(const PolytopeH& poly, const IntervalBox& bbox, long samples,
                         std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorCode::Validation, "volume_mc: need at least one sample");
  return UnitCubeSampler(bbox.dim(), samples, seed).volume(poly, bbox);
}

namespace {

// Keeps the part of a convex polygon with a.x <= b.
std::vector<Eigen::Vector2d> clip(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& a,
                                  double b) {
  std::vector<Eigen::Vector2d> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& p = poly[i];
    const Eigen::Vector2d& q = poly[(i + 1) % n];
    const double fp = a.dot(p) - b;
    const double fq = a.dot(q) - b;
    if (fp <= 0) out.push_back(p);
    if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) {
      const double s = fp / (fp - fq);
      out.push_back(p + s * (q - p));
    }
  }
  return out;
}

}  // namespace

Polygon2D project2d_outer(const PolytopeH& poly, std::pair<int, int> dims, int n_dirs) {
  const Index n = poly.dim();
  const auto [i, j] = dims;
  if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
    throw Error(ErrorCode::BadSize, "project2d_outer: invalid projection dimensions");
  }
  if (n_dirs < 8) throw Error(ErrorCode::Validation, "project2d_outer: need at least 8 directions");

  VectorXd lo(n), hi(n);
  for (Index d = 0; d < n; ++d) {
    VectorXd e = VectorXd::Zero(n);
    e(d) = 1;
    hi(d) = support_function(poly, e).value;
    lo(d) = -support_function(poly, -e).value;
  }
  std::vector<Eigen::Vector2d> verts = {
      {lo(i), lo(j)}, {hi(i), lo(j)}, {hi(i), hi(j)}, {lo(i), hi(j)}};
  for (int k = 0; k < n_dirs; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / n_dirs;
    const Eigen::Vector2d a(std::cos(theta), std::sin(theta));
    VectorXd d = VectorXd::Zero(n);
    d(i) = a(0);
    d(j) = a(1);
    verts = clip(verts, a, support_function(poly, d).value);
  }
  Polygon2D out;
  for (const auto& v : verts) {
    if (out.vertices.empty() || (v - out.vertices.back()).norm() > 1e-14 * (1 + v.norm())) {
      out.vertices.push_back(v);
    }
  }
  while (out.vertices.size() > 1 &&
         (out.vertices.front() - out.vertices.back()).norm() <=
             1e-14 * (1 + out.vertices.front().norm())) {
    out.vertices.pop_back();
  }
  // Clipping by a half-plane that touches a corner can leave a vertex in the
  // middle of an edge.
  auto& v = out.vertices;
  for (std::size_t k = 0; v.size() > 3 && k < v.size();) {
    const auto& a = v[(k + v.size() - 1) % v.size()];
    const auto& b = v[(k + 1) % v.size()];
    const Eigen::Vector2d e1 = v[k] - a, e2 = b - v[k];
    const double cross = e1.x() * e2.y() - e1.y() * e2.x();
    if (std::abs(cross) <= 1e-12 * e1.norm() * e2.norm()) {
      v.erase(v.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
      ++k;
    }
  }
  return out;
}

double polygon_area(const Polygon2D& p) {
  const std::size_t n = p.vertices.size();
  double twice = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& a = p.vertices[k];
    const auto& b = p.vertices[(k + 1) % n];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

void write_polygon_csv(std::ostream& os, const Polygon2D& p) {
  os << "x,y\n";
  for (const auto& v : p.vertices) os << format_double(v.x()) << ',' << format_double(v.y()) << '\n';
}

}  // namespace polyobs
