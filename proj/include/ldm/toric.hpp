#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ldm/discrete.hpp"
#include "ldm/finite_dist.hpp"
#include "ldm/lattice.hpp"

namespace ldm {

/// Edges of an L x L torus. Vertex v = i * L + j (row i, column j) owns two
/// edges: right(v) = 2v towards (i, j+1) and down(v) = 2v + 1 towards
/// (i+1, j).
///
/// Loops live on the dual lattice: the group of trivial loops is spanned by
/// the four-edge stars around each vertex, and a face whose four edges carry
/// odd parity holds an anyon.
class TorusCode {
public:
  explicit TorusCode(int length);

  int length() const { return length_; }
  int edges() const { return 2 * length_ * length_; }
  int faces() const { return length_ * length_; }
  int vertices() const { return length_ * length_; }

  int right(int i, int j) const;
  int down(int i, int j) const;

  /// Four edges bounding the face whose top-left corner is vertex f.
  const std::array<int, 4>& face_edges(int f) const { return faces_[f]; }
  /// Four edges meeting at vertex v; flipping them adds an elementary loop.
  const std::array<int, 4>& star_edges(int v) const { return stars_[v]; }

  /// Edge midpoint in half-lattice units, (row, column) on a 2L torus.
  std::array<int, 2> midpoint(int e) const;
  /// Chebyshev distance of edge midpoints in lattice units, rounded up:
  /// the edges of both faces next to an edge are within distance 1.
  int edge_distance(int e1, int e2) const;

private:
  int length_;
  std::vector<std::array<int, 4>> faces_;
  std::vector<std::array<int, 4>> stars_;
};

/// Uniform distribution over the trivial loops. Needs L <= 3.
FiniteDist loop_dist(const TorusCode& code);

/// Edge configurations, one byte per edge.
using EdgeConfig = std::vector<std::uint8_t>;

/// Uniform loop samples: XOR of a uniformly random subset of stars.
std::vector<EdgeConfig> sample_loops(const TorusCode& code, int n, std::uint64_t seed);

/// Parity of each face.
std::vector<std::uint8_t> anyon_syndrome(const TorusCode& code, const EdgeConfig& x);
std::vector<std::uint8_t> anyon_syndrome(const TorusCode& code, std::uint64_t x);

/// Edge nearest the middle of the torus (lowest index among ties).
int central_edge(const TorusCode& code);

/// A = given edges, B = edges within edge_distance r of A, C = the rest.
Tripartition edge_tripartition(const TorusCode& code, const Region& a, int r);

struct ToricRow {
  double p = 0.0;
  double cmi = 0.0;
};

/// Exact CMI of loop_dist after independent flips with each p of the grid.
std::vector<ToricRow> toric_cmi_sweep(const TorusCode& code, const std::vector<double>& ps, const Tripartition& part);

/// H(X_Q) = H(m_Q) + z_Q ln 2 for the loop distribution under flips with
/// probability p, from the syndromes of the flip vectors on Q. |Q| <= 18.
double regional_entropy_via_anyons(const TorusCode& code, const Region& q, double p);

/// CMI assembled from four regional_entropy_via_anyons terms.
double cmi_via_anyons(const TorusCode& code, const Tripartition& part, double p);

/// Two routes between the loop distribution and the all-zero state: local
/// resets of each edge, then either independent p = 1/2 flips (uniform
/// distribution) or random star flips (back to loops).
struct BypassChannels {
  std::vector<LocalChannel> reset;
  FlipChannel uniform_flip;
  std::vector<LocalChannel> star_flip;
};

BypassChannels bypass_path_channels(const TorusCode& code);

}  // namespace ldm
