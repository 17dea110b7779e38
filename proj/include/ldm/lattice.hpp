#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ldm {

/// Square lattice in one or two dimensions. Sites are numbered row-major:
/// site = x + L * y, with x the fastest axis.
///
/// Distances use the Chebyshev (l-infinity) metric, taking the shorter way
/// around each axis when the lattice is periodic.
class Lattice {
public:
  Lattice(int dim, int length, bool periodic);

  int dim() const { return dim_; }
  int length() const { return length_; }
  bool periodic() const { return periodic_; }
  int size() const { return size_; }

  std::array<int, 2> coords(int site) const;
  int site(std::array<int, 2> c) const;
  bool contains(int site) const { return site >= 0 && site < size_; }

  /// Per-axis separation, already wrapped for periodic lattices.
  int axis_distance(int a, int b) const;
  int distance(int s1, int s2) const;

private:
  int dim_;
  int length_;
  bool periodic_;
  int size_;
};

/// Sorted, duplicate-free set of site indices.
class Region {
public:
  Region() = default;
  explicit Region(std::vector<int> sites);

  const std::vector<int>& sites() const { return sites_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  bool contains(int site) const;

  auto begin() const { return sites_.begin(); }
  auto end() const { return sites_.end(); }

  friend bool operator==(const Region&, const Region&) = default;

private:
  std::vector<int> sites_;
};

Region region_union(const Region& a, const Region& b);

/// A, B, C with B the buffer of width r around A.
struct Tripartition {
  Region a;
  Region b;
  Region c;
  int r = 0;
};

/// Minimum pairwise site distance. Throws on an empty region.
int region_distance(const Lattice& lat, const Region& r1, const Region& r2);

/// Number of sites strictly between two regions along the metric; this is
/// the buffer width of a tripartition (region_distance - 1).
int region_gap(const Lattice& lat, const Region& r1, const Region& r2);

/// The k-wide block whose anchor is placed so that `center` sits in its
/// middle (the lower middle for even k).
Region block_at(const Lattice& lat, int center, int k);

/// A = k-block at center, B = sites at distance 1..r from A, C = the rest.
/// Open lattices clip the shell at the edges.
Tripartition build_tripartition(const Lattice& lat, int center, int k, int r);

/// Tripartition with a given A and its width-r shell as B.
Tripartition tripartition_around(const Lattice& lat, const Region& a, int r);

/// Throws std::invalid_argument if the parts overlap, miss a site, or B is
/// not exactly the width-r shell of A.
void check_tripartition(const Lattice& lat, const Tripartition& part);

struct ReorgSchedule {
  std::vector<std::vector<Region>> substeps;
  int k = 1;
  int r = 0;

  std::size_t region_count() const;
};

/// Groups the k-blocks tiling the lattice into sub-steps whose regions are
/// pairwise at least 2r apart. Blocks are assigned to cosets of their block
/// index modulo ceil((2r+k)/k) per axis; on periodic lattices the blocks
/// that do not fill a whole period get sub-steps of their own so that the
/// wraparound never brings two members of one coset closer than 2r.
ReorgSchedule reorganize(const Lattice& lat, int k, int r);

/// Exhaustive check of single coverage and within-sub-step separation.
/// Returns an empty string when the schedule is valid, otherwise the first
/// violation found.
std::string validate_schedule(const Lattice& lat, const ReorgSchedule& sched);

/// Buffer width ceil(2 xi ln(sqrt(gamma) N K / eps)) sufficient for total
/// generation error eps. Returns 0 when the logarithm is not positive.
/// With include_step_factor = false the N inside the logarithm is dropped.
int required_radius(double xi, double steps, double sites, double eps, double gamma,
                    bool include_step_factor = true);

}  // namespace ldm
