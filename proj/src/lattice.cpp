#include "ldm/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ldm {

Lattice::Lattice(int dim, int length, bool periodic)
    : dim_(dim), length_(length), periodic_(periodic) {
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("lattice dimension must be 1 or 2, got " + std::to_string(dim));
  }
  if (length < 1) {
    throw std::invalid_argument("lattice length must be positive");
  }
  size_ = dim == 1 ? length : length * length;
}

std::array<int, 2> Lattice::coords(int s) const {
  if (!contains(s)) {
    throw std::out_of_range("site " + std::to_string(s) + " outside lattice");
  }
  if (dim_ == 1) return {s, 0};
  return {s % length_, s / length_};
}

int Lattice::site(std::array<int, 2> c) const {
  auto wrap = [&](int v) {
    if (periodic_) return ((v % length_) + length_) % length_;
    if (v < 0 || v >= length_) {
      throw std::out_of_range("coordinate " + std::to_string(v) + " outside open lattice");
    }
    return v;
  };
  if (dim_ == 1) return wrap(c[0]);
  return wrap(c[0]) + length_ * wrap(c[1]);
}

int Lattice::axis_distance(int a, int b) const {
  int d = std::abs(a - b);
  if (periodic_) d = std::min(d, length_ - d);
  return d;
}

int Lattice::distance(int s1, int s2) const {
  auto c1 = coords(s1);
  auto c2 = coords(s2);
  int d = axis_distance(c1[0], c2[0]);
  if (dim_ == 2) d = std::max(d, axis_distance(c1[1], c2[1]));
  return d;
}

Region::Region(std::vector<int> sites) : sites_(std::move(sites)) {
  std::sort(sites_.begin(), sites_.end());
  if (std::adjacent_find(sites_.begin(), sites_.end()) != sites_.end()) {
    throw std::invalid_argument("region contains duplicate sites");
  }
  if (!sites_.empty() && sites_.front() < 0) {
    throw std::invalid_argument("region contains a negative site index");
  }
}

bool Region::contains(int site) const {
  return std::binary_search(sites_.begin(), sites_.end(), site);
}

Region region_union(const Region& a, const Region& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return Region(std::move(out));
}

int region_distance(const Lattice& lat, const Region& r1, const Region& r2) {
  if (r1.empty() || r2.empty()) {
    throw std::invalid_argument("region_distance: empty region");
  }
  int best = std::numeric_limits<int>::max();
  for (int a : r1) {
    for (int b : r2) best = std::min(best, lat.distance(a, b));
  }
  return best;
}

int region_gap(const Lattice& lat, const Region& r1, const Region& r2) {
  return region_distance(lat, r1, r2) - 1;
}

Region block_at(const Lattice& lat, int center, int k) {
  if (!lat.contains(center)) {
    throw std::invalid_argument("block center " + std::to_string(center) + " outside lattice");
  }
  if (k < 1 || k > lat.length()) {
    throw std::invalid_argument("block size k=" + std::to_string(k) + " must lie in [1, L=" +
                                std::to_string(lat.length()) + "]");
  }
  auto c = lat.coords(center);
  const int lo = (k - 1) / 2;
  std::vector<int> sites;
  const int ny = lat.dim() == 2 ? k : 1;
  for (int dy = 0; dy < ny; ++dy) {
    for (int dx = 0; dx < k; ++dx) {
      std::array<int, 2> p{c[0] - lo + dx, lat.dim() == 2 ? c[1] - lo + dy : 0};
      if (!lat.periodic()) {
        for (int ax = 0; ax < lat.dim(); ++ax) {
          if (p[ax] < 0 || p[ax] >= lat.length()) {
            throw std::invalid_argument("block of size " + std::to_string(k) + " at site " +
                                        std::to_string(center) + " does not fit the open lattice");
          }
        }
      }
      sites.push_back(lat.site(p));
    }
  }
  return Region(std::move(sites));
}

Tripartition build_tripartition(const Lattice& lat, int center, int k, int r) {
  return tripartition_around(lat, block_at(lat, center, k), r);
}

Tripartition tripartition_around(const Lattice& lat, const Region& a, int r) {
  if (r < 0) throw std::invalid_argument("buffer width r must be nonnegative");
  if (a.empty()) throw std::invalid_argument("tripartition needs a nonempty A");
  for (int s : a) {
    if (!lat.contains(s)) throw std::invalid_argument("tripartition: A has a site outside the lattice");
  }
  Tripartition part;
  part.a = a;
  part.r = r;
  std::vector<int> b;
  std::vector<int> c;
  for (int s = 0; s < lat.size(); ++s) {
    if (part.a.contains(s)) continue;
    int d = std::numeric_limits<int>::max();
    for (int a : part.a) d = std::min(d, lat.distance(a, s));
    (d <= r ? b : c).push_back(s);
  }
  part.b = Region(std::move(b));
  part.c = Region(std::move(c));
  return part;
}

void check_tripartition(const Lattice& lat, const Tripartition& part) {
  std::vector<int> seen(lat.size(), 0);
  for (const Region* reg : {&part.a, &part.b, &part.c}) {
    for (int s : *reg) {
      if (!lat.contains(s)) throw std::invalid_argument("tripartition site outside lattice");
      if (seen[s]++) throw std::invalid_argument("tripartition parts overlap at site " + std::to_string(s));
    }
  }
  for (int s = 0; s < lat.size(); ++s) {
    if (!seen[s]) throw std::invalid_argument("tripartition misses site " + std::to_string(s));
  }
  if (part.a.empty()) throw std::invalid_argument("tripartition has empty A");
  for (int s = 0; s < lat.size(); ++s) {
    if (part.a.contains(s)) continue;
    int d = region_distance(lat, part.a, Region({s}));
    bool in_shell = d <= part.r;
    if (in_shell != part.b.contains(s)) {
      throw std::invalid_argument("B is not the width-" + std::to_string(part.r) + " shell of A (site " +
                                  std::to_string(s) + ")");
    }
  }
}

std::size_t ReorgSchedule::region_count() const {
  std::size_t n = 0;
  for (const auto& step : substeps) n += step.size();
  return n;
}

namespace {

// Coset label of every block index along one axis.
std::vector<int> axis_classes(int length, int k, int r, bool periodic) {
  const int blocks = (length + k - 1) / k;
  const int stride = (2 * r + k + k - 1) / k;
  std::vector<int> cls(blocks);
  if (!periodic) {
    for (int b = 0; b < blocks; ++b) cls[b] = b % stride;
    return cls;
  }
  const int full = length / k;
  const int regular = (full / stride) * stride;
  for (int b = 0; b < blocks; ++b) {
    cls[b] = b < regular ? b % stride : stride + (b - regular);
  }
  return cls;
}

}  // namespace

ReorgSchedule reorganize(const Lattice& lat, int k, int r) {
  if (k < 1 || k > lat.length()) {
    throw std::invalid_argument("reorganize: k must lie in [1, L]");
  }
  if (r < 0) throw std::invalid_argument("reorganize: r must be nonnegative");

  const int L = lat.length();
  const auto cls = axis_classes(L, k, r, lat.periodic());
  const int nblocks = static_cast<int>(cls.size());
  const int nclass = *std::max_element(cls.begin(), cls.end()) + 1;

  ReorgSchedule sched;
  sched.k = k;
  sched.r = r;
  const int ny = lat.dim() == 2 ? nblocks : 1;
  const int nclass_y = lat.dim() == 2 ? nclass : 1;
  std::vector<std::vector<Region>> by_class(static_cast<std::size_t>(nclass) * nclass_y);
  for (int by = 0; by < ny; ++by) {
    for (int bx = 0; bx < nblocks; ++bx) {
      std::vector<int> sites;
      const int y_lo = by * k;
      const int y_hi = lat.dim() == 2 ? std::min(L, y_lo + k) : 1;
      for (int y = lat.dim() == 2 ? y_lo : 0; y < y_hi; ++y) {
        for (int x = bx * k; x < std::min(L, bx * k + k); ++x) sites.push_back(lat.site({x, y}));
      }
      const int cy = lat.dim() == 2 ? cls[by] : 0;
      by_class[static_cast<std::size_t>(cy) * nclass + cls[bx]].emplace_back(std::move(sites));
    }
  }
  for (auto& step : by_class) {
    if (!step.empty()) sched.substeps.push_back(std::move(step));
  }
  return sched;
}

std::string validate_schedule(const Lattice& lat, const ReorgSchedule& sched) {
  std::vector<int> count(lat.size(), 0);
  for (const auto& step : sched.substeps) {
    for (const auto& reg : step) {
      for (int s : reg) {
        if (!lat.contains(s)) return "site " + std::to_string(s) + " outside lattice";
        ++count[s];
      }
    }
  }
  for (int s = 0; s < lat.size(); ++s) {
    if (count[s] != 1) {
      std::ostringstream os;
      os << "site " << s << " covered " << count[s] << " times";
      return os.str();
    }
  }
  for (std::size_t m = 0; m < sched.substeps.size(); ++m) {
    const auto& step = sched.substeps[m];
    for (std::size_t i = 0; i < step.size(); ++i) {
      for (std::size_t j = i + 1; j < step.size(); ++j) {
        int d = region_distance(lat, step[i], step[j]);
        if (d < 2 * sched.r) {
          std::ostringstream os;
          os << "sub-step " << m << ": regions " << i << " and " << j << " at distance " << d << " < "
             << 2 * sched.r;
          return os.str();
        }
      }
    }
  }
  return {};
}

int required_radius(double xi, double steps, double sites, double eps, double gamma,
                    bool include_step_factor) {
  if (!(xi > 0) || !(steps > 0) || !(sites > 0) || !(eps > 0) || !(gamma > 0)) {
    throw std::invalid_argument("required_radius: all inputs must be positive");
  }
  const double arg = std::sqrt(gamma) * (include_step_factor ? steps : 1.0) * sites / eps;
  if (arg <= 1.0) return 0;
  return static_cast<int>(std::ceil(2.0 * xi * std::log(arg)));
}

}  // namespace ldm
