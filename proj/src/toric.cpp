#include "ldm/toric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "ldm/infotools.hpp"

namespace ldm {

namespace {

constexpr int kMaxEnumLength = 3;
constexpr int kMaxRegion = 18;

// Reduced row echelon form over GF(2), vectors as bit masks of width n.
// Returns the nonzero rows; pivots[i] is the pivot bit of row i.
std::vector<std::uint64_t> rref(std::vector<std::uint64_t> rows, int n, std::vector<int>& pivots) {
  pivots.clear();
  std::size_t rank = 0;
  for (int col = 0; col < n && rank < rows.size(); ++col) {
    const std::uint64_t bit = std::uint64_t{1} << col;
    std::size_t sel = rank;
    while (sel < rows.size() && !(rows[sel] & bit)) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[rank], rows[sel]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i != rank && (rows[i] & bit)) rows[i] ^= rows[rank];
    }
    pivots.push_back(col);
    ++rank;
  }
  rows.resize(rank);
  return rows;
}

// Basis of {c : c . g = 0 for every row g}.
std::vector<std::uint64_t> nullspace(const std::vector<std::uint64_t>& rows, int n) {
  std::vector<int> pivots;
  const auto red = rref(rows, n, pivots);
  std::vector<bool> is_pivot(n, false);
  for (int c : pivots) is_pivot[c] = true;
  std::vector<std::uint64_t> basis;
  for (int f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    std::uint64_t v = std::uint64_t{1} << f;
    for (std::size_t i = 0; i < red.size(); ++i) {
      if (red[i] & (std::uint64_t{1} << f)) v |= std::uint64_t{1} << pivots[i];
    }
    basis.push_back(v);
  }
  return basis;
}

}  // namespace

TorusCode::TorusCode(int length) : length_(length) {
  if (length < 2) throw std::invalid_argument("TorusCode: L must be at least 2");
  const int L = length;
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      faces_.push_back({right(i, j), right(i + 1, j), down(i, j), down(i, j + 1)});
    }
  }
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      stars_.push_back({right(i, j), down(i, j), right(i, j - 1), down(i - 1, j)});
    }
  }
}

int TorusCode::right(int i, int j) const {
  const int L = length_;
  return 2 * (((i % L + L) % L) * L + (j % L + L) % L);
}

int TorusCode::down(int i, int j) const { return right(i, j) + 1; }

std::array<int, 2> TorusCode::midpoint(int e) const {
  if (e < 0 || e >= edges()) throw std::out_of_range("edge index out of range");
  const int v = e / 2;
  const int i = v / length_;
  const int j = v % length_;
  return e % 2 == 0 ? std::array<int, 2>{2 * i, 2 * j + 1} : std::array<int, 2>{2 * i + 1, 2 * j};
}

int TorusCode::edge_distance(int e1, int e2) const {
  const auto a = midpoint(e1);
  const auto b = midpoint(e2);
  const int period = 2 * length_;
  int d = 0;
  for (int ax = 0; ax < 2; ++ax) {
    const int diff = std::abs(a[ax] - b[ax]);
    d = std::max(d, std::min(diff, period - diff));
  }
  return (d + 1) / 2;
}

FiniteDist loop_dist(const TorusCode& code) {
  if (code.length() > kMaxEnumLength) {
    throw std::invalid_argument("loop_dist: L = " + std::to_string(code.length()) +
                                " is too large to enumerate; use sample_loops");
  }
  std::vector<std::uint64_t> gens;
  for (int v = 0; v < code.vertices(); ++v) {
    std::uint64_t g = 0;
    for (int e : code.star_edges(v)) g ^= std::uint64_t{1} << e;
    gens.push_back(g);
  }
  std::vector<int> pivots;
  const auto basis = rref(gens, code.edges(), pivots);
  std::vector<double> w(std::size_t{1} << code.edges(), 0.0);
  const std::uint64_t count = std::uint64_t{1} << basis.size();
  for (std::uint64_t s = 0; s < count; ++s) {
    std::uint64_t x = 0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if ((s >> i) & 1u) x ^= basis[i];
    }
    w[x] = 1.0;
  }
  return FiniteDist::from_weights(code.edges(), std::move(w));
}

std::vector<EdgeConfig> sample_loops(const TorusCode& code, int n, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("sample_loops: negative sample count");
  std::mt19937_64 rng(seed);
  std::vector<EdgeConfig> out;
  out.reserve(n);
  for (int s = 0; s < n; ++s) {
    EdgeConfig x(code.edges(), 0);
    for (int v = 0; v < code.vertices(); ++v) {
      if (rng() >> 63) {
        for (int e : code.star_edges(v)) x[e] ^= 1;
      }
    }
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<std::uint8_t> anyon_syndrome(const TorusCode& code, const EdgeConfig& x) {
  if (static_cast<int>(x.size()) != code.edges()) throw std::invalid_argument("anyon_syndrome: wrong edge count");
  std::vector<std::uint8_t> m(code.faces());
  for (int f = 0; f < code.faces(); ++f) {
    int par = 0;
    for (int e : code.face_edges(f)) par ^= x[e] & 1;
    m[f] = static_cast<std::uint8_t>(par);
  }
  return m;
}

std::vector<std::uint8_t> anyon_syndrome(const TorusCode& code, std::uint64_t x) {
  if (code.edges() > 64) throw std::invalid_argument("anyon_syndrome: packed form needs at most 64 edges");
  EdgeConfig bits(code.edges());
  for (int e = 0; e < code.edges(); ++e) bits[e] = (x >> e) & 1u;
  return anyon_syndrome(code, bits);
}

int central_edge(const TorusCode& code) {
  const double c = code.length();
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int e = 0; e < code.edges(); ++e) {
    const auto m = code.midpoint(e);
    const double d = std::hypot(m[0] - c, m[1] - c);
    if (d < best_d) {
      best_d = d;
      best = e;
    }
  }
  return best;
}

Tripartition edge_tripartition(const TorusCode& code, const Region& a, int r) {
  if (r < 0) throw std::invalid_argument("edge_tripartition: r must be nonnegative");
  if (a.empty()) throw std::invalid_argument("edge_tripartition: empty A");
  std::vector<int> b;
  std::vector<int> c;
  for (int e = 0; e < code.edges(); ++e) {
    if (a.contains(e)) continue;
    int d = std::numeric_limits<int>::max();
    for (int s : a) d = std::min(d, code.edge_distance(s, e));
    (d <= r ? b : c).push_back(e);
  }
  return Tripartition{a, Region(std::move(b)), Region(std::move(c)), r};
}

std::vector<ToricRow> toric_cmi_sweep(const TorusCode& code, const std::vector<double>& ps, const Tripartition& part) {
  const FiniteDist loops = loop_dist(code);
  std::vector<int> all(code.edges());
  for (int e = 0; e < code.edges(); ++e) all[e] = e;
  std::vector<ToricRow> rows;
  rows.reserve(ps.size());
  for (double p : ps) {
    const FiniteDist noisy = apply_flip(FlipChannel(p, Region(all)), loops);
    rows.push_back({p, cmi(noisy, part)});
  }
  return rows;
}

double regional_entropy_via_anyons(const TorusCode& code, const Region& q, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("regional_entropy_via_anyons: p outside [0, 1]");
  const int n = static_cast<int>(q.size());
  if (n == 0) return 0.0;
  if (n > kMaxRegion) {
    throw std::invalid_argument("regional_entropy_via_anyons: |Q| = " + std::to_string(n) + " exceeds " +
                                std::to_string(kMaxRegion));
  }
  for (int e : q) {
    if (e >= code.edges()) throw std::invalid_argument("regional_entropy_via_anyons: edge outside torus");
  }
  // Loop generators restricted to Q.
  std::vector<std::uint64_t> gens;
  for (int v = 0; v < code.vertices(); ++v) {
    std::uint64_t g = 0;
    for (int e : code.star_edges(v)) {
      auto it = std::lower_bound(q.begin(), q.end(), e);
      if (it != q.end() && *it == e) g ^= std::uint64_t{1} << (it - q.begin());
    }
    if (g) gens.push_back(g);
  }
  std::vector<int> pivots;
  const int z = static_cast<int>(rref(gens, n, pivots).size());
  const auto checks = nullspace(gens, n);

  std::vector<double> pw(n + 1);
  for (int k = 0; k <= n; ++k) pw[k] = std::pow(p, k) * std::pow(1.0 - p, n - k);
  std::vector<double> pm(std::size_t{1} << checks.size(), 0.0);
  for (std::uint64_t e = 0; e < (std::uint64_t{1} << n); ++e) {
    std::uint64_t m = 0;
    for (std::size_t j = 0; j < checks.size(); ++j) m |= static_cast<std::uint64_t>(std::popcount(e & checks[j]) & 1) << j;
    pm[m] += pw[std::popcount(e)];
  }
  double h = 0.0;
  for (double v : pm) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h + z * std::log(2.0);
}

double cmi_via_anyons(const TorusCode& code, const Tripartition& part, double p) {
  const Region ab = region_union(part.a, part.b);
  const Region bc = region_union(part.b, part.c);
  const Region abc = region_union(ab, part.c);
  const double v = regional_entropy_via_anyons(code, ab, p) + regional_entropy_via_anyons(code, bc, p) -
                   regional_entropy_via_anyons(code, abc, p) - regional_entropy_via_anyons(code, part.b, p);
  return v < 0.0 && v > -1e-10 ? 0.0 : v;
}

BypassChannels bypass_path_channels(const TorusCode& code) {
  std::vector<LocalChannel> reset;
  std::vector<int> all;
  for (int e = 0; e < code.edges(); ++e) {
    reset.push_back(LocalChannel::reset(Region({e})));
    all.push_back(e);
  }
  std::vector<LocalChannel> star_flip;
  for (int v = 0; v < code.vertices(); ++v) {
    const auto& st = code.star_edges(v);
    std::vector<std::vector<double>> k(16, std::vector<double>(16, 0.0));
    for (int x = 0; x < 16; ++x) {
      k[x][x] += 0.5;
      k[x ^ 15][x] += 0.5;
    }
    star_flip.emplace_back(Region(std::vector<int>(st.begin(), st.end())), std::move(k));
  }
  return BypassChannels{std::move(reset), FlipChannel(0.5, Region(all)), std::move(star_flip)};
}

}  // namespace ldm
