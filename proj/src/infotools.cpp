#include "ldm/infotools.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ldm {

namespace {

void require_same_bits(const FiniteDist& p, const FiniteDist& q, const char* what) {
  if (p.bits() != q.bits()) {
    throw std::invalid_argument(std::string(what) + ": distributions over different bit counts");
  }
}

double marginal_entropy(const FiniteDist& p, const std::vector<int>& sites) {
  if (sites.empty()) return 0.0;
  return entropy(p.marginal(sites));
}

std::vector<int> concat(std::initializer_list<const Region*> parts) {
  std::vector<int> out;
  for (const Region* r : parts) out.insert(out.end(), r->begin(), r->end());
  return out;
}

}  // namespace

double entropy(const FiniteDist& p) {
  double h = 0.0;
  for (double v : p.probs()) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

KlResult kl(const FiniteDist& p, const FiniteDist& q) {
  require_same_bits(p, q, "kl");
  KlResult res;
  for (std::size_t x = 0; x < p.states(); ++x) {
    if (p[x] == 0.0) continue;
    if (q[x] == 0.0) {
      res.support_violation = true;
      res.nats = std::numeric_limits<double>::infinity();
      return res;
    }
    res.nats += p[x] * std::log(p[x] / q[x]);
  }
  // Rounding can leave a tiny negative remainder when P == Q.
  if (res.nats < 0.0 && res.nats > -1e-14) res.nats = 0.0;
  return res;
}

double tv(const FiniteDist& p, const FiniteDist& q) {
  require_same_bits(p, q, "tv");
  double s = 0.0;
  for (std::size_t x = 0; x < p.states(); ++x) s += std::abs(p[x] - q[x]);
  return 0.5 * s;
}

double cmi(const FiniteDist& p, const Region& a, const Region& b, const Region& c) {
  for (const Region* r : {&a, &b, &c}) {
    for (int s : *r) {
      if (s >= p.bits()) throw std::invalid_argument("cmi: region site outside distribution");
    }
  }
  const double v = marginal_entropy(p, concat({&a, &b})) + marginal_entropy(p, concat({&b, &c})) -
                   marginal_entropy(p, concat({&a, &b, &c})) - marginal_entropy(p, b.sites());
  if (v < 0.0 && v >= -1e-10) return 0.0;
  return v;
}

double cmi(const FiniteDist& p, const Tripartition& part) { return cmi(p, part.a, part.b, part.c); }

double mutual_information(const FiniteDist& p, const Region& a, const Region& b) {
  const double v = marginal_entropy(p, a.sites()) + marginal_entropy(p, b.sites()) -
                   marginal_entropy(p, concat({&a, &b}));
  if (v < 0.0 && v >= -1e-10) return 0.0;
  return v;
}

}  // namespace ldm
