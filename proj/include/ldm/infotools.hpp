#pragma once

#include "ldm/finite_dist.hpp"
#include "ldm/lattice.hpp"

namespace ldm {

/// Shannon entropy in nats, 0 ln 0 = 0.
double entropy(const FiniteDist& p);

struct KlResult {
  double nats = 0.0;
  /// Set when some x has P(x) > 0 but Q(x) = 0; nats is +inf then.
  bool support_violation = false;
};

KlResult kl(const FiniteDist& p, const FiniteDist& q);
double tv(const FiniteDist& p, const FiniteDist& q);

/// I(A:C|B) = H(AB) + H(BC) - H(ABC) - H(B), clipped at zero once it is
/// above -1e-10. Sites index bits of P.
double cmi(const FiniteDist& p, const Region& a, const Region& b, const Region& c);
double cmi(const FiniteDist& p, const Tripartition& part);

/// I(A:B) from exact marginals.
double mutual_information(const FiniteDist& p, const Region& a, const Region& b);

}  // namespace ldm
