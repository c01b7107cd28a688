#pragma once

#include "ceqv/shape.hpp"

namespace ceqv {

// One summand mu * w^value(beta (.) x + shift): the term contributes
// mu*value when every block of beta (.) x + shift is zero, and 0 otherwise.
struct wterm {
  scalar mu;              // over L
  elem value;             // over L
  std::vector<elem> beta; // n coefficient tuples over U
  elem shift;             // over U

  bool operator==(const wterm &) const = default;
};

// Normalized summand m(beta (.) x) with beta nondegenerate in every block
// and the whole coefficient folded into the lookup table m : U -> L.
struct mterm {
  std::vector<elem> beta; // n tuples over U, some unit entry per block
  std::vector<elem> mfun; // u.order() entries over L, indexed by rank
};

struct hat_form {
  std::uint32_t n = 0;
  shape u;
  shape l;
  std::vector<mterm> terms; // sorted by beta, one term per beta
  elem const_l;

  hat_form() = default;
  hat_form(std::uint32_t n_, shape u_, shape l_)
      : n(n_), u(std::move(u_)), l(std::move(l_)), const_l(zero_elem(l)) {}
};

// Indicator map: a when every listed component is zero, else 0. Arguments
// are grouped per block of the domain.
elem w_eval(const elem &a, const std::vector<std::vector<std::uint64_t>> &block_args);

// beta (.) x: blockwise inner products.
elem odot(const shape &u, const std::vector<elem> &beta, const std::vector<elem> &x);

// Direct reading of a wterm sum at a point; reference route used by tests
// and by operations whose hat is given as a wterm sum.
elem eval_wterms(const shape &u, const shape &l, const std::vector<wterm> &ts,
                 const std::vector<elem> &x);

// Rewrites a full table U^arity -> L as a wterm sum; requires |U| and |L|
// coprime. The table is in lexicographic argument order (first argument
// most significant, ranks block-major).
std::vector<wterm> expand_table(const std::vector<elem> &table, std::uint32_t arity,
                                const shape &u, const shape &l);

// Degenerate elimination, constant folding and beta-merging.
hat_form normalize(const std::vector<wterm> &ts, std::uint32_t n, const shape &u,
                   const shape &l);

// Same pass applied to an existing form whose terms may have degenerate or
// zero betas (after substitutions or domain shrinking).
hat_form renormalize(const hat_form &h);

elem hat_eval(const hat_form &h, const std::vector<elem> &x);
elem hat_at_zero(const hat_form &h);

// Pointwise sum of two forms over the same shapes (terms merged by beta).
hat_form hat_merge(const hat_form &a, const hat_form &b);
hat_form hat_scaled(const hat_form &h, const scalar &c);
hat_form hat_negated(const hat_form &h);

// Fixes variable slot j to the value a, folding its contribution into the
// term tables; the slot stays present with zero coefficients.
hat_form fix_slot(const hat_form &h, std::uint32_t j, const elem &a);

std::size_t term_count(const hat_form &h);

} // namespace ceqv
