#pragma once

#include "ceqv/circuit.hpp"

#include <optional>

namespace ceqv {

enum class neq_reason { linear, hat0, constancy };

// One recursion step of the constancy check that refuted a class.
struct trace_level {
  std::uint32_t block = 0;
  std::vector<std::uint64_t> key; // projective class vector mod p
  std::uint64_t c = 0, d = 0;
  std::uint32_t elim = 0;          // eliminated coordinate
  std::vector<elem> rep_beta;      // class representative
};

struct check_trace {
  std::vector<trace_level> levels;
  std::string prefix; // mode-specific context (component prime, tau)

  std::string to_string() const;
};

struct verdict {
  bool equivalent = false;
  std::optional<assignment> witness;
  neq_reason reason = neq_reason::linear;
  check_trace trace;
  std::uint32_t max_depth = 0; // deepest constancy recursion reached

  std::string machine_line() const;
};

struct check_options {
  bool want_witness = true;
  int jobs = 1;
};

// Projective vector of beta at one block: residues mod p scaled so the
// first nonzero entry is 1. Requires nondegeneracy at that block.
std::vector<std::uint64_t> class_key(const shape &u, const std::vector<elem> &beta,
                                     std::size_t block_idx);

// Subgroup exponent e of the dependence measure between two coefficient
// tuples at one block: the image of the mismatch form is <p^e> (e = k for
// the zero image). Both tuples must be nondegenerate at the block.
std::uint32_t m_dependence(const shape &u, const std::vector<elem> &alpha,
                           const std::vector<elem> &beta, std::size_t block_idx);

// Eliminates coordinate k at block i against the hyperplane value c, using
// the first term of h as class representative. All terms must lie in one
// class at block i.
hat_form substitute(const hat_form &h, std::size_t block_idx, std::uint32_t k,
                    std::uint64_t c);

// Difference form t_c(u) - t_d(v) with block i doubled and the remaining
// blocks shared; variable slots double.
hat_form build_wcd(const hat_form &t_c, const hat_form &t_d, std::size_t block_idx);

// Drops one exponent at block i; every block-i coefficient must be
// divisible by p_i. Result is not re-normalized.
hat_form shrink_domain(const hat_form &h, std::size_t block_idx);

struct constancy_result {
  bool constant = false;
  elem value; // hat at zero, when constant
  check_trace trace;
  // two points with different values, when available and requested
  std::optional<std::pair<std::vector<elem>, std::vector<elem>>> pair;
  std::uint32_t max_depth = 0;
};

constancy_result is_constant_coprime(const hat_form &h, bool want_pair = false);

// Two points separating a non-constant form, found by fixing slots one at
// a time; total and deterministic.
std::pair<std::vector<elem>, std::vector<elem>> find_witness_pair(const hat_form &h);

// Best-effort witness pair from the recorded refutation, verified against
// h0 and repaired by search when the candidate does not separate h0.
std::optional<std::pair<std::vector<elem>, std::vector<elem>>>
reconstruct_witness(const constancy_result &r, const hat_form &h0);

verdict check_equivalence(const circuit &c, check_mode mode,
                          const check_options &opts = {});

// The bounded-weight specialization criterion for one prime component of L:
// constant iff every specialization of the same-prime part is constant with
// one shared value. Requires the weight bound for q when U has q-blocks.
struct component_check {
  bool constant = false;
  elem value; // over the q-part of L, when constant
};
component_check check_component_constant(const circuit &c, std::uint64_t q);

// Per specialization of the same-prime part: assigns tau to the listed
// blocks of the n variables and returns both outputs compiled over the
// coprime factor.
struct general_ctx;

// Exposed for tests: enumerate the bounded-weight specialization set for
// n variables over the shape u1 (lexicographic by weight, support, values).
std::vector<std::vector<elem>> weight_bounded_tuples(const shape &u1, std::uint32_t n,
                                                     std::uint32_t s);

} // namespace ceqv
