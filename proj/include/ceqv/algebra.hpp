#pragma once

#include "ceqv/wform.hpp"

#include <map>
#include <optional>
#include <string>

namespace ceqv {

// f((l_1,u_1),..,(l_k,u_k)) = (sum lam_i l_i + hat(u_1..u_k), sum alf_i u_i + u_0).
// The hat part comes either as a dense table over U^k (lexicographic argument
// order) or directly as a wterm sum.
struct basic_op {
  std::string name;
  std::uint32_t arity = 0;
  std::vector<scalar> l_scalars;
  std::vector<scalar> u_scalars;
  elem u_const;
  bool has_table = true;
  std::vector<elem> hat_table; // |U|^arity entries when has_table
  std::vector<wterm> hat_wsum; // otherwise

  bool operator==(const basic_op &o) const;
};

enum class check_mode { automatic, coprime, general };

struct algebra_spec {
  std::string name;
  shape u;
  shape l;
  std::vector<basic_op> ops;
  std::map<std::uint64_t, std::uint32_t> weight_bounds; // prime -> s

  // Per-op wterm expansion of the hat part, filled at load time when
  // |U| and |L| are coprime; index-aligned with ops.
  std::vector<std::vector<wterm>> expansions;

  bool coprime() const;
  const basic_op *find(const std::string &opname) const;
  int find_index(const std::string &opname) const;

  bool operator==(const algebra_spec &o) const;
};

struct pairval {
  elem l;
  elem u;
  bool operator==(const pairval &o) const { return l == o.l && u == o.u; }
};

using assignment = std::vector<pairval>;

algebra_spec parse_algebra(const std::string &text);
std::string serialize_algebra(const algebra_spec &a);

// Hat value of an op at a tuple of U-arguments.
elem hat_value(const algebra_spec &a, const basic_op &op, const std::vector<elem> &uargs);

pairval eval_basic_op(const algebra_spec &a, const basic_op &op,
                      const std::vector<pairval> &args);

// Resolves `automatic` against the algebra and checks that general-mode
// prerequisites (weight bounds for shared primes) are met.
check_mode validate_mode(const algebra_spec &a, check_mode m);

std::string format_pairval(const pairval &v);
std::string format_assignment(const assignment &x);
pairval parse_pairval(const std::string &s, const shape &lsh, const shape &ush);
assignment parse_assignment(const std::string &s, const shape &lsh, const shape &ush);

} // namespace ceqv
