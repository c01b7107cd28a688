#pragma once

#include "ceqv/algebra.hpp"

#include <functional>

namespace ceqv {

struct gate {
  enum class kind { input, constant, op };
  kind k = kind::input;
  std::uint32_t input_index = 0; // 1-based, kind::input
  pairval cval;                  // kind::constant
  std::uint32_t op_index = 0;    // kind::op
  std::vector<std::uint32_t> children;
};

struct circuit {
  const algebra_spec *algebra = nullptr;
  std::string name;
  std::uint32_t n = 0;
  std::vector<gate> gates; // children always precede their gate
  std::vector<std::string> gate_names;
  std::uint32_t out1 = 0, out2 = 0;
};

circuit parse_circuit(const std::string &text, const algebra_spec &a);
std::string serialize_circuit(const circuit &c);

std::pair<pairval, pairval> eval_circuit(const circuit &c, const assignment &x);
pairval eval_gate(const circuit &c, std::uint32_t g, const assignment &x);

// Compiled meaning of one output: (sum lam_j l_j + hat(u_1..u_n),
// sum alf_j u_j + u_const), shapes as recorded in hat.
struct canonical_form {
  std::uint32_t n = 0;
  std::vector<scalar> lambda; // over hat.l
  hat_form hat;
  std::vector<scalar> alpha; // over hat.u
  elem u_const;
};

// Hooks for compiling against projected shapes with per-gate hat
// expansions; the default compiles over the algebra's own shapes using the
// expansions cached at load time.
struct compile_env {
  shape u;
  shape l;
  std::vector<std::size_t> u_blocks; // indices into algebra->u
  std::vector<std::size_t> l_blocks; // indices into algebra->l
  std::function<const std::vector<wterm> &(std::uint32_t gate_idx)> hat_of;

  static compile_env plain(const algebra_spec &a);
};

std::vector<canonical_form> compile_gates(const circuit &c, const compile_env &env);
canonical_form compile(const circuit &c, std::uint32_t out_gate);
canonical_form subtract(const canonical_form &a, const canonical_form &b);

pairval eval_canonical(const canonical_form &f, const assignment &x);

// Linear composition only (lambda/alpha/u_const over the full shapes); does
// not require a hat expansion, so it works in any mode.
struct linear_parts {
  std::vector<scalar> lambda;
  std::vector<scalar> alpha;
  elem u_const;
};
std::pair<linear_parts, linear_parts> linear_compile(const circuit &c);

} // namespace ceqv
