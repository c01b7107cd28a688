#pragma once

#include "ceqv/checker.hpp"

#include <random>

namespace ceqv {

inline constexpr std::uint64_t oracle_default_bound = 10'000'000;

struct oracle_verdict {
  bool equivalent = false;
  std::optional<assignment> witness; // first differing assignment
};

// Exhaustive enumeration of all assignments in lexicographic order
// (first variable most significant, L before U within a pair).
oracle_verdict oracle_equivalent(const circuit &c,
                                 std::uint64_t bound = oracle_default_bound);

struct oracle_constancy {
  bool constant = false;
  elem value;
  // two points with different values when not constant
  std::vector<elem> x, y;
};

oracle_constancy oracle_constant(const hat_form &h,
                                 std::uint64_t bound = oracle_default_bound);

// |{x' : (beta (.) x)^(j) + m = (beta (.) x')^(j), x^(i) = x'^(i) for i != j}|.
std::uint64_t count_E(const shape &u, const std::vector<elem> &beta, std::size_t j,
                      const std::vector<elem> &x, std::uint64_t m,
                      std::uint64_t bound = oracle_default_bound);

struct fuzz_config {
  std::uint64_t seed = 1;
  std::uint32_t count = 100;
  std::uint32_t max_n = 3;
  std::uint32_t max_gates = 8;
  std::uint32_t const_weight = 20; // percent of non-input gates that are constants
  check_mode mode = check_mode::automatic;
  std::uint64_t oracle_bound = oracle_default_bound;
  int jobs = 1;
};

struct disagreement {
  std::uint32_t instance = 0;
  std::string circuit_text; // minimized
  std::string checker_line;
  std::string oracle_line;
};

struct fuzz_report {
  std::uint64_t seed = 0;
  std::uint32_t total = 0;
  std::uint32_t agree = 0;
  std::uint32_t skipped = 0; // oracle too large
  std::vector<disagreement> disagreements;
  std::uint32_t max_depth = 0;
  std::uint32_t witnesses_emitted = 0;
  std::uint32_t witnesses_invalid = 0;

  std::string summary_line() const; // FUZZ seed=.. total=.. agree=.. disagree=..
};

// Deterministic, seeded random circuit over the given algebra. Instance
// style cycles through unrelated outputs, a rebuilt copy of the first
// output, and a rebuilt copy with one mutation.
circuit random_circuit(const algebra_spec &a, std::uint64_t seed, std::uint32_t max_n,
                       std::uint32_t max_gates, std::uint32_t const_weight);

// Differential run of the checker against the oracle; disagreements are
// shrunk by removing op gates before being reported. A replacement checker
// can be injected for harness self-tests.
using checker_fn = std::function<verdict(const circuit &, check_mode, const check_options &)>;
fuzz_report fuzz(const algebra_spec &a, const fuzz_config &cfg,
                 const checker_fn &checker = {});

// Cross-checks the bounded-weight specialization criterion against
// exhaustive evaluation of the hat difference, for every prime component
// of L, over seeded random circuits.
struct wbound_report {
  std::uint32_t total = 0;
  std::uint32_t violations = 0;
  std::vector<std::string> notes;
};
wbound_report validate_weight_bound(const algebra_spec &a, std::uint64_t seed,
                                    std::uint32_t count, std::uint32_t max_n,
                                    std::uint32_t max_gates);

} // namespace ceqv
