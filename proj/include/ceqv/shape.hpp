#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ceqv {

enum class errc {
  syntax,
  non_prime,
  table_size,
  duplicate_op,
  shape_mismatch,
  arity_mismatch,
  not_coprime,
  unknown_op,
  dangling_ref,
  bad_constant,
  missing_weight_bound,
  not_invertible,
  too_large,
  reconstruction_failed,
  usage,
};

const char *errc_name(errc c);

class error : public std::runtime_error {
public:
  error(errc code, const std::string &msg, int line = -1);
  errc code() const { return code_; }
  int line() const { return line_; }

private:
  errc code_;
  int line_;
};

struct block {
  std::uint32_t prime = 2;
  std::uint32_t exp = 1;
  std::uint64_t mod = 2; // prime^exp
};

// An ordered product of Z_{p^k} blocks; the empty product is the trivial
// one-element group. Block moduli are capped so that products of two
// residues never overflow 64 bits.
class shape {
public:
  shape() = default;
  explicit shape(const std::vector<std::pair<std::uint32_t, std::uint32_t>> &pe);
  static shape cyclic(std::uint32_t p, std::uint32_t k);

  std::size_t size() const { return blocks_.size(); }
  bool trivial() const { return blocks_.empty(); }
  const block &operator[](std::size_t i) const { return blocks_[i]; }
  std::uint64_t order() const { return order_; }
  auto begin() const { return blocks_.begin(); }
  auto end() const { return blocks_.end(); }

  // Sub-shape consisting of the listed block indices, in the given order.
  shape select(const std::vector<std::size_t> &idx) const;

  bool operator==(const shape &o) const;
  bool operator!=(const shape &o) const { return !(*this == o); }

  std::string to_string() const; // "2^1 3^2"

private:
  std::vector<block> blocks_;
  std::uint64_t order_ = 1;
};

// Residue tuples (one residue per block) and diagonal scalars share the
// same storage; which shape they live over is contextual.
using elem = std::vector<std::uint64_t>;
using scalar = std::vector<std::uint64_t>;

elem zero_elem(const shape &s);
scalar zero_scalar(const shape &s);
scalar one_scalar(const shape &s);

bool is_zero(const elem &a);

elem add(const shape &s, const elem &a, const elem &b);
elem sub(const shape &s, const elem &a, const elem &b);
elem neg(const shape &s, const elem &a);
// Diagonal scalar action: block i of the result is c[i]*a[i] mod p_i^{k_i}.
elem scale(const shape &s, const scalar &c, const elem &a);

scalar scalar_add(const shape &s, const scalar &a, const scalar &b);
scalar scalar_mul(const shape &s, const scalar &a, const scalar &b);
scalar scalar_neg(const shape &s, const scalar &a);
scalar scalar_from_int(const shape &s, std::int64_t v);

// Reduce possibly-signed residues into canonical range.
elem reduce(const shape &s, const std::vector<std::int64_t> &raw);

// Block-major rank with the last block least significant.
std::uint64_t rank_of(const shape &s, const elem &a);
elem elem_from_rank(const shape &s, std::uint64_t r);
// Odometer step in rank order; returns false after wrapping back to zero.
bool next_elem(const shape &s, elem &a);

std::string format_elem(const elem &a);

// Multiplicative inverse of a modulo m; throws not_invertible.
std::uint64_t inv_mod(std::uint64_t a, std::uint64_t m);

// Scalar nu with nu*p = 1 in every block of l; throws not_coprime.
scalar inverse_scalar(std::uint64_t p, const shape &l);

bool is_prime_u32(std::uint32_t n);

} // namespace ceqv
