#include "ceqv/shape.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace ceqv {

const char *errc_name(errc c) {
  switch (c) {
  case errc::syntax: return "Syntax";
  case errc::non_prime: return "NonPrime";
  case errc::table_size: return "TableSize";
  case errc::duplicate_op: return "DuplicateOp";
  case errc::shape_mismatch: return "ShapeMismatch";
  case errc::arity_mismatch: return "ArityMismatch";
  case errc::not_coprime: return "NotCoprime";
  case errc::unknown_op: return "UnknownOp";
  case errc::dangling_ref: return "DanglingRef";
  case errc::bad_constant: return "BadConstant";
  case errc::missing_weight_bound: return "MissingWeightBound";
  case errc::not_invertible: return "NotInvertible";
  case errc::too_large: return "TooLarge";
  case errc::reconstruction_failed: return "ReconstructionFailed";
  case errc::usage: return "Usage";
  }
  return "?";
}

static std::string make_msg(errc code, const std::string &msg, int line) {
  std::string s = errc_name(code);
  s += ": ";
  s += msg;
  if (line >= 0) {
    s += " (line ";
    s += std::to_string(line);
    s += ")";
  }
  return s;
}

error::error(errc code, const std::string &msg, int line)
    : std::runtime_error(make_msg(code, msg, line)), code_(code), line_(line) {}

bool is_prime_u32(std::uint32_t n) {
  if (n < 2)
    return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0)
      return false;
  return true;
}

static std::uint64_t pow_u64(std::uint64_t b, std::uint32_t e) {
  std::uint64_t r = 1;
  while (e--) {
    if (b != 0 && r > (std::uint64_t{1} << 40) / b)
      throw error(errc::syntax, "block modulus too large");
    r *= b;
  }
  return r;
}

shape::shape(const std::vector<std::pair<std::uint32_t, std::uint32_t>> &pe) {
  for (auto [p, k] : pe) {
    if (!is_prime_u32(p))
      throw error(errc::non_prime, std::to_string(p) + " is not prime");
    if (k < 1)
      throw error(errc::syntax, "block exponent must be positive");
    block b;
    b.prime = p;
    b.exp = k;
    b.mod = pow_u64(p, k);
    if (b.mod > (std::uint64_t{1} << 20))
      throw error(errc::syntax, "block modulus too large");
    blocks_.push_back(b);
    if (order_ > (std::uint64_t{1} << 40) / b.mod)
      throw error(errc::syntax, "group order too large");
    order_ *= b.mod;
  }
}

shape shape::cyclic(std::uint32_t p, std::uint32_t k) {
  return shape({{p, k}});
}

shape shape::select(const std::vector<std::size_t> &idx) const {
  shape r;
  for (std::size_t i : idx) {
    r.blocks_.push_back(blocks_[i]);
    r.order_ *= blocks_[i].mod;
  }
  return r;
}

bool shape::operator==(const shape &o) const {
  if (blocks_.size() != o.blocks_.size())
    return false;
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    if (blocks_[i].prime != o.blocks_[i].prime || blocks_[i].exp != o.blocks_[i].exp)
      return false;
  return true;
}

std::string shape::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (i)
      os << ' ';
    os << blocks_[i].prime << '^' << blocks_[i].exp;
  }
  return os.str();
}

elem zero_elem(const shape &s) { return elem(s.size(), 0); }
scalar zero_scalar(const shape &s) { return scalar(s.size(), 0); }

scalar one_scalar(const shape &s) {
  scalar r(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    r[i] = s[i].mod > 1 ? 1 : 0;
  return r;
}

bool is_zero(const elem &a) {
  return std::all_of(a.begin(), a.end(), [](std::uint64_t v) { return v == 0; });
}

static void check_size(const shape &s, const elem &a) {
  if (a.size() != s.size())
    throw error(errc::shape_mismatch, "element has " + std::to_string(a.size()) +
                                          " blocks, shape has " + std::to_string(s.size()));
}

elem add(const shape &s, const elem &a, const elem &b) {
  check_size(s, a);
  check_size(s, b);
  elem r(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    r[i] = (a[i] + b[i]) % s[i].mod;
  return r;
}

elem sub(const shape &s, const elem &a, const elem &b) {
  check_size(s, a);
  check_size(s, b);
  elem r(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    r[i] = (a[i] + s[i].mod - b[i]) % s[i].mod;
  return r;
}

elem neg(const shape &s, const elem &a) {
  check_size(s, a);
  elem r(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    r[i] = (s[i].mod - a[i]) % s[i].mod;
  return r;
}

elem scale(const shape &s, const scalar &c, const elem &a) {
  check_size(s, a);
  check_size(s, c);
  elem r(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    r[i] = (c[i] * a[i]) % s[i].mod;
  return r;
}

scalar scalar_add(const shape &s, const scalar &a, const scalar &b) {
  return add(s, a, b);
}

scalar scalar_mul(const shape &s, const scalar &a, const scalar &b) {
  return scale(s, a, b);
}

scalar scalar_neg(const shape &s, const scalar &a) { return neg(s, a); }

scalar scalar_from_int(const shape &s, std::int64_t v) {
  scalar r(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::int64_t m = static_cast<std::int64_t>(s[i].mod);
    std::int64_t x = v % m;
    if (x < 0)
      x += m;
    r[i] = static_cast<std::uint64_t>(x);
  }
  return r;
}

elem reduce(const shape &s, const std::vector<std::int64_t> &raw) {
  if (raw.size() != s.size())
    throw error(errc::shape_mismatch, "wrong number of residues");
  elem r(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::int64_t m = static_cast<std::int64_t>(s[i].mod);
    std::int64_t x = raw[i] % m;
    if (x < 0)
      x += m;
    r[i] = static_cast<std::uint64_t>(x);
  }
  return r;
}

std::uint64_t rank_of(const shape &s, const elem &a) {
  check_size(s, a);
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    r = r * s[i].mod + a[i];
  return r;
}

elem elem_from_rank(const shape &s, std::uint64_t r) {
  elem a(s.size());
  for (std::size_t i = s.size(); i-- > 0;) {
    a[i] = r % s[i].mod;
    r /= s[i].mod;
  }
  return a;
}

bool next_elem(const shape &s, elem &a) {
  for (std::size_t i = s.size(); i-- > 0;) {
    if (++a[i] < s[i].mod)
      return true;
    a[i] = 0;
  }
  return false;
}

std::string format_elem(const elem &a) {
  std::string s = "(";
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i)
      s += ',';
    s += std::to_string(a[i]);
  }
  s += ')';
  return s;
}

std::uint64_t inv_mod(std::uint64_t a, std::uint64_t m) {
  if (m == 1)
    return 0;
  a %= m;
  std::int64_t t = 0, new_t = 1;
  std::int64_t r = static_cast<std::int64_t>(m), new_r = static_cast<std::int64_t>(a);
  while (new_r != 0) {
    std::int64_t q = r / new_r;
    std::int64_t tmp = t - q * new_t;
    t = new_t;
    new_t = tmp;
    tmp = r - q * new_r;
    r = new_r;
    new_r = tmp;
  }
  if (r != 1)
    throw error(errc::not_invertible,
                std::to_string(a) + " has no inverse mod " + std::to_string(m));
  if (t < 0)
    t += static_cast<std::int64_t>(m);
  return static_cast<std::uint64_t>(t);
}

scalar inverse_scalar(std::uint64_t p, const shape &l) {
  scalar r(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) {
    std::uint64_t m = l[i].mod;
    std::uint64_t a = p % m;
    if (std::gcd(a == 0 ? m : a, m) != 1)
      throw error(errc::not_coprime, std::to_string(p) + " shares a factor with block " +
                                         std::to_string(l[i].prime) + "^" +
                                         std::to_string(l[i].exp));
    r[i] = m == 1 ? 0 : inv_mod(a, m);
  }
  return r;
}

} // namespace ceqv
