#include "ceqv/checker.hpp"

#include <algorithm>
#include <cassert>
#include <future>
#include <map>
#include <numeric>
#include <sstream>

namespace ceqv {

std::string check_trace::to_string() const {
  std::ostringstream os;
  if (!prefix.empty())
    os << prefix;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i || !prefix.empty())
      os << ';';
    const trace_level &lv = levels[i];
    os << 'b' << lv.block << ":key=";
    for (std::size_t j = 0; j < lv.key.size(); ++j) {
      if (j)
        os << ',';
      os << lv.key[j];
    }
    os << ":c=" << lv.c << ":d=" << lv.d << ":x=" << lv.elim;
  }
  std::string s = os.str();
  return s.empty() ? "-" : s;
}

std::string verdict::machine_line() const {
  if (equivalent)
    return "EQUIVALENT";
  std::string s = "NOT_EQUIVALENT witness=";
  s += witness ? format_assignment(*witness) : "none";
  s += " reason=";
  switch (reason) {
  case neq_reason::linear: s += "linear"; break;
  case neq_reason::hat0: s += "hat0"; break;
  case neq_reason::constancy: s += "constancy"; break;
  }
  s += " trace=";
  s += trace.to_string();
  return s;
}

std::vector<std::uint64_t> class_key(const shape &u, const std::vector<elem> &beta,
                                     std::size_t bi) {
  std::uint64_t p = u[bi].prime;
  std::vector<std::uint64_t> key(beta.size());
  std::size_t lead = beta.size();
  for (std::size_t j = 0; j < beta.size(); ++j) {
    key[j] = beta[j][bi] % p;
    if (key[j] != 0 && lead == beta.size())
      lead = j;
  }
  if (lead == beta.size())
    throw error(errc::not_invertible, "degenerate coefficient tuple at block " +
                                          std::to_string(bi));
  std::uint64_t s = inv_mod(key[lead], p);
  for (auto &v : key)
    v = v * s % p;
  return key;
}

std::uint32_t m_dependence(const shape &u, const std::vector<elem> &alpha,
                           const std::vector<elem> &beta, std::size_t bi) {
  std::uint64_t p = u[bi].prime;
  std::uint64_t mod = u[bi].mod;
  std::uint32_t k = u[bi].exp;
  std::size_t j0 = alpha.size();
  for (std::size_t j = 0; j < alpha.size(); ++j)
    if (alpha[j][bi] % p != 0) {
      j0 = j;
      break;
    }
  if (j0 == alpha.size())
    throw error(errc::not_invertible, "alpha degenerate at block " + std::to_string(bi));
  std::uint64_t a = beta[j0][bi] * inv_mod(alpha[j0][bi], mod) % mod;
  std::uint32_t e = k;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    std::uint64_t mt = (beta[j][bi] + mod - a * alpha[j][bi] % mod) % mod;
    if (mt == 0)
      continue;
    std::uint32_t v = 0;
    while (mt % p == 0) {
      mt /= p;
      ++v;
    }
    e = std::min(e, v);
  }
  return e;
}

hat_form substitute(const hat_form &h, std::size_t bi, std::uint32_t k, std::uint64_t c) {
  if (h.terms.empty())
    throw error(errc::not_invertible, "substitute on an empty class");
  std::uint64_t p = h.u[bi].prime;
  std::uint64_t mod = h.u[bi].mod;
  const std::vector<elem> &rep = h.terms.front().beta;
  if (rep[k][bi] % p == 0)
    throw error(errc::not_invertible, "coordinate " + std::to_string(k) +
                                          " is not a unit at block " + std::to_string(bi));
  std::uint64_t inv = inv_mod(rep[k][bi], mod);

  hat_form out(h.n, h.u, h.l);
  out.const_l = h.const_l;
  for (const mterm &t : h.terms) {
    std::uint64_t nu = t.beta[k][bi] * inv % mod;
    mterm s;
    s.beta = t.beta;
    for (std::uint32_t j = 0; j < h.n; ++j) {
      std::uint64_t v = (t.beta[j][bi] + mod - nu * rep[j][bi] % mod) % mod;
      assert(v % p == 0);
      s.beta[j][bi] = v;
    }
    std::uint64_t shift = nu * c % mod;
    if (shift == 0) {
      s.mfun = t.mfun;
    } else {
      s.mfun.resize(t.mfun.size());
      elem z = zero_elem(h.u);
      std::uint64_t r = 0;
      do {
        elem zs = z;
        zs[bi] = (zs[bi] + shift) % mod;
        s.mfun[r] = t.mfun[rank_of(h.u, zs)];
        ++r;
      } while (next_elem(h.u, z));
    }
    out.terms.push_back(std::move(s));
  }
  return out;
}

hat_form build_wcd(const hat_form &t_c, const hat_form &t_d, std::size_t bi) {
  std::uint32_t n = t_c.n;
  hat_form out(2 * n, t_c.u, t_c.l);
  out.const_l = sub(t_c.l, t_c.const_l, t_d.const_l);
  for (const mterm &t : t_c.terms) {
    mterm s;
    s.beta.assign(2 * n, zero_elem(t_c.u));
    for (std::uint32_t j = 0; j < n; ++j)
      s.beta[j] = t.beta[j];
    s.mfun = t.mfun;
    out.terms.push_back(std::move(s));
  }
  scalar minus1 = scalar_from_int(t_c.l, -1);
  for (const mterm &t : t_d.terms) {
    mterm s;
    s.beta.assign(2 * n, zero_elem(t_c.u));
    for (std::uint32_t j = 0; j < n; ++j) {
      s.beta[j] = t.beta[j];
      s.beta[j][bi] = 0;
      s.beta[n + j][bi] = t.beta[j][bi];
    }
    s.mfun.reserve(t.mfun.size());
    for (const elem &v : t.mfun)
      s.mfun.push_back(scale(t_c.l, minus1, v));
    out.terms.push_back(std::move(s));
  }
  return out;
}

hat_form shrink_domain(const hat_form &h, std::size_t bi) {
  std::uint64_t p = h.u[bi].prime;
  bool drop = h.u[bi].exp == 1;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pe;
  for (std::size_t b = 0; b < h.u.size(); ++b) {
    if (b == bi) {
      if (!drop)
        pe.emplace_back(h.u[b].prime, h.u[b].exp - 1);
      continue;
    }
    pe.emplace_back(h.u[b].prime, h.u[b].exp);
  }
  shape u2(pe);
  hat_form out(h.n, u2, h.l);
  out.const_l = h.const_l;

  auto embed = [&](const elem &y) {
    elem x(h.u.size());
    std::size_t yi = 0;
    for (std::size_t b = 0; b < h.u.size(); ++b) {
      if (b == bi) {
        x[b] = drop ? 0 : (p * y[yi++]) % h.u[b].mod;
        continue;
      }
      x[b] = y[yi++];
    }
    return x;
  };

  for (const mterm &t : h.terms) {
    mterm s;
    s.beta.assign(h.n, zero_elem(u2));
    for (std::uint32_t j = 0; j < h.n; ++j) {
      std::size_t yi = 0;
      for (std::size_t b = 0; b < h.u.size(); ++b) {
        if (b == bi) {
          if (t.beta[j][b] % p != 0)
            throw error(errc::shape_mismatch, "coefficient not divisible before shrink");
          if (!drop)
            s.beta[j][yi++] = t.beta[j][b] / p;
          continue;
        }
        s.beta[j][yi++] = t.beta[j][b];
      }
    }
    s.mfun.resize(u2.order());
    elem y = zero_elem(u2);
    std::uint64_t r = 0;
    do {
      s.mfun[r] = t.mfun[rank_of(h.u, embed(y))];
      ++r;
    } while (next_elem(u2, y));
    out.terms.push_back(std::move(s));
  }
  return out;
}

namespace {

using point_vec = std::vector<elem>;
using point_pair = std::pair<point_vec, point_vec>;

struct constancy_ctx {
  bool want_pair = false;
  std::uint32_t max_depth = 0;
};

constancy_result impl_constant(const hat_form &h, constancy_ctx &ctx, std::uint32_t depth);

// Fix slots one at a time until two separating points emerge. The form must
// be non-constant.
point_pair find_pair_from(const hat_form &h, std::uint32_t slot) {
  for (std::uint32_t j = slot; j < h.n; ++j) {
    std::vector<elem> values;
    elem a = zero_elem(h.u);
    bool all_const = true;
    elem nc_a;
    hat_form nc_form;
    do {
      hat_form ha = fix_slot(h, j, a);
      constancy_ctx ctx;
      constancy_result r = impl_constant(ha, ctx, 0);
      if (!r.constant) {
        all_const = false;
        nc_a = a;
        nc_form = std::move(ha);
        break;
      }
      values.push_back(r.value);
    } while (next_elem(h.u, a));
    if (!all_const) {
      point_pair pr = find_pair_from(nc_form, j + 1);
      pr.first[j] = nc_a;
      pr.second[j] = nc_a;
      return pr;
    }
    for (std::size_t r1 = 0; r1 < values.size(); ++r1)
      for (std::size_t r2 = r1 + 1; r2 < values.size(); ++r2)
        if (values[r1] != values[r2]) {
          point_vec x(h.n, zero_elem(h.u)), y(h.n, zero_elem(h.u));
          x[j] = elem_from_rank(h.u, r1);
          y[j] = elem_from_rank(h.u, r2);
          return {x, y};
        }
    // all restrictions constant and equal would make h constant
  }
  throw error(errc::reconstruction_failed, "no separating points found");
}

constancy_result impl_constant(const hat_form &h, constancy_ctx &ctx, std::uint32_t depth) {
  ctx.max_depth = std::max(ctx.max_depth, depth);
  constancy_result res;
  if (h.terms.empty()) {
    res.constant = true;
    res.value = h.const_l;
    return res;
  }

  std::size_t m = h.u.size();
  for (std::size_t bi = 0; bi < m; ++bi) {
    std::map<std::vector<std::uint64_t>, std::vector<std::size_t>> classes;
    for (std::size_t ti = 0; ti < h.terms.size(); ++ti)
      classes[class_key(h.u, h.terms[ti].beta, bi)].push_back(ti);

    std::uint64_t mod = h.u[bi].mod;
    for (const auto &[key, members] : classes) {
      hat_form cls(h.n, h.u, h.l);
      for (std::size_t ti : members)
        cls.terms.push_back(h.terms[ti]);
      std::uint32_t k = 0;
      while (key[k] == 0)
        ++k;
      const std::vector<elem> &rep = cls.terms.front().beta;
      std::uint64_t inv = inv_mod(rep[k][bi], mod);

      std::vector<hat_form> subs;
      subs.reserve(mod);
      for (std::uint64_t c = 0; c < mod; ++c)
        subs.push_back(substitute(cls, bi, k, c));

      for (std::uint64_t c = 0; c < mod; ++c) {
        for (std::uint64_t d = 0; d < mod; ++d) {
          hat_form w = build_wcd(subs[c], subs[d], bi);
          elem z0 = hat_at_zero(w);

          auto fail = [&](const std::optional<point_vec> &zopt) {
            res.constant = false;
            trace_level lv;
            lv.block = static_cast<std::uint32_t>(bi);
            lv.key = key;
            lv.c = c;
            lv.d = d;
            lv.elim = k;
            lv.rep_beta = rep;
            res.trace.levels.insert(res.trace.levels.begin(), lv);
            if (!ctx.want_pair || !zopt)
              return;
            const point_vec &z = *zopt;
            point_vec px(h.n), py(h.n);
            for (std::uint32_t j = 0; j < h.n; ++j) {
              px[j] = z[j];
              py[j] = z[j];
              py[j][bi] = z[h.n + j][bi];
            }
            auto pin = [&](point_vec &pt, std::uint64_t cv) {
              std::uint64_t acc = 0;
              for (std::uint32_t l = 0; l < h.n; ++l) {
                if (l == k)
                  continue;
                acc = (acc + rep[l][bi] * pt[l][bi]) % mod;
              }
              pt[k][bi] = inv * ((cv + mod - acc) % mod) % mod;
            };
            pin(px, c);
            pin(py, d);
            if (hat_eval(h, px) != hat_eval(h, py)) {
              res.pair = point_pair{px, py};
            } else {
              try {
                res.pair = find_pair_from(h, 0);
              } catch (const error &) {
              }
            }
          };

          if (!is_zero(z0)) {
            fail(ctx.want_pair
                     ? std::optional<point_vec>(point_vec(2 * h.n, zero_elem(h.u)))
                     : std::nullopt);
            return res;
          }

          hat_form w2 = renormalize(shrink_domain(w, bi));
          constancy_result sub = impl_constant(w2, ctx, depth + 1);
          if (!sub.constant) {
            std::optional<point_vec> lifted;
            if (ctx.want_pair && sub.pair) {
              const point_vec &z1 = sub.pair->first;
              const point_vec &z2 = sub.pair->second;
              const point_vec &pick = is_zero(hat_eval(w2, z1)) ? z2 : z1;
              bool drop = h.u[bi].exp == 1;
              point_vec z(2 * h.n, zero_elem(h.u));
              for (std::uint32_t j = 0; j < 2 * h.n; ++j) {
                std::size_t yi = 0;
                for (std::size_t b = 0; b < m; ++b) {
                  if (b == bi) {
                    z[j][b] = drop ? 0 : pick[j][yi++];
                    continue;
                  }
                  z[j][b] = pick[j][yi++];
                }
              }
              lifted = std::move(z);
            }
            res.trace = sub.trace;
            fail(lifted);
            return res;
          }
          assert(is_zero(sub.value));
        }
      }
    }
  }
  res.constant = true;
  res.value = hat_at_zero(h);
  return res;
}

} // namespace

constancy_result is_constant_coprime(const hat_form &h, bool want_pair) {
  constancy_ctx ctx;
  ctx.want_pair = want_pair;
  constancy_result r = impl_constant(h, ctx, 0);
  r.max_depth = ctx.max_depth;
  return r;
}

point_pair find_witness_pair(const hat_form &h) { return find_pair_from(h, 0); }

std::optional<point_pair> reconstruct_witness(const constancy_result &r,
                                              const hat_form &h0) {
  if (r.constant)
    return std::nullopt;
  if (r.pair && hat_eval(h0, r.pair->first) != hat_eval(h0, r.pair->second))
    return r.pair;
  try {
    return find_witness_pair(h0);
  } catch (const error &) {
    return std::nullopt;
  }
}

std::vector<std::vector<elem>> weight_bounded_tuples(const shape &u1, std::uint32_t n,
                                                     std::uint32_t s) {
  std::vector<std::vector<elem>> out;
  std::vector<elem> zero(n, zero_elem(u1));
  out.push_back(zero);
  if (u1.order() <= 1 || n == 0)
    return out;
  std::uint32_t maxw = std::min(s, n);
  std::vector<std::uint32_t> support;
  // enumerate supports of size w in lexicographic order, then values
  std::function<void(std::uint32_t, std::uint32_t)> rec_support =
      [&](std::uint32_t start, std::uint32_t left) {
        if (left == 0) {
          std::vector<std::uint64_t> vranks(support.size(), 1);
          for (;;) {
            std::vector<elem> tau = zero;
            for (std::size_t j = 0; j < support.size(); ++j)
              tau[support[j]] = elem_from_rank(u1, vranks[j]);
            out.push_back(std::move(tau));
            std::size_t j = support.size();
            while (j-- > 0) {
              if (++vranks[j] < u1.order())
                break;
              vranks[j] = 1;
              if (j == 0)
                return;
            }
          }
        }
        for (std::uint32_t i = start; i + left <= n; ++i) {
          support.push_back(i);
          rec_support(i + 1, left - 1);
          support.pop_back();
        }
      };
  for (std::uint32_t w = 1; w <= maxw; ++w)
    rec_support(0, w);
  return out;
}

namespace {

bool outputs_differ(const circuit &c, const assignment &x) {
  auto [a, b] = eval_circuit(c, x);
  return !(a == b);
}

assignment zero_assignment(const circuit &c) {
  const algebra_spec &a = *c.algebra;
  return assignment(c.n, pairval{zero_elem(a.l), zero_elem(a.u)});
}

std::optional<assignment> pick_verified(const circuit &c,
                                        const std::vector<assignment> &cands) {
  for (const auto &x : cands)
    if (outputs_differ(c, x))
      return x;
  return std::nullopt;
}

// Combine U1/U2 components back into a full U element.
elem interleave_u(const algebra_spec &a, const std::vector<std::size_t> &u1_blocks,
                  const std::vector<std::size_t> &u2_blocks, const elem &v1,
                  const elem &v2) {
  elem r = zero_elem(a.u);
  for (std::size_t i = 0; i < u1_blocks.size(); ++i)
    r[u1_blocks[i]] = v1[i];
  for (std::size_t i = 0; i < u2_blocks.size(); ++i)
    r[u2_blocks[i]] = v2[i];
  return r;
}

struct linear_refutation {
  bool found = false;
  std::vector<assignment> candidates;
};

linear_refutation linear_diff_candidates(const circuit &c, const linear_parts &p1,
                                         const linear_parts &p2) {
  const algebra_spec &a = *c.algebra;
  linear_refutation r;
  r.candidates.push_back(zero_assignment(c));
  for (std::uint32_t j = 0; j < c.n; ++j) {
    scalar dl = sub(a.l, p1.lambda[j], p2.lambda[j]);
    for (std::size_t b = 0; b < a.l.size(); ++b)
      if (dl[b] != 0) {
        assignment x = zero_assignment(c);
        x[j].l[b] = 1 % a.l[b].mod;
        r.candidates.push_back(std::move(x));
        r.found = true;
        break;
      }
    scalar da = sub(a.u, p1.alpha[j], p2.alpha[j]);
    for (std::size_t b = 0; b < a.u.size(); ++b)
      if (da[b] != 0) {
        assignment x = zero_assignment(c);
        x[j].u[b] = 1 % a.u[b].mod;
        r.candidates.push_back(std::move(x));
        r.found = true;
        break;
      }
  }
  if (!is_zero(sub(a.u, p1.u_const, p2.u_const)))
    r.found = true; // zero assignment already present
  return r;
}

verdict check_coprime(const circuit &c, const check_options &opts) {
  const algebra_spec &a = *c.algebra;
  verdict v;

  compile_env env = compile_env::plain(a);
  env.hat_of = [&a, &c](std::uint32_t gi) -> const std::vector<wterm> & {
    return a.expansions[c.gates[gi].op_index];
  };
  auto forms = compile_gates(c, env);
  canonical_form d = subtract(forms[c.out1], forms[c.out2]);

  bool lin = false;
  for (std::uint32_t j = 0; j < c.n && !lin; ++j)
    lin = !is_zero(d.lambda[j]) || !is_zero(d.alpha[j]);
  lin = lin || !is_zero(d.u_const);
  if (lin) {
    v.equivalent = false;
    v.reason = neq_reason::linear;
    if (opts.want_witness) {
      linear_parts p1{forms[c.out1].lambda, forms[c.out1].alpha, forms[c.out1].u_const};
      linear_parts p2{forms[c.out2].lambda, forms[c.out2].alpha, forms[c.out2].u_const};
      v.witness = pick_verified(c, linear_diff_candidates(c, p1, p2).candidates);
    }
    return v;
  }

  if (!is_zero(hat_at_zero(d.hat))) {
    v.equivalent = false;
    v.reason = neq_reason::hat0;
    if (opts.want_witness)
      v.witness = pick_verified(c, {zero_assignment(c)});
    return v;
  }

  constancy_result r = is_constant_coprime(d.hat, opts.want_witness);
  v.max_depth = r.max_depth;
  if (r.constant) {
    v.equivalent = true;
    return v;
  }
  v.equivalent = false;
  v.reason = neq_reason::constancy;
  v.trace = r.trace;
  if (opts.want_witness) {
    auto pr = reconstruct_witness(r, d.hat);
    if (pr) {
      std::vector<assignment> cands;
      for (const point_vec *pt : {&pr->first, &pr->second}) {
        assignment x = zero_assignment(c);
        for (std::uint32_t j = 0; j < c.n; ++j)
          x[j].u = (*pt)[j];
        cands.push_back(std::move(x));
      }
      v.witness = pick_verified(c, cands);
    }
  }
  return v;
}

struct specialized_pass {
  const circuit *c = nullptr;
  std::vector<std::size_t> u1_blocks, u2_blocks, lq_blocks;
  shape u1, u2, lq;
  // (op index, U1 constants of the children) -> expansion over (u2, lq)
  std::map<std::pair<std::uint32_t, std::vector<std::uint64_t>>, std::vector<wterm>> cache;

  std::pair<hat_form, hat_form> run(const std::vector<elem> &tau);
};

std::pair<hat_form, hat_form> specialized_pass::run(const std::vector<elem> &tau) {
  const circuit &circ = *c;
  const algebra_spec &a = *circ.algebra;

  // forward pass: the same-prime part of every gate's U-value is constant
  std::vector<elem> u1_val(circ.gates.size(), zero_elem(u1));
  for (std::size_t gi = 0; gi < circ.gates.size(); ++gi) {
    const gate &g = circ.gates[gi];
    switch (g.k) {
    case gate::kind::input:
      u1_val[gi] = tau[g.input_index - 1];
      break;
    case gate::kind::constant: {
      elem e(u1_blocks.size());
      for (std::size_t i = 0; i < u1_blocks.size(); ++i)
        e[i] = g.cval.u[u1_blocks[i]];
      u1_val[gi] = std::move(e);
      break;
    }
    case gate::kind::op: {
      const basic_op &op = a.ops[g.op_index];
      elem acc(u1_blocks.size());
      for (std::size_t i = 0; i < u1_blocks.size(); ++i)
        acc[i] = op.u_const[u1_blocks[i]];
      for (std::uint32_t ci = 0; ci < op.arity; ++ci) {
        const elem &ch = u1_val[g.children[ci]];
        for (std::size_t i = 0; i < u1_blocks.size(); ++i) {
          std::uint64_t m = u1[i].mod;
          acc[i] = (acc[i] + op.u_scalars[ci][u1_blocks[i]] * ch[i]) % m;
        }
      }
      u1_val[gi] = std::move(acc);
      break;
    }
    }
  }

  // per-gate hat expansions over the coprime factor
  std::vector<const std::vector<wterm> *> gate_exp(circ.gates.size(), nullptr);
  for (std::size_t gi = 0; gi < circ.gates.size(); ++gi) {
    const gate &g = circ.gates[gi];
    if (g.k != gate::kind::op)
      continue;
    const basic_op &op = a.ops[g.op_index];
    std::vector<std::uint64_t> kappas;
    kappas.reserve(op.arity);
    for (std::uint32_t ci = 0; ci < op.arity; ++ci)
      kappas.push_back(rank_of(u1, u1_val[g.children[ci]]));
    auto key = std::make_pair(g.op_index, kappas);
    auto it = cache.find(key);
    if (it == cache.end()) {
      std::uint64_t total = 1;
      for (std::uint32_t i = 0; i < op.arity; ++i)
        total *= u2.order();
      std::vector<elem> table;
      table.reserve(total);
      std::vector<elem> v2(op.arity, zero_elem(u2));
      for (std::uint64_t idx = 0; idx < total; ++idx) {
        std::vector<elem> args;
        args.reserve(op.arity);
        for (std::uint32_t ci = 0; ci < op.arity; ++ci)
          args.push_back(
              interleave_u(a, u1_blocks, u2_blocks, elem_from_rank(u1, kappas[ci]), v2[ci]));
        elem hv = hat_value(a, op, args);
        elem proj(lq_blocks.size());
        for (std::size_t i = 0; i < lq_blocks.size(); ++i)
          proj[i] = hv[lq_blocks[i]];
        table.push_back(std::move(proj));
        for (std::size_t j = op.arity; j-- > 0;)
          if (next_elem(u2, v2[j]))
            break;
      }
      it = cache.emplace(std::move(key), expand_table(table, op.arity, u2, lq)).first;
    }
    gate_exp[gi] = &it->second;
  }

  compile_env env;
  env.u = u2;
  env.l = lq;
  env.u_blocks = u2_blocks;
  env.l_blocks = lq_blocks;
  env.hat_of = [&gate_exp](std::uint32_t gi) -> const std::vector<wterm> & {
    return *gate_exp[gi];
  };
  auto forms = compile_gates(circ, env);
  hat_form h1 = forms[circ.out1].hat; // outputs may name the same gate
  hat_form h2 = std::move(forms[circ.out2].hat);
  return {std::move(h1), std::move(h2)};
}

std::string tau_string(const std::vector<elem> &tau) {
  std::string s = "tau=";
  for (std::size_t j = 0; j < tau.size(); ++j) {
    if (j)
      s += ',';
    s += format_elem(tau[j]);
  }
  return s;
}

verdict check_general(const circuit &c, const check_options &opts) {
  const algebra_spec &a = *c.algebra;
  verdict v;

  auto [p1, p2] = linear_compile(c);
  linear_refutation lr = linear_diff_candidates(c, p1, p2);
  if (lr.found) {
    v.equivalent = false;
    v.reason = neq_reason::linear;
    if (opts.want_witness)
      v.witness = pick_verified(c, lr.candidates);
    return v;
  }

  if (outputs_differ(c, zero_assignment(c))) {
    v.equivalent = false;
    v.reason = neq_reason::hat0;
    if (opts.want_witness)
      v.witness = zero_assignment(c);
    return v;
  }

  std::vector<std::uint64_t> primes;
  for (const auto &b : a.l)
    if (std::find(primes.begin(), primes.end(), b.prime) == primes.end())
      primes.push_back(b.prime);
  std::sort(primes.begin(), primes.end());

  for (std::uint64_t q : primes) {
    specialized_pass pass;
    pass.c = &c;
    for (std::size_t i = 0; i < a.l.size(); ++i)
      if (a.l[i].prime == q)
        pass.lq_blocks.push_back(i);
    for (std::size_t i = 0; i < a.u.size(); ++i)
      (a.u[i].prime == q ? pass.u1_blocks : pass.u2_blocks).push_back(i);
    pass.u1 = a.u.select(pass.u1_blocks);
    pass.u2 = a.u.select(pass.u2_blocks);
    pass.lq = a.l.select(pass.lq_blocks);

    std::uint32_t s = 0;
    if (!pass.u1_blocks.empty())
      s = a.weight_bounds.at(q);
    auto taus = weight_bounded_tuples(pass.u1, c.n, s);

    std::vector<constancy_result> decs(taus.size());
    auto run_range = [&](specialized_pass local, std::size_t lo, std::size_t hi,
                         std::vector<constancy_result> *out_dec) {
      for (std::size_t ti = lo; ti < hi; ++ti) {
        auto [h1, h2] = local.run(taus[ti]);
        hat_form hd = hat_merge(h1, hat_negated(h2));
        (*out_dec)[ti] = is_constant_coprime(hd, opts.want_witness);
      }
    };
    int jobs = std::max(1, opts.jobs);
    if (jobs <= 1 || taus.size() < 2) {
      run_range(pass, 0, taus.size(), &decs);
    } else {
      std::size_t nj = std::min<std::size_t>(jobs, taus.size());
      std::vector<std::future<void>> fs;
      std::size_t chunk = (taus.size() + nj - 1) / nj;
      for (std::size_t w = 0; w < nj; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(taus.size(), lo + chunk);
        if (lo >= hi)
          break;
        fs.push_back(std::async(std::launch::async,
                                [&, lo, hi]() { run_range(pass, lo, hi, &decs); }));
      }
      for (auto &f : fs)
        f.get();
    }

    for (std::size_t ti = 0; ti < taus.size(); ++ti) {
      const constancy_result &dec = decs[ti];
      v.max_depth = std::max(v.max_depth, dec.max_depth);
      bool bad = !dec.constant || !is_zero(dec.value);
      if (!bad)
        continue;
      v.equivalent = false;
      v.reason = neq_reason::constancy;
      v.trace = dec.trace;
      v.trace.prefix = "q=" + std::to_string(q) + ":" + tau_string(taus[ti]);
      if (opts.want_witness) {
        std::vector<assignment> cands;
        auto add_point = [&](const point_vec &pt) {
          assignment x = zero_assignment(c);
          for (std::uint32_t j = 0; j < c.n; ++j)
            x[j].u = interleave_u(a, pass.u1_blocks, pass.u2_blocks, taus[ti][j], pt[j]);
          cands.push_back(std::move(x));
        };
        if (!dec.constant) {
          std::optional<point_pair> pr = dec.pair;
          if (!pr) {
            auto [h1, h2] = pass.run(taus[ti]);
            pr = reconstruct_witness(dec, hat_merge(h1, hat_negated(h2)));
          }
          if (pr) {
            add_point(pr->first);
            add_point(pr->second);
          }
        } else {
          add_point(point_vec(c.n, zero_elem(pass.u2)));
        }
        v.witness = pick_verified(c, cands);
      }
      return v;
    }
  }
  v.equivalent = true;
  return v;
}

} // namespace

verdict check_equivalence(const circuit &c, check_mode mode, const check_options &opts) {
  check_mode m = validate_mode(*c.algebra, mode);
  return m == check_mode::coprime ? check_coprime(c, opts) : check_general(c, opts);
}

component_check check_component_constant(const circuit &c, std::uint64_t q) {
  const algebra_spec &a = *c.algebra;
  specialized_pass pass;
  pass.c = &c;
  for (std::size_t i = 0; i < a.l.size(); ++i)
    if (a.l[i].prime == q)
      pass.lq_blocks.push_back(i);
  if (pass.lq_blocks.empty())
    throw error(errc::usage, std::to_string(q) + " does not divide |L|");
  for (std::size_t i = 0; i < a.u.size(); ++i)
    (a.u[i].prime == q ? pass.u1_blocks : pass.u2_blocks).push_back(i);
  pass.u1 = a.u.select(pass.u1_blocks);
  pass.u2 = a.u.select(pass.u2_blocks);
  pass.lq = a.l.select(pass.lq_blocks);

  std::uint32_t s = 0;
  if (!pass.u1_blocks.empty())
    s = a.weight_bounds.at(q);
  auto taus = weight_bounded_tuples(pass.u1, c.n, s);

  component_check out;
  bool first = true;
  for (const auto &tau : taus) {
    auto [h1, h2] = pass.run(tau);
    hat_form hd = hat_merge(h1, hat_negated(h2));
    constancy_result dec = is_constant_coprime(hd, false);
    if (!dec.constant)
      return out;
    if (first) {
      out.value = dec.value;
      first = false;
    } else if (dec.value != out.value) {
      return out;
    }
  }
  out.constant = true;
  return out;
}

} // namespace ceqv
