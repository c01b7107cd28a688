#include "ceqv/wform.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <numeric>
#include <tuple>

namespace ceqv {

elem w_eval(const elem &a, const std::vector<std::vector<std::uint64_t>> &block_args) {
  for (const auto &g : block_args)
    for (std::uint64_t v : g)
      if (v != 0)
        return elem(a.size(), 0);
  return a;
}

elem odot(const shape &u, const std::vector<elem> &beta, const std::vector<elem> &x) {
  elem r = zero_elem(u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::uint64_t acc = 0;
    for (std::size_t j = 0; j < beta.size(); ++j)
      acc = (acc + beta[j][i] * x[j][i]) % u[i].mod;
    r[i] = acc;
  }
  return r;
}

elem eval_wterms(const shape &u, const shape &l, const std::vector<wterm> &ts,
                 const std::vector<elem> &x) {
  elem r = zero_elem(l);
  for (const auto &t : ts) {
    elem arg = add(u, odot(u, t.beta, x), t.shift);
    if (is_zero(arg))
      r = add(l, r, scale(l, t.mu, t.value));
  }
  return r;
}

namespace {

// Affine form over one block: coef . vars + cst.
struct aff {
  std::vector<std::uint64_t> coef;
  std::uint64_t cst = 0;
};

// Intermediate term of the expansion: mu * value when every affine form in
// every block evaluates to zero. Blocks may hold any number of forms; the
// reduction below brings each block down to at most one.
struct gterm {
  scalar mu;
  elem value;
  std::vector<std::vector<aff>> forms;
};

aff combine(std::uint64_t m, std::uint64_t ca, const aff &a, std::uint64_t cb,
            const aff &b, std::uint64_t cst) {
  aff r;
  r.coef.resize(a.coef.size());
  for (std::size_t j = 0; j < a.coef.size(); ++j)
    r.coef[j] = (ca * a.coef[j] + cb * b.coef[j]) % m;
  r.cst = (ca * a.cst + cb * b.cst + cst) % m;
  return r;
}

struct expand_ctx {
  shape u;
  shape l;
  std::uint32_t nvars = 0;
  // (prime, exponent, value rank) -> expansion of the residue table
  std::map<std::tuple<std::uint64_t, std::uint32_t, std::uint64_t>, std::vector<wterm>>
      residue_memo;
  std::vector<wterm> out;

  void finalize(const gterm &g);
  void reduce(gterm g);
  const std::vector<wterm> &residue_expansion(std::uint32_t p, std::uint32_t k,
                                              const elem &value);
};

void expand_ctx::finalize(const gterm &g) {
  if (is_zero(scale(l, g.mu, g.value)))
    return;
  wterm t;
  t.mu = g.mu;
  t.value = g.value;
  t.beta.assign(nvars, zero_elem(u));
  t.shift = zero_elem(u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (g.forms[i].empty())
      continue;
    const aff &f = g.forms[i][0];
    for (std::size_t j = 0; j < nvars; ++j)
      t.beta[j][i] = f.coef[j];
    t.shift[i] = f.cst;
  }
  out.push_back(std::move(t));
}

const std::vector<wterm> &expand_ctx::residue_expansion(std::uint32_t p, std::uint32_t k,
                                                        const elem &value) {
  auto key = std::make_tuple<std::uint64_t>(p, k, rank_of(l, value));
  auto it = residue_memo.find(key);
  if (it != residue_memo.end())
    return it->second;

  shape sub = shape::cyclic(p, k - 1);
  std::uint64_t q = 1;
  for (std::uint32_t i = 0; i < k; ++i)
    q *= p;
  std::uint64_t qp = q / p; // p^(k-1)

  // Table of the class-constant part of the double sum: the value at any
  // lift of (y1, y2), lifting the zero class away from the all-zero point.
  std::vector<elem> table(qp * qp);
  for (std::uint64_t y1 = 0; y1 < qp; ++y1)
    for (std::uint64_t y2 = 0; y2 < qp; ++y2) {
      std::uint64_t a = y1, b = y2;
      if (y1 == 0 && y2 == 0)
        a = qp;
      std::int64_t cnt = 0;
      for (std::uint64_t j = 0; j < q; ++j)
        if ((a + j * b) % q == 0)
          ++cnt;
      for (std::uint64_t j = 0; j < qp; ++j)
        if ((p * j * a + b) % q == 0)
          ++cnt;
      table[y1 * qp + y2] = scale(l, scalar_from_int(l, cnt), value);
    }

  auto res = expand_table(table, 2, sub, l);
  return residue_memo.emplace(key, std::move(res)).first->second;
}

void expand_ctx::reduce(gterm g0) {
  std::vector<gterm> work;
  work.push_back(std::move(g0));
  while (!work.empty()) {
    gterm g = std::move(work.back());
    work.pop_back();
    std::size_t bi = u.size();
    for (std::size_t i = 0; i < u.size(); ++i)
      if (g.forms[i].size() >= 2) {
        bi = i;
        break;
      }
    if (bi == u.size()) {
      finalize(g);
      continue;
    }
    std::uint32_t p = u[bi].prime;
    std::uint32_t k = u[bi].exp;
    std::uint64_t m = u[bi].mod;
    aff B = g.forms[bi].back();
    g.forms[bi].pop_back();
    aff A = g.forms[bi].back();
    g.forms[bi].pop_back();

    auto push_child = [&](const scalar &mu, const elem &value, const aff &f) {
      gterm c;
      c.mu = mu;
      c.value = value;
      c.forms = g.forms;
      c.forms[bi].push_back(f);
      work.push_back(std::move(c));
    };

    if (k == 1) {
      scalar nu = scalar_mul(l, g.mu, inverse_scalar(p, l));
      scalar neg_nu = scalar_neg(l, nu);
      for (std::uint64_t j = 0; j < p; ++j)
        push_child(nu, g.value, combine(m, 1, A, j, B, 0));
      for (std::uint64_t j = 1; j < p; ++j)
        push_child(neg_nu, g.value, combine(m, 0, A, 1, B, j));
    } else {
      scalar nu = scalar_mul(l, g.mu, inverse_scalar(m, l));
      scalar neg_nu = scalar_neg(l, nu);
      for (std::uint64_t j = 0; j < m; ++j)
        push_child(nu, g.value, combine(m, 1, A, j, B, 0));
      for (std::uint64_t j = 0; j < m / p; ++j)
        push_child(nu, g.value, combine(m, (p * j) % m, A, 1, B, 0));
      for (const wterm &rt : residue_expansion(p, k, g.value)) {
        std::uint64_t b1 = (p * rt.beta[0][0]) % m;
        std::uint64_t b2 = (p * rt.beta[1][0]) % m;
        std::uint64_t cc = (p * rt.shift[0]) % m;
        push_child(scalar_mul(l, neg_nu, rt.mu), rt.value, combine(m, b1, A, b2, B, cc));
      }
    }
  }
}

} // namespace

std::vector<wterm> expand_table(const std::vector<elem> &table, std::uint32_t arity,
                                const shape &u, const shape &l) {
  if (std::gcd(u.order(), l.order()) != 1)
    throw error(errc::not_coprime, "table expansion needs |U|, |L| coprime");
  std::uint64_t expect = 1;
  for (std::uint32_t i = 0; i < arity; ++i)
    expect *= u.order();
  if (table.size() != expect)
    throw error(errc::table_size, "expected " + std::to_string(expect) + " entries, got " +
                                      std::to_string(table.size()));

  expand_ctx ctx;
  ctx.u = u;
  ctx.l = l;
  ctx.nvars = arity;

  std::vector<elem> args(arity, zero_elem(u));
  for (std::uint64_t idx = 0; idx < expect; ++idx) {
    if (!is_zero(table[idx])) {
      gterm g;
      g.mu = one_scalar(l);
      g.value = table[idx];
      g.forms.resize(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) {
        for (std::uint32_t j = 0; j < arity; ++j) {
          aff f;
          f.coef.assign(arity, 0);
          f.coef[j] = u[i].mod > 1 ? 1 : 0;
          f.cst = (u[i].mod - args[j][i]) % u[i].mod;
          g.forms[i].push_back(std::move(f));
        }
      }
      ctx.reduce(std::move(g));
    }
    // advance the argument tuple, last argument fastest
    for (std::size_t j = arity; j-- > 0;) {
      if (next_elem(u, args[j]))
        break;
    }
  }
  return std::move(ctx.out);
}

namespace {

std::vector<std::uint64_t> flat_beta(const std::vector<elem> &beta, std::size_t m) {
  std::vector<std::uint64_t> key;
  key.reserve(beta.size() * m);
  for (const auto &b : beta)
    for (std::size_t i = 0; i < m; ++i)
      key.push_back(b[i]);
  return key;
}

std::vector<elem> unflat_beta(const std::vector<std::uint64_t> &key, std::size_t n,
                              std::size_t m) {
  std::vector<elem> beta(n, elem(m));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i)
      beta[j][i] = key[j * m + i];
  return beta;
}

bool table_constant(const std::vector<elem> &mf) {
  for (std::size_t r = 1; r < mf.size(); ++r)
    if (mf[r] != mf[0])
      return false;
  return true;
}

void fold_sorted(hat_form &out, std::map<std::vector<std::uint64_t>, std::vector<elem>> &acc) {
  for (auto &[key, mf] : acc) {
    if (table_constant(mf)) {
      out.const_l = add(out.l, out.const_l, mf[0]);
      continue;
    }
    // anchor the table at zero so equal terms cancel exactly on merge
    if (!is_zero(mf[0])) {
      elem off = mf[0];
      out.const_l = add(out.l, out.const_l, off);
      for (auto &v : mf)
        v = sub(out.l, v, off);
    }
    mterm t;
    t.beta = unflat_beta(key, out.n, out.u.size());
    t.mfun = std::move(mf);
    out.terms.push_back(std::move(t));
  }
}

} // namespace

hat_form renormalize(const hat_form &h) {
  hat_form out(h.n, h.u, h.l);
  out.const_l = h.const_l;
  std::size_t m = h.u.size();
  std::uint64_t uord = h.u.order();
  std::map<std::vector<std::uint64_t>, std::vector<elem>> acc;

  for (const mterm &t : h.terms) {
    // factor out the largest common prime power per block
    elem d(m, 0);
    std::vector<std::uint32_t> val(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
      std::uint32_t p = h.u[i].prime, k = h.u[i].exp;
      std::uint32_t best = k;
      for (std::size_t j = 0; j < t.beta.size() && best > 0; ++j) {
        std::uint64_t v = t.beta[j][i];
        if (v == 0)
          continue;
        std::uint32_t e = 0;
        while (v % p == 0) {
          v /= p;
          ++e;
        }
        best = std::min(best, e);
      }
      val[i] = best;
      if (best == k)
        d[i] = 0;
      else {
        std::uint64_t pw = 1;
        for (std::uint32_t e = 0; e < best; ++e)
          pw *= p;
        d[i] = pw;
      }
    }

    std::vector<elem> mf(uord);
    elem z = zero_elem(h.u);
    std::uint64_t r = 0;
    do {
      elem dz(m);
      for (std::size_t i = 0; i < m; ++i)
        dz[i] = (d[i] * z[i]) % h.u[i].mod;
      mf[r] = t.mfun[rank_of(h.u, dz)];
      ++r;
    } while (next_elem(h.u, z));

    if (table_constant(mf)) {
      out.const_l = add(out.l, out.const_l, mf[0]);
      continue;
    }

    std::vector<elem> beta2(t.beta.size(), elem(m));
    for (std::size_t i = 0; i < m; ++i) {
      if (d[i] == 0) {
        beta2[0][i] = h.u[i].mod > 1 ? 1 : 0;
        for (std::size_t j = 1; j < t.beta.size(); ++j)
          beta2[j][i] = 0;
      } else {
        for (std::size_t j = 0; j < t.beta.size(); ++j)
          beta2[j][i] = t.beta[j][i] / d[i];
      }
    }

    auto key = flat_beta(beta2, m);
    auto it = acc.find(key);
    if (it == acc.end())
      acc.emplace(std::move(key), std::move(mf));
    else
      for (std::uint64_t rr = 0; rr < uord; ++rr)
        it->second[rr] = add(h.l, it->second[rr], mf[rr]);
  }

  fold_sorted(out, acc);
  return out;
}

hat_form normalize(const std::vector<wterm> &ts, std::uint32_t n, const shape &u,
                   const shape &l) {
  hat_form raw(n, u, l);
  std::uint64_t uord = u.order();
  for (const wterm &w : ts) {
    if (w.beta.size() != n)
      throw error(errc::shape_mismatch, "wterm arity mismatch");
    elem v = scale(l, w.mu, w.value);
    if (is_zero(v))
      continue;
    mterm t;
    t.beta = w.beta;
    t.mfun.assign(uord, zero_elem(l));
    elem z = zero_elem(u);
    std::uint64_t r = 0;
    do {
      bool hit = true;
      for (std::size_t i = 0; i < u.size() && hit; ++i)
        hit = (z[i] + w.shift[i]) % u[i].mod == 0;
      if (hit)
        t.mfun[r] = v;
      ++r;
    } while (next_elem(u, z));
    raw.terms.push_back(std::move(t));
  }
  return renormalize(raw);
}

elem hat_eval(const hat_form &h, const std::vector<elem> &x) {
  if (x.size() != h.n)
    throw error(errc::shape_mismatch, "assignment arity mismatch");
  elem r = h.const_l;
  for (const mterm &t : h.terms)
    r = add(h.l, r, t.mfun[rank_of(h.u, odot(h.u, t.beta, x))]);
  return r;
}

elem hat_at_zero(const hat_form &h) {
  elem r = h.const_l;
  for (const mterm &t : h.terms)
    r = add(h.l, r, t.mfun[0]);
  return r;
}

hat_form hat_merge(const hat_form &a, const hat_form &b) {
  if (a.n != b.n || a.u != b.u || a.l != b.l)
    throw error(errc::shape_mismatch, "cannot merge forms over different domains");
  hat_form out(a.n, a.u, a.l);
  out.const_l = add(a.l, a.const_l, b.const_l);
  std::size_t m = a.u.size();
  std::size_t ia = 0, ib = 0;
  auto push = [&](const mterm &t) { out.terms.push_back(t); };
  while (ia < a.terms.size() || ib < b.terms.size()) {
    if (ib == b.terms.size()) {
      push(a.terms[ia++]);
      continue;
    }
    if (ia == a.terms.size()) {
      push(b.terms[ib++]);
      continue;
    }
    auto ka = flat_beta(a.terms[ia].beta, m);
    auto kb = flat_beta(b.terms[ib].beta, m);
    if (ka < kb) {
      push(a.terms[ia++]);
    } else if (kb < ka) {
      push(b.terms[ib++]);
    } else {
      mterm t = a.terms[ia++];
      const mterm &o = b.terms[ib++];
      for (std::size_t r = 0; r < t.mfun.size(); ++r)
        t.mfun[r] = add(a.l, t.mfun[r], o.mfun[r]);
      if (table_constant(t.mfun)) {
        out.const_l = add(a.l, out.const_l, t.mfun[0]);
        continue;
      }
      out.terms.push_back(std::move(t));
    }
  }
  return out;
}

hat_form hat_scaled(const hat_form &h, const scalar &c) {
  hat_form out(h.n, h.u, h.l);
  out.const_l = scale(h.l, c, h.const_l);
  for (const mterm &t : h.terms) {
    mterm s;
    s.beta = t.beta;
    s.mfun.reserve(t.mfun.size());
    for (const elem &v : t.mfun)
      s.mfun.push_back(scale(h.l, c, v));
    if (table_constant(s.mfun)) {
      out.const_l = add(h.l, out.const_l, s.mfun[0]);
      continue;
    }
    out.terms.push_back(std::move(s));
  }
  return out;
}

hat_form hat_negated(const hat_form &h) {
  return hat_scaled(h, scalar_from_int(h.l, -1));
}

hat_form fix_slot(const hat_form &h, std::uint32_t j, const elem &a) {
  if (j >= h.n)
    throw error(errc::shape_mismatch, "slot out of range");
  hat_form mid(h.n, h.u, h.l);
  mid.const_l = h.const_l;
  std::size_t m = h.u.size();
  for (const mterm &t : h.terms) {
    mterm s;
    s.beta = t.beta;
    elem delta(m);
    for (std::size_t i = 0; i < m; ++i) {
      delta[i] = (t.beta[j][i] * a[i]) % h.u[i].mod;
      s.beta[j][i] = 0;
    }
    s.mfun.resize(t.mfun.size());
    elem z = zero_elem(h.u);
    std::uint64_t r = 0;
    do {
      s.mfun[r] = t.mfun[rank_of(h.u, add(h.u, z, delta))];
      ++r;
    } while (next_elem(h.u, z));
    mid.terms.push_back(std::move(s));
  }
  return renormalize(mid);
}

std::size_t term_count(const hat_form &h) { return h.terms.size(); }

} // namespace ceqv
