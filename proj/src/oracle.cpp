#include "ceqv/oracle.hpp"

#include <algorithm>
#include <future>
#include <sstream>

namespace ceqv {

namespace {

std::uint64_t checked_pow(std::uint64_t base, std::uint32_t e, std::uint64_t bound) {
  std::uint64_t r = 1;
  while (e--) {
    if (base != 0 && r > bound / base)
      return bound + 1;
    r *= base;
  }
  return r;
}

} // namespace

oracle_verdict oracle_equivalent(const circuit &c, std::uint64_t bound) {
  const algebra_spec &a = *c.algebra;
  std::uint64_t asize = a.l.order() * a.u.order();
  std::uint64_t total = checked_pow(asize, c.n, bound);
  if (total > bound)
    throw error(errc::too_large, "|A|^n exceeds the oracle bound");

  // rank tables per op where affordable, else direct evaluation
  std::vector<std::vector<std::uint32_t>> tables(a.ops.size());
  std::vector<pairval> by_rank(asize);
  for (std::uint64_t r = 0; r < asize; ++r)
    by_rank[r] = {elem_from_rank(a.l, r / a.u.order()),
                  elem_from_rank(a.u, r % a.u.order())};
  for (std::size_t oi = 0; oi < a.ops.size(); ++oi) {
    const basic_op &op = a.ops[oi];
    std::uint64_t tsize = checked_pow(asize, op.arity, 1u << 22);
    if (tsize > (1u << 22))
      continue;
    std::vector<std::uint32_t> tbl(tsize);
    std::vector<pairval> args(op.arity);
    std::vector<std::uint64_t> ranks(op.arity, 0);
    for (std::uint64_t idx = 0; idx < tsize; ++idx) {
      for (std::uint32_t j = 0; j < op.arity; ++j)
        args[j] = by_rank[ranks[j]];
      pairval v = eval_basic_op(a, op, args);
      tbl[idx] = static_cast<std::uint32_t>(rank_of(a.l, v.l) * a.u.order() +
                                            rank_of(a.u, v.u));
      for (std::size_t j = op.arity; j-- > 0;) {
        if (++ranks[j] < asize)
          break;
        ranks[j] = 0;
      }
    }
    tables[oi] = std::move(tbl);
  }

  std::vector<std::uint64_t> vr(c.n, 0);
  std::vector<std::uint64_t> gval(c.gates.size());
  for (std::uint64_t ai = 0; ai < total; ++ai) {
    for (std::size_t gi = 0; gi < c.gates.size(); ++gi) {
      const gate &g = c.gates[gi];
      switch (g.k) {
      case gate::kind::input:
        gval[gi] = vr[g.input_index - 1];
        break;
      case gate::kind::constant:
        gval[gi] = rank_of(a.l, g.cval.l) * a.u.order() + rank_of(a.u, g.cval.u);
        break;
      case gate::kind::op: {
        const basic_op &op = a.ops[g.op_index];
        if (!tables[g.op_index].empty()) {
          std::uint64_t idx = 0;
          for (std::uint32_t ch : g.children)
            idx = idx * asize + gval[ch];
          gval[gi] = tables[g.op_index][idx];
        } else {
          std::vector<pairval> args;
          args.reserve(op.arity);
          for (std::uint32_t ch : g.children)
            args.push_back(by_rank[gval[ch]]);
          pairval v = eval_basic_op(a, op, args);
          gval[gi] = rank_of(a.l, v.l) * a.u.order() + rank_of(a.u, v.u);
        }
        break;
      }
      }
    }
    if (gval[c.out1] != gval[c.out2]) {
      oracle_verdict v;
      v.equivalent = false;
      assignment x(c.n);
      for (std::uint32_t j = 0; j < c.n; ++j)
        x[j] = by_rank[vr[j]];
      v.witness = std::move(x);
      return v;
    }
    for (std::size_t j = c.n; j-- > 0;) {
      if (++vr[j] < asize)
        break;
      vr[j] = 0;
    }
  }
  return {true, std::nullopt};
}

oracle_constancy oracle_constant(const hat_form &h, std::uint64_t bound) {
  std::uint64_t total = checked_pow(h.u.order(), h.n, bound);
  if (total > bound)
    throw error(errc::too_large, "|U|^n exceeds the oracle bound");
  oracle_constancy r;
  std::vector<elem> x(h.n, zero_elem(h.u));
  r.value = hat_eval(h, x);
  std::vector<elem> cur = x;
  for (std::uint64_t i = 1; i < total; ++i) {
    for (std::size_t j = h.n; j-- > 0;)
      if (next_elem(h.u, cur[j]))
        break;
    elem v = hat_eval(h, cur);
    if (v != r.value) {
      r.constant = false;
      r.x = x;
      r.y = cur;
      return r;
    }
  }
  r.constant = true;
  return r;
}

std::uint64_t count_E(const shape &u, const std::vector<elem> &beta, std::size_t j,
                      const std::vector<elem> &x, std::uint64_t m, std::uint64_t bound) {
  std::size_t n = beta.size();
  std::uint64_t mod = u[j].mod;
  std::uint64_t total = checked_pow(mod, static_cast<std::uint32_t>(n), bound);
  if (total > bound)
    throw error(errc::too_large, "enumeration exceeds the bound");
  std::uint64_t base = 0;
  for (std::size_t t = 0; t < n; ++t)
    base = (base + beta[t][j] * x[t][j]) % mod;
  std::uint64_t target = (base + m) % mod;
  std::uint64_t cnt = 0;
  std::vector<std::uint64_t> xs(n, 0);
  for (std::uint64_t i = 0; i < total; ++i) {
    std::uint64_t acc = 0;
    for (std::size_t t = 0; t < n; ++t)
      acc = (acc + beta[t][j] * xs[t]) % mod;
    if (acc == target)
      ++cnt;
    for (std::size_t t = n; t-- > 0;) {
      if (++xs[t] < mod)
        break;
      xs[t] = 0;
    }
  }
  return cnt;
}

std::string fuzz_report::summary_line() const {
  std::ostringstream os;
  os << "FUZZ seed=" << seed << " total=" << total << " agree=" << agree
     << " disagree=" << disagreements.size();
  return os.str();
}

namespace {

struct rng_stream {
  std::mt19937_64 g;
  explicit rng_stream(std::uint64_t seed) : g(seed) {}
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : g() % n; }
};

elem random_elem(rng_stream &r, const shape &s) {
  elem e(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    e[i] = r.below(s[i].mod);
  return e;
}

// Appends a structural copy of the cone of `root`, returns the copy's root.
std::uint32_t clone_cone(circuit &c, std::uint32_t root) {
  std::vector<std::int64_t> map(c.gates.size(), -1);
  std::vector<std::uint32_t> order;
  std::vector<std::uint32_t> stack{root};
  std::vector<bool> seen(c.gates.size(), false);
  while (!stack.empty()) {
    std::uint32_t g = stack.back();
    stack.pop_back();
    if (seen[g])
      continue;
    seen[g] = true;
    order.push_back(g);
    for (std::uint32_t ch : c.gates[g].children)
      stack.push_back(ch);
  }
  std::sort(order.begin(), order.end());
  for (std::uint32_t g : order) {
    gate ng = c.gates[g];
    for (auto &ch : ng.children)
      ch = static_cast<std::uint32_t>(map[ch]);
    map[g] = static_cast<std::int64_t>(c.gates.size());
    c.gates.push_back(std::move(ng));
    c.gate_names.push_back("c" + std::to_string(c.gates.size() - 1));
  }
  return static_cast<std::uint32_t>(map[root]);
}

} // namespace

circuit random_circuit(const algebra_spec &a, std::uint64_t seed, std::uint32_t max_n,
                       std::uint32_t max_gates, std::uint32_t const_weight) {
  rng_stream r(seed * 0x9e3779b97f4a7c15ULL + 0x2545F4914F6CDD1DULL);
  circuit c;
  c.algebra = &a;
  c.name = "F" + std::to_string(seed);
  c.n = max_n == 0 ? 0 : 1 + static_cast<std::uint32_t>(r.below(max_n));
  for (std::uint32_t j = 0; j < c.n; ++j) {
    gate g;
    g.k = gate::kind::input;
    g.input_index = j + 1;
    c.gates.push_back(g);
    c.gate_names.push_back("g" + std::to_string(c.gates.size()));
  }
  std::uint32_t extra = 1 + static_cast<std::uint32_t>(r.below(max_gates));
  for (std::uint32_t t = 0; t < extra; ++t) {
    gate g;
    bool make_const = c.gates.empty() || r.below(100) < const_weight || a.ops.empty();
    if (make_const) {
      g.k = gate::kind::constant;
      g.cval = {random_elem(r, a.l), random_elem(r, a.u)};
    } else {
      g.k = gate::kind::op;
      g.op_index = static_cast<std::uint32_t>(r.below(a.ops.size()));
      for (std::uint32_t ci = 0; ci < a.ops[g.op_index].arity; ++ci)
        g.children.push_back(static_cast<std::uint32_t>(r.below(c.gates.size())));
    }
    c.gates.push_back(std::move(g));
    c.gate_names.push_back("g" + std::to_string(c.gates.size()));
  }

  c.out1 = static_cast<std::uint32_t>(r.below(c.gates.size()));
  std::uint64_t style = r.below(3);
  if (style == 0) {
    c.out2 = static_cast<std::uint32_t>(r.below(c.gates.size()));
  } else {
    std::uint32_t before = static_cast<std::uint32_t>(c.gates.size());
    c.out2 = clone_cone(c, c.out1);
    if (style == 2) {
      // one mutation inside the copy
      std::vector<std::uint32_t> copies;
      for (std::size_t gi = before; gi < c.gates.size(); ++gi)
        copies.push_back(static_cast<std::uint32_t>(gi));
      std::uint32_t g = copies[r.below(copies.size())];
      gate &mg = c.gates[g];
      switch (mg.k) {
      case gate::kind::input:
        if (c.n > 0)
          mg.input_index = 1 + static_cast<std::uint32_t>(r.below(c.n));
        break;
      case gate::kind::constant:
        mg.cval = {random_elem(r, a.l), random_elem(r, a.u)};
        break;
      case gate::kind::op:
        if (mg.children.size() >= 2 && r.below(2) == 0) {
          std::swap(mg.children[0], mg.children[mg.children.size() - 1]);
        } else {
          std::vector<std::uint32_t> same;
          for (std::size_t oi = 0; oi < a.ops.size(); ++oi)
            if (a.ops[oi].arity == mg.children.size())
              same.push_back(static_cast<std::uint32_t>(oi));
          mg.op_index = same[r.below(same.size())];
        }
        break;
      }
    }
  }
  return c;
}

namespace {

// Removes gate `victim` (op or const), rewiring references to `repl`.
circuit drop_gate(const circuit &c, std::uint32_t victim, std::uint32_t repl) {
  circuit r;
  r.algebra = c.algebra;
  r.name = c.name;
  r.n = c.n;
  std::vector<std::uint32_t> map(c.gates.size());
  for (std::uint32_t gi = 0; gi < c.gates.size(); ++gi) {
    if (gi == victim) {
      map[gi] = map[repl];
      continue;
    }
    gate g = c.gates[gi];
    for (auto &ch : g.children)
      ch = map[ch];
    map[gi] = static_cast<std::uint32_t>(r.gates.size());
    r.gates.push_back(std::move(g));
    r.gate_names.push_back(c.gate_names[gi]);
  }
  r.out1 = map[c.out1];
  r.out2 = map[c.out2];
  return r;
}

struct instance_result {
  bool skipped = false;
  bool agree = true;
  verdict ver;
  oracle_verdict ora;
  std::uint32_t witnesses = 0, invalid = 0;
  circuit circ;
};

instance_result run_instance(const algebra_spec &a, const fuzz_config &cfg,
                             std::uint32_t idx, const checker_fn &checker) {
  instance_result res;
  res.circ = random_circuit(a, cfg.seed + idx, cfg.max_n, cfg.max_gates, cfg.const_weight);
  check_options opts;
  opts.want_witness = true;
  try {
    res.ora = oracle_equivalent(res.circ, cfg.oracle_bound);
  } catch (const error &e) {
    if (e.code() == errc::too_large) {
      res.skipped = true;
      return res;
    }
    throw;
  }
  res.ver = checker ? checker(res.circ, cfg.mode, opts)
                    : check_equivalence(res.circ, cfg.mode, opts);
  res.agree = res.ver.equivalent == res.ora.equivalent;
  if (!res.ver.equivalent && res.ver.witness) {
    ++res.witnesses;
    auto [o1, o2] = eval_circuit(res.circ, *res.ver.witness);
    if (o1 == o2)
      ++res.invalid;
  }
  return res;
}

} // namespace

fuzz_report fuzz(const algebra_spec &a, const fuzz_config &cfg, const checker_fn &checker) {
  fuzz_report rep;
  rep.seed = cfg.seed;
  rep.total = cfg.count;

  std::vector<instance_result> results(cfg.count);
  auto run_range = [&](std::uint32_t lo, std::uint32_t hi) {
    for (std::uint32_t i = lo; i < hi; ++i)
      results[i] = run_instance(a, cfg, i, checker);
  };
  int jobs = std::max(1, cfg.jobs);
  if (jobs <= 1 || cfg.count < 2) {
    run_range(0, cfg.count);
  } else {
    std::uint32_t nj = std::min<std::uint32_t>(jobs, cfg.count);
    std::uint32_t chunk = (cfg.count + nj - 1) / nj;
    std::vector<std::future<void>> fs;
    for (std::uint32_t w = 0; w < nj; ++w) {
      std::uint32_t lo = w * chunk, hi = std::min(cfg.count, lo + chunk);
      if (lo >= hi)
        break;
      fs.push_back(std::async(std::launch::async, run_range, lo, hi));
    }
    for (auto &f : fs)
      f.get();
  }

  for (std::uint32_t i = 0; i < cfg.count; ++i) {
    instance_result &res = results[i];
    if (res.skipped) {
      ++rep.skipped;
      ++rep.agree; // skipped instances do not count against agreement
      continue;
    }
    rep.max_depth = std::max(rep.max_depth, res.ver.max_depth);
    rep.witnesses_emitted += res.witnesses;
    rep.witnesses_invalid += res.invalid;
    if (res.agree) {
      ++rep.agree;
      continue;
    }
    // shrink: drop op/const gates while the disagreement persists
    circuit cur = res.circ;
    bool changed = true;
    auto disagrees = [&](const circuit &cc) {
      try {
        oracle_verdict o = oracle_equivalent(cc, cfg.oracle_bound);
        check_options opts;
        verdict v = checker ? checker(cc, cfg.mode, opts)
                            : check_equivalence(cc, cfg.mode, opts);
        return v.equivalent != o.equivalent;
      } catch (const error &) {
        return false;
      }
    };
    while (changed) {
      changed = false;
      for (std::uint32_t gi = 0; gi < cur.gates.size(); ++gi) {
        const gate &g = cur.gates[gi];
        if (g.k != gate::kind::op || g.children.empty())
          continue;
        circuit cand = drop_gate(cur, gi, g.children[0]);
        if (disagrees(cand)) {
          cur = std::move(cand);
          changed = true;
          break;
        }
      }
    }
    disagreement d;
    d.instance = i;
    d.circuit_text = serialize_circuit(cur);
    d.checker_line = res.ver.machine_line();
    d.oracle_line = res.ora.equivalent ? "EQUIVALENT" : "NOT_EQUIVALENT";
    rep.disagreements.push_back(std::move(d));
  }
  return rep;
}

wbound_report validate_weight_bound(const algebra_spec &a, std::uint64_t seed,
                                    std::uint32_t count, std::uint32_t max_n,
                                    std::uint32_t max_gates) {
  validate_mode(a, check_mode::general);
  wbound_report rep;
  std::vector<std::uint64_t> primes;
  for (const auto &b : a.l)
    if (std::find(primes.begin(), primes.end(), b.prime) == primes.end())
      primes.push_back(b.prime);
  std::sort(primes.begin(), primes.end());

  for (std::uint32_t i = 0; i < count; ++i) {
    circuit c = random_circuit(a, seed + i, max_n, max_gates, 20);
    std::uint64_t pts = checked_pow(a.u.order(), c.n, oracle_default_bound);
    if (pts > oracle_default_bound)
      continue;
    for (std::uint64_t q : primes) {
      std::vector<std::size_t> lq;
      for (std::size_t b = 0; b < a.l.size(); ++b)
        if (a.l[b].prime == q)
          lq.push_back(b);

      // ground truth: hat difference values over all U-assignments
      bool truth_const = true;
      elem truth_val;
      assignment x(c.n, pairval{zero_elem(a.l), zero_elem(a.u)});
      for (std::uint64_t r = 0; r < pts; ++r) {
        auto [o1, o2] = eval_circuit(c, x);
        elem diff(lq.size());
        for (std::size_t t = 0; t < lq.size(); ++t)
          diff[t] = (o1.l[lq[t]] + a.l[lq[t]].mod - o2.l[lq[t]]) % a.l[lq[t]].mod;
        if (r == 0) {
          truth_val = diff;
        } else if (diff != truth_val) {
          truth_const = false;
          break;
        }
        for (std::size_t j = c.n; j-- > 0;)
          if (next_elem(a.u, x[j].u))
            break;
      }

      component_check guess = check_component_constant(c, q);
      ++rep.total;
      bool bad = guess.constant != truth_const ||
                 (guess.constant && guess.value != truth_val);
      if (bad) {
        ++rep.violations;
        rep.notes.push_back("instance " + std::to_string(i) + " q=" + std::to_string(q) +
                            ": criterion says " + (guess.constant ? "constant" : "varying") +
                            ", enumeration says " + (truth_const ? "constant" : "varying"));
      }
    }
  }
  return rep;
}

} // namespace ceqv
