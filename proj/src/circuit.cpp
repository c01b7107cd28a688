#include "ceqv/circuit.hpp"

#include <map>
#include <sstream>

namespace ceqv {

namespace {

std::vector<std::string> split_ws(const std::string &line) {
  std::istringstream is(line);
  std::vector<std::string> t;
  std::string s;
  while (is >> s)
    t.push_back(s);
  return t;
}

elem project(const elem &e, const std::vector<std::size_t> &idx) {
  elem r(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    r[i] = e[idx[i]];
  return r;
}

} // namespace

circuit parse_circuit(const std::string &text, const algebra_spec &a) {
  circuit c;
  c.algebra = &a;
  std::istringstream is(text);
  std::string line;
  int ln = 0;
  bool saw_header = false, saw_outputs = false;
  std::map<std::string, std::uint32_t> by_name;

  auto resolve = [&](const std::string &nm, int at) -> std::uint32_t {
    auto it = by_name.find(nm);
    if (it == by_name.end())
      throw error(errc::dangling_ref, "gate '" + nm + "' is not defined here", at);
    return it->second;
  };

  while (std::getline(is, line)) {
    ++ln;
    auto hash = line.find('#');
    if (hash != std::string::npos)
      line.resize(hash);
    auto t = split_ws(line);
    if (t.empty())
      continue;
    if (!saw_header) {
      if (t.size() != 6 || t[0] != "circuit" || t[2] != "over" || t[4] != "vars")
        throw error(errc::syntax, "expected 'circuit NAME over ALG vars N'", ln);
      c.name = t[1];
      if (t[3] != a.name)
        throw error(errc::syntax,
                    "circuit is over '" + t[3] + "' but algebra '" + a.name + "' was loaded",
                    ln);
      try {
        c.n = static_cast<std::uint32_t>(std::stoul(t[5]));
      } catch (const std::exception &) {
        throw error(errc::syntax, "bad variable count '" + t[5] + "'", ln);
      }
      saw_header = true;
      continue;
    }
    if (t[0] == "outputs") {
      if (t.size() != 3)
        throw error(errc::syntax, "expected 'outputs G1 G2'", ln);
      c.out1 = resolve(t[1], ln);
      c.out2 = resolve(t[2], ln);
      saw_outputs = true;
      continue;
    }
    if (t.size() < 3 || t[1] != "=")
      throw error(errc::syntax, "expected 'NAME = ...'", ln);
    if (by_name.count(t[0]))
      throw error(errc::syntax, "gate '" + t[0] + "' redefined", ln);
    gate g;
    if (t[2] == "input") {
      if (t.size() != 4)
        throw error(errc::syntax, "expected 'input I'", ln);
      unsigned long i = 0;
      try {
        i = std::stoul(t[3]);
      } catch (const std::exception &) {
        throw error(errc::syntax, "bad input index '" + t[3] + "'", ln);
      }
      if (i < 1 || i > c.n)
        throw error(errc::syntax, "input index " + t[3] + " out of range 1.." +
                                      std::to_string(c.n),
                    ln);
      g.k = gate::kind::input;
      g.input_index = static_cast<std::uint32_t>(i);
    } else if (t[2] == "const") {
      if (t.size() != 4)
        throw error(errc::syntax, "expected 'const ((..)|(..))'", ln);
      g.k = gate::kind::constant;
      try {
        g.cval = parse_pairval(t[3], a.l, a.u);
      } catch (const error &e) {
        throw error(errc::bad_constant, e.what(), ln);
      }
    } else {
      int oi = a.find_index(t[2]);
      if (oi < 0)
        throw error(errc::unknown_op, "op '" + t[2] + "' is not in algebra " + a.name, ln);
      g.k = gate::kind::op;
      g.op_index = static_cast<std::uint32_t>(oi);
      if (t.size() - 3 != a.ops[oi].arity)
        throw error(errc::arity_mismatch,
                    "op '" + t[2] + "' wants " + std::to_string(a.ops[oi].arity) +
                        " children, got " + std::to_string(t.size() - 3),
                    ln);
      for (std::size_t j = 3; j < t.size(); ++j)
        g.children.push_back(resolve(t[j], ln));
    }
    by_name[t[0]] = static_cast<std::uint32_t>(c.gates.size());
    c.gates.push_back(std::move(g));
    c.gate_names.push_back(t[0]);
  }
  if (!saw_header)
    throw error(errc::syntax, "missing circuit header");
  if (!saw_outputs)
    throw error(errc::dangling_ref, "missing outputs line");
  return c;
}

std::string serialize_circuit(const circuit &c) {
  std::ostringstream os;
  os << "circuit " << (c.name.empty() ? "C" : c.name) << " over " << c.algebra->name
     << " vars " << c.n << "\n";
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const gate &g = c.gates[i];
    os << c.gate_names[i] << " = ";
    switch (g.k) {
    case gate::kind::input:
      os << "input " << g.input_index;
      break;
    case gate::kind::constant:
      os << "const " << format_pairval(g.cval);
      break;
    case gate::kind::op:
      os << c.algebra->ops[g.op_index].name;
      for (std::uint32_t ch : g.children)
        os << ' ' << c.gate_names[ch];
      break;
    }
    os << "\n";
  }
  os << "outputs " << c.gate_names[c.out1] << ' ' << c.gate_names[c.out2] << "\n";
  return os.str();
}

std::pair<pairval, pairval> eval_circuit(const circuit &c, const assignment &x) {
  if (x.size() != c.n)
    throw error(errc::shape_mismatch, "assignment has " + std::to_string(x.size()) +
                                          " values, circuit has " + std::to_string(c.n));
  const algebra_spec &a = *c.algebra;
  std::vector<pairval> vals(c.gates.size());
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const gate &g = c.gates[i];
    switch (g.k) {
    case gate::kind::input:
      vals[i] = x[g.input_index - 1];
      break;
    case gate::kind::constant:
      vals[i] = g.cval;
      break;
    case gate::kind::op: {
      std::vector<pairval> args;
      args.reserve(g.children.size());
      for (std::uint32_t ch : g.children)
        args.push_back(vals[ch]);
      vals[i] = eval_basic_op(a, a.ops[g.op_index], args);
      break;
    }
    }
  }
  return {vals[c.out1], vals[c.out2]};
}

pairval eval_gate(const circuit &c, std::uint32_t gidx, const assignment &x) {
  circuit tmp = c;
  tmp.out1 = tmp.out2 = gidx;
  return eval_circuit(tmp, x).first;
}

compile_env compile_env::plain(const algebra_spec &a) {
  compile_env env;
  env.u = a.u;
  env.l = a.l;
  env.u_blocks.resize(a.u.size());
  env.l_blocks.resize(a.l.size());
  for (std::size_t i = 0; i < a.u.size(); ++i)
    env.u_blocks[i] = i;
  for (std::size_t i = 0; i < a.l.size(); ++i)
    env.l_blocks[i] = i;
  return env;
}

std::vector<canonical_form> compile_gates(const circuit &c, const compile_env &env) {
  const algebra_spec &a = *c.algebra;
  std::vector<canonical_form> forms(c.gates.size());
  for (std::size_t gi = 0; gi < c.gates.size(); ++gi) {
    const gate &g = c.gates[gi];
    canonical_form f;
    f.n = c.n;
    f.lambda.assign(c.n, zero_scalar(env.l));
    f.alpha.assign(c.n, zero_scalar(env.u));
    f.u_const = zero_elem(env.u);
    f.hat = hat_form(c.n, env.u, env.l);
    switch (g.k) {
    case gate::kind::input:
      f.lambda[g.input_index - 1] = one_scalar(env.l);
      f.alpha[g.input_index - 1] = one_scalar(env.u);
      break;
    case gate::kind::constant:
      f.hat.const_l = project(g.cval.l, env.l_blocks);
      f.u_const = project(g.cval.u, env.u_blocks);
      break;
    case gate::kind::op: {
      const basic_op &op = a.ops[g.op_index];
      for (std::uint32_t ci = 0; ci < op.arity; ++ci) {
        const canonical_form &ch = forms[g.children[ci]];
        scalar lam = project(op.l_scalars[ci], env.l_blocks);
        scalar alf = project(op.u_scalars[ci], env.u_blocks);
        for (std::uint32_t j = 0; j < c.n; ++j) {
          f.lambda[j] = scalar_add(env.l, f.lambda[j], scalar_mul(env.l, lam, ch.lambda[j]));
          f.alpha[j] = scalar_add(env.u, f.alpha[j], scalar_mul(env.u, alf, ch.alpha[j]));
        }
        f.u_const = add(env.u, f.u_const, scale(env.u, alf, ch.u_const));
        if (!is_zero(lam))
          f.hat = hat_merge(f.hat, hat_scaled(ch.hat, lam));
      }
      f.u_const = add(env.u, f.u_const, project(op.u_const, env.u_blocks));

      // instantiate the op's own hat on the children's affine U-parts
      std::vector<wterm> inst;
      for (const wterm &t : env.hat_of(static_cast<std::uint32_t>(gi))) {
        wterm w;
        w.mu = t.mu;
        w.value = t.value;
        w.beta.assign(c.n, zero_elem(env.u));
        w.shift = t.shift;
        for (std::uint32_t ci = 0; ci < op.arity; ++ci) {
          const canonical_form &ch = forms[g.children[ci]];
          for (std::size_t b = 0; b < env.u.size(); ++b) {
            std::uint64_t m = env.u[b].mod;
            std::uint64_t bc = t.beta[ci][b];
            if (bc == 0)
              continue;
            for (std::uint32_t j = 0; j < c.n; ++j)
              w.beta[j][b] = (w.beta[j][b] + bc * ch.alpha[j][b]) % m;
            w.shift[b] = (w.shift[b] + bc * ch.u_const[b]) % m;
          }
        }
        inst.push_back(std::move(w));
      }
      if (!inst.empty())
        f.hat = hat_merge(f.hat, normalize(inst, c.n, env.u, env.l));
      break;
    }
    }
    forms[gi] = std::move(f);
  }
  return forms;
}

canonical_form compile(const circuit &c, std::uint32_t out_gate) {
  const algebra_spec &a = *c.algebra;
  if (!a.coprime())
    throw error(errc::not_coprime,
                "whole-algebra compilation needs |U|, |L| coprime; general mode "
                "compiles per specialization");
  compile_env env = compile_env::plain(a);
  env.hat_of = [&a, &c](std::uint32_t gi) -> const std::vector<wterm> & {
    return a.expansions[c.gates[gi].op_index];
  };
  auto forms = compile_gates(c, env);
  return forms[out_gate];
}

canonical_form subtract(const canonical_form &a, const canonical_form &b) {
  if (a.n != b.n || a.hat.u != b.hat.u || a.hat.l != b.hat.l)
    throw error(errc::shape_mismatch, "forms over different domains");
  canonical_form d;
  d.n = a.n;
  const shape &l = a.hat.l;
  const shape &u = a.hat.u;
  d.lambda.reserve(a.n);
  d.alpha.reserve(a.n);
  for (std::uint32_t j = 0; j < a.n; ++j) {
    d.lambda.push_back(sub(l, a.lambda[j], b.lambda[j]));
    d.alpha.push_back(sub(u, a.alpha[j], b.alpha[j]));
  }
  d.u_const = sub(u, a.u_const, b.u_const);
  d.hat = hat_merge(a.hat, hat_negated(b.hat));
  return d;
}

pairval eval_canonical(const canonical_form &f, const assignment &x) {
  if (x.size() != f.n)
    throw error(errc::shape_mismatch, "assignment arity mismatch");
  const shape &l = f.hat.l;
  const shape &u = f.hat.u;
  pairval r;
  r.l = zero_elem(l);
  r.u = f.u_const;
  std::vector<elem> uparts;
  uparts.reserve(f.n);
  for (std::uint32_t j = 0; j < f.n; ++j) {
    r.l = add(l, r.l, scale(l, f.lambda[j], x[j].l));
    r.u = add(u, r.u, scale(u, f.alpha[j], x[j].u));
    uparts.push_back(x[j].u);
  }
  r.l = add(l, r.l, hat_eval(f.hat, uparts));
  return r;
}

std::pair<linear_parts, linear_parts> linear_compile(const circuit &c) {
  const algebra_spec &a = *c.algebra;
  struct lin {
    std::vector<scalar> lambda, alpha;
    elem u_const;
  };
  std::vector<lin> ls(c.gates.size());
  for (std::size_t gi = 0; gi < c.gates.size(); ++gi) {
    const gate &g = c.gates[gi];
    lin f;
    f.lambda.assign(c.n, zero_scalar(a.l));
    f.alpha.assign(c.n, zero_scalar(a.u));
    f.u_const = zero_elem(a.u);
    switch (g.k) {
    case gate::kind::input:
      f.lambda[g.input_index - 1] = one_scalar(a.l);
      f.alpha[g.input_index - 1] = one_scalar(a.u);
      break;
    case gate::kind::constant:
      f.u_const = g.cval.u;
      break;
    case gate::kind::op: {
      const basic_op &op = a.ops[g.op_index];
      for (std::uint32_t ci = 0; ci < op.arity; ++ci) {
        const lin &ch = ls[g.children[ci]];
        for (std::uint32_t j = 0; j < c.n; ++j) {
          f.lambda[j] =
              scalar_add(a.l, f.lambda[j], scalar_mul(a.l, op.l_scalars[ci], ch.lambda[j]));
          f.alpha[j] =
              scalar_add(a.u, f.alpha[j], scalar_mul(a.u, op.u_scalars[ci], ch.alpha[j]));
        }
        f.u_const = add(a.u, f.u_const, scale(a.u, op.u_scalars[ci], ch.u_const));
      }
      f.u_const = add(a.u, f.u_const, op.u_const);
      break;
    }
    }
    ls[gi] = std::move(f);
  }
  linear_parts lp1{ls[c.out1].lambda, ls[c.out1].alpha, ls[c.out1].u_const};
  linear_parts lp2{ls[c.out2].lambda, ls[c.out2].alpha, ls[c.out2].u_const};
  return {std::move(lp1), std::move(lp2)};
}

} // namespace ceqv
