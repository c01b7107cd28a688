#include "ceqv/algebra.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

namespace ceqv {

bool basic_op::operator==(const basic_op &o) const {
  return name == o.name && arity == o.arity && l_scalars == o.l_scalars &&
         u_scalars == o.u_scalars && u_const == o.u_const && has_table == o.has_table &&
         hat_table == o.hat_table && hat_wsum == o.hat_wsum;
}

bool algebra_spec::coprime() const { return std::gcd(u.order(), l.order()) == 1; }

const basic_op *algebra_spec::find(const std::string &opname) const {
  for (const auto &op : ops)
    if (op.name == opname)
      return &op;
  return nullptr;
}

int algebra_spec::find_index(const std::string &opname) const {
  for (std::size_t i = 0; i < ops.size(); ++i)
    if (ops[i].name == opname)
      return static_cast<int>(i);
  return -1;
}

bool algebra_spec::operator==(const algebra_spec &o) const {
  return name == o.name && u == o.u && l == o.l && ops == o.ops &&
         weight_bounds == o.weight_bounds;
}

namespace {

struct token {
  std::string s;
  int line;
};

struct token_stream {
  std::vector<token> v;
  std::size_t pos = 0;

  explicit token_stream(const std::string &text) {
    std::istringstream is(text);
    std::string line;
    int ln = 0;
    while (std::getline(is, line)) {
      ++ln;
      auto hash = line.find('#');
      if (hash != std::string::npos)
        line.resize(hash);
      std::istringstream ls(line);
      std::string t;
      while (ls >> t)
        v.push_back({t, ln});
    }
  }

  bool eof() const { return pos >= v.size(); }
  const token &peek() const {
    static token sentinel{"", -1};
    return eof() ? sentinel : v[pos];
  }
  token next() {
    if (eof())
      throw error(errc::syntax, "unexpected end of file");
    return v[pos++];
  }
  token expect(const std::string &kw) {
    token t = next();
    if (t.s != kw)
      throw error(errc::syntax, "expected '" + kw + "', got '" + t.s + "'", t.line);
    return t;
  }
};

bool looks_like_block(const std::string &s) {
  auto caret = s.find('^');
  if (caret == std::string::npos || caret == 0 || caret + 1 >= s.size())
    return false;
  return std::all_of(s.begin(), s.begin() + caret, ::isdigit) &&
         std::all_of(s.begin() + caret + 1, s.end(), ::isdigit);
}

shape parse_shape_blocks(token_stream &ts) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pe;
  while (!ts.eof() && looks_like_block(ts.peek().s)) {
    token t = ts.next();
    auto caret = t.s.find('^');
    try {
      unsigned long p = std::stoul(t.s.substr(0, caret));
      unsigned long k = std::stoul(t.s.substr(caret + 1));
      pe.emplace_back(static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(k));
    } catch (const std::exception &) {
      throw error(errc::syntax, "bad block '" + t.s + "'", t.line);
    }
  }
  try {
    return shape(pe);
  } catch (error &e) {
    throw error(e.code(), e.what());
  }
}

std::vector<std::int64_t> split_ints(const std::string &body, int line) {
  std::vector<std::int64_t> vals;
  if (body.empty())
    return vals;
  std::size_t start = 0;
  while (start <= body.size()) {
    auto comma = body.find(',', start);
    std::string piece =
        comma == std::string::npos ? body.substr(start) : body.substr(start, comma - start);
    try {
      std::size_t used = 0;
      std::int64_t v = std::stoll(piece, &used);
      if (used != piece.size())
        throw std::invalid_argument(piece);
      vals.push_back(v);
    } catch (const std::exception &) {
      throw error(errc::syntax, "bad residue '" + piece + "'", line);
    }
    if (comma == std::string::npos)
      break;
    start = comma + 1;
  }
  return vals;
}

elem parse_elem_token(const std::string &s, const shape &sh, int line) {
  if (s.size() < 2 || s.front() != '(' || s.back() != ')')
    throw error(errc::syntax, "expected element '(..)', got '" + s + "'", line);
  auto vals = split_ints(s.substr(1, s.size() - 2), line);
  if (vals.size() != sh.size())
    throw error(errc::shape_mismatch,
                "element '" + s + "' has " + std::to_string(vals.size()) +
                    " residues, shape needs " + std::to_string(sh.size()),
                line);
  return reduce(sh, vals);
}

elem next_elem_token(token_stream &ts, const shape &sh) {
  token t = ts.next();
  return parse_elem_token(t.s, sh, t.line);
}

// field of the form name=payload
std::string field(token_stream &ts, const std::string &name) {
  token t = ts.next();
  std::string pfx = name + "=";
  if (t.s.rfind(pfx, 0) != 0)
    throw error(errc::syntax, "expected '" + pfx + "...', got '" + t.s + "'", t.line);
  return t.s.substr(pfx.size());
}

std::vector<wterm> parse_wsum(token_stream &ts, std::uint32_t arity, const shape &u,
                              const shape &l) {
  token cnt_tok = ts.next();
  std::size_t count = 0;
  try {
    count = std::stoul(cnt_tok.s);
  } catch (const std::exception &) {
    throw error(errc::syntax, "bad wsum count '" + cnt_tok.s + "'", cnt_tok.line);
  }
  std::vector<wterm> ws;
  for (std::size_t t = 0; t < count; ++t) {
    token kw = ts.expect("term");
    wterm w;
    w.mu = parse_elem_token(field(ts, "mu"), l, kw.line);
    w.value = parse_elem_token(field(ts, "l"), l, kw.line);
    std::string betas = field(ts, "beta");
    std::size_t start = 0;
    while (start < betas.size()) {
      auto semi = betas.find(';', start);
      std::string piece = semi == std::string::npos ? betas.substr(start)
                                                    : betas.substr(start, semi - start);
      w.beta.push_back(parse_elem_token(piece, u, kw.line));
      if (semi == std::string::npos)
        break;
      start = semi + 1;
    }
    if (w.beta.size() != arity)
      throw error(errc::arity_mismatch,
                  "wsum term has " + std::to_string(w.beta.size()) + " beta entries, arity is " +
                      std::to_string(arity),
                  kw.line);
    w.shift = parse_elem_token(field(ts, "c"), u, kw.line);
    ws.push_back(std::move(w));
  }
  return ws;
}

} // namespace

algebra_spec parse_algebra(const std::string &text) {
  token_stream ts(text);
  algebra_spec a;
  ts.expect("algebra");
  a.name = ts.next().s;
  ts.expect("U");
  a.u = parse_shape_blocks(ts);
  ts.expect("L");
  a.l = parse_shape_blocks(ts);

  while (!ts.eof()) {
    token t = ts.next();
    if (t.s == "op") {
      basic_op op;
      op.name = ts.next().s;
      if (a.find(op.name))
        throw error(errc::duplicate_op, "op '" + op.name + "' already declared", t.line);
      ts.expect("arity");
      token ar = ts.next();
      try {
        op.arity = static_cast<std::uint32_t>(std::stoul(ar.s));
      } catch (const std::exception &) {
        throw error(errc::syntax, "bad arity '" + ar.s + "'", ar.line);
      }
      ts.expect("lscalars");
      for (std::uint32_t i = 0; i < op.arity; ++i)
        op.l_scalars.push_back(next_elem_token(ts, a.l));
      ts.expect("uscalars");
      for (std::uint32_t i = 0; i < op.arity; ++i)
        op.u_scalars.push_back(next_elem_token(ts, a.u));
      ts.expect("uconst");
      op.u_const = next_elem_token(ts, a.u);
      token hk = ts.next();
      if (hk.s == "hattable") {
        op.has_table = true;
        std::uint64_t expect = 1;
        for (std::uint32_t i = 0; i < op.arity; ++i) {
          if (expect > (std::uint64_t{1} << 22))
            throw error(errc::table_size, "hat table too large", hk.line);
          expect *= a.u.order();
        }
        if (expect > (std::uint64_t{1} << 22))
          throw error(errc::table_size, "hat table too large", hk.line);
        while (!ts.eof() && ts.peek().s.front() == '(')
          op.hat_table.push_back(next_elem_token(ts, a.l));
        if (op.hat_table.size() != expect)
          throw error(errc::table_size,
                      "hat table for '" + op.name + "' has " +
                          std::to_string(op.hat_table.size()) + " entries, expected " +
                          std::to_string(expect),
                      hk.line);
      } else if (hk.s == "hatwsum") {
        op.has_table = false;
        op.hat_wsum = parse_wsum(ts, op.arity, a.u, a.l);
      } else {
        throw error(errc::syntax, "expected 'hattable' or 'hatwsum', got '" + hk.s + "'",
                    hk.line);
      }
      ts.expect("end");
      a.ops.push_back(std::move(op));
    } else if (t.s == "weightbound") {
      token pt = ts.next();
      token st = ts.next();
      std::uint64_t p;
      std::uint32_t s;
      try {
        p = std::stoull(pt.s);
        s = static_cast<std::uint32_t>(std::stoul(st.s));
      } catch (const std::exception &) {
        throw error(errc::syntax, "bad weightbound", pt.line);
      }
      if (!is_prime_u32(static_cast<std::uint32_t>(p)))
        throw error(errc::non_prime, "weightbound prime " + pt.s, pt.line);
      if (s == 0)
        throw error(errc::syntax, "weightbound must be positive", st.line);
      a.weight_bounds[p] = s;
    } else {
      throw error(errc::syntax, "unexpected '" + t.s + "'", t.line);
    }
  }

  if (a.coprime()) {
    a.expansions.reserve(a.ops.size());
    for (const auto &op : a.ops) {
      if (op.has_table)
        a.expansions.push_back(expand_table(op.hat_table, op.arity, a.u, a.l));
      else
        a.expansions.push_back(op.hat_wsum);
    }
  }
  return a;
}

std::string serialize_algebra(const algebra_spec &a) {
  std::ostringstream os;
  os << "algebra " << a.name << "\n";
  os << "U";
  if (!a.u.trivial())
    os << ' ' << a.u.to_string();
  os << "\nL";
  if (!a.l.trivial())
    os << ' ' << a.l.to_string();
  os << "\n";
  for (const auto &op : a.ops) {
    os << "op " << op.name << " arity " << op.arity << "\n";
    os << "  lscalars";
    for (const auto &s : op.l_scalars)
      os << ' ' << format_elem(s);
    os << "\n  uscalars";
    for (const auto &s : op.u_scalars)
      os << ' ' << format_elem(s);
    os << "\n  uconst " << format_elem(op.u_const) << "\n";
    if (op.has_table) {
      os << "  hattable";
      for (std::size_t i = 0; i < op.hat_table.size(); ++i) {
        if (i && i % 16 == 0)
          os << "\n   ";
        os << ' ' << format_elem(op.hat_table[i]);
      }
      os << "\n";
    } else {
      os << "  hatwsum " << op.hat_wsum.size() << "\n";
      for (const auto &w : op.hat_wsum) {
        os << "    term mu=" << format_elem(w.mu) << " l=" << format_elem(w.value)
           << " beta=";
        for (std::size_t j = 0; j < w.beta.size(); ++j) {
          if (j)
            os << ';';
          os << format_elem(w.beta[j]);
        }
        os << " c=" << format_elem(w.shift) << "\n";
      }
    }
    os << "end\n";
  }
  for (const auto &[p, s] : a.weight_bounds)
    os << "weightbound " << p << ' ' << s << "\n";
  return os.str();
}

elem hat_value(const algebra_spec &a, const basic_op &op, const std::vector<elem> &uargs) {
  if (uargs.size() != op.arity)
    throw error(errc::arity_mismatch, "op '" + op.name + "' wants " +
                                          std::to_string(op.arity) + " arguments");
  if (op.has_table) {
    std::uint64_t idx = 0;
    for (const elem &ua : uargs)
      idx = idx * a.u.order() + rank_of(a.u, ua);
    return op.hat_table[idx];
  }
  return eval_wterms(a.u, a.l, op.hat_wsum, uargs);
}

pairval eval_basic_op(const algebra_spec &a, const basic_op &op,
                      const std::vector<pairval> &args) {
  if (args.size() != op.arity)
    throw error(errc::arity_mismatch, "op '" + op.name + "' wants " +
                                          std::to_string(op.arity) + " arguments, got " +
                                          std::to_string(args.size()));
  elem lpart = zero_elem(a.l);
  elem upart = op.u_const;
  std::vector<elem> uargs;
  uargs.reserve(op.arity);
  for (std::uint32_t i = 0; i < op.arity; ++i) {
    lpart = add(a.l, lpart, scale(a.l, op.l_scalars[i], args[i].l));
    upart = add(a.u, upart, scale(a.u, op.u_scalars[i], args[i].u));
    uargs.push_back(args[i].u);
  }
  lpart = add(a.l, lpart, hat_value(a, op, uargs));
  return {lpart, upart};
}

check_mode validate_mode(const algebra_spec &a, check_mode m) {
  bool cop = a.coprime();
  if (m == check_mode::automatic)
    m = cop ? check_mode::coprime : check_mode::general;
  if (m == check_mode::coprime && !cop)
    throw error(errc::not_coprime, "|U| and |L| share a factor; use general mode");
  if (m == check_mode::general) {
    std::uint64_t g = std::gcd(a.u.order(), a.l.order());
    for (const auto &b : a.l) {
      if (g % b.prime == 0 && !a.weight_bounds.count(b.prime))
        throw error(errc::missing_weight_bound,
                    "no weightbound for shared prime " + std::to_string(b.prime));
    }
  }
  return m;
}

std::string format_pairval(const pairval &v) {
  return "(" + format_elem(v.l) + "|" + format_elem(v.u) + ")";
}

std::string format_assignment(const assignment &x) {
  if (x.empty())
    return "()";
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i)
      s += ',';
    s += format_pairval(x[i]);
  }
  return s;
}

pairval parse_pairval(const std::string &s, const shape &lsh, const shape &ush) {
  if (s.size() < 2 || s.front() != '(' || s.back() != ')')
    throw error(errc::syntax, "expected '((..)|(..))', got '" + s + "'");
  std::string body = s.substr(1, s.size() - 2);
  int depth = 0;
  std::size_t bar = std::string::npos;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] == '(')
      ++depth;
    else if (body[i] == ')')
      --depth;
    else if (body[i] == '|' && depth == 0) {
      bar = i;
      break;
    }
  }
  if (bar == std::string::npos)
    throw error(errc::syntax, "missing '|' in '" + s + "'");
  pairval v;
  v.l = parse_elem_token(body.substr(0, bar), lsh, -1);
  v.u = parse_elem_token(body.substr(bar + 1), ush, -1);
  return v;
}

assignment parse_assignment(const std::string &s, const shape &lsh, const shape &ush) {
  assignment x;
  if (s == "()" || s.empty())
    return x;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || (s[i] == ',' && depth == 0)) {
      x.push_back(parse_pairval(s.substr(start, i - start), lsh, ush));
      start = i + 1;
    } else if (s[i] == '(') {
      ++depth;
    } else if (s[i] == ')') {
      --depth;
    }
  }
  return x;
}

} // namespace ceqv
