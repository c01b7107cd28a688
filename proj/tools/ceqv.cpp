#include "ceqv/oracle.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace ceqv;

namespace {

std::string slurp(const std::string &path) {
  std::ifstream f(path);
  if (!f)
    throw error(errc::usage, "cannot read " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

check_mode mode_of(const std::string &s) {
  if (s == "auto")
    return check_mode::automatic;
  if (s == "coprime")
    return check_mode::coprime;
  if (s == "general")
    return check_mode::general;
  throw error(errc::usage, "mode must be auto|coprime|general");
}

void dump_canonical(std::ostream &os, const circuit &c, std::uint32_t out,
                    const canonical_form &f) {
  os << "canonical " << c.name << " over " << c.algebra->name << " output "
     << c.gate_names[out] << " vars " << f.n << "\n";
  os << "lambda";
  for (const auto &s : f.lambda)
    os << ' ' << format_elem(s);
  os << "\nalpha";
  for (const auto &s : f.alpha)
    os << ' ' << format_elem(s);
  os << "\nuconst " << format_elem(f.u_const) << "\n";
  os << "hatconst " << format_elem(f.hat.const_l) << "\n";
  // one wterm line per nonzero table entry
  std::vector<std::string> lines;
  for (const mterm &t : f.hat.terms) {
    elem u = zero_elem(f.hat.u);
    std::uint64_t r = 0;
    do {
      if (!is_zero(t.mfun[r])) {
        std::ostringstream ls;
        ls << "  term mu=" << format_elem(one_scalar(f.hat.l))
           << " l=" << format_elem(t.mfun[r]) << " beta=";
        for (std::size_t j = 0; j < t.beta.size(); ++j) {
          if (j)
            ls << ';';
          ls << format_elem(t.beta[j]);
        }
        ls << " c=" << format_elem(neg(f.hat.u, u));
        lines.push_back(ls.str());
      }
      ++r;
    } while (next_elem(f.hat.u, u));
  }
  os << "hatwsum " << lines.size() << "\n";
  for (const auto &ln : lines)
    os << ln << "\n";
  os << "end\n";
}

struct chain_spec {
  std::uint32_t n = 50;
  std::uint32_t gates = 100;
};

// Two chains of one symmetric binary operation applied in opposite argument
// orders; equivalent by symmetry, exercising the full pipeline.
circuit make_chain(const algebra_spec &a, std::uint32_t n, std::uint32_t gates) {
  int oi = a.find_index("fsym");
  if (oi < 0) {
    for (std::size_t i = 0; i < a.ops.size(); ++i)
      if (a.ops[i].arity == 2) {
        oi = static_cast<int>(i);
        break;
      }
  }
  if (oi < 0)
    throw error(errc::usage, "bench needs a binary op");
  circuit c;
  c.algebra = &a;
  c.name = "chain";
  c.n = n;
  for (std::uint32_t j = 0; j < n; ++j) {
    gate g;
    g.k = gate::kind::input;
    g.input_index = j + 1;
    c.gates.push_back(g);
    c.gate_names.push_back("x" + std::to_string(j + 1));
  }
  auto add_op = [&](std::uint32_t l, std::uint32_t r) {
    gate g;
    g.k = gate::kind::op;
    g.op_index = static_cast<std::uint32_t>(oi);
    g.children = {l, r};
    c.gates.push_back(std::move(g));
    c.gate_names.push_back("g" + std::to_string(c.gates.size()));
    return static_cast<std::uint32_t>(c.gates.size() - 1);
  };
  std::uint32_t left = 0;
  for (std::uint32_t t = 1; t < gates; ++t)
    left = add_op(left, (t % n));
  std::uint32_t right = 0;
  for (std::uint32_t t = 1; t < gates; ++t)
    right = add_op((t % n), right);
  c.out1 = left;
  c.out2 = right;
  return c;
}

int cmd_check(const std::string &alg_path, const std::string &cir_path,
              const std::string &mode, bool witness, const std::string &format, int jobs) {
  algebra_spec a = parse_algebra(slurp(alg_path));
  circuit c = parse_circuit(slurp(cir_path), a);
  check_options opts;
  opts.want_witness = witness;
  opts.jobs = jobs;
  verdict v = check_equivalence(c, mode_of(mode), opts);
  if (format == "machine") {
    std::cout << v.machine_line() << "\n";
  } else if (v.equivalent) {
    std::cout << "equivalent: the two outputs agree on all assignments\n";
  } else {
    std::cout << "not equivalent";
    if (v.witness)
      std::cout << " at " << format_assignment(*v.witness);
    std::cout << "\n";
  }
  return v.equivalent ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"circuit equivalence over finite 2-nilpotent algebras"};
  app.require_subcommand(1);

  std::string alg_path, cir_path, assign_str, format = "text", mode = "auto";
  std::string save_dir;
  bool witness = false;
  int jobs = 1;
  std::uint64_t seed = 1, bound = oracle_default_bound;
  std::uint32_t count = 100, max_n = 3, max_gates = 8, out_sel = 1;
  std::uint32_t bench_n = 50;
  std::string bench_gates = "50,100,200,400";

  auto add_common = [&](CLI::App *s, bool need_circuit) {
    s->add_option("--algebra", alg_path, "algebra file")->required();
    if (need_circuit)
      s->add_option("--circuit", cir_path, "circuit file")->required();
    s->add_option("--format", format, "text|machine");
  };

  auto *chk = app.add_subcommand("check", "decide equivalence of the two outputs");
  add_common(chk, true);
  chk->add_option("--mode", mode, "auto|coprime|general");
  chk->add_flag("--witness", witness, "emit a verified witness when not equivalent");
  chk->add_option("--jobs", jobs, "parallel sub-problems");

  auto *cmp = app.add_subcommand("compile", "dump the canonical form of an output");
  add_common(cmp, true);
  cmp->add_option("--output", out_sel, "1 or 2");

  auto *ev = app.add_subcommand("eval", "evaluate both outputs on one assignment");
  add_common(ev, true);
  ev->add_option("--assign", assign_str, "((l)|(u)),((l)|(u)),...")->required();

  auto *orc = app.add_subcommand("oracle", "exhaustive equivalence check");
  add_common(orc, true);
  orc->add_option("--bound", bound, "max |A|^n");

  auto *fz = app.add_subcommand("fuzz", "differential test of checker vs oracle");
  add_common(fz, false);
  fz->add_option("--seed", seed, "rng seed");
  fz->add_option("--count", count, "instances");
  fz->add_option("--max-n", max_n, "max variables");
  fz->add_option("--max-gates", max_gates, "max extra gates");
  fz->add_option("--mode", mode, "auto|coprime|general");
  fz->add_option("--jobs", jobs, "parallel instances");
  fz->add_option("--save-dir", save_dir, "write minimized disagreements here");

  auto *vw = app.add_subcommand("validate-weight-bound",
                                "cross-check declared weight bounds against enumeration");
  add_common(vw, false);
  vw->add_option("--seed", seed, "rng seed");
  vw->add_option("--count", count, "instances");
  vw->add_option("--max-n", max_n, "max variables (keep <= 4)");
  vw->add_option("--max-gates", max_gates, "max extra gates");

  auto *bn = app.add_subcommand("bench", "chain-family scaling, CSV output");
  add_common(bn, false);
  bn->add_option("--n", bench_n, "variables");
  bn->add_option("--gates", bench_gates, "comma list of chain lengths");

  CLI11_PARSE(app, argc, argv);

  try {
    if (chk->parsed())
      return cmd_check(alg_path, cir_path, mode, witness, format, jobs);

    if (cmp->parsed()) {
      algebra_spec a = parse_algebra(slurp(alg_path));
      circuit c = parse_circuit(slurp(cir_path), a);
      std::uint32_t g = out_sel == 2 ? c.out2 : c.out1;
      canonical_form f = compile(c, g);
      dump_canonical(std::cout, c, g, f);
      return 0;
    }

    if (ev->parsed()) {
      algebra_spec a = parse_algebra(slurp(alg_path));
      circuit c = parse_circuit(slurp(cir_path), a);
      assignment x = parse_assignment(assign_str, a.l, a.u);
      auto [o1, o2] = eval_circuit(c, x);
      if (format == "machine")
        std::cout << "EVAL out1=" << format_pairval(o1) << " out2=" << format_pairval(o2)
                  << "\n";
      else
        std::cout << c.gate_names[c.out1] << " = " << format_pairval(o1) << "\n"
                  << c.gate_names[c.out2] << " = " << format_pairval(o2) << "\n";
      return 0;
    }

    if (orc->parsed()) {
      algebra_spec a = parse_algebra(slurp(alg_path));
      circuit c = parse_circuit(slurp(cir_path), a);
      oracle_verdict v = oracle_equivalent(c, bound);
      if (v.equivalent) {
        std::cout << "EQUIVALENT\n";
        return 0;
      }
      std::cout << "NOT_EQUIVALENT witness="
                << (v.witness ? format_assignment(*v.witness) : "none") << "\n";
      return 1;
    }

    if (fz->parsed()) {
      algebra_spec a = parse_algebra(slurp(alg_path));
      fuzz_config cfg;
      cfg.seed = seed;
      cfg.count = count;
      cfg.max_n = max_n;
      cfg.max_gates = max_gates;
      cfg.mode = mode_of(mode);
      cfg.jobs = jobs;
      fuzz_report rep = fuzz(a, cfg);
      for (std::size_t i = 0; i < rep.disagreements.size(); ++i) {
        const disagreement &d = rep.disagreements[i];
        std::cout << "disagreement on instance " << d.instance << ":\n"
                  << d.circuit_text << "checker: " << d.checker_line
                  << "\noracle:  " << d.oracle_line << "\n";
        if (!save_dir.empty()) {
          std::string path = save_dir + "/fuzz-fail-" + std::to_string(i) + ".cir";
          std::ofstream out(path);
          out << d.circuit_text;
          std::cout << "minimized circuit written to " << path << "\n";
        }
      }
      if (rep.witnesses_invalid)
        std::cout << "invalid witnesses: " << rep.witnesses_invalid << "\n";
      std::cout << rep.summary_line() << "\n";
      return rep.disagreements.empty() && rep.witnesses_invalid == 0 ? 0 : 1;
    }

    if (vw->parsed()) {
      algebra_spec a = parse_algebra(slurp(alg_path));
      wbound_report rep = validate_weight_bound(a, seed, count, max_n, max_gates);
      for (const auto &n : rep.notes)
        std::cout << n << "\n";
      std::cout << "WEIGHTBOUND checks=" << rep.total << " violations=" << rep.violations
                << "\n";
      return rep.violations == 0 ? 0 : 1;
    }

    if (bn->parsed()) {
      algebra_spec a = parse_algebra(slurp(alg_path));
      std::cout << "n,gates,terms,check_ms,oracle_ms\n";
      std::stringstream gs(bench_gates);
      std::string tok;
      while (std::getline(gs, tok, ',')) {
        std::uint32_t gates = static_cast<std::uint32_t>(std::stoul(tok));
        circuit c = make_chain(a, bench_n, gates);
        canonical_form diff =
            subtract(compile(c, c.out1), compile(c, c.out2));
        auto t0 = std::chrono::steady_clock::now();
        verdict v = check_equivalence(c, check_mode::automatic, {false, 1});
        auto t1 = std::chrono::steady_clock::now();
        double check_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        std::string oracle_ms;
        try {
          auto o0 = std::chrono::steady_clock::now();
          oracle_equivalent(c);
          auto o1 = std::chrono::steady_clock::now();
          oracle_ms = std::to_string(
              std::chrono::duration<double, std::milli>(o1 - o0).count());
        } catch (const error &e) {
          if (e.code() != errc::too_large)
            throw;
        }
        std::cout << bench_n << ',' << gates << ',' << term_count(diff.hat) << ','
                  << check_ms << ',' << oracle_ms << "\n";
        if (!v.equivalent)
          std::cerr << "warning: chain pair reported not equivalent\n";
      }
      return 0;
    }
  } catch (const error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
