// Command-line frontend: eval, check, and gen subcommands over the library.
// Exit codes: 0 success/found, 1 not-found, 2 invalid input, 3 unknown.
#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nfer/analysis.hpp"
#include "nfer/core.hpp"
#include "nfer/engine.hpp"
#include "nfer/parser.hpp"
#include "nfer/reductions.hpp"
#include "nfer/trace_io.hpp"

namespace nfer {

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

inline Nat parse_nat_arg(const std::string& text, const char* what) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw std::runtime_error(std::string(what) + " must be a nonnegative integer");
  }
  return Nat(text);
}

inline std::string cycle_text(const std::vector<std::size_t>& cycle) {
  std::string out;
  for (std::size_t i : cycle) {
    out += std::to_string(i);
    out += " -> ";
  }
  if (!cycle.empty()) out += std::to_string(cycle.front());
  return out;
}

inline void append_interval_json(const Interval& iv, std::string& out) {
  out += "{\"name\":\"";
  out += json_escape(iv.id.name());
  out += "\",\"start\":";
  out += iv.start.str();
  out += ",\"end\":";
  out += iv.end.str();
  out += ",\"data\":";
  append_json_map(iv.map, out);
  out += '}';
}

inline void append_witness_json(const WitnessTree& t, int indent, std::string& out) {
  std::string pad(indent, ' ');
  std::string pad2(indent + 2, ' ');
  out += "{\n";
  out += pad2 + "\"interval\": ";
  append_interval_json(t.root, out);
  if (t.rule) {
    out += ",\n" + pad2 + "\"rule\": " + std::to_string(*t.rule);
  }
  if (t.excluded) {
    out += ",\n" + pad2 + "\"excluded\": \"" + json_escape(t.excluded->name()) + "\"";
  }
  out += ",\n" + pad2 + "\"children\": [";
  for (std::size_t i = 0; i < t.children.size(); ++i) {
    if (i > 0) out += ',';
    out += '\n' + pad2;
    append_witness_json(t.children[i], indent + 2, out);
  }
  if (!t.children.empty()) out += '\n' + pad2;
  out += "]\n" + pad + "}";
}

inline std::string witness_json(const WitnessTree& t) {
  std::string out;
  append_witness_json(t, 0, out);
  out += '\n';
  return out;
}

struct EvalArgs {
  std::string spec_path;
  std::string trace_path;
  std::string format = "jsonl";
  std::string bound;
  std::string target;
  std::uint64_t fuel = 0;
  bool has_fuel = false;
  bool minimal = false;
  bool witness = false;
};

inline int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  Spec spec = parse_spec(read_file(a.spec_path));
  Trace trace = parse_trace(read_file(a.trace_path));

  EvalConfig cfg;
  if (!a.bound.empty()) cfg.mode = ArithMode::modulo(parse_nat_arg(a.bound, "--bound"));
  cfg.minimal = a.minimal;
  if (a.has_fuel) cfg.fuel = a.fuel;

  if (!a.target.empty()) {
    Verdict verdict = decide(spec, trace, Identifier(a.target), cfg);
    switch (verdict.kind()) {
      case Verdict::Kind::found:
        out << "found\n";
        if (a.witness) out << witness_json(verdict.witness());
        return 0;
      case Verdict::Kind::not_found:
        out << "not-found\n";
        return 1;
      case Verdict::Kind::unknown:
        out << "unknown\n";
        return 3;
    }
    return 2;
  }

  DataFormat fmt = a.format == "csv" ? DataFormat::csv : DataFormat::jsonl;
  EvalResult result = evaluate_trace(spec, trace, cfg);
  out << emit_pool(result, fmt);
  for (const std::string& d : result.diagnostics) err << "# " << d << "\n";
  err << "# " << pool_summary(result) << "\n";
  return 0;
}

inline int cmd_check(const std::string& spec_path, std::ostream& out) {
  Spec spec = parse_spec(read_file(spec_path));
  if (auto rej = validate(spec)) {
    out << "invalid: " << rej->reason << "\n";
    if (!rej->cycle.empty()) out << "cycle: " << cycle_text(rej->cycle) << "\n";
    return 2;
  }
  FragmentInfo info = classify(spec);
  out << "rules: " << spec.rules.size() << "\n";
  out << "exclusive: " << (info.has_exclusive ? "yes" : "no") << "\n";
  out << "cycle-free: " << (info.cycle_free ? "yes" : "no") << "\n";
  if (info.cycle_free) {
    out << "topological-order:";
    for (std::size_t i : *info.topo_order) out << ' ' << i;
    out << "\n";
  } else {
    RuleGraph g = build_graph(spec);
    out << "cycle: " << cycle_text(find_cycle(g)) << "\n";
  }
  const char* finite_class = info.cycle_free ? "PSpace-complete" : "ExpTime-complete";
  const char* infinite_class = !info.cycle_free ? "undecidable"
                               : info.has_exclusive ? "NExpTime-hard, in AExpTime(poly)"
                                                    : "NExpTime-complete";
  out << "complexity:\n";
  out << "  finite-data: " << finite_class << "\n";
  out << "  infinite-data: " << infinite_class << "\n";
  out << "  finite-data minimality: in PTime\n";
  out << "  infinite-data minimality: in ExpTime\n";
  return 0;
}

struct GenArgs {
  std::string program_path;
  std::string formula_path;
  std::size_t squares_n = 0;
  std::string out_prefix;
};

inline int cmd_gen(const std::string& kind, const GenArgs& a, std::ostream& out) {
  CompiledInstance inst = [&] {
    if (kind == "minsky") return compile_minsky(parse_minsky(read_file(a.program_path)));
    if (kind == "tqbf") return compile_tqbf(parse_qbf(read_file(a.formula_path)));
    return compile_squares(a.squares_n);
  }();
  std::string spec_path = a.out_prefix + ".spec.nfer";
  std::string trace_path = a.out_prefix + ".trace.jsonl";
  write_file(spec_path, print_spec(inst.spec));
  write_file(trace_path, emit_trace(inst.trace, DataFormat::jsonl));
  out << "spec=" << spec_path << "\n";
  out << "trace=" << trace_path << "\n";
  out << "target=" << inst.target.name() << "\n";
  if (inst.bound) out << "bound=" << inst.bound->str() << "\n";
  return 0;
}

}  // namespace detail

/// Runs the frontend on the given arguments (program name excluded) and
/// streams. Never throws; failures map to exit code 2.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"interval logic evaluator"};
  app.name("nfer");
  app.require_subcommand(1);

  detail::EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a trace against a rule set");
  eval_cmd->add_option("--spec", eval_args.spec_path, "rule set file")->required();
  eval_cmd->add_option("--trace", eval_args.trace_path, "trace file (JSON lines or CSV)")
      ->required();
  eval_cmd->add_option("--format", eval_args.format, "output format")
      ->check(CLI::IsMember({"jsonl", "csv"}));
  eval_cmd->add_option("--bound", eval_args.bound, "finite-data modulus");
  auto* fuel_opt = eval_cmd->add_option("--fuel", eval_args.fuel, "iteration budget");
  eval_cmd->add_flag("--minimal", eval_args.minimal, "keep only minimal intervals");
  auto* target_opt = eval_cmd->add_option("--target", eval_args.target,
                                          "decide whether this label is derivable");
  eval_cmd->add_flag("--witness", eval_args.witness, "print a witness tree when found")
      ->needs(target_opt);

  std::string check_path;
  CLI::App* check_cmd = app.add_subcommand("check", "validate and classify a rule set");
  check_cmd->add_option("--spec", check_path, "rule set file")->required();

  detail::GenArgs gen_args;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate benchmark instances");
  gen_cmd->require_subcommand(1);
  CLI::App* gen_minsky = gen_cmd->add_subcommand("minsky", "compile a counter machine");
  gen_minsky->add_option("--program", gen_args.program_path, "machine description")->required();
  gen_minsky->add_option("--out", gen_args.out_prefix, "output path prefix")->required();
  CLI::App* gen_tqbf = gen_cmd->add_subcommand("tqbf", "compile a quantified 3-CNF formula");
  gen_tqbf->add_option("--formula", gen_args.formula_path, "formula description")->required();
  gen_tqbf->add_option("--out", gen_args.out_prefix, "output path prefix")->required();
  CLI::App* gen_squares = gen_cmd->add_subcommand("squares", "repeated-squaring chain");
  gen_squares->add_option("--n", gen_args.squares_n, "chain length")->required();
  gen_squares->add_option("--out", gen_args.out_prefix, "output path prefix")->required();

  std::vector<const char*> argv;
  argv.push_back("nfer");
  for (const std::string& s : args) argv.push_back(s.c_str());

  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  eval_args.has_fuel = fuel_opt->count() > 0;

  try {
    if (eval_cmd->parsed()) return detail::cmd_eval(eval_args, out, err);
    if (check_cmd->parsed()) return detail::cmd_check(check_path, out);
    if (gen_cmd->parsed()) {
      const char* kind = gen_minsky->parsed() ? "minsky" : gen_tqbf->parsed() ? "tqbf" : "squares";
      return detail::cmd_gen(kind, gen_args, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace nfer
