#include "mumonoids/driver.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "mumonoids/dist.hpp"
#include "mumonoids/error.hpp"
#include "mumonoids/eval.hpp"
#include "mumonoids/gen.hpp"
#include "mumonoids/optimizer.hpp"
#include "mumonoids/parser.hpp"
#include "mumonoids/programs.hpp"
#include "mumonoids/typecheck.hpp"

namespace mumonoids {

namespace fs = std::filesystem;

namespace {

struct LoadedProgram {
  Program program;
  fs::path dir;
};

LoadedProgram load_program_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::Io, "open", "cannot read " + file);
  std::stringstream ss;
  ss << in.rdbuf();
  return {parse_program(ss.str()), fs::path(file).parent_path()};
}

std::map<std::string, std::string> parse_overrides(const std::vector<std::string>& specs) {
  std::map<std::string, std::string> out;
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorKind::InvalidArgument, "input", "expected NAME=FILE, got " + s);
    }
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

EnvPtr bind_inputs(const LoadedProgram& lp, const std::map<std::string, std::string>& overrides) {
  std::vector<Binding> frame;
  for (const auto& decl : lp.program.inputs) {
    fs::path path;
    if (auto it = overrides.find(decl.name); it != overrides.end()) {
      path = it->second;
    } else if (!decl.path.empty()) {
      path = lp.dir / decl.path;
    } else {
      throw Error(ErrorKind::InvalidArgument, "input",
                  "input " + decl.name + " has no data file; pass --input " + decl.name + "=FILE");
    }
    frame.emplace_back(decl.name, Value::bag(load_input(path, decl.type)));
  }
  return extend(empty_env(), std::move(frame));
}

EnvPtr env_of(const std::map<std::string, Value>& inputs) {
  return extend(empty_env(), std::vector<Binding>(inputs.begin(), inputs.end()));
}

// Fixpoints anywhere in e, including inside function bodies.
void collect_fixpoints(const Expr& e, std::vector<const node::Fixpoint*>& out) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        auto go = [&](const ExprPtr& c) { collect_fixpoints(*c, out); };
        if constexpr (std::is_same_v<T, node::Singleton>) {
          go(x.elem);
        } else if constexpr (std::is_same_v<T, node::Lambda>) {
          for (const auto& c : x.cases) go(c.body);
        } else if constexpr (std::is_same_v<T, node::Apply>) {
          go(x.fn), go(x.arg);
        } else if constexpr (std::is_same_v<T, node::Flatmap>) {
          go(x.fn), go(x.src);
        } else if constexpr (std::is_same_v<T, node::Construct>) {
          for (const auto& a : x.args) go(a);
        } else if constexpr (std::is_same_v<T, node::Reduce>) {
          go(x.op), go(x.zero), go(x.src);
        } else if constexpr (std::is_same_v<T, node::ReduceByKey>) {
          go(x.op), go(x.src);
        } else if constexpr (std::is_same_v<T, node::Cogroup> || std::is_same_v<T, node::Join>) {
          go(x.left), go(x.right);
        } else if constexpr (std::is_same_v<T, node::Fixpoint>) {
          out.push_back(&x);
          go(x.seed), go(x.phi);
        } else if constexpr (std::is_same_v<T, node::Let>) {
          go(x.bound), go(x.body);
        } else if constexpr (std::is_same_v<T, node::Aggregate> || std::is_same_v<T, node::Dist>) {
          go(x.src);
        }
      },
      e.node());
}

std::string render(const Value& v) { return to_string(v); }

std::uint64_t records_of(const Value& v) { return v.is_bag() ? v.as_bag().size() : 1; }

std::string digest_of(const Value& v) {
  return fmt::format("{:016x}", v.is_bag() ? digest(v.as_bag()) : fnv1a(to_string(v)));
}

void write_reports(std::ostream& os, const std::vector<TransferReport>& reports) {
  for (std::size_t i = 0; i < reports.size(); ++i) os << (i ? "\n" : "") << reports[i].to_text();
}

struct RunFlags {
  std::string plan = "auto";
  std::size_t partitions = 0;
  std::size_t cores = 1;
  std::uint64_t seed = 0;
  std::string report;
  bool parallel = false;
  bool no_rewrite = false;
};

ClusterConfig cluster_of(const RunFlags& f) {
  ClusterConfig c;
  c.cores = std::max<std::size_t>(1, f.cores);
  c.partitions = f.partitions;
  c.seed = f.seed;
  c.schedule = f.parallel ? Schedule::Parallel : Schedule::Serial;
  return c;
}

int cmd_check(const std::string& file, std::ostream& out) {
  const auto lp = load_program_file(file);
  const TypeExpr t = infer(lp.program.type_env(), lp.program.body);
  out << "type: " << to_string(t) << "\n";
  std::vector<const node::Fixpoint*> fixes;
  const ExprPtr inlined = inline_lets(lp.program.body);
  collect_fixpoints(*inlined, fixes);
  for (const auto* f : fixes) {
    if (!is_syntactic_homomorphism(*f->phi)) {
      out << "warning: fixpoint " << (f->label.empty() ? "(unlabelled)" : f->label)
          << " has a body that is not a syntactic homomorphism; it will run as one global loop\n";
    }
  }
  out << "ok\n";
  return 0;
}

int cmd_optimize(const std::string& file, bool explain, std::ostream& out) {
  const auto lp = load_program_file(file);
  const Optimized o = optimize(lp.program.body, {lp.program.type_env(), lp.program.annotations});
  if (explain) out << o.trace.to_text();
  Program p = lp.program;
  p.body = o.expr;
  out << print_program(p);
  return 0;
}

int cmd_run(const std::string& file, const std::vector<std::string>& inputs, const RunFlags& f, std::ostream& out) {
  const auto lp = load_program_file(file);
  const EnvPtr env = bind_inputs(lp, parse_overrides(inputs));
  const EvalLimits limits = EvalLimits::from_environment();
  if (f.plan == "local") {
    const Value v = eval(env, lp.program.body, limits);
    out << "result: " << render(v) << "\nrecords: " << records_of(v) << "\n";
    return 0;
  }
  ExprPtr body = lp.program.body;
  Directives directives;
  Plan fallback = Plan::P1;
  Optimized o;
  if (!f.no_rewrite || f.plan == "auto") {
    o = optimize(body, {lp.program.type_env(), lp.program.annotations});
    if (!f.no_rewrite) body = o.expr;
  }
  if (f.plan == "auto") {
    directives = o.directives;
    if (f.no_rewrite) directives.clear();
    fallback = Plan::P2;
  } else if (auto p = parse_plan(f.plan)) {
    fallback = *p;
    // A forced plan still needs a key for repartitioning; take it from the optimizer.
    if (*p == Plan::P2Repartitioned && !f.no_rewrite) {
      for (auto [node, d] : o.directives) {
        if (d.plan != Plan::P2Repartitioned) d.plan = Plan::P2;
        directives[node] = d;
      }
    }
  } else {
    throw Error(ErrorKind::InvalidArgument, "plan", "unknown plan " + f.plan + "; use p1, p2, p2r, auto or local");
  }
  const DistributedRun r = run_distributed(body, env, directives, cluster_of(f), fallback, limits);
  out << "result: " << render(r.result) << "\nrecords: " << records_of(r.result) << "\n";
  out << "records_shuffled: " << r.records_shuffled() << "\n";
  if (!f.report.empty()) {
    std::ofstream rep(f.report);
    if (!rep) throw Error(ErrorKind::Io, "report", "cannot write " + f.report);
    write_reports(rep, r.reports);
  }
  return 0;
}

struct BenchFlags {
  DatasetConfig data;
  RunFlags run;
  std::vector<std::string> inputs;
};

int cmd_bench(const std::string& target, const BenchFlags& f, std::ostream& out) {
  Program program;
  EnvPtr env;
  std::string dataset;
  if (fs::exists(target)) {
    const auto lp = load_program_file(target);
    program = lp.program;
    env = bind_inputs(lp, parse_overrides(f.inputs));
    dataset = "files";
  } else {
    program = load_benchmark(target);
    env = env_of(make_inputs(target, f.data));
    dataset = fmt::format("n={} p={} seed={} acyclic={}", f.data.n, f.data.p, f.data.seed, f.data.acyclic ? "yes" : "no");
  }
  const ClusterConfig cluster = cluster_of(f.run);
  const EvalLimits limits = EvalLimits::from_environment();
  out << "program: " << target << "\ndataset: " << dataset << "\npartitions: " << cluster.effective_partitions()
      << "\n";

  auto timed = [&](const std::function<DistributedRun()>& fn, double& ms) {
    const auto t0 = std::chrono::steady_clock::now();
    DistributedRun r = fn();
    ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
  };
  double base_ms = 0, opt_ms = 0;
  const DistributedRun base =
      timed([&] { return run_distributed(program.body, env, {}, cluster, Plan::P1, limits); }, base_ms);
  const Optimized o = optimize(program.body, {program.type_env(), program.annotations});
  const DistributedRun opt =
      timed([&] { return run_distributed(o.expr, env, o.directives, cluster, Plan::P2, limits); }, opt_ms);

  auto section = [&](const char* name, const DistributedRun& r, double ms) {
    out << "\n[" << name << "]\nrecords: " << records_of(r.result) << "\ndigest: " << digest_of(r.result)
        << "\nrecords_shuffled: " << r.records_shuffled() << "\nwall_ms: " << fmt::format("{:.3f}", ms) << "\n";
    for (const auto& rep : r.reports) out << "\n" << rep.to_text();
  };
  section("unoptimized", base, base_ms);
  section("optimized", opt, opt_ms);
  out << "\n[rewrites]\n" << o.trace.to_text();
  auto norm = [](const Value& v) { return v.is_bag() ? Value::bag(distinct(v.as_bag())) : v; };
  const bool agree = norm(base.result) == norm(opt.result);
  out << "\nresults_agree: " << (agree ? "yes" : "no") << "\n";
  if (!f.run.report.empty()) {
    std::ofstream rep(f.run.report);
    if (!rep) throw Error(ErrorKind::Io, "report", "cannot write " + f.run.report);
    write_reports(rep, opt.reports);
  }
  return agree ? 0 : 6;
}

void add_run_flags(CLI::App* sub, RunFlags& f) {
  sub->add_option("--plan", f.plan, "p1, p2, p2r, auto or local")->capture_default_str();
  sub->add_option("--partitions", f.partitions, "simulated partitions (default: 4 per core)");
  sub->add_option("--cores", f.cores, "simulated cores")->capture_default_str();
  sub->add_option("--seed", f.seed, "seed for round-robin partitioning")->capture_default_str();
  sub->add_option("--report", f.report, "write transfer reports to this file");
  sub->add_flag("--parallel", f.parallel, "run partition tasks on OpenMP threads");
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evaluate, optimize and simulate distributed execution of fixpoint programs", "mumonoids"};
  app.require_subcommand(1);

  std::string file;
  bool explain = false;
  std::vector<std::string> inputs;
  RunFlags run_flags;
  BenchFlags bench;

  auto* check = app.add_subcommand("check", "typecheck a program and warn about non-distributable fixpoints");
  check->add_option("file", file, "program file")->required();

  auto* opt = app.add_subcommand("optimize", "print the rewritten program");
  opt->add_option("file", file, "program file")->required();
  opt->add_flag("--explain", explain, "print the rewrite trace first");

  auto* run = app.add_subcommand("run", "evaluate a program on simulated partitions");
  run->add_option("file", file, "program file")->required();
  run->add_option("--input", inputs, "NAME=FILE, overriding the declared data file");
  run->add_flag("--no-rewrite", run_flags.no_rewrite, "skip the rewrite rules");
  add_run_flags(run, run_flags);

  auto* bn = app.add_subcommand("bench", "compare the unoptimized and optimized program on generated data");
  bn->add_option("target", file, "benchmark id (TC, SP, TC-filter, SP-filter, Flights, PathPlanning, MovieRec) or program file")
      ->required();
  bn->add_option("--n", bench.data.n, "nodes, airports, cities or users")->capture_default_str();
  bn->add_option("--p", bench.data.p, "edge probability")->capture_default_str();
  bn->add_option("--data-seed", bench.data.seed, "generator seed")->capture_default_str();
  bn->add_flag("--acyclic", bench.data.acyclic, "generate acyclic graphs");
  bn->add_option("--input", bench.inputs, "NAME=FILE for program files");
  add_run_flags(bn, bench.run);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::ostringstream ignored;
    app.exit(e, ignored, err);
    return kUsageExit;
  }

  try {
    if (check->parsed()) return cmd_check(file, out);
    if (opt->parsed()) return cmd_optimize(file, explain, out);
    if (run->parsed()) return cmd_run(file, inputs, run_flags, out);
    return cmd_bench(file, bench, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(ErrorKind::Internal);
  }
}

}  // namespace mumonoids
