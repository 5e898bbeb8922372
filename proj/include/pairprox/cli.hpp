#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pairprox/applications.hpp"
#include "pairprox/bench.hpp"
#include "pairprox/instances.hpp"
#include "pairprox/matrix_io.hpp"
#include "pairprox/operator_json.hpp"
#include "pairprox/resolvents.hpp"
#include "pairprox/solvers.hpp"
#include "pairprox/trace_csv.hpp"

// Command-line front end. Exit codes: 0 success, 1 input error,
// 2 not converged, 3 pair-monotonicity violation found.
namespace pairprox::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitViolation = 3;

inline std::string format_vector(const Vector& v) {
  std::ostringstream os;
  os << std::setprecision(10) << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

struct SolveOptions {
  std::string problem;
  std::optional<double> kappa;
  double kappa_fraction = 0.4;
  double tol = 1e-8;
  std::size_t max_iters = 100000;
  std::string out;
  std::string trace;
};

namespace detail {

inline double choose_kappa(const SolveOptions& opt, const DenseMatrix& a, std::ostream& out) {
  if (opt.kappa) return *opt.kappa;
  const auto sel = select_kappa(a, opt.kappa_fraction);
  out << "kappa: " << sel.kappa << " (|alpha| = " << sel.alpha_abs << ", fraction " << opt.kappa_fraction << ")\n";
  return sel.kappa;
}

inline void write_outputs(const SolveOptions& opt, const SolveResult& result, std::ostream& out) {
  if (!opt.out.empty()) {
    write_matrix_file(opt.out, as_column(result.solution_preimage));
  } else {
    write_vector(out, result.solution_preimage);
  }
  if (!opt.trace.empty()) {
    std::ofstream t(opt.trace);
    if (!t) fail(ErrorCode::ParseError, "cannot write trace '" + opt.trace + "'");
    write_trace_csv(t, result.trace);
  }
}

inline int status_exit(const SolveResult& r) { return r.converged() ? kExitOk : kExitNotConverged; }

}  // namespace detail

inline int cmd_solve_kkt(const SolveOptions& opt, std::ostream& out) {
  const QPProblem qp = read_qp_file(opt.problem);
  const KKTSystem kkt = build_kkt(qp);
  const double kappa = detail::choose_kappa(opt, kkt.A, out);
  SolverConfig cfg;
  cfg.tol_residual = opt.tol;
  cfg.max_iters = opt.max_iters;
  const auto res = solve_kkt(kkt, kappa, Vector(kkt.A.rows()), cfg);
  out << "status: " << to_string(res.result.status) << "\niterations: " << res.result.iterations
      << "\ne_k: " << pairprox::detail::format_double(res.result.final_metric) << "\ny: " << format_vector(res.y)
      << "\nlambda: " << format_vector(res.lambda) << '\n';
  detail::write_outputs(opt, res.result, out);
  return detail::status_exit(res.result);
}

inline int cmd_least_squares(const SolveOptions& opt, std::ostream& out) {
  const LinearProblem p = read_linear_problem_file(opt.problem);
  const double kappa = detail::choose_kappa(opt, p.A, out);
  SolverConfig cfg;
  cfg.tol_residual = opt.tol;
  cfg.max_iters = opt.max_iters;
  const auto res = least_squares_iterate(p.A, p.b, kappa, Vector(p.A.rows()), cfg);
  out << "status: " << to_string(res.result.status) << "\niterations: " << res.result.iterations
      << "\nr_k: " << pairprox::detail::format_double(res.residual_ls.back())
      << "\ne_k: " << pairprox::detail::format_double(res.error.back()) << '\n';
  detail::write_outputs(opt, res.result, out);
  return detail::status_exit(res.result);
}

struct BenchOptions {
  BenchSpec spec;
  std::string out;
};

inline int cmd_bench(const BenchOptions& opt, std::ostream& out) {
  const auto records = run_bench(opt.spec);
  const auto summary = summarize(records);
  if (!opt.out.empty()) {
    std::ofstream f(opt.out);
    if (!f) fail(ErrorCode::ParseError, "cannot write '" + opt.out + "'");
    write_bench_csv(f, records);
    write_summary(f, summary);
  } else {
    write_bench_csv(out, records);
  }
  write_summary(out, summary);
  const bool all = std::all_of(records.begin(), records.end(), [](const RunRecord& r) { return r.status == "Converged"; });
  return all ? kExitOk : kExitNotConverged;
}

struct CheckPairOptions {
  std::string problem;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> box_lo;
  std::optional<double> box_hi;
};

// Problem file: {"F": {...}, "v": {...}, "box": {"lower": l, "upper": u},
//                "samples": n, "seed": s, "pairs": [[x, y], ...]}
// Box bounds may be scalars (a cube) or per-coordinate arrays.
inline int cmd_check_pair(const CheckPairOptions& opt, std::ostream& out) {
  const auto j = read_json_file(opt.problem);
  const std::filesystem::path base = std::filesystem::path(opt.problem).parent_path();
  OperatorExpr f, v;
  SampleBox box;
  std::vector<std::pair<Vector, Vector>> pairs;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  try {
    f = operator_from_json(pairprox::detail::json_field(j, "F"), base);
    v = operator_from_json(pairprox::detail::json_field(j, "v"), base);
    const std::size_t n = f.dim();
    auto bound = [&](const char* key, double dflt) {
      if (!j.contains("box") || !j.at("box").contains(key)) return Vector(n, dflt);
      const auto& b = j.at("box").at(key);
      return b.is_number() ? Vector(n, b.get<double>()) : pairprox::detail::json_vector(b);
    };
    box = {bound("lower", -10.0), bound("upper", 10.0)};
    if (j.contains("samples")) samples = j.at("samples").get<std::size_t>();
    if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("pairs")) {
      for (const auto& p : j.at("pairs")) {
        pairs.emplace_back(pairprox::detail::json_vector(p.at(0)), pairprox::detail::json_vector(p.at(1)));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, opt.problem + ": " + e.what());
  }
  if (opt.samples) samples = *opt.samples;
  if (opt.seed) seed = *opt.seed;
  if (opt.box_lo) box.lower = Vector(f.dim(), *opt.box_lo);
  if (opt.box_hi) box.upper = Vector(f.dim(), *opt.box_hi);

  const auto rep = check_pair_monotone(f, v, box, samples, seed, pairs, workers_from_env());
  const auto& w = rep.witness();
  out << std::setprecision(12) << "pairs evaluated: " << rep.sample_count << "\nmin quotient: " << rep.min_quotient
      << "\nmin inner product: " << rep.min_inner_product << '\n';
  for (std::size_t k = 0; k < rep.explicit_pairs.size(); ++k) {
    const auto& p = rep.explicit_pairs[k];
    out << "pair " << k << ": x=" << format_vector(p.x) << " y=" << format_vector(p.y)
        << " inner product " << p.inner_product << '\n';
  }
  out << "witness: x=" << format_vector(w.x) << " y=" << format_vector(w.y) << " F(x)=" << format_vector(w.fx)
      << " F(y)=" << format_vector(w.fy) << " v(x)=" << format_vector(w.vx) << " v(y)=" << format_vector(w.vy)
      << " inner product " << w.inner_product << '\n';
  if (rep.violated()) {
    out << "verdict: ViolationFound(" << w.inner_product << ")\n";
    return kExitViolation;
  }
  out << "verdict: MonotoneEvidence\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Demos

namespace detail {

inline bool nonincreasing(const std::vector<double>& v, double tol) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[k - 1] + tol) return false;
  return true;
}

inline void check_line(std::ostream& out, bool& all, bool ok, const std::string& what) {
  out << (ok ? "[ok]   " : "[FAIL] ") << what << '\n';
  all = all && ok;
}

}  // namespace detail

inline int cmd_demo(const std::string& name, const std::string& trace_path, std::ostream& out) {
  using namespace instances;
  bool all = true;
  IterationTrace trace;
  out << std::setprecision(6);

  if (name == "example-1") {
    const auto f = trig_block_operator();
    const auto v = swap2();
    out << "F(x1, x2) = (x2 + |sin x1|, x1 - cos|x2|), v = swap\n";
    out << "F(0, 0) = " << format_vector(evaluate_point(f, Vector{0.0, 0.0})) << '\n';
    const auto box = SampleBox::cube(2, -5.0, 5.0);
    const auto classic = check_pair_monotone(f, OperatorExpr::identity(2), box, 10000, 1);
    const auto paired = check_pair_monotone(f, v, box, 10000, 1);
    out << "(F, Id): min inner product " << classic.min_inner_product << '\n';
    out << "(F, v):  min inner product " << paired.min_inner_product << '\n';
    detail::check_line(out, all, classic.violated(), "F alone is not monotone");
    detail::check_line(out, all, !paired.violated(), "(F, v) shows no violation");
    const ResolventEngine engine(f, v, 1.0);
    out << "resolvent strategy: " << to_string(engine.strategy()) << " (" << engine.unsupported_reason() << ")\n";
  } else if (name == "example-2") {
    const auto f = sign_block_operator();
    const auto v = swap2();
    const Vector zero{0.0, 0.0};
    out << "F(x1, x2) = (Sign(x2) + x1, Sign(x1) - x2), v = swap, unique zero (0, 0)\n";

    SolverConfig cfg;
    cfg.error_fn = image_distance_to(zero);
    const auto r0 = gppa(f, v, Vector{5.0, -3.0}, cfg);
    out << "GPPA  from (5, -3): " << to_string(r0.status) << " after " << r0.iterations << " steps at "
        << format_vector(r0.solution_preimage) << '\n';
    detail::check_line(out, all, r0.converged() && norm2(r0.solution_preimage) <= 1e-6, "GPPA reaches (0, 0)");
    detail::check_line(out, all, detail::nonincreasing(residual(r0), 1e-10), "GPPA residual |u_n| nonincreasing");
    trace = r0.trace;

    const auto r1 = gppa1(f, v, Vector{3.0, 1.0}, cfg);
    out << "GPPA1 from (3, 1):  " << to_string(r1.status) << " after " << r1.iterations << " steps at "
        << format_vector(r1.solution_preimage) << '\n';
    detail::check_line(out, all, r1.converged() && norm2(r1.solution_preimage) <= 1e-6, "GPPA1 reaches (0, 0)");
    detail::check_line(out, all, detail::nonincreasing(residual(r1), 1e-10), "GPPA1 residual |u_n| nonincreasing");

    SolverConfig hcfg;
    hcfg.halpern = HalpernConfig{Vector{1.0, 1.0}, {}};
    hcfg.max_iters = 10000;
    hcfg.tol_residual = 1e-12;
    hcfg.error_fn = iterate_distance_to(zero);
    const auto r2 = gppa2(f, v, Vector{3.0, 1.0}, hcfg);
    const auto& errs = r2.trace.err_to_ref;
    const auto hit = std::find_if(errs.begin(), errs.end(), [](double e) { return e <= 1e-3; });
    out << "GPPA2 anchor (1, 1) from (3, 1): |x_k| after " << r2.iterations << " steps = " << errs.back() << '\n';
    detail::check_line(out, all, hit != errs.end(),
                       "GPPA2 within 1e-3 of (0, 0)" +
                           (hit != errs.end() ? " at k = " + std::to_string(hit - errs.begin() + 1) : std::string()));
  } else if (name == "least-squares") {
    const DenseMatrix a = DenseMatrix::diagonal(Vector{1.0, 0.0});
    const Vector b{1.0, 1.0};
    out << "A = diag(1, 0), b = (1, 1) (not in ran A), kappa = 0.2\n";
    SolverConfig cfg;
    cfg.tol_residual = 1e-10;
    const auto res = least_squares_iterate(a, b, 0.2, Vector(2), cfg);
    out << to_string(res.result.status) << " after " << res.result.iterations << " steps at "
        << format_vector(res.result.solution_preimage) << ", r_k = " << res.residual_ls.back()
        << ", e_k = " << res.error.back() << '\n';
    detail::check_line(out, all, res.result.converged(), "r_k = |A^2 x_k - A b| -> 0");
    detail::check_line(out, all, detail::nonincreasing(res.error, 1e-10), "e_k = |A x_k - b| nonincreasing");
    detail::check_line(out, all, std::abs(res.error.back() - 1.0) <= 1e-8, "e_k -> dist(b, ran A) = 1");
    trace = res.result.trace;
  } else if (name == "dca-divergence") {
    const DenseMatrix a = DenseMatrix::diagonal(Vector{1.0, -1.0});
    const Vector b{0.0, 0.0};
    out << "A = diag(1, -1), b = 0; DCA with m = 2 vs. (A + 2 kappa I)-paired GPPA, kappa = 0.2\n";
    SolverConfig cfg;
    cfg.max_iters = 1000;
    const auto dca = dca_baseline(a, b, 2.0, Vector{1.0, 1.0}, cfg);
    out << "DCA:  " << to_string(dca.status) << (dca.failure_reason.empty() ? "" : "(" + dca.failure_reason + ")")
        << " after " << dca.iterations << " steps, e_k = " << dca.final_metric << '\n';
    const auto ok = solve_linear_system(a, b, 0.2, Vector{1.0, 1.0}, cfg);
    out << "GPPA: " << to_string(ok.status) << " after " << ok.iterations << " steps, e_k = " << ok.final_metric << '\n';
    detail::check_line(out, all, dca.status == SolveStatus::Failed && dca.failure_reason == "Diverged",
                       "DCA diverges");
    detail::check_line(out, all, ok.converged() && ok.final_metric <= 1e-8, "GPPA converges with e_k <= 1e-8");
    trace = dca.trace;
  } else {
    fail(ErrorCode::UnknownDemo, "unknown demo '" + name + "' (example-1, example-2, least-squares, dca-divergence)");
  }

  if (!trace_path.empty()) {
    std::ofstream t(trace_path);
    if (!t) fail(ErrorCode::ParseError, "cannot write trace '" + trace_path + "'");
    write_trace_csv(t, trace);
  }
  return all ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------------------

inline std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, "--sizes expects a comma-separated list of positive integers, got '" + s + "'");
    }
  }
  return out;
}

/// Parses `args` (without the program name) and runs the subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"pairprox: proximal point methods for inclusions with monotone operator pairs"};
  app.require_subcommand(1);

  SolveOptions solve_opt;
  auto add_solve_flags = [&](CLI::App* sub) {
    sub->add_option("problem", solve_opt.problem, "problem JSON file")->required();
    auto* k = sub->add_option("--kappa", solve_opt.kappa, "absolute kappa");
    sub->add_option("--kappa-fraction", solve_opt.kappa_fraction, "kappa as a fraction of |alpha|")->excludes(k);
    sub->add_option("--tol", solve_opt.tol, "stopping tolerance");
    sub->add_option("--max-iters", solve_opt.max_iters, "iteration cap");
    sub->add_option("--out", solve_opt.out, "write the solution vector here");
    sub->add_option("--trace", solve_opt.trace, "write the iteration trace CSV here");
  };
  auto* solve_kkt_cmd = app.add_subcommand("solve-kkt", "solve an equality-constrained QP through its KKT system");
  add_solve_flags(solve_kkt_cmd);
  auto* ls_cmd = app.add_subcommand("least-squares", "minimize |Ax - b|^2 for symmetric A");
  add_solve_flags(ls_cmd);

  BenchOptions bench_opt;
  std::string sizes = "400,600,800,1000";
  std::optional<double> bench_kappa;
  std::optional<double> bench_fraction;
  auto* bench_cmd = app.add_subcommand("bench", "benchmark the KKT iteration on seeded random systems");
  bench_cmd->add_option("--sizes", sizes, "comma-separated dimensions");
  bench_cmd->add_option("--trials", bench_opt.spec.trials, "trials per size");
  bench_cmd->add_option("--seed", bench_opt.spec.seed, "base seed");
  auto* bk = bench_cmd->add_option("--kappa", bench_kappa, "absolute kappa (default 0.2)");
  bench_cmd->add_option("--kappa-fraction", bench_fraction, "kappa as a fraction of |alpha|")->excludes(bk);
  bench_cmd->add_option("--tol", bench_opt.spec.tolerance, "tolerance on e_k");
  bench_cmd->add_option("--max-iters", bench_opt.spec.max_iters, "iteration cap");
  bench_cmd->add_option("--zero-fraction", bench_opt.spec.generator.zero_fraction, "fraction of zero eigenvalues");
  bench_cmd->add_option("--spectrum-lo", bench_opt.spec.generator.spectrum_lo, "smallest |eigenvalue|");
  bench_cmd->add_option("--spectrum-hi", bench_opt.spec.generator.spectrum_hi, "largest |eigenvalue|");
  bench_cmd->add_option("--out", bench_opt.out, "write the CSV table here");

  CheckPairOptions check_opt;
  auto* check_cmd = app.add_subcommand("check-pair", "sample the pair monotonicity inequality");
  check_cmd->add_option("problem", check_opt.problem, "JSON file with F, v, box, pairs")->required();
  check_cmd->add_option("--samples", check_opt.samples, "number of sampled pairs");
  check_cmd->add_option("--seed", check_opt.seed, "sampling seed");
  check_cmd->add_option("--box-lo", check_opt.box_lo, "lower bound of the sampling cube");
  check_cmd->add_option("--box-hi", check_opt.box_hi, "upper bound of the sampling cube");

  std::string demo_name;
  std::string demo_trace;
  auto* demo_cmd = app.add_subcommand("demo", "run a curated instance");
  demo_cmd->add_option("name", demo_name, "example-1 | example-2 | least-squares | dca-divergence")->required();
  demo_cmd->add_option("--trace", demo_trace, "write the main run's trace CSV here");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*solve_kkt_cmd) return cmd_solve_kkt(solve_opt, out);
    if (*ls_cmd) return cmd_least_squares(solve_opt, out);
    if (*bench_cmd) {
      bench_opt.spec.sizes = parse_sizes(sizes);
      if (bench_fraction) {
        bench_opt.spec.kappa_absolute.reset();
        bench_opt.spec.kappa_fraction = *bench_fraction;
      } else if (bench_kappa) {
        bench_opt.spec.kappa_absolute = *bench_kappa;
      }
      bench_opt.spec.workers = workers_from_env();
      return cmd_bench(bench_opt, out);
    }
    if (*check_cmd) return cmd_check_pair(check_opt, out);
    if (*demo_cmd) return cmd_demo(demo_name, demo_trace, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace pairprox::cli
