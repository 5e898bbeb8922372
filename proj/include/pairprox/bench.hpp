#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "pairprox/applications.hpp"
#include "pairprox/error.hpp"
#include "pairprox/random.hpp"
#include "pairprox/trace_csv.hpp"

namespace pairprox {

struct BenchSpec {
  std::vector<std::size_t> sizes{400, 600, 800, 1000};
  std::size_t trials = 5;
  std::uint64_t seed = 20240101;
  // kappa = kappa_absolute when set, else kappa_fraction * |alpha| (needs an
  // eigendecomposition per instance).
  std::optional<double> kappa_absolute = 0.2;
  double kappa_fraction = 0.4;
  double tolerance = 1.5e-4;
  std::size_t max_iters = 10000;
  GeneratorParams generator;
  unsigned workers = 1;

  void validate() const {
    require(!sizes.empty(), ErrorCode::InvalidArgument, "bench needs at least one size");
    for (auto n : sizes) require(n >= 1, ErrorCode::InvalidArgument, "bench sizes must be >= 1");
    require(trials >= 1, ErrorCode::InvalidArgument, "bench needs at least one trial");
    require(tolerance > 0.0, ErrorCode::InvalidArgument, "bench tolerance must be positive");
    if (kappa_absolute) require(*kappa_absolute > 0.0, ErrorCode::InvalidArgument, "kappa must be positive");
  }
};

struct RunRecord {
  std::size_t n = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  double seconds = 0.0;
  double ek = 0.0;
  std::string status;
};

inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t n, std::size_t trial) {
  return seed ^ SplitMix64::mix((static_cast<std::uint64_t>(n) << 32) ^ static_cast<std::uint64_t>(trial));
}

/// Worker count from PAIRPROX_WORKERS (default 1).
inline unsigned workers_from_env() {
  const char* raw = std::getenv("PAIRPROX_WORKERS");
  if (!raw || !*raw) return 1;
  try {
    const long v = std::stol(raw);
    return v >= 1 ? static_cast<unsigned>(v) : 1u;
  } catch (const std::exception&) {
    return 1;
  }
}

inline RunRecord run_bench_trial(const BenchSpec& spec, std::size_t n, std::size_t trial) {
  RunRecord rec;
  rec.n = n;
  rec.trial = trial;
  rec.seed = trial_seed(spec.seed, n, trial);
  const auto sys = generate_consistent_system(n, rec.seed, spec.generator);
  const double kappa = spec.kappa_absolute ? *spec.kappa_absolute : select_kappa(sys.A, spec.kappa_fraction).kappa;
  SolverConfig cfg;
  cfg.tol_residual = spec.tolerance;
  cfg.max_iters = spec.max_iters;
  const auto start = std::chrono::steady_clock::now();
  try {
    const auto result = solve_linear_system(sys.A, sys.b, kappa, Vector(n), cfg);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.iterations = result.iterations;
    rec.ek = result.final_metric;
    rec.status = to_string(result.status);
    if (result.status == SolveStatus::Failed) rec.status += "(" + result.failure_reason + ")";
  } catch (const Error& e) {
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.ek = std::numeric_limits<double>::quiet_NaN();
    rec.status = std::string("Failed(") + std::string(to_string(e.code())) + ")";
  }
  return rec;
}

/// Rows come back sorted by (n, trial) whatever the worker count.
inline std::vector<RunRecord> run_bench(const BenchSpec& spec) {
  spec.validate();
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (auto n : spec.sizes)
    for (std::size_t t = 0; t < spec.trials; ++t) jobs.emplace_back(n, t);
  std::vector<RunRecord> records(jobs.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(spec.workers, static_cast<unsigned>(jobs.size())));
  if (workers == 1) {
    for (std::size_t k = 0; k < jobs.size(); ++k) records[k] = run_bench_trial(spec, jobs[k].first, jobs[k].second);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < jobs.size(); k += workers) {
          records[k] = run_bench_trial(spec, jobs[k].first, jobs[k].second);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  std::stable_sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return a.n != b.n ? a.n < b.n : a.trial < b.trial;
  });
  return records;
}

inline constexpr const char* kBenchCsvHeader = "n,trial,seed,iters,seconds,ek,status";

inline void write_bench_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << kBenchCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.n << ',' << r.trial << ',' << r.seed << ',' << r.iterations << ',' << detail::format_double(r.seconds)
        << ',' << detail::format_double(r.ek) << ',' << r.status << '\n';
  }
}

/// Lines starting with '#' (the summary) are skipped.
inline std::vector<RunRecord> read_bench_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != kBenchCsvHeader) {
    fail(ErrorCode::ParseError, std::string("bench csv: expected header '") + kBenchCsvHeader + "'");
  }
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 7) fail(ErrorCode::ParseError, "bench csv line " + std::to_string(line_no) + ": expected 7 fields");
    try {
      RunRecord r;
      r.n = std::stoull(f[0]);
      r.trial = std::stoull(f[1]);
      r.seed = std::stoull(f[2]);
      r.iterations = std::stoull(f[3]);
      r.seconds = detail::parse_csv_double(f[4], line_no);
      r.ek = detail::parse_csv_double(f[5], line_no);
      r.status = f[6];
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      fail(ErrorCode::ParseError, "bench csv line " + std::to_string(line_no) + ": bad integer field");
    }
  }
  return out;
}

struct SizeSummary {
  std::size_t n = 0;
  std::size_t trials = 0;
  std::size_t converged = 0;
  double median_iterations = 0.0;
  double median_seconds = 0.0;
  double median_ek = 0.0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline std::vector<SizeSummary> summarize(const std::vector<RunRecord>& records) {
  std::map<std::size_t, std::vector<const RunRecord*>> by_size;
  for (const auto& r : records) by_size[r.n].push_back(&r);
  std::vector<SizeSummary> out;
  for (const auto& [n, rows] : by_size) {
    SizeSummary s;
    s.n = n;
    s.trials = rows.size();
    std::vector<double> iters, secs, eks;
    for (const auto* r : rows) {
      if (r->status == "Converged") ++s.converged;
      iters.push_back(static_cast<double>(r->iterations));
      secs.push_back(r->seconds);
      eks.push_back(r->ek);
    }
    s.median_iterations = median(iters);
    s.median_seconds = median(secs);
    s.median_ek = median(eks);
    out.push_back(s);
  }
  return out;
}

inline void write_summary(std::ostream& out, const std::vector<SizeSummary>& summary) {
  for (const auto& s : summary) {
    out << "# n=" << s.n << " converged=" << s.converged << "/" << s.trials
        << " median_iters=" << s.median_iterations << " median_seconds=" << detail::format_double(s.median_seconds)
        << " median_ek=" << detail::format_double(s.median_ek) << '\n';
  }
}

}  // namespace pairprox
