// Command-line front end for the sigpath library. Kept in a header so the
// test suite can drive the same entry point the executable uses.
#pragma once

#include "sigpath/sigpath.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace sigpath::cli {

/// Exit codes: 0 success, 1 classification/convergence failure, 2 usage error.
enum Exit : int { ok = 0, failed = 1, usage = 2 };

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CoreSpec {
  enum class Kind { axis, mono, generic, file } kind = Kind::axis;
  Index m = 0;
  Index steps = 0;  // generic: number of random steps M
  std::uint64_t seed = 0;
  std::string path;

  Tensor3 build() const {
    switch (kind) {
      case Kind::axis: return core_axis(m);
      case Kind::mono: return core_mono(m);
      case Kind::generic: return core_generic(m, steps, seed);
      default: return tensor_from_json(read_json_file(path));
    }
  }
};

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, sep);) out.push_back(part);
  return out;
}

inline long long parse_int(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("invalid ") + what + ": '" + s + "'");
  }
}

/// "a..b" or "a".
inline std::pair<Index, Index> parse_range(const std::string& s, const char* what) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    const Index v = parse_int(s, what);
    return {v, v};
  }
  const Index lo = parse_int(s.substr(0, dots), what), hi = parse_int(s.substr(dots + 2), what);
  if (lo > hi) throw UsageError(std::string("empty range for ") + what + ": '" + s + "'");
  return {lo, hi};
}

/// Core specs: axis:m, mono:m, gen:m, gen:m:M:seed, or a tensor JSON file.
/// `m_override` replaces the side when iterating over a range.
inline CoreSpec parse_core(const std::string& text, std::uint64_t default_seed,
                           std::optional<Index> m_override = std::nullopt) {
  CoreSpec spec;
  const auto parts = split(text, ':');
  const std::string& kind = parts.empty() ? text : parts[0];
  if (kind == "axis" || kind == "mono" || kind == "gen" || kind == "generic") {
    if (parts.size() < 2) throw UsageError("core spec '" + text + "' needs a size, e.g. axis:3");
    spec.kind = kind == "axis"   ? CoreSpec::Kind::axis
                : kind == "mono" ? CoreSpec::Kind::mono
                                 : CoreSpec::Kind::generic;
    spec.m = m_override ? *m_override : parse_int(parts[1], "core size");
    if (spec.m < 1) throw UsageError("core size must be >= 1");
    spec.seed = default_seed;
    if (spec.kind == CoreSpec::Kind::generic) {
      spec.steps = parts.size() > 2 && !parts[2].empty() ? parse_int(parts[2], "step count")
                                                         : min_generic_steps(spec.m);
      if (parts.size() > 3) spec.seed = static_cast<std::uint64_t>(parse_int(parts[3], "seed"));
      if (spec.steps < min_generic_steps(spec.m))
        throw UsageError("gen core needs M >= " + std::to_string(min_generic_steps(spec.m)));
    } else if (parts.size() > 2) {
      throw UsageError("unexpected fields in core spec '" + text + "'");
    }
    return spec;
  }
  spec.kind = CoreSpec::Kind::file;
  spec.path = text;
  return spec;
}

inline unsigned thread_count() {
  if (const char* env = std::getenv("SIGPATH_THREADS")) {
    const long long v = std::atoll(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline void emit(const std::string& out_path, const std::string& text, std::ostream& out) {
  if (out_path.empty() || out_path == "-")
    out << text;
  else
    write_text_file(out_path, text);
}

inline void emit_json(const std::string& out_path, const json& j, std::ostream& out) {
  emit(out_path, j.dump(1) + "\n", out);
}

struct OptimizerFlags {
  std::uint64_t seed = 0;
  double tol = 1e-10;
  int restarts = 10;
  int max_bfgs = 100;
  int max_tr = 1000;
  double success_tol = 1e-5;
  double illcond_tol = 1e-8;
  double init_scale = 1.0;
  bool full_newton = false;

  void attach(CLI::App* cmd, bool with_restarts = true) {
    cmd->add_option("--seed", seed, "PRNG seed");
    cmd->add_option("--tol", tol, "gradient-norm stopping tolerance");
    if (with_restarts) cmd->add_option("--restarts", restarts, "random (re)initializations");
    cmd->add_option("--max-bfgs", max_bfgs, "BFGS iterations per run");
    cmd->add_option("--max-tr", max_tr, "trust-region iterations per run");
    cmd->add_option("--success-tol", success_tol, "relative matrix error for success");
    cmd->add_option("--illcond-tol", illcond_tol, "relative signature residual for a match");
    cmd->add_option("--init-scale", init_scale, "standard deviation of starting points");
    cmd->add_flag("--full-newton", full_newton, "use the exact Hessian in the trust-region model");
  }

  RecoveryConfig config() const {
    RecoveryConfig c;
    c.grad_tol = tol;
    c.restarts = restarts;
    c.max_bfgs = max_bfgs;
    c.max_tr = max_tr;
    c.seed = seed;
    c.success_tol = success_tol;
    c.illcond_tol = illcond_tol;
    c.init_scale = init_scale;
    c.full_newton = full_newton;
    return c;
  }
};

inline PathFormat parse_format(const std::string& f) {
  if (f == "csv") return PathFormat::csv;
  if (f == "json") return PathFormat::json;
  if (f == "svg") return PathFormat::svg;
  throw UsageError("unknown format '" + f + "' (csv, json, svg)");
}

inline Dictionary parse_dictionary(const std::string& d) {
  if (d == "axis") return Dictionary::axis;
  if (d == "mono") return Dictionary::mono;
  if (d == "gen" || d == "generic") return Dictionary::generic;
  throw UsageError("unknown dictionary '" + d + "' (axis, mono, generic)");
}

inline std::string bounds_csv_header() {
  return "m,norm_C,sigma1,sigma2,sigma3,sigma_concat,lower_bound,upper_bound\n";
}

inline std::string bounds_csv_row(const BoundsReport& b) {
  std::ostringstream os;
  os.precision(17);
  os << b.m << ',' << b.norm_c << ',' << b.sigma_flat[0] << ',' << b.sigma_flat[1] << ','
     << b.sigma_flat[2] << ',' << b.sigma_concat << ',' << b.lower_bound << ',' << b.upper_bound
     << '\n';
  return os.str();
}

/// Run the tool. argv[0] is the program name.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"sigpath: third-order path signatures, path recovery and shortest paths"};
  app.require_subcommand(1);

  // gen-core
  std::string core_text, out_path;
  std::uint64_t seed = 0;
  auto* gen = app.add_subcommand("gen-core", "write a dictionary core tensor as JSON");
  gen->add_option("--core", core_text, "axis:m | mono:m | gen:m[:M[:seed]]")->required();
  gen->add_option("--seed", seed, "seed for gen cores without an explicit seed");
  gen->add_option("--out", out_path, "output file (default stdout)");

  // sig
  std::string x_path;
  auto* sig = app.add_subcommand("sig", "signature triple of the path X psi");
  sig->add_option("--core", core_text, "core spec or tensor file")->required();
  sig->add_option("--x", x_path, "coefficient matrix JSON (d x m)")->required();
  sig->add_option("--seed", seed, "seed for gen cores");
  sig->add_option("--out", out_path, "output file (default stdout)");

  // sig-pl
  std::string steps_path;
  auto* sigpl = app.add_subcommand("sig-pl", "signature triple of a piecewise-linear path");
  sigpl->add_option("--steps", steps_path, "step matrix JSON (d x M, one step per column)")->required();
  sigpl->add_option("--out", out_path, "output file (default stdout)");

  // recover
  std::string sig_path, truth_path;
  OptimizerFlags rec_flags;
  auto* rec = app.add_subcommand("recover", "recover X from a signature tensor");
  rec->add_option("--core", core_text, "core spec or tensor file")->required();
  rec->add_option("--signature", sig_path, "signature tensor or triple JSON")->required();
  rec->add_option("--truth", truth_path, "true X, enables classification");
  rec->add_option("--out", out_path, "report file (default stdout)");
  rec_flags.attach(rec);

  // bounds
  std::string csv_path;
  int samples = 1;
  double rank_tol = 1e-10;
  auto* bnd = app.add_subcommand("bounds", "identifiability certificates and kappa(C) bounds");
  bnd->add_option("--core", core_text, "core spec; the size may be a range, e.g. mono:2..13")->required();
  bnd->add_option("--samples", samples, "gen cores: average over this many seeds");
  bnd->add_option("--seed", seed, "base seed for gen cores");
  bnd->add_option("--tol", rank_tol, "relative rank tolerance for the certificates");
  bnd->add_option("--out", out_path, "JSON report (default stdout)");
  bnd->add_option("--csv", csv_path, "CSV rows for plotting");

  // experiment
  std::string dict_text, m_text, d_text;
  int trials = 20;
  OptimizerFlags exp_flags;
  auto* exp = app.add_subcommand("experiment", "recovery success rates on random paths");
  exp->add_option("--dict", dict_text, "axis | mono | generic")->required();
  exp->add_option("--m", m_text, "dictionary sizes, e.g. 2..6")->required();
  exp->add_option("--d", d_text, "ambient dimensions, e.g. 2..10")->required();
  exp->add_option("--trials", trials, "trials per cell");
  exp->add_option("--out", out_path, "CSV output (default stdout)");
  exp_flags.attach(exp);

  // shortest
  std::string svg_path;
  Index steps = 0;
  int starts = 1;
  double lambda0 = 1.0, lambda_max = 1073741824.0;
  OptimizerFlags sp_flags;
  sp_flags.max_tr = 200;
  auto* sp = app.add_subcommand("shortest", "shortest piecewise-linear path with a given signature");
  sp->add_option("--signature", sig_path, "signature tensor or triple JSON")->required();
  sp->add_option("--steps", steps, "number of linear steps m")->required();
  sp->add_option("--starts", starts, "independent random starts");
  sp->add_option("--lambda0", lambda0, "initial continuation parameter");
  sp->add_option("--lambda-max", lambda_max, "continuation stops doubling beyond this");
  sp->add_option("--out", out_path, "JSON result (default stdout)");
  sp->add_option("--svg", svg_path, "also write an SVG plot (d = 2 or 3)");
  sp_flags.attach(sp, false);

  // export-path
  std::string format = "csv";
  auto* ex = app.add_subcommand("export-path", "vertex list of a step matrix as CSV, JSON or SVG");
  ex->add_option("--x", x_path, "step matrix JSON (d x m)")->required();
  ex->add_option("--format", format, "csv | json | svg");
  ex->add_option("--out", out_path, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return Exit::ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return Exit::usage;
  }

  try {
    if (*gen) {
      emit_json(out_path, to_json(parse_core(core_text, seed).build()), out);
      return Exit::ok;
    }
    if (*sig) {
      const Tensor3 c = parse_core(core_text, seed).build();
      const Mat x = mat_from_json(read_json_file(x_path));
      if (!universal_membership(c, 1e-10).member)
        err << "warning: core tensor fails the universal-variety test; lower signatures may be "
               "meaningless\n";
      emit_json(out_path, to_json(sig_of_matrix(c, x)), out);
      return Exit::ok;
    }
    if (*sigpl) {
      emit_json(out_path, to_json(sig_pl(PathPL{mat_from_json(read_json_file(steps_path))})), out);
      return Exit::ok;
    }
    if (*rec) {
      const Tensor3 c = parse_core(core_text, rec_flags.seed).build();
      const Tensor3 s = signature_tensor_from_json(read_json_file(sig_path));
      const RecoveryConfig cfg = rec_flags.config();
      RecoveryReport report = minimize(c, s, cfg);
      int code = Exit::ok;
      if (!truth_path.empty()) {
        const Mat truth = mat_from_json(read_json_file(truth_path));
        if (truth.rows() != s.dim(0) || truth.cols() != c.dim(0))
          throw UsageError("--truth has the wrong shape");
        if (classify(report, truth, s, c, cfg) != Classification::success) code = Exit::failed;
      }
      emit_json(out_path, to_json(report), out);
      return code;
    }
    if (*bnd) {
      const auto parts = split(core_text, ':');
      if (samples < 1) throw UsageError("--samples must be >= 1");
      std::pair<Index, Index> range{0, 0};
      bool ranged = parts.size() >= 2 && (parts[0] == "axis" || parts[0] == "mono" ||
                                          parts[0] == "gen" || parts[0] == "generic");
      if (ranged) range = parse_range(parts[1], "core size");
      json reports = json::array();
      std::string csv = bounds_csv_header();
      auto one = [&](std::optional<Index> m) {
        const CoreSpec base = parse_core(core_text, seed, m);
        const int n = base.kind == CoreSpec::Kind::generic ? samples : 1;
        BoundsReport avg;
        bool concise = true, finite = true;
        for (int k = 0; k < n; ++k) {
          CoreSpec spec = base;
          if (spec.kind == CoreSpec::Kind::generic)
            spec.seed = parts.size() > 3 ? base.seed + static_cast<std::uint64_t>(k)
                                         : stream_seed(seed, {static_cast<std::uint64_t>(k)});
          const Tensor3 c = spec.build();
          const BoundsReport b = kappa_bounds(c);
          concise = concise && is_symmetrically_concise(c, rank_tol);
          finite = finite && finite_stabilizer_certificate(c);
          avg.m = b.m;
          avg.norm_c += b.norm_c / n;
          for (int i = 0; i < 3; ++i) avg.sigma_flat[i] += b.sigma_flat[i] / n;
          avg.sigma_concat += b.sigma_concat / n;
          avg.upper_bound += b.upper_bound / n;
          avg.lower_bound += b.lower_bound / n;
        }
        json j = to_json(avg);
        j["samples"] = n;
        j["symmetrically_concise"] = concise;
        j["finite_stabilizer_certificate"] = finite;
        reports.push_back(j);
        csv += bounds_csv_row(avg);
      };
      if (ranged)
        for (Index m = range.first; m <= range.second; ++m) one(m);
      else
        one(std::nullopt);
      emit_json(out_path, reports.size() == 1 ? reports[0] : reports, out);
      if (!csv_path.empty()) write_text_file(csv_path, csv);
      return Exit::ok;
    }
    if (*exp) {
      const auto cells = experiment_grid(parse_dictionary(dict_text), parse_range(m_text, "--m"),
                                         parse_range(d_text, "--d"), trials, exp_flags.config(),
                                         thread_count());
      std::ostringstream os;
      os.precision(10);
      os << "m,d,success_pct,illcond_count,mean_residual,mean_iters\n";
      for (const auto& c : cells)
        os << c.m << ',' << c.d << ',' << c.success_pct() << ',' << c.illcond << ','
           << c.mean_residual << ',' << c.mean_iters << '\n';
      emit(out_path, os.str(), out);
      return Exit::ok;
    }
    if (*sp) {
      if (steps < 1) throw UsageError("--steps must be >= 1");
      const Tensor3 s = signature_tensor_from_json(read_json_file(sig_path));
      ContinuationConfig cfg;
      cfg.lambda0 = lambda0;
      cfg.lambda_max = lambda_max;
      cfg.starts = starts;
      cfg.inner = sp_flags.config();
      const ShortestResult r = shortest(s, steps, cfg);
      for (const auto& w : r.warnings) err << "warning: " << w << "\n";
      json j = {{"X", to_json(r.x)},         {"length", r.length},
                {"residual", r.residual},    {"reached", r.reached},
                {"final_lambda", r.final_lambda}, {"stages", r.stages}};
      emit_json(out_path, j, out);
      if (!svg_path.empty()) write_text_file(svg_path, export_path(r.x, PathFormat::svg));
      return r.reached ? Exit::ok : Exit::failed;
    }
    if (*ex) {
      // a bare matrix, or the result object written by `shortest`
      const json j = read_json_file(x_path);
      const Mat x = mat_from_json(j.is_object() && j.contains("X") ? j.at("X") : j);
      emit(out_path, export_path(x, parse_format(format)), out);
      return Exit::ok;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return Exit::usage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return Exit::usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return Exit::failed;
  }
  return Exit::usage;
}

}  // namespace sigpath::cli
