// Command-line front end: gen, sparsify, anova, report.

#include <omp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "sparsify/decomposition.hpp"
#include "sparsify/pipeline.hpp"
#include "sparsify/serialize.hpp"
#include "sparsify/testgen.hpp"

using namespace sparsify;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitStage = 3;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Timings live in a side file so the main output stays byte-identical
// across reruns.
class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)), start_(clock::now()) {}

  void stage(const std::string& name) {
    const auto now = clock::now();
    timings_[name] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }

  json reference(const std::string& out_path, const json& config, const json& seeds) const {
    return {{"command", command_},
            {"config_hash", fnv1a(dump_json(config))},
            {"seeds", seeds},
            {"manifest", out_path.empty() ? json(nullptr) : json(out_path + ".manifest.json")}};
  }

  void write(const std::string& out_path, const std::vector<std::string>& inputs, const json& config,
             const json& seeds) const {
    if (out_path.empty()) return;
    json t = json::object();
    for (const auto& [k, v] : timings_) t[k] = v;
    t["total"] = std::chrono::duration<double>(clock::now() - start_).count();
    json m = {{"command", command_}, {"config_hash", fnv1a(dump_json(config))}, {"seeds", seeds},
              {"inputs", inputs},    {"output", out_path},                      {"timings_s", t}};
    write_json_file(out_path + ".manifest.json", m);
  }

 private:
  using clock = std::chrono::steady_clock;
  std::string command_;
  clock::time_point start_;
  clock::time_point last_ = clock::now();
  std::map<std::string, double> timings_;
};

void emit(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    write_json(std::cout, j);
  } else {
    write_json_file(path, j);
  }
}

std::string joined_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

// ---- gen -------------------------------------------------------------------

struct GenOptions {
  std::string out;
  std::uint64_t seed = 0;
  int d = 4;
  int J_size = -1;
  int N = -1;
  double sigma = 0.0;
  bool noisy = false;
  bool rotate = false;
  std::string which = "f1";
  double radius = 1.0;
};

int cmd_gen_matrices(const GenOptions& o, const std::string& cmdline) {
  Manifest man(cmdline);
  MatrixInstanceSpec spec;
  spec.d = o.d;
  spec.N = o.N > 0 ? o.N : o.d * (o.d + 1) / 2;
  const int size = o.J_size > 0 ? o.J_size : max_pattern_size(o.d);
  spec.J = random_pattern(o.d, size, mix_seed(o.seed, 1));
  spec.rotation_seed = mix_seed(o.seed, 2);
  spec.entry_seed = mix_seed(o.seed, 3);
  spec.sigma = o.sigma;
  const MatrixInstance inst = gen_matrix_set(spec);
  man.stage("generate");
  json j = matrix_instance_to_json(inst);
  const json cfg = {{"d", o.d}, {"J_size", size}, {"N", spec.N}, {"sigma", o.sigma}};
  j["run"] = man.reference(o.out, cfg, {{"seed", o.seed}});
  emit(o.out, j);
  man.write(o.out, {}, cfg, {{"seed", o.seed}});
  return 0;
}

int cmd_gen_function(const GenOptions& o, bool builtin, const std::string& cmdline) {
  Manifest man(cmdline);
  FunctionSpec spec = builtin ? builtin_spec(o.which, o.rotate, o.noisy, o.seed, o.radius)
                              : random_function_spec(o.d, o.seed, o.noisy);
  spec.radius = o.radius;
  const SampledFunction f = make_function(spec);
  const int N = o.N > 0 ? o.N : 100 * spec.d;
  const std::uint64_t sample_seed = mix_seed(o.seed, 0x5a4d);
  const PipelineInput in = sample_function(f, N, sample_seed);
  man.stage("sample");
  json j = function_sample_to_json(spec, in, sample_seed);
  const json cfg = {{"kind", builtin ? o.which : "random"}, {"d", spec.d}, {"N", N}, {"noisy", o.noisy},
                    {"rotate", builtin ? o.rotate : true}, {"radius", o.radius}};
  j["run"] = man.reference(o.out, cfg, {{"seed", o.seed}, {"sample_seed", sample_seed}});
  emit(o.out, j);
  man.write(o.out, {}, cfg, {{"seed", o.seed}});
  return 0;
}

// ---- sparsify ----------------------------------------------------------------

struct SparsifyOptions {
  std::string input;
  std::string config;
  std::string out;
  std::string trajectory_dir;
  std::string init, method, selector;
  double h = -1, nu = -1, lambda = -1, delta = -1, tau = -1, eps = -1, span_tol = -1;
  int max_iters = -1;
  std::vector<double> etas;
  std::int64_t seed = -1;
  bool no_block_diag = false;
};

int cmd_sparsify(const SparsifyOptions& o, const std::string& cmdline) {
  Manifest man(cmdline);
  PipelineConfig cfg;
  if (!o.config.empty()) apply_pipeline_config(read_json_file(o.config), cfg);
  // Flags override the config file.
  if (!o.init.empty()) cfg.init = init_from_string(o.init);
  if (!o.method.empty()) cfg.opt.method = method_from_string(o.method);
  if (!o.selector.empty()) cfg.grid.selector = selector_from_string(o.selector);
  if (o.h > 0) cfg.grid.h = o.h;
  if (o.nu > 0) cfg.opt.step = o.nu;
  if (o.lambda > 0) cfg.opt.landing_lambda = o.lambda;
  if (o.delta > 0) cfg.delta = o.delta;
  if (o.tau >= 0) cfg.tau_rel = o.tau;
  if (o.eps > 0) cfg.loss.eps = o.eps;
  if (o.span_tol >= 0) cfg.span_tol_rel = o.span_tol;
  if (o.max_iters >= 0) cfg.opt.max_iters = o.max_iters;
  if (!o.etas.empty()) cfg.etas = o.etas;
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (o.no_block_diag) cfg.block_diag = false;
  cfg.grid.loss = cfg.loss;
  cfg.opt.seed = cfg.seed;

  const json instance = read_json_file(o.input);
  const PipelineInput in = pipeline_input_from_json(instance);
  man.stage("load");
  const PipelineResult res = run_pipeline(in, cfg);
  man.stage("pipeline");

  json rep = pipeline_report(res, cfg);
  if (instance.contains("kind") && instance.at("kind") == "matrices") rep["instance_d"] = instance.value("d", 0);
  rep["run"] = man.reference(o.out, pipeline_config_to_json(cfg), {{"seed", cfg.seed}});
  emit(o.out, rep);

  if (!o.trajectory_dir.empty()) {
    std::filesystem::create_directories(o.trajectory_dir);
    for (std::size_t b = 0; b < res.per_block.size(); ++b) {
      std::ofstream csv(o.trajectory_dir + "/block" + std::to_string(b + 1) + ".csv");
      if (!csv) throw InvalidInput("cannot write trajectory in '" + o.trajectory_dir + "'");
      csv << std::setprecision(17) << "iter,loss,grad_norm,defect\n";
      const auto& recs = res.per_block[b].trajectory.records;
      for (std::size_t r = 0; r < recs.size(); ++r)
        csv << r << ',' << recs[r].loss << ',' << recs[r].grad_norm << ',' << recs[r].defect << '\n';
    }
  }
  man.write(o.out, {o.input}, pipeline_config_to_json(cfg), {{"seed", cfg.seed}});
  return 0;
}

// ---- anova --------------------------------------------------------------------

struct AnovaOptions {
  std::string which;
  std::string spec;
  std::string rotate_by;
  std::string kind = "anova";
  std::string out;
  int order = 2;
  int points = 200;
  int samples = 2000;
  std::uint64_t seed = 0;
  bool rotate = false;
  bool counts = false;
  double tol = 1e-4;
};

int cmd_anova(const AnovaOptions& o, const std::string& cmdline) {
  Manifest man(cmdline);
  FunctionSpec spec;
  if (!o.spec.empty()) {
    const json j = read_json_file(o.spec);
    spec = function_spec_from_json(j.contains("spec") ? j.at("spec") : j);
  } else if (!o.which.empty()) {
    spec = builtin_spec(o.which, o.rotate, false, o.seed);
  } else {
    throw InvalidInput("anova: pass --which or --spec");
  }
  SampledFunction f = make_function(spec);
  if (!o.rotate_by.empty()) {
    const json rep = read_json_file(o.rotate_by);
    f = rotate_function(f, matrix_from_json(rep.at("U_total")));
  }
  const std::vector<Vector> pts = f.sample_points(o.points, mix_seed(o.seed, 0xa0));
  if (o.counts) {
    for (NormKind p : {NormKind::inf, NormKind::one}) {
      const auto c = derivative_smallness_counts(f, pts, p, o.tol);
      std::cout << "p=" << to_string(p) << " G=" << c.G << " H=" << c.H << "\n";
    }
    return 0;
  }
  QuadratureSpec q;
  q.samples_or_nodes = o.samples;
  q.seed = o.seed;
  AnchorConfig anchor{Vector::Zero(f.d)};
  TermKind kind;
  if (o.kind == "anova") kind = TermKind::anova;
  else if (o.kind == "anchored") kind = TermKind::anchored;
  else throw InvalidInput("anova: --kind must be anova or anchored");
  const auto rows = term_norms(f, kind, o.order, pts, q, anchor);
  man.stage("terms");
  if (o.out.empty() || o.out == "-") {
    write_term_norm_csv(std::cout, rows);
  } else {
    std::ofstream csv(o.out);
    if (!csv) throw InvalidInput("cannot write '" + o.out + "'");
    write_term_norm_csv(csv, rows);
    const json cfg = {{"kind", o.kind}, {"order", o.order}, {"points", o.points}, {"samples", o.samples}};
    man.write(o.out, {o.spec}, cfg, {{"seed", o.seed}});
  }
  return 0;
}

// ---- report ------------------------------------------------------------------

struct ReportOptions {
  std::vector<std::string> inputs;
  std::string table;
  std::string out;
};

int cmd_report(const ReportOptions& o) {
  if (o.inputs.empty()) throw InvalidInput("report: no input reports");
  struct Group {
    std::vector<int> chi;
    std::vector<double> gaps;
  };
  // key: (d, init, method, eta)
  std::map<std::tuple<int, std::string, std::string, double>, Group> groups;
  for (const auto& path : o.inputs) {
    // manifests sit next to every report and match the same globs
    if (path.ends_with(".manifest.json")) {
      std::cerr << "report: skipping manifest " << path << "\n";
      continue;
    }
    const json r = read_json_file(path);
    if (!r.contains("config") || !r.contains("chi_by_eta") || !r.contains("d"))
      throw InvalidInput("report: '" + path + "' is not a sparsify report");
    if (r.at("chi_by_eta").is_null()) throw InvalidInput("report: '" + path + "' has no ground truth");
    const auto& c = r.at("config");
    for (const auto& e : r.at("chi_by_eta")) {
      auto& g = groups[{r.at("d").get<int>(), c.at("init").get<std::string>(), c.at("method").get<std::string>(),
                        e.at("eta").get<double>()}];
      g.chi.push_back(e.at("chi").get<int>());
      if (r.contains("optimality_gap") && !r.at("optimality_gap").is_null())
        g.gaps.push_back(r.at("optimality_gap").get<double>());
    }
  }
  if (groups.empty()) throw InvalidInput("report: no reports among the inputs");
  std::ostringstream os;
  os << std::setprecision(17);
  if (o.table == "dim4" || o.table == "dim") {
    os << "d,init,method,eta,i=0,i=1,i=2,i>=3,i<0,trials\n";
    for (const auto& [k, g] : groups) {
      int bins[5] = {0, 0, 0, 0, 0};
      for (int chi : g.chi) bins[chi < 0 ? 4 : std::min(chi, 3)]++;
      os << std::get<0>(k) << ',' << std::get<1>(k) << ',' << std::get<2>(k) << ',' << std::get<3>(k);
      for (int b : bins) os << ',' << b;
      os << ',' << g.chi.size() << '\n';
    }
  } else if (o.table.empty()) {
    os << "d,init,method,eta,trials,failure_ratio,mean_optimality_gap\n";
    for (const auto& [k, g] : groups) {
      double mean_gap = std::nan("");
      if (!g.gaps.empty()) {
        mean_gap = 0.0;
        for (double v : g.gaps) mean_gap += v;
        mean_gap /= static_cast<double>(g.gaps.size());
      }
      os << std::get<0>(k) << ',' << std::get<1>(k) << ',' << std::get<2>(k) << ',' << std::get<3>(k) << ','
         << g.chi.size() << ',' << failure_ratio(g.chi) << ',' << mean_gap << '\n';
    }
  } else {
    throw InvalidInput("report: unknown table '" + o.table + "' (expected dim4)");
  }
  if (o.out.empty() || o.out == "-") {
    std::cout << os.str();
  } else {
    std::ofstream f(o.out);
    if (!f) throw InvalidInput("cannot write '" + o.out + "'");
    f << os.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse additive decomposition via orthogonal transformations"};
  // --h is the grid step, so help is long-form only
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  int jobs = 0;
  app.add_option("--jobs", jobs, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  const std::string cmdline = joined_args(argc, argv);

  // gen
  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate synthetic instances");
  gen_cmd->require_subcommand(1);
  auto* gm = gen_cmd->add_subcommand("matrices", "Jointly sparsifiable matrix family");
  gm->add_option("--d", gen.d, "Dimension")->capture_default_str();
  gm->add_option("--J-size", gen.J_size, "Support size |J| (unordered, diagonal included); default: maximum for d");
  gm->add_option("--N", gen.N, "Number of matrices; default d(d+1)/2");
  gm->add_option("--sigma", gen.sigma, "Gaussian noise std")->capture_default_str();
  gm->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  gm->add_option("-o,--out", gen.out, "Output JSON (default stdout)");
  auto* gf = gen_cmd->add_subcommand("function", "Random sparse additive test function with samples");
  gf->add_option("--d", gen.d, "Dimension")->capture_default_str();
  gf->add_option("--N", gen.N, "Sample points; default 100 d");
  gf->add_flag("--noisy", gen.noisy, "Add the Gaussian-mixture noise function");
  gf->add_option("--radius", gen.radius, "Ball radius")->capture_default_str();
  gf->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  gf->add_option("-o,--out", gen.out, "Output JSON (default stdout)");
  auto* gb = gen_cmd->add_subcommand("builtin", "Built-in 7-d benchmark with samples");
  gb->add_option("--which", gen.which, "f1 or f2")->capture_default_str();
  gb->add_flag("--rotate", gen.rotate, "Compose with a Haar rotation drawn from the seed");
  gb->add_flag("--noisy", gen.noisy, "Add the Gaussian-mixture noise function");
  gb->add_option("--N", gen.N, "Sample points; default 700");
  gb->add_option("--radius", gen.radius, "Ball radius")->capture_default_str();
  gb->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  gb->add_option("-o,--out", gen.out, "Output JSON (default stdout)");

  // sparsify
  SparsifyOptions sp;
  auto* sp_cmd = app.add_subcommand("sparsify", "Run vertex minimization, block split and manifold optimization");
  sp_cmd->add_option("-i,--input", sp.input, "Instance JSON from gen")->required();
  sp_cmd->add_option("--config", sp.config, "Pipeline config JSON (flags override it)");
  sp_cmd->add_option("--init", sp.init, "grid | random | identity (default grid)");
  sp_cmd->add_option("--h", sp.h, "Grid step (default 0.25)");
  sp_cmd->add_option("--selector", sp.selector, "Grid selector: l_half_two | l_eps (default l_half_two)");
  sp_cmd->add_option("--method", sp.method, "rgd | landing (default rgd)");
  sp_cmd->add_option("--nu", sp.nu, "Step size (default 1e-2)");
  sp_cmd->add_option("--lambda", sp.lambda, "Landing penalty (default 1)");
  sp_cmd->add_option("--max-iters", sp.max_iters, "Optimizer iterations (default 20000)");
  sp_cmd->add_option("--delta", sp.delta, "Block-diagonalization tolerance (default 1e-8)");
  sp_cmd->add_option("--tau", sp.tau, "Relative vertex SVD threshold (default 1e-8)");
  sp_cmd->add_option("--eps", sp.eps, "Loss smoothing (default 1e-8)");
  sp_cmd->add_option("--span-tol", sp.span_tol, "Relative span-basis threshold (default 1e-8)");
  sp_cmd->add_flag("--no-block-diag", sp.no_block_diag, "Optimize the whole reduced set as one block");
  sp_cmd->add_option("--eta", sp.etas, "Reporting thresholds, comma separated (default 1e-9,1e-4)")->delimiter(',');
  sp_cmd->add_option("--seed", sp.seed, "Master seed (default 0)");
  sp_cmd->add_option("-o,--out", sp.out, "Report JSON (default stdout)");
  sp_cmd->add_option("--trajectory-dir", sp.trajectory_dir, "Write per-block trajectory CSVs here");

  // anova
  AnovaOptions an;
  auto* an_cmd = app.add_subcommand("anova", "Term norms and derivative counts of a test function");
  an_cmd->add_option("--which", an.which, "Built-in function f1 or f2");
  an_cmd->add_option("--spec", an.spec, "Function spec or function sample JSON");
  an_cmd->add_flag("--rotate", an.rotate, "Rotate the built-in function by a seeded Haar rotation");
  an_cmd->add_option("--rotate-by", an.rotate_by, "Compose with U_total of a sparsify report");
  an_cmd->add_option("--kind", an.kind, "anova | anchored")->capture_default_str();
  an_cmd->add_option("--order", an.order, "Largest subset size")->capture_default_str();
  an_cmd->add_option("--points", an.points, "Evaluation points")->capture_default_str();
  an_cmd->add_option("--samples", an.samples, "Monte Carlo samples per ANOVA projection")->capture_default_str();
  an_cmd->add_option("--seed", an.seed, "Seed")->capture_default_str();
  an_cmd->add_flag("--counts", an.counts, "Print the small-derivative counts G and H instead");
  an_cmd->add_option("--tol", an.tol, "Threshold for --counts")->capture_default_str();
  an_cmd->add_option("-o,--out", an.out, "CSV output (default stdout)");

  // report
  ReportOptions rp;
  auto* rp_cmd = app.add_subcommand("report", "Aggregate sparsify reports");
  rp_cmd->add_option("inputs", rp.inputs, "Report JSON files")->required();
  rp_cmd->add_option("--table", rp.table, "dim4: counts of chi = 0, 1, 2, >= 3 per (d, init, method, eta)");
  rp_cmd->add_option("-o,--out", rp.out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }
  if (jobs > 0) omp_set_num_threads(jobs);

  try {
    if (gm->parsed()) return cmd_gen_matrices(gen, cmdline);
    if (gf->parsed()) return cmd_gen_function(gen, false, cmdline);
    if (gb->parsed()) {
      if (gen.N <= 0) gen.N = 700;
      return cmd_gen_function(gen, true, cmdline);
    }
    if (sp_cmd->parsed()) return cmd_sparsify(sp, cmdline);
    if (an_cmd->parsed()) return cmd_anova(an, cmdline);
    if (rp_cmd->parsed()) return cmd_report(rp);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const StageFailure& e) {
    std::cerr << "stage failure [" << e.stage() << "]: " << e.what() << "\n";
    return kExitStage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return 0;
}
