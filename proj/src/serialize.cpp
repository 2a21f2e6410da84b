#include "sparsify/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sparsify {

namespace {

bool is_flat_numeric(const json& j) {
  if (!j.is_array()) return false;
  for (const auto& e : j)
    if (!e.is_number() && !e.is_null()) return false;
  return true;
}

void write_number(std::ostream& os, const json& j) {
  if (!j.is_number_float()) {
    os << j.dump();
    return;
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    os << "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

void write_value(std::ostream& os, const json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      os << "{}";
      return;
    }
    os << "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) os << ",\n";
      first = false;
      os << pad << json(it.key()).dump() << ": ";
      write_value(os, it.value(), indent, depth + 1);
    }
    os << "\n" << close << "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      os << "[]";
      return;
    }
    if (is_flat_numeric(j)) {
      os << "[";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) os << ", ";
        write_number(os, j[k]);
      }
      os << "]";
      return;
    }
    os << "[\n";
    for (std::size_t k = 0; k < j.size(); ++k) {
      if (k) os << ",\n";
      os << pad;
      write_value(os, j[k], indent, depth + 1);
    }
    os << "\n" << close << "]";
  } else if (j.is_number()) {
    write_number(os, j);
  } else {
    os << j.dump();
  }
}

double num(const json& j) {
  if (j.is_null()) return std::nan("");
  if (!j.is_number()) throw InvalidInput("json: expected a number");
  return j.get<double>();
}

}  // namespace

void write_json(std::ostream& os, const json& j, int indent) {
  write_value(os, j, indent, 0);
  os << "\n";
}

std::string dump_json(const json& j, int indent) {
  std::ostringstream os;
  write_json(os, j, indent);
  return os.str();
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  write_json(out, j);
}

json matrix_to_json(const Matrix& A) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw InvalidInput("json: matrix must be an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix A(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols)
      throw InvalidInput("json: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) A(i, c) = num(j[i][c]);
  }
  return A;
}

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw InvalidInput("json: vector must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = num(j[i]);
  return v;
}

json pattern_to_json(const SparsityPattern& p) {
  json off = json::array();
  for (const auto& [i, j] : p.off_diag) off.push_back({i + 1, j + 1});
  json diag = json::array();
  for (int i : p.diag) diag.push_back(i + 1);
  return {{"d", p.d}, {"off_diag", off}, {"diag", diag}};
}

SparsityPattern pattern_from_json(const json& j) {
  try {
    SparsityPattern p(j.at("d").get<int>());
    auto check = [&](int i) {
      if (i < 1 || i > p.d) throw InvalidInput("pattern: index out of range");
      return i - 1;
    };
    for (const auto& e : j.at("off_diag")) {
      const int a = check(e.at(0).get<int>()), b = check(e.at(1).get<int>());
      if (a == b) throw InvalidInput("pattern: off-diagonal pair with equal indices");
      p.add(a, b);
    }
    for (const auto& e : j.at("diag")) p.diag.insert(check(e.get<int>()));
    return p;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("pattern: ") + e.what());
  }
}

json matrix_set_to_json(const SymmetricMatrixSet& s) {
  json a = json::array();
  for (const auto& m : s) a.push_back(matrix_to_json(m));
  return a;
}

SymmetricMatrixSet matrix_set_from_json(const json& j) {
  if (!j.is_array()) throw InvalidInput("json: matrix set must be an array");
  std::vector<Matrix> mats;
  for (const auto& e : j) mats.push_back(matrix_from_json(e));
  return SymmetricMatrixSet(std::move(mats));
}

json gradient_sample_to_json(const GradientSample& g) {
  json cols = json::array();
  for (int n = 0; n < g.count(); ++n) cols.push_back(vector_to_json(g.B.col(n)));
  json pts = json::array();
  for (const auto& p : g.points) pts.push_back(vector_to_json(p));
  return {{"d", g.dim()}, {"N", g.count()}, {"columns", cols}, {"points", pts}};
}

GradientSample gradient_sample_from_json(const json& j) {
  try {
    const int d = j.at("d").get<int>();
    const auto& cols = j.at("columns");
    GradientSample g;
    g.B = Matrix(d, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t n = 0; n < cols.size(); ++n) {
      const Vector c = vector_from_json(cols[n]);
      if (c.size() != d) throw InvalidInput("gradient sample: column has wrong length");
      g.B.col(static_cast<Eigen::Index>(n)) = c;
    }
    if (j.contains("points"))
      for (const auto& p : j.at("points")) g.points.push_back(vector_from_json(p));
    return g;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("gradient sample: ") + e.what());
  }
}

json block_diag_to_json(const BlockDiagResult& r) {
  json groups = json::array();
  for (const auto& g : r.structure.groups) {
    json a = json::array();
    for (int i : g) a.push_back(i + 1);
    groups.push_back(a);
  }
  return {{"U", matrix_to_json(r.U)},
          {"groups", groups},
          {"profile", r.structure.profile},
          {"off_block_residual", r.off_block_residual},
          {"eigen_gaps", r.eigen_gaps},
          {"commutant_dim", r.commutant_dim}};
}

json function_spec_to_json(const FunctionSpec& s) {
  json terms = json::array();
  for (const auto& t : s.terms)
    terms.push_back({{"c", t.c},
                     {"j", t.j + 1},
                     {"k", t.k + 1},
                     {"g1", {{"kind", to_string(t.g1.kind)}, {"t", t.g1.t}}},
                     {"g2", {{"kind", to_string(t.g2.kind)}, {"t", t.g2.t}}}});
  json comps = json::array();
  for (const auto& c : s.components) {
    json a = json::array();
    for (int i : c) a.push_back(i + 1);
    comps.push_back(a);
  }
  return {{"name", s.name}, {"d", s.d},         {"radius", s.radius},           {"noisy", s.noisy},
          {"seed", s.seed}, {"terms", terms},   {"components", comps},          {"R", matrix_to_json(s.R)}};
}

FunctionSpec function_spec_from_json(const json& j) {
  try {
    FunctionSpec s;
    s.name = j.value("name", "");
    s.d = j.at("d").get<int>();
    s.radius = j.value("radius", 1.0);
    s.noisy = j.value("noisy", false);
    s.seed = j.value("seed", std::uint64_t{0});
    for (const auto& t : j.at("terms")) {
      ProductTerm p;
      p.c = t.at("c").get<double>();
      p.j = t.at("j").get<int>() - 1;
      p.k = t.at("k").get<int>() - 1;
      p.g1 = {factor_kind_from_string(t.at("g1").at("kind").get<std::string>()), t.at("g1").at("t").get<int>()};
      p.g2 = {factor_kind_from_string(t.at("g2").at("kind").get<std::string>()), t.at("g2").at("t").get<int>()};
      s.terms.push_back(p);
    }
    if (j.contains("components"))
      for (const auto& c : j.at("components")) {
        std::vector<int> g;
        for (const auto& i : c) g.push_back(i.get<int>() - 1);
        s.components.push_back(g);
      }
    s.R = j.contains("R") ? matrix_from_json(j.at("R")) : Matrix::Identity(s.d, s.d);
    return s;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("function spec: ") + e.what());
  }
}

json matrix_instance_to_json(const MatrixInstance& inst) {
  json j = {{"kind", "matrices"},
            {"d", inst.spec.d},
            {"N", inst.spec.N},
            {"sigma", inst.spec.sigma},
            {"rotation_seed", inst.spec.rotation_seed},
            {"entry_seed", inst.spec.entry_seed},
            {"truth", {{"R", matrix_to_json(inst.R)}, {"J", pattern_to_json(inst.spec.J)}}},
            {"matrices", matrix_set_to_json(inst.mats)}};
  if (inst.spec.sigma > 0) j["clean"] = matrix_set_to_json(inst.clean);
  return j;
}

json function_sample_to_json(const FunctionSpec& spec, const PipelineInput& in, std::uint64_t sample_seed) {
  json j = {{"kind", "function"},
            {"spec", function_spec_to_json(spec)},
            {"sample_seed", sample_seed},
            {"hessians", matrix_set_to_json(in.hessians)}};
  if (in.gradients) j["gradients"] = gradient_sample_to_json(*in.gradients);
  if (in.truth) j["truth"] = {{"J", pattern_to_json(*in.truth)}};
  return j;
}

PipelineInput pipeline_input_from_json(const json& j) {
  try {
    PipelineInput in;
    const std::string kind = j.value("kind", "matrices");
    if (kind == "matrices") {
      in.hessians = matrix_set_from_json(j.at("matrices"));
      if (j.contains("clean")) in.eval_hessians = matrix_set_from_json(j.at("clean"));
    } else if (kind == "function") {
      in.hessians = matrix_set_from_json(j.at("hessians"));
      if (j.contains("gradients")) in.gradients = gradient_sample_from_json(j.at("gradients"));
    } else {
      throw InvalidInput("instance: unknown kind '" + kind + "'");
    }
    if (j.contains("truth") && j.at("truth").contains("J")) in.truth = pattern_from_json(j.at("truth").at("J"));
    if (kind == "matrices" && j.contains("truth") && j.at("truth").contains("R"))
      in.truth_rotation = matrix_from_json(j.at("truth").at("R"));
    if (in.hessians.empty()) throw InvalidInput("instance: no matrices");
    return in;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("instance: ") + e.what());
  }
}

json pipeline_config_to_json(const PipelineConfig& c) {
  return {{"tau_rel", c.tau_rel},
          {"delta", c.delta},
          {"block_diag", c.block_diag},
          {"span_tol_rel", c.span_tol_rel},
          {"eps", c.loss.eps},
          {"include_diagonal", c.loss.include_diagonal},
          {"normalization", c.loss.normalization == Normalization::mean_over_N ? "mean_over_N" : "inv_sqrt_count"},
          {"method", to_string(c.opt.method)},
          {"nu", c.opt.step},
          {"lambda", c.opt.landing_lambda},
          {"max_iters", c.opt.max_iters},
          {"grad_tol", c.opt.grad_tol},
          {"backtracking", c.opt.backtracking},
          {"init", to_string(c.init)},
          {"h", c.grid.h},
          {"block_size", c.grid.block_size},
          {"selector", to_string(c.grid.selector)},
          {"max_points", c.grid.max_points},
          {"grid_max_block", c.grid_max_block},
          {"random_candidates", c.random_candidates},
          {"random_iters", c.random_iters},
          {"etas", c.etas},
          {"seed", c.seed}};
}

void apply_pipeline_config(const json& j, PipelineConfig& c) {
  if (!j.is_object()) throw InvalidInput("config: expected a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const json& v = it.value();
      if (k == "tau_rel") c.tau_rel = v.get<double>();
      else if (k == "delta") c.delta = v.get<double>();
      else if (k == "block_diag") c.block_diag = v.get<bool>();
      else if (k == "span_tol_rel") c.span_tol_rel = v.get<double>();
      else if (k == "eps") c.loss.eps = v.get<double>();
      else if (k == "include_diagonal") c.loss.include_diagonal = v.get<bool>();
      else if (k == "normalization") {
        const auto s = v.get<std::string>();
        if (s == "mean_over_N") c.loss.normalization = Normalization::mean_over_N;
        else if (s == "inv_sqrt_count") c.loss.normalization = Normalization::inv_sqrt_count;
        else throw InvalidInput("config: unknown normalization '" + s + "'");
      } else if (k == "method") c.opt.method = method_from_string(v.get<std::string>());
      else if (k == "nu") c.opt.step = v.get<double>();
      else if (k == "lambda") c.opt.landing_lambda = v.get<double>();
      else if (k == "max_iters") c.opt.max_iters = v.get<int>();
      else if (k == "grad_tol") c.opt.grad_tol = v.get<double>();
      else if (k == "backtracking") c.opt.backtracking = v.get<bool>();
      else if (k == "init") c.init = init_from_string(v.get<std::string>());
      else if (k == "h") c.grid.h = v.get<double>();
      else if (k == "block_size") c.grid.block_size = v.get<std::int64_t>();
      else if (k == "selector") c.grid.selector = selector_from_string(v.get<std::string>());
      else if (k == "max_points") c.grid.max_points = v.get<double>();
      else if (k == "grid_max_block") c.grid_max_block = v.get<int>();
      else if (k == "random_candidates") c.random_candidates = v.get<int>();
      else if (k == "random_iters") c.random_iters = v.get<int>();
      else if (k == "etas") c.etas = v.get<std::vector<double>>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else throw InvalidInput("config: unknown key '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  c.grid.loss = c.loss;
  c.opt.seed = c.seed;
}

json pipeline_report(const PipelineResult& r, const PipelineConfig& c) {
  json blocks = json::array();
  for (const auto& b : r.per_block) {
    json idx = json::array();
    for (int i : b.indices) idx.push_back(i + 1);
    blocks.push_back({{"size", b.size},
                      {"indices", idx},
                      {"init", to_string(b.init)},
                      {"grid_h", b.grid_h},
                      {"span_dim", b.span_dim},
                      {"init_loss", b.init_loss},
                      {"final_loss", b.final_loss},
                      {"iters", b.iterations},
                      {"stop_reason", b.stop_reason}});
  }
  json patterns = json::array();
  json chis = json::array();
  for (std::size_t k = 0; k < r.etas.size(); ++k) {
    patterns.push_back({{"eta", r.etas[k]}, {"pattern", pattern_to_json(r.patterns[k])}});
    if (k < r.chi.size()) chis.push_back({{"eta", r.etas[k]}, {"chi", r.chi[k]}});
  }
  json rep = {{"config", pipeline_config_to_json(c)},
              {"d", r.d},
              {"d1", r.d1},
              {"singular_values", vector_to_json(r.singular_values)},
              {"border_residual", r.border_residual},
              {"profile", r.blocks.structure.profile},
              {"block_diag", block_diag_to_json(r.blocks)},
              {"per_block", blocks},
              {"patterns_by_eta", patterns},
              {"chi_by_eta", r.chi.empty() ? json(nullptr) : chis},
              {"counting", "ordered entries, diagonal included"},
              {"optimality_gap", r.optimality_gap ? json(*r.optimality_gap) : json(nullptr)},
              {"U_total", matrix_to_json(r.U_total)},
              {"seed", r.seed}};
  return rep;
}

}  // namespace sparsify
