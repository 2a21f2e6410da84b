#pragma once

#include <ostream>
#include <string>

#include "json.hpp"
#include "sparsify/block_diag.hpp"
#include "sparsify/pipeline.hpp"
#include "sparsify/testgen.hpp"

namespace sparsify {

using json = nlohmann::json;

/// Writes j with every floating-point number in %.17g, so reruns produce
/// byte-identical files.
void write_json(std::ostream& os, const json& j, int indent = 2);
std::string dump_json(const json& j, int indent = 2);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

json matrix_to_json(const Matrix& A);  // row-major nested arrays
Matrix matrix_from_json(const json& j);
json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j);

/// {"d", "off_diag": [[i,j],...], "diag": [i,...]} with 1-based indices.
json pattern_to_json(const SparsityPattern& p);
SparsityPattern pattern_from_json(const json& j);

json matrix_set_to_json(const SymmetricMatrixSet& s);
SymmetricMatrixSet matrix_set_from_json(const json& j);

/// {"d", "N", "columns": [[...] per sample], "points": [...]}.
json gradient_sample_to_json(const GradientSample& g);
GradientSample gradient_sample_from_json(const json& j);

json block_diag_to_json(const BlockDiagResult& r);

json function_spec_to_json(const FunctionSpec& s);
FunctionSpec function_spec_from_json(const json& j);

/// Matrix-family instance file ("kind": "matrices").
json matrix_instance_to_json(const MatrixInstance& inst);

/// Function sample file ("kind": "function"): spec plus sampled
/// gradients and Hessians.
json function_sample_to_json(const FunctionSpec& spec, const PipelineInput& in, std::uint64_t sample_seed);

/// Reads either instance kind into pipeline inputs. For noisy matrix
/// instances with a stored clean set, patterns are evaluated on it.
PipelineInput pipeline_input_from_json(const json& j);

json pipeline_config_to_json(const PipelineConfig& c);
/// Overrides fields present in j; unknown keys are rejected.
void apply_pipeline_config(const json& j, PipelineConfig& c);

json pipeline_report(const PipelineResult& r, const PipelineConfig& c);

}  // namespace sparsify
