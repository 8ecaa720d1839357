#pragma once

#include <map>
#include <ostream>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "hmmdual/linear_gaussian.hpp"
#include "hmmdual/model.hpp"
#include "hmmdual/types.hpp"

namespace hmmdual {

struct ModelFile {
  FiniteHMM model;
  std::map<std::string, ProbabilityVector> priors;
  std::string hash;  // content hash of the canonical serialization
};

// Loads and validates a model file:
//   {"d": int, "m": int, "A": [[...]], "H": [[...]], "priors": {...}}
// Matrices are row-major; unknown top-level keys are rejected.
ModelFile load_model(const std::string& path,
                     double tol_model = defaults::tol_model);

// Same schema read as a plain linear pair (no generator constraints).
LinearPair load_linear_pair(const std::string& path, double T);

// FNV-1a hash of the canonical model serialization, as fixed-width hex.
std::string model_hash(const FiniteHMM& model,
                       const std::map<std::string, ProbabilityVector>& priors);

// Serializes with fixed field order and floats at 17 significant digits, so
// identical reports are byte-identical.
void dump_json17(const nlohmann::ordered_json& value, std::ostream& os,
                 int indent = 2);
std::string dump_json17(const nlohmann::ordered_json& value, int indent = 2);

// Formats one double the same way the JSON writer does.
std::string format_g17(double x);

}  // namespace hmmdual
