#pragma once

#include "dcci/corrupt.hpp"
#include "dcci/dr.hpp"

#include <iosfwd>
#include <string>

#include <json.hpp>

namespace dcci {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kMissingToken = "NA";

// Writes Y, D, U, W, V (whichever are present) then Z_1..Z_p. Values use 17
// significant digits; unobserved cells are written as NA.
void write_csv(const CorruptedDataset& data, std::ostream& out);

/// Reads a header-first CSV. Columns named Y, D, U, W and V are the outcome,
/// treatment, instrument, unit weights and localization covariate; every
/// other column is a covariate. If neither Y nor D is named, the first column
/// is Y and the second D; covariates_only disables that positional fallback.
/// The token NA (case-sensitive) marks a missing covariate.
CorruptedDataset read_csv(std::istream& in, bool covariates_only = false);
CorruptedDataset read_csv_file(const std::string& path, bool covariates_only = false);

void write_spectrum_csv(const Vector& singular_values, std::ostream& out);

nlohmann::json to_json(const InferenceResult& result);
nlohmann::json to_json(const CorruptionSpec& spec);

std::string format_double(double x);

}  // namespace dcci
