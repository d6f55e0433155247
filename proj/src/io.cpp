#include "dcci/io.hpp"

#include "dcci/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace dcci {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(field);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

double parse_number(const std::string& text, std::size_t line, std::size_t col) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw DimensionError("line " + std::to_string(line) + ", column " + std::to_string(col + 1) +
                         ": cannot parse '" + text + "' as a number");
  }
  return value;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_csv(const CorruptedDataset& data, std::ostream& out) {
  data.validate();
  std::vector<std::pair<std::string, const Vector*>> named;
  if (data.y) named.emplace_back("Y", &*data.y);
  if (data.d) named.emplace_back("D", &*data.d);
  if (data.instrument) named.emplace_back("U", &*data.instrument);
  if (data.weights) named.emplace_back("W", &*data.weights);
  if (data.v) named.emplace_back("V", &*data.v);
  bool first = true;
  auto sep = [&] {
    if (!first) out << ',';
    first = false;
  };
  for (const auto& [name, _] : named) {
    sep();
    out << name;
  }
  for (Index j = 0; j < data.cols(); ++j) {
    sep();
    out << "Z_" << (j + 1);
  }
  out << '\n';
  for (Index i = 0; i < data.rows(); ++i) {
    first = true;
    for (const auto& [_, vec] : named) {
      sep();
      out << format_double((*vec)(i));
    }
    for (Index j = 0; j < data.cols(); ++j) {
      sep();
      if (data.z.observed(i, j)) {
        out << format_double(data.z.values(i, j));
      } else {
        out << kMissingToken;
      }
    }
    out << '\n';
  }
}

CorruptedDataset read_csv(std::istream& in, bool covariates_only) {
  std::string line;
  if (!std::getline(in, line)) throw DimensionError("CSV input is empty");
  const std::vector<std::string> header = split_line(line);

  enum class Role { y, d, u, w, v, z };
  std::vector<Role> roles(header.size(), Role::z);
  {
    bool named = false;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const std::string& h = header[c];
      if (h == "Y") roles[c] = Role::y, named = true;
      else if (h == "D") roles[c] = Role::d, named = true;
      else if (h == "U") roles[c] = Role::u;
      else if (h == "W") roles[c] = Role::w;
      else if (h == "V") roles[c] = Role::v;
    }
    if (!named && !covariates_only) {
      if (header.size() < 3) throw DimensionError("CSV needs Y, D and at least one covariate column");
      roles[0] = Role::y;
      roles[1] = Role::d;
    }
  }
  std::size_t n_cov = 0;
  for (Role r : roles) n_cov += r == Role::z;
  if (n_cov == 0) throw DimensionError("CSV has no covariate columns");

  std::vector<std::vector<double>> named_cols(5);
  std::vector<double> z_values;
  std::vector<char> z_observed;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != header.size()) {
      throw DimensionError("line " + std::to_string(line_no) + " has " +
                           std::to_string(fields.size()) + " fields, header has " +
                           std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const bool missing = fields[c] == kMissingToken;
      if (roles[c] == Role::z) {
        z_observed.push_back(missing ? 0 : 1);
        z_values.push_back(missing ? kMissing : parse_number(fields[c], line_no, c));
      } else {
        if (missing) {
          throw DimensionError("line " + std::to_string(line_no) + ": column '" + header[c] +
                               "' may not be NA");
        }
        named_cols[static_cast<std::size_t>(roles[c])].push_back(parse_number(fields[c], line_no, c));
      }
    }
    ++rows;
  }
  if (rows == 0) throw DimensionError("CSV has a header but no rows");

  CorruptedDataset data;
  const auto n = static_cast<Index>(rows);
  const auto p = static_cast<Index>(n_cov);
  Matrix values(n, p);
  BoolMatrix observed(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) {
      const auto idx = static_cast<std::size_t>(i * p + j);
      values(i, j) = z_values[idx];
      observed(i, j) = z_observed[idx] != 0;
    }
  }
  data.z = MaskedMatrix(std::move(values), std::move(observed));
  auto take = [&](Role r) -> std::optional<Vector> {
    const auto& col = named_cols[static_cast<std::size_t>(r)];
    if (col.empty()) return std::nullopt;
    return Eigen::Map<const Vector>(col.data(), static_cast<Index>(col.size()));
  };
  data.y = take(Role::y);
  data.d = take(Role::d);
  data.instrument = take(Role::u);
  data.weights = take(Role::w);
  data.v = take(Role::v);
  data.validate();
  return data;
}

CorruptedDataset read_csv_file(const std::string& path, bool covariates_only) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_csv(in, covariates_only);
}

void write_spectrum_csv(const Vector& singular_values, std::ostream& out) {
  out << "index,singular_value\n";
  for (Index i = 0; i < singular_values.size(); ++i) {
    out << (i + 1) << ',' << format_double(singular_values(i)) << '\n';
  }
}

nlohmann::json to_json(const InferenceResult& result) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["theta_hat"] = result.theta_hat;
  j["sigma_hat"] = result.sigma_hat;
  j["standard_error"] = result.standard_error();
  j["ci_low"] = result.ci_low;
  j["ci_high"] = result.ci_high;
  j["n"] = result.n;
  j["psi"] = std::vector<double>(result.psi.data(), result.psi.data() + result.psi.size());
  if (result.theta_numerator) j["theta_numerator"] = *result.theta_numerator;
  if (result.theta_denominator) j["theta_denominator"] = *result.theta_denominator;
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& d : result.fold_diagnostics) {
    folds.push_back({{"fold", d.fold},
                     {"stage", d.stage},
                     {"train_rows", d.train_rows},
                     {"test_rows", d.test_rows},
                     {"regression_rank", d.regression_rank},
                     {"regression_min_singular", d.regression_min_singular},
                     {"balance_rank", d.balance_rank},
                     {"balance_min_singular", d.balance_min_singular},
                     {"balance_residual_max_abs", d.balance_residual},
                     {"rowspace_residual", d.rowspace_residual}});
  }
  j["fold_diagnostics"] = folds;
  return j;
}

nlohmann::json to_json(const CorruptionSpec& spec) {
  nlohmann::json j;
  j["noise"] = to_string(spec.noise);
  j["sigma_h"] = spec.sigma_h;
  j["rho"] = spec.rho;
  j["correlated_missing"] = spec.correlated_missing;
  if (spec.noisy_columns) j["noisy_columns"] = *spec.noisy_columns;
  j["seed"] = spec.seed;
  return j;
}

}  // namespace dcci
