#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "fdpburst/asymptotics.hpp"
#include "fdpburst/factorfit.hpp"
#include "fdpburst/model.hpp"
#include "fdpburst/montecarlo.hpp"

namespace fdpburst::io {

inline constexpr int kSchemaVersion = 1;

/// Parses a JSON experiment config. Relative CSV paths inside the document
/// are resolved against base_dir. Malformed JSON throws ParseError with a
/// line/column location; schema violations (unknown or missing fields,
/// wrong types, wrong schema_version) throw ConfigError naming the field.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

ExperimentConfig load_config(const std::filesystem::path& path);

/// The config as a JSON document accepted by parse_config (loadings and
/// custom matrices are inlined).
std::string config_to_json(const ExperimentConfig& config);

/// Reals with 17 significant digits, '.' decimal separator.
std::string format_real(double x);

/// Dense numeric CSV (no header). Throws ParseError naming the row and
/// column of the first bad cell, or of a ragged row.
DenseMatrix read_matrix_csv(const std::filesystem::path& path);
DenseMatrix parse_matrix_csv(std::string_view text);

/// Loadings CSV: one row per group, "weight,l_1,...,l_k"; an optional header
/// row starting with "weight" is skipped.
LoadingGroups read_loadings_csv(const std::filesystem::path& path);
void write_loadings_csv(const std::filesystem::path& path, const LoadingGroups& loadings);

/// replicates.csv: replicate,r,v,fdp,fpr,tau_bh,w_1..w_k.
void write_replicates_csv(const std::filesystem::path& path,
                          const std::vector<ReplicateOutcome>& outcomes, std::size_t k);
std::vector<ReplicateOutcome> read_replicates_csv(const std::filesystem::path& path);

/// histogram CSV: edge_lo,edge_hi,count,predicted_density. The density
/// column is left empty when no density is given.
void write_histogram_csv(const std::filesystem::path& path, const Histogram& h,
                         const std::function<double(double)>& density = {});

std::string asymptotic_summary_json(const AsymptoticSummary& s);

/// Summary document for a finished experiment: config echo, ExperimentResult
/// summary, AsymptoticSummary and comparison when present.
std::string experiment_summary_json(const ExperimentConfig& config, const ExperimentResult& r);

/// Fields needed to recompute a CLT comparison from a saved summary.json.
struct SavedSummary {
  std::size_t m = 0;
  std::size_t k = 0;
  bool has_asymptotics = false;
  AsymptoticSummary asymptotics;
};
SavedSummary read_summary_json(const std::filesystem::path& path);

std::string comparison_json(const CltComparison& c);

/// Throws IoError if the file cannot be read.
std::string read_text(const std::filesystem::path& path);
/// Writes the file, creating parent directories. Throws IoError on failure.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace fdpburst::io
