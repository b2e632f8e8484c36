#include "fdpburst/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <limits>
#include <set>
#include <sstream>

#include "fdpburst/error.hpp"

namespace fdpburst::io {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------- text / csv

std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  std::ostringstream out;
  out << "line " << line << ", column " << col;
  return out.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  while (!out.empty() && trim(out.back()).empty()) out.pop_back();
  return out;
}

bool parse_double(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return res.ec == std::errc() && res.ptr == cell.data() + cell.size();
}

double cell_double(std::string_view cell, std::size_t row, std::size_t col, const std::string& where) {
  double v = 0.0;
  if (!parse_double(cell, v) || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << where << ": non-numeric cell at row " << row << ", column " << col << ": '" << cell << "'";
    throw ParseError(msg.str());
  }
  return v;
}

std::uint64_t cell_uint(std::string_view cell, std::size_t row, std::size_t col, const std::string& where) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    std::ostringstream msg;
    msg << where << ": expected a non-negative integer at row " << row << ", column " << col
        << ": '" << cell << "'";
    throw ParseError(msg.str());
  }
  return v;
}

// ---------------------------------------------------------------- json input

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw ConfigError("config " + path + ": " + what);
}

void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) schema_error(path + "." + key, "unknown field");
  }
}

const Json& require(const Json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing required field");
  return *it;
}

double as_real(const Json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  return v.get<double>();
}

std::uint64_t as_count(const Json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
  }
  schema_error(path, "expected a non-negative integer");
}

std::string as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) schema_error(path, "expected a string");
  return v.get<std::string>();
}

std::vector<double> as_real_array(const Json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_real(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

NonnullSchedule parse_schedule(const Json& j) {
  const std::string path = "schedule";
  const std::string kind = as_string(require(j, path, "kind"), path + ".kind");
  if (kind == "fixed") {
    check_keys(j, path, {"kind", "pi1"});
    return NonnullSchedule::fixed(as_real(require(j, path, "pi1"), path + ".pi1"));
  }
  if (kind == "power_law") {
    check_keys(j, path, {"kind", "c", "a"});
    return NonnullSchedule::power_law(as_real(require(j, path, "c"), path + ".c"),
                                      as_real(require(j, path, "a"), path + ".a"));
  }
  schema_error(path + ".kind", "must be \"fixed\" or \"power_law\"");
}

LoadingGroups parse_loadings(const Json& j, const fs::path& base) {
  const std::string path = "loadings";
  check_keys(j, path, {"groups", "csv"});
  if (j.contains("csv")) {
    if (j.contains("groups")) schema_error(path, "give either groups or csv, not both");
    return read_loadings_csv(resolve(base, as_string(j["csv"], path + ".csv")));
  }
  const Json& groups = require(j, path, "groups");
  if (!groups.is_array() || groups.empty()) schema_error(path + ".groups", "expected a non-empty array");
  LoadingGroups out;
  out.groups.clear();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::string gp = path + ".groups[" + std::to_string(g) + "]";
    check_keys(groups[g], gp, {"weight", "loading"});
    LoadingGroup lg;
    lg.weight = as_real(require(groups[g], gp, "weight"), gp + ".weight");
    lg.loading = as_real_array(require(groups[g], gp, "loading"), gp + ".loading");
    if (g == 0) {
      out.k = lg.loading.size();
    } else if (lg.loading.size() != out.k) {
      schema_error(gp + ".loading", "all loadings must have the same dimension");
    }
    out.groups.push_back(std::move(lg));
  }
  return out;
}

NoiseSpec parse_noise(const Json& j, const fs::path& base) {
  const std::string path = "noise";
  const std::string kind = as_string(require(j, path, "kind"), path + ".kind");
  if (kind == "independent") {
    check_keys(j, path, {"kind"});
    return NoiseSpec::independent();
  }
  if (kind == "block") {
    check_keys(j, path, {"kind", "size", "rho"});
    return NoiseSpec::block(as_count(require(j, path, "size"), path + ".size"),
                            as_real(require(j, path, "rho"), path + ".rho"));
  }
  if (kind == "toeplitz") {
    check_keys(j, path, {"kind", "rho"});
    return NoiseSpec::toeplitz(as_real_array(require(j, path, "rho"), path + ".rho"));
  }
  if (kind == "custom") {
    check_keys(j, path, {"kind", "matrix", "csv"});
    if (j.contains("csv") == j.contains("matrix")) {
      schema_error(path, "custom noise needs exactly one of matrix or csv");
    }
    if (j.contains("csv")) {
      const DenseMatrix mat = read_matrix_csv(resolve(base, as_string(j["csv"], path + ".csv")));
      if (mat.rows != mat.cols) schema_error(path + ".csv", "correlation matrix must be square");
      return NoiseSpec::custom_matrix(mat.rows, mat.data);
    }
    const Json& rows = j["matrix"];
    if (!rows.is_array()) schema_error(path + ".matrix", "expected an array of rows");
    const std::size_t n = rows.size();
    std::vector<double> data;
    data.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = as_real_array(rows[i], path + ".matrix[" + std::to_string(i) + "]");
      if (row.size() != n) schema_error(path + ".matrix", "correlation matrix must be square");
      data.insert(data.end(), row.begin(), row.end());
    }
    return NoiseSpec::custom_matrix(n, std::move(data));
  }
  schema_error(path + ".kind", "must be independent, block, toeplitz or custom");
}

// ---------------------------------------------------------------- json output

Json real_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

double real_from(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return kNaN;
  if (!it->is_number()) throw ParseError(std::string("summary field ") + key + " is not a number");
  return it->get<double>();
}

Json schedule_json(const NonnullSchedule& s) {
  Json j;
  if (s.kind == NonnullSchedule::Kind::fixed) {
    j["kind"] = "fixed";
    j["pi1"] = s.pi1;
  } else {
    j["kind"] = "power_law";
    j["c"] = s.c;
    j["a"] = s.a;
  }
  return j;
}

Json noise_json(const NoiseSpec& n) {
  Json j;
  switch (n.kind) {
    case NoiseSpec::Kind::independent:
      j["kind"] = "independent";
      break;
    case NoiseSpec::Kind::block:
      j["kind"] = "block";
      j["size"] = n.block_size;
      j["rho"] = n.block_rho;
      break;
    case NoiseSpec::Kind::toeplitz:
      j["kind"] = "toeplitz";
      j["rho"] = n.band;
      break;
    case NoiseSpec::Kind::custom: {
      j["kind"] = "custom";
      Json rows = Json::array();
      for (std::size_t i = 0; i < n.custom_dim; ++i) {
        rows.push_back(std::vector<double>(n.custom.begin() + static_cast<std::ptrdiff_t>(i * n.custom_dim),
                                           n.custom.begin() + static_cast<std::ptrdiff_t>((i + 1) * n.custom_dim)));
      }
      j["matrix"] = std::move(rows);
      break;
    }
  }
  return j;
}

Json config_json(const ExperimentConfig& c) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["m"] = c.m;
  j["schedule"] = schedule_json(c.schedule);
  j["mu_a"] = c.mu_a;
  j["q"] = c.q;
  Json groups = Json::array();
  for (const auto& g : c.loadings.groups) {
    Json gj;
    gj["weight"] = g.weight;
    gj["loading"] = g.loading;
    groups.push_back(std::move(gj));
  }
  j["loadings"] = Json{{"groups", std::move(groups)}};
  j["noise"] = noise_json(c.noise);
  if (c.latent_mode == LatentMode::conditional) {
    j["latent"] = Json{{"mode", "conditional"}, {"w", c.w}};
  } else {
    j["latent"] = Json{{"mode", "marginal"}};
  }
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  return j;
}

Json asymptotics_json(const AsymptoticSummary& s) {
  Json j;
  j["q"] = s.q;
  j["pi1_limit"] = s.pi1_limit;
  j["tau_star"] = s.tau_star;
  j["regime"] = to_string(s.regime);
  j["f0_at_tau"] = real_or_null(s.f0_at_tau);
  j["f0_prime_at_tau"] = real_or_null(s.f0_prime_at_tau);
  j["g_prime_at_tau"] = real_or_null(s.g_prime_at_tau);
  j["c_g"] = real_or_null(s.c_g);
  j["alpha"] = real_or_null(s.alpha);
  j["beta"] = real_or_null(s.beta);
  j["c00"] = real_or_null(s.c00);
  j["c11"] = real_or_null(s.c11);
  j["c10"] = real_or_null(s.c10);
  j["kernel_min_eigenvalue"] = real_or_null(s.kernel_min_eigenvalue);
  j["sigma_L_sq"] = real_or_null(s.sigma_L_sq);
  j["sigma_R_sq"] = real_or_null(s.sigma_R_sq);
  j["fdp_limit"] = real_or_null(s.fdp_limit);
  j["fpr_limit"] = real_or_null(s.fpr_limit);
  j["sparse"] = s.sparse;
  j["variance_reliable"] = s.variance_reliable;
  j["kernel_finite_m"] = s.kernel_finite_m;
  Json crossings = Json::array();
  for (const auto& c : s.crossings) crossings.push_back(Json{{"t", c.t}, {"direction", c.direction}});
  j["crossings"] = std::move(crossings);
  j["tangencies"] = s.tangencies;
  j["warnings"] = s.warnings;
  return j;
}

Json moments_json(const MomentComparison& c) {
  Json j;
  j["available"] = c.available;
  j["predicted_mean"] = 0.0;
  j["predicted_var"] = real_or_null(c.predicted_var);
  j["empirical_mean"] = real_or_null(c.empirical_mean);
  j["empirical_var"] = real_or_null(c.empirical_var);
  j["mean_se"] = real_or_null(c.mean_se);
  j["var_se"] = real_or_null(c.var_se);
  j["mean_z"] = real_or_null(c.mean_z);
  j["var_z"] = real_or_null(c.var_z);
  j["var_ratio"] = real_or_null(c.var_ratio);
  j["ks_distance"] = real_or_null(c.ks_distance);
  j["ks_critical_1pct"] = real_or_null(c.ks_critical_1pct);
  return j;
}

Json comparison_obj(const CltComparison& c) {
  Json j;
  j["fdp_limit"] = real_or_null(c.fdp_limit);
  j["fpr_limit"] = real_or_null(c.fpr_limit);
  j["fdp"] = moments_json(c.fdp);
  j["fpr"] = moments_json(c.fpr);
  return j;
}

}  // namespace

// -------------------------------------------------------------------- public

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("error writing " + path.string());
}

ExperimentConfig parse_config(std::string_view text, const fs::path& base_dir) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    throw ParseError("malformed JSON at " + line_col(text, byte) + ": " + e.what());
  }
  check_keys(j, "<root>",
             {"schema_version", "m", "schedule", "mu_a", "q", "loadings", "noise", "latent",
              "replicates", "seed"});
  const auto version = as_count(require(j, "<root>", "schema_version"), "schema_version");
  if (version != static_cast<std::uint64_t>(kSchemaVersion)) {
    schema_error("schema_version", "unsupported version " + std::to_string(version) +
                                       " (expected " + std::to_string(kSchemaVersion) + ")");
  }
  ExperimentConfig c;
  c.m = as_count(require(j, "<root>", "m"), "m");
  c.schedule = parse_schedule(require(j, "<root>", "schedule"));
  c.mu_a = as_real(require(j, "<root>", "mu_a"), "mu_a");
  c.q = as_real(require(j, "<root>", "q"), "q");
  if (j.contains("loadings")) c.loadings = parse_loadings(j["loadings"], base_dir);
  if (j.contains("noise")) c.noise = parse_noise(j["noise"], base_dir);
  if (j.contains("latent")) {
    const Json& l = j["latent"];
    const std::string mode = as_string(require(l, "latent", "mode"), "latent.mode");
    if (mode == "conditional") {
      check_keys(l, "latent", {"mode", "w"});
      c.latent_mode = LatentMode::conditional;
      if (l.contains("w")) c.w = as_real_array(l["w"], "latent.w");
    } else if (mode == "marginal") {
      check_keys(l, "latent", {"mode"});
      c.latent_mode = LatentMode::marginal;
    } else {
      schema_error("latent.mode", "must be \"conditional\" or \"marginal\"");
    }
  }
  if (j.contains("replicates")) c.replicates = as_count(j["replicates"], "replicates");
  if (j.contains("seed")) c.seed = as_count(j["seed"], "seed");
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return parse_config(text, path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string config_to_json(const ExperimentConfig& config) { return config_json(config).dump(2); }

DenseMatrix parse_matrix_csv(std::string_view text) {
  const auto lines = lines_of(text);
  DenseMatrix out;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto cells = split(lines[r], ',');
    if (r == 0) {
      out.cols = cells.size();
    } else if (cells.size() != out.cols) {
      std::ostringstream msg;
      msg << "matrix CSV: row " << r + 1 << " has " << cells.size() << " columns, expected "
          << out.cols;
      throw ParseError(msg.str());
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      out.data.push_back(cell_double(cells[c], r + 1, c + 1, "matrix CSV"));
    }
  }
  out.rows = lines.size();
  if (out.rows == 0) throw ParseError("matrix CSV: no data");
  return out;
}

DenseMatrix read_matrix_csv(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return parse_matrix_csv(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

LoadingGroups read_loadings_csv(const fs::path& path) {
  const std::string text = read_text(path);
  const auto lines = lines_of(text);
  LoadingGroups out;
  out.groups.clear();
  const std::string where = path.string();
  bool first = true;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto cells = split(lines[r], ',');
    if (r == 0 && !cells.empty() && cells[0] == "weight") continue;
    LoadingGroup g;
    g.weight = cell_double(cells[0], r + 1, 1, where);
    for (std::size_t c = 1; c < cells.size(); ++c) g.loading.push_back(cell_double(cells[c], r + 1, c + 1, where));
    if (first) {
      out.k = g.loading.size();
      first = false;
    } else if (g.loading.size() != out.k) {
      std::ostringstream msg;
      msg << where << ": row " << r + 1 << " has " << g.loading.size() << " loadings, expected " << out.k;
      throw ParseError(msg.str());
    }
    out.groups.push_back(std::move(g));
  }
  if (out.groups.empty()) throw ParseError(where + ": no loading rows");
  return out;
}

void write_loadings_csv(const fs::path& path, const LoadingGroups& loadings) {
  std::string s = "weight";
  for (std::size_t d = 0; d < loadings.k; ++d) s += ",l_" + std::to_string(d + 1);
  s += '\n';
  for (const auto& g : loadings.groups) {
    s += format_real(g.weight);
    for (double v : g.loading) s += "," + format_real(v);
    s += '\n';
  }
  write_text(path, s);
}

void write_replicates_csv(const fs::path& path, const std::vector<ReplicateOutcome>& outcomes,
                          std::size_t k) {
  std::string s = "replicate,r,v,fdp,fpr,tau_bh";
  for (std::size_t d = 0; d < k; ++d) s += ",w_" + std::to_string(d + 1);
  s += '\n';
  for (const auto& o : outcomes) {
    s += std::to_string(o.replicate) + ',' + std::to_string(o.r) + ',' + std::to_string(o.v) + ',' +
         format_real(o.fdp) + ',' + format_real(o.fpr) + ',' + format_real(o.tau_bh);
    for (std::size_t d = 0; d < k; ++d) s += ',' + format_real(d < o.w.size() ? o.w[d] : kNaN);
    s += '\n';
  }
  write_text(path, s);
}

std::vector<ReplicateOutcome> read_replicates_csv(const fs::path& path) {
  const std::string text = read_text(path);
  const auto lines = lines_of(text);
  const std::string where = path.string();
  if (lines.empty()) throw ParseError(where + ": missing header");
  const auto header = split(lines[0], ',');
  if (header.size() < 6 || header[0] != "replicate" || header[5] != "tau_bh") {
    throw ParseError(where + ": header must start with replicate,r,v,fdp,fpr,tau_bh");
  }
  const std::size_t k = header.size() - 6;
  std::vector<ReplicateOutcome> out;
  out.reserve(lines.size() - 1);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split(lines[r], ',');
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << where << ": row " << r + 1 << " has " << cells.size() << " columns, expected "
          << header.size();
      throw ParseError(msg.str());
    }
    ReplicateOutcome o;
    o.replicate = cell_uint(cells[0], r + 1, 1, where);
    o.r = cell_uint(cells[1], r + 1, 2, where);
    o.v = cell_uint(cells[2], r + 1, 3, where);
    o.fdp = cell_double(cells[3], r + 1, 4, where);
    o.fpr = cell_double(cells[4], r + 1, 5, where);
    o.tau_bh = cell_double(cells[5], r + 1, 6, where);
    for (std::size_t d = 0; d < k; ++d) o.w.push_back(cell_double(cells[6 + d], r + 1, 7 + d, where));
    out.push_back(std::move(o));
  }
  return out;
}

void write_histogram_csv(const fs::path& path, const Histogram& h,
                         const std::function<double(double)>& density) {
  std::string s = "edge_lo,edge_hi,count,predicted_density\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    const double lo = h.edges[b];
    const double hi = h.edges[b + 1];
    s += format_real(lo) + ',' + format_real(hi) + ',' + std::to_string(h.counts[b]) + ',';
    if (density) s += format_real(density(0.5 * (lo + hi)));
    s += '\n';
  }
  write_text(path, s);
}

std::string asymptotic_summary_json(const AsymptoticSummary& s) { return asymptotics_json(s).dump(2); }

std::string comparison_json(const CltComparison& c) { return comparison_obj(c).dump(2); }

std::string experiment_summary_json(const ExperimentConfig& config, const ExperimentResult& r) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["m"] = config.m;
  j["k"] = config.loadings.k;
  j["replicates"] = r.summary.replicates;
  j["seed"] = config.seed;
  Json s;
  s["fdr_hat"] = r.summary.fdr_hat;
  s["fdr_se"] = r.summary.fdr_se;
  if (r.summary.pfdr_hat) s["pfdr_hat"] = *r.summary.pfdr_hat;
  s["n_zero_rejection"] = r.summary.n_zero_rejection;
  s["fdp_mean"] = r.summary.fdp_mean;
  s["fdp_var"] = r.summary.fdp_var;
  s["fpr_mean"] = r.summary.fpr_mean;
  s["fpr_var"] = r.summary.fpr_var;
  s["fraction_any_rejection"] = r.summary.fraction_any_rejection;
  s["fpr_max"] = r.summary.fpr_max;
  j["summary"] = std::move(s);
  j["asymptotics"] = r.asymptotics ? asymptotics_json(*r.asymptotics) : Json(nullptr);
  j["comparison"] = r.comparison ? comparison_obj(*r.comparison) : Json(nullptr);
  if (r.degenerate) {
    j["degenerate"] = Json{{"fraction_any_rejection", r.degenerate->fraction_any_rejection},
                           {"fpr_max", r.degenerate->fpr_max},
                           {"fpr_mean", r.degenerate->fpr_mean}};
  } else {
    j["degenerate"] = nullptr;
  }
  j["config"] = config_json(config);
  return j.dump(2);
}

SavedSummary read_summary_json(const fs::path& path) {
  const std::string text = read_text(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    throw ParseError(path.string() + ": malformed JSON at " + line_col(text, byte));
  }
  SavedSummary out;
  if (!j.is_object() || !j.contains("m")) throw ParseError(path.string() + ": missing field m");
  out.m = j["m"].get<std::size_t>();
  if (j.contains("k")) out.k = j["k"].get<std::size_t>();
  const auto it = j.find("asymptotics");
  if (it == j.end() || it->is_null()) return out;
  const Json& a = *it;
  out.has_asymptotics = true;
  AsymptoticSummary& s = out.asymptotics;
  s.q = real_from(a, "q");
  s.pi1_limit = real_from(a, "pi1_limit");
  s.tau_star = real_from(a, "tau_star");
  s.regime = a.value("regime", std::string()) == "clt" ? Regime::clt : Regime::degenerate_tau_zero;
  s.f0_at_tau = real_from(a, "f0_at_tau");
  s.f0_prime_at_tau = real_from(a, "f0_prime_at_tau");
  s.g_prime_at_tau = real_from(a, "g_prime_at_tau");
  s.c_g = real_from(a, "c_g");
  s.alpha = real_from(a, "alpha");
  s.beta = real_from(a, "beta");
  s.c00 = real_from(a, "c00");
  s.c11 = real_from(a, "c11");
  s.c10 = real_from(a, "c10");
  s.kernel_min_eigenvalue = real_from(a, "kernel_min_eigenvalue");
  s.sigma_L_sq = real_from(a, "sigma_L_sq");
  s.sigma_R_sq = real_from(a, "sigma_R_sq");
  s.fdp_limit = real_from(a, "fdp_limit");
  s.fpr_limit = real_from(a, "fpr_limit");
  s.sparse = a.value("sparse", false);
  s.variance_reliable = a.value("variance_reliable", false);
  s.kernel_finite_m = a.value("kernel_finite_m", false);
  return out;
}

}  // namespace fdpburst::io
