#include "manifest.hpp"

#include <openssl/evp.h>

#include <ctime>
#include <json.hpp>
#include <stdexcept>

#include "fdpburst/error.hpp"
#include "fdpburst/io.hpp"

namespace fdpburst::cli {

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

namespace {

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void write_manifest(const std::filesystem::path& dir, const ManifestInput& in) {
  using Json = nlohmann::ordered_json;
  Json j;
  j["tool"] = "fdpburst";
  j["version"] = FDPBURST_VERSION;
  j["command"] = in.command;
  j["argv"] = in.argv;
  if (in.has_seed) j["seed"] = in.seed;
  j["config"] = in.config_json.empty() ? Json(nullptr) : Json::parse(in.config_json);
  j["created_utc"] = utc_now();
  Json files = Json::array();
  for (const auto& name : in.files) {
    const std::string bytes = io::read_text(dir / name);
    files.push_back(Json{{"name", name}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
  }
  j["files"] = std::move(files);
  io::write_text(dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace fdpburst::cli
