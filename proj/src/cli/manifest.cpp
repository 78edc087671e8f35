#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "zonekit/cli.hpp"
#include "zonekit/error.hpp"

namespace zonekit::cli {

namespace {

struct DigestCtx {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  ~DigestCtx() { EVP_MD_CTX_free(ctx); }
};

std::string hex(const unsigned char* data, unsigned len) {
  std::ostringstream s;
  for (unsigned i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(data[i]);
  return s.str();
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  DigestCtx d;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (!d.ctx || EVP_DigestInit_ex(d.ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(d.ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(d.ctx, md, &len) != 1) {
    throw IoError("SHA-256 digest failed");
  }
  return hex(md, len);
}

std::string sha256_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return sha256_hex(ss.str());
}

Manifest::Manifest(std::string command, std::uint64_t seed, nlohmann::json config)
    : command_(std::move(command)), seed_(seed), config_(std::move(config)) {}

void Manifest::add_input(const std::string& role, const std::string& path) {
  inputs_.push_back({{"role", role}, {"path", path}, {"sha256", sha256_file(path)}});
}

void Manifest::add_output(const std::string& path) {
  outputs_.push_back({{"path", path}, {"sha256", sha256_file(path)}});
}

nlohmann::json Manifest::to_json() const {
  return {{"tool", "zonekit"},
          {"version", ZONEKIT_VERSION},
          {"command", command_},
          {"seed", seed_},
          {"config", config_},
          {"inputs", inputs_},
          {"outputs", outputs_},
          {"stages", stages_}};
}

void Manifest::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << to_json().dump(2) << '\n';
  if (!out) throw IoError("write failure on " + path);
}

}  // namespace zonekit::cli
