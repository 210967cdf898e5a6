#include "panelmi_cli/manifest.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "panelmi/error.hpp"
#include "panelmi/ingest.hpp"

namespace panelmi::cli {

namespace {

std::string hex(const unsigned char* data, unsigned int n) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (unsigned int i = 0; i < n; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xF]);
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1)
    throw Error("SHA-256 computation failed");
  return hex(digest.data(), len);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw DataError("cannot create output directory '" + dir_.string() + "': " + ec.message());
}

void OutputSet::write(const std::string& name, std::string_view content) {
  write_text_file(dir_ / name, content);
  add(name);
}

void OutputSet::add(const std::string& name) {
  if (std::find(names_.begin(), names_.end(), name) == names_.end()) names_.push_back(name);
}

void OutputSet::finish(bool complete) {
  std::ostringstream out;
  out << "# status: " << (complete ? "complete" : "partial") << '\n';
  for (const auto& name : names_) out << sha256_file(dir_ / name) << "  " << name << '\n';
  write_text_file(dir_ / "manifest.txt", out.str());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read manifest '" + path.string() + "'");
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# status:", 0) == 0) {
      m.complete = line.find("complete") != std::string::npos;
      continue;
    }
    const auto sep = line.find("  ");
    if (line.empty() || sep == std::string::npos) continue;
    m.entries.push_back({line.substr(sep + 2), line.substr(0, sep)});
  }
  return m;
}

}  // namespace panelmi::cli
