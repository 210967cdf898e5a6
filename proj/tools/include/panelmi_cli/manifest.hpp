#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace panelmi::cli {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Files written under one output directory, listed in `manifest.txt` as
/// sha256sum-style lines after a `# status: complete|partial` header.
class OutputSet {
public:
  explicit OutputSet(std::filesystem::path dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  /// Writes `content` to dir/name (parents created) and records it.
  void write(const std::string& name, std::string_view content);
  /// Records a file some other routine wrote under dir.
  void add(const std::string& name);
  void finish(bool complete);
  const std::vector<std::string>& names() const noexcept { return names_; }

private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

struct ManifestEntry {
  std::string name;
  std::string sha256;
};

struct Manifest {
  bool complete = false;
  std::vector<ManifestEntry> entries;
};

Manifest read_manifest(const std::filesystem::path& path);

}  // namespace panelmi::cli
