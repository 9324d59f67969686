#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fracrd {

/// Scientific notation with 17 significant digits; "inf", "-inf" and "nan"
/// for non-finite values.
std::string format_double(double v);

/// Lowercase hex SHA-256 of a file's bytes. Throws IoError.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_bytes(const std::string& bytes);

/// Comma-separated table with a header row. Throws OutputUnwritable.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(bool v) { return cell(static_cast<long long>(v ? 1 : 0)); }
  CsvWriter& cell(const std::string& v);
  CsvWriter& cell(const char* v) { return cell(std::string(v)); }
  /// Ends the current row; a row whose cell count differs from the header is
  /// discarded and InvalidArgument is thrown.
  void end_row();
  void close();

 private:
  void put(const std::string& text);

  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
  std::string row_;
  std::size_t filled_ = 0;
};

struct Artifact {
  /// Relative to the run directory, forward slashes.
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Files written during one run; hashed when the manifest is assembled.
class ArtifactSet {
 public:
  explicit ArtifactSet(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  /// Absolute path for `relative`, registered as an artifact. Parent
  /// directories are created. Throws OutputUnwritable.
  std::filesystem::path file(const std::string& relative);
  void write_text(const std::string& relative, const std::string& text);
  /// Hashes every registered file, sorted by path.
  std::vector<Artifact> collect() const;

 private:
  std::filesystem::path root_;
  std::vector<std::string> files_;
};

/// Creates the directory (and parents). Throws OutputUnwritable.
void ensure_directory(const std::filesystem::path& dir);

}  // namespace fracrd
