#include "fracrd/report_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>

#include "fracrd/error.hpp"

namespace fracrd {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.16e", v);
  return buf.data();
}

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw Error(ErrorCode::IoError, "cannot initialize SHA-256");
    }
  }
  void update(const char* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md, &len);
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(digits[md[i] >> 4]);
      out.push_back(digits[md[i] & 15]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

std::string sha256_bytes(const std::string& bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::OutputUnwritable, "cannot create directory " + dir.string() + (ec ? ": " + ec.message() : ""));
  }
}

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
  if (!out_) throw Error(ErrorCode::OutputUnwritable, "cannot write " + path.string());
  for (const auto& h : header) put(h);
  end_row();
}

void CsvWriter::put(const std::string& text) {
  if (filled_ > 0) row_ += ',';
  row_ += text;
  ++filled_;
}

CsvWriter& CsvWriter::cell(double v) {
  put(format_double(v));
  return *this;
}

CsvWriter& CsvWriter::cell(long long v) {
  put(std::to_string(v));
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) {
    put(v);
  } else {
    std::string quoted = "\"";
    for (char c : v) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
    put(quoted + "\"");
  }
  return *this;
}

void CsvWriter::end_row() {
  const std::size_t filled = filled_;
  filled_ = 0;
  if (filled != columns_) {
    row_.clear();
    throw Error(ErrorCode::InvalidArgument, path_.string() + ": row has " + std::to_string(filled) + " cells, expected " +
                                                std::to_string(columns_));
  }
  out_ << row_ << '\n';
  row_.clear();
}

void CsvWriter::close() {
  out_.close();
  if (out_.fail()) throw Error(ErrorCode::OutputUnwritable, "cannot finish " + path_.string());
}

ArtifactSet::ArtifactSet(fs::path root) : root_(std::move(root)) { ensure_directory(root_); }

fs::path ArtifactSet::file(const std::string& relative) {
  const fs::path p = root_ / relative;
  ensure_directory(p.parent_path());
  if (std::find(files_.begin(), files_.end(), relative) == files_.end()) files_.push_back(relative);
  return p;
}

void ArtifactSet::write_text(const std::string& relative, const std::string& text) {
  const fs::path p = file(relative);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::OutputUnwritable, "cannot write " + p.string());
}

std::vector<Artifact> ArtifactSet::collect() const {
  std::vector<std::string> sorted = files_;
  std::sort(sorted.begin(), sorted.end());
  std::vector<Artifact> out;
  for (const auto& rel : sorted) {
    const fs::path p = root_ / rel;
    out.push_back({rel, sha256_file(p), fs::file_size(p)});
  }
  return out;
}

}  // namespace fracrd
