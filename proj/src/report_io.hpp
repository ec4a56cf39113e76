#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace binfim_cli {

/// 17-significant-digit, locale-independent rendering of a double. Every
/// number the tool writes goes through this, so reruns are byte-identical.
std::string format_double(double value);

/// Minimal JSON emitter for the tool's flat report structures. Numbers are
/// rendered with format_double.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& key(const std::string& name);
  JsonWriter& value(double v);
  JsonWriter& value(long long v);
  JsonWriter& value(const std::string& v);
  JsonWriter& value(bool v);
  JsonWriter& value(const Eigen::VectorXd& v);

  std::string str() const { return out_; }

 private:
  void separator();
  std::string out_;
  std::vector<bool> first_in_scope_;
  bool after_key_ = false;
};

void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Row-major matrix with an explicit shape header.
void write_matrix_json(const std::filesystem::path& path, const Eigen::MatrixXd& matrix);

/// CSV with a header row, '.' decimal separator, one line per row.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace binfim_cli
