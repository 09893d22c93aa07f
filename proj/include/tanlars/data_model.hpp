#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tanlars {

/// Column-centered, unit-norm design with its cached Gram matrix.
///
/// Instances are immutable once built; construct through normalize_design(),
/// or from_normalized() when the columns are already known to be normalized
/// (column subsets, round-tripped files).
class DesignMatrix {
 public:
  const Eigen::MatrixXd& values() const { return values_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::VectorXd& centers() const { return centers_; }
  const Eigen::VectorXd& scales() const { return scales_; }
  const std::vector<std::string>& column_names() const { return names_; }

  std::size_t n() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(values_.cols()); }

  /// Keeps the listed columns (in order). The result stays normalized.
  DesignMatrix select_columns(const std::vector<std::size_t>& columns) const;

  /// Maps coefficients of the normalized design onto the raw predictor scale:
  /// beta_j = theta_j / scale_j, so that X theta = raw * beta + offset with
  /// offset = -sum_j beta_j * center_j. The offset is returned separately
  /// since the model carries no intercept.
  Eigen::VectorXd to_original_scale(const Eigen::VectorXd& theta, double* offset = nullptr) const;

  /// Validates the invariants (centered, unit norm, full column rank) and
  /// throws RankDeficient / ZeroVarianceColumn / std::invalid_argument.
  static DesignMatrix from_normalized(Eigen::MatrixXd values, std::vector<std::string> names = {});

 private:
  friend DesignMatrix normalize_design(const Eigen::MatrixXd&, std::vector<std::string>);
  DesignMatrix() = default;

  Eigen::MatrixXd values_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd centers_;
  Eigen::VectorXd scales_;
  std::vector<std::string> names_;
};

enum class FamilyDomain { real, binary01, nonneg_integer };

class ResponseVector {
 public:
  /// Throws DomainError if any entry violates the domain.
  ResponseVector(Eigen::VectorXd values, FamilyDomain domain);

  const Eigen::VectorXd& values() const { return values_; }
  FamilyDomain domain() const { return domain_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

 private:
  Eigen::VectorXd values_;
  FamilyDomain domain_;
};

/// Centers every column and scales it to unit l2 norm.
DesignMatrix normalize_design(const Eigen::MatrixXd& raw, std::vector<std::string> labels = {});

/// X^T X computed column pair by column pair.
Eigen::MatrixXd gram(const DesignMatrix& X);

struct NumericTable {
  std::vector<std::string> header;
  Eigen::MatrixXd cells;  // rows x columns
};

/// Strict numeric CSV: one header row, comma separated, every cell a number.
NumericTable read_numeric_csv(const std::filesystem::path& path);
void write_numeric_csv(const std::filesystem::path& path, const NumericTable& table);

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);

using ColumnRef = std::variant<std::string, std::size_t>;

struct Dataset {
  DesignMatrix X;
  ResponseVector y;
};

Dataset load_dataset(const std::filesystem::path& path, const ColumnRef& response_column,
                     FamilyDomain domain);

/// Writes the design columns followed by a response column named `response_name`.
void write_dataset(const std::filesystem::path& path, const DesignMatrix& X, const ResponseVector& y,
                   const std::string& response_name = "y");

}  // namespace tanlars
