#include "tanlars/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tanlars/errors.hpp"
#include "tanlars/kernels.hpp"

namespace tanlars {
namespace {

constexpr double kRankTolerance = 1e-10;
constexpr double kNormTolerance = 1e-10;

std::span<const double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
  return {m.col(j).data(), static_cast<std::size_t>(m.rows())};
}

void check_rank(const Eigen::MatrixXd& values) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(values);
  const auto& sv = svd.singularValues();
  if (sv.size() < values.cols() || sv(sv.size() - 1) <= kRankTolerance * sv(0))
    throw RankDeficient("design matrix does not have full column rank");
}

std::vector<std::string> default_names(std::size_t d) {
  std::vector<std::string> names;
  names.reserve(d);
  for (std::size_t j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

DesignMatrix normalize_design(const Eigen::MatrixXd& raw, std::vector<std::string> labels) {
  const auto n = raw.rows();
  const auto d = raw.cols();
  if (n < 2) throw std::invalid_argument("design needs at least two rows");
  if (d < 1) throw std::invalid_argument("design needs at least one column");
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(d))
    throw std::invalid_argument("label count does not match column count");

  DesignMatrix X;
  X.values_.resize(n, d);
  X.centers_.resize(d);
  X.scales_.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double mean = raw.col(j).mean();
    Eigen::VectorXd c = raw.col(j).array() - mean;
    // A second centering pass removes the rounding left by the first.
    c.array() -= c.mean();
    const double norm = c.norm();
    const double magnitude = raw.col(j).cwiseAbs().maxCoeff();
    if (!(norm > 1e-14 * std::max(1.0, magnitude) * std::sqrt(static_cast<double>(n))))
      throw ZeroVarianceColumn(static_cast<std::size_t>(j));
    X.values_.col(j) = c / norm;
    X.centers_(j) = mean;
    X.scales_(j) = norm;
  }
  check_rank(X.values_);
  X.names_ = labels.empty() ? default_names(static_cast<std::size_t>(d)) : std::move(labels);
  X.gram_ = tanlars::gram(X);
  return X;
}

DesignMatrix DesignMatrix::from_normalized(Eigen::MatrixXd values, std::vector<std::string> names) {
  const auto n = values.rows();
  const auto d = values.cols();
  if (n < 2 || d < 1) throw std::invalid_argument("design needs n >= 2 and d >= 1");
  for (Eigen::Index j = 0; j < d; ++j) {
    const double s = values.col(j).sum();
    const double norm = values.col(j).norm();
    if (norm == 0.0) throw ZeroVarianceColumn(static_cast<std::size_t>(j));
    if (std::abs(s) > kNormTolerance * static_cast<double>(n) || std::abs(norm - 1.0) > kNormTolerance)
      throw std::invalid_argument("column " + std::to_string(j) + " is not normalized");
  }
  check_rank(values);
  DesignMatrix X;
  X.values_ = std::move(values);
  X.centers_ = Eigen::VectorXd::Zero(d);
  X.scales_ = Eigen::VectorXd::Ones(d);
  X.names_ = names.empty() ? default_names(static_cast<std::size_t>(d)) : std::move(names);
  X.gram_ = tanlars::gram(X);
  return X;
}

DesignMatrix DesignMatrix::select_columns(const std::vector<std::size_t>& columns) const {
  DesignMatrix out;
  const auto k = static_cast<Eigen::Index>(columns.size());
  out.values_.resize(values_.rows(), k);
  out.gram_.resize(k, k);
  out.centers_.resize(k);
  out.scales_.resize(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    const auto ja = static_cast<Eigen::Index>(columns[a]);
    out.values_.col(a) = values_.col(ja);
    out.centers_(a) = centers_(ja);
    out.scales_(a) = scales_(ja);
    out.names_.push_back(names_[columns[a]]);
    for (Eigen::Index b = 0; b < k; ++b) out.gram_(a, b) = gram_(ja, static_cast<Eigen::Index>(columns[b]));
  }
  return out;
}

Eigen::VectorXd DesignMatrix::to_original_scale(const Eigen::VectorXd& theta, double* offset) const {
  Eigen::VectorXd beta = theta.array() / scales_.array();
  if (offset) *offset = -beta.dot(centers_);
  return beta;
}

Eigen::MatrixXd gram(const DesignMatrix& X) {
  const auto& v = X.values();
  const auto d = v.cols();
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      const double s = kernels::dot(column(v, i), column(v, j));
      g(i, j) = s;
      g(j, i) = s;
    }
  }
  return g;
}

ResponseVector::ResponseVector(Eigen::VectorXd values, FamilyDomain domain)
    : values_(std::move(values)), domain_(domain) {
  for (Eigen::Index a = 0; a < values_.size(); ++a) {
    const double v = values_(a);
    if (!std::isfinite(v)) throw DomainError("response entry " + std::to_string(a) + " is not finite");
    if (domain_ == FamilyDomain::binary01 && v != 0.0 && v != 1.0)
      throw DomainError("response entry " + std::to_string(a) + " is not 0 or 1");
    if (domain_ == FamilyDomain::nonneg_integer && (v < 0.0 || v != std::floor(v)))
      throw DomainError("response entry " + std::to_string(a) + " is not a nonnegative integer");
  }
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw std::runtime_error("to_chars failed");
  return std::string(buf, ptr);
}

NumericTable read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  NumericTable table;
  for (auto h : split(line)) table.header.emplace_back(h);
  const std::size_t width = table.header.size();

  std::vector<double> cells;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (fields.size() != width)
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(width) + " fields, got " + std::to_string(fields.size()));
    for (auto f : fields) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc{} || ptr != f.data() + f.size())
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell '" +
                         std::string(f) + "'");
      cells.push_back(v);
    }
    ++rows;
  }
  table.cells.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < width; ++c)
      table.cells(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cells[r * width + c];
  return table;
}

void write_numeric_csv(const std::filesystem::path& path, const NumericTable& table) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t c = 0; c < table.header.size(); ++c) out << (c ? "," : "") << table.header[c];
  out << '\n';
  for (Eigen::Index r = 0; r < table.cells.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.cells.cols(); ++c)
      out << (c ? "," : "") << format_double(table.cells(r, c));
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path, const ColumnRef& response_column,
                     FamilyDomain domain) {
  NumericTable table = read_numeric_csv(path);
  std::size_t target = 0;
  if (const auto* name = std::get_if<std::string>(&response_column)) {
    auto it = std::find(table.header.begin(), table.header.end(), *name);
    if (it == table.header.end()) throw ParseError(path.string() + ": no column named '" + *name + "'");
    target = static_cast<std::size_t>(it - table.header.begin());
  } else {
    target = std::get<std::size_t>(response_column);
    if (target >= table.header.size()) throw ParseError(path.string() + ": response index out of range");
  }
  if (table.header.size() < 2) throw ParseError(path.string() + ": need a response and at least one predictor");

  const auto n = table.cells.rows();
  const auto d = static_cast<Eigen::Index>(table.header.size() - 1);
  Eigen::MatrixXd raw(n, d);
  std::vector<std::string> names;
  for (Eigen::Index c = 0, j = 0; c < table.cells.cols(); ++c) {
    if (static_cast<std::size_t>(c) == target) continue;
    raw.col(j++) = table.cells.col(c);
    names.push_back(table.header[static_cast<std::size_t>(c)]);
  }
  ResponseVector y(table.cells.col(static_cast<Eigen::Index>(target)), domain);
  return Dataset{normalize_design(raw, std::move(names)), std::move(y)};
}

void write_dataset(const std::filesystem::path& path, const DesignMatrix& X, const ResponseVector& y,
                   const std::string& response_name) {
  NumericTable table;
  table.header = X.column_names();
  table.header.push_back(response_name);
  table.cells.resize(static_cast<Eigen::Index>(X.n()), static_cast<Eigen::Index>(X.d() + 1));
  table.cells.leftCols(static_cast<Eigen::Index>(X.d())) = X.values();
  table.cells.col(static_cast<Eigen::Index>(X.d())) = y.values();
  write_numeric_csv(path, table);
}

}  // namespace tanlars
