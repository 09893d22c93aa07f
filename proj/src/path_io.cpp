#include "tanlars/path_io.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>

#include "tanlars/data_model.hpp"
#include "tanlars/errors.hpp"
#include "tanlars/model_selection.hpp"

namespace tanlars {
namespace {

using json = nlohmann::ordered_json;

std::vector<std::string> names_or_default(const std::vector<std::string>& names, std::size_t d) {
  if (names.size() == d) return names;
  std::vector<std::string> out;
  for (std::size_t j = 0; j < d; ++j) out.push_back("x" + std::to_string(j + 1));
  return out;
}

void write_table(const std::filesystem::path& out, const std::vector<std::string>& names,
                 const std::vector<double>& lambdas, const std::vector<const Eigen::VectorXd*>& thetas,
                 const std::vector<std::size_t>& active_sizes) {
  NumericTable table;
  table.header = {"step", "lambda", "active_size"};
  table.header.insert(table.header.end(), names.begin(), names.end());
  const auto d = static_cast<Eigen::Index>(names.size());
  table.cells.resize(static_cast<Eigen::Index>(thetas.size()), d + 3);
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    table.cells(r, 0) = static_cast<double>(k);
    table.cells(r, 1) = lambdas[k];
    table.cells(r, 2) = static_cast<double>(active_sizes[k]);
    table.cells.row(r).tail(d) = thetas[k]->transpose();
  }
  write_numeric_csv(out, table);
}

void write_sidecar(const std::filesystem::path& out, const json& meta) {
  std::ofstream f(sidecar_path(out));
  if (!f) throw IoError("cannot write " + sidecar_path(out).string());
  f << meta.dump(2) << '\n';
  if (!f) throw IoError("write failed: " + sidecar_path(out).string());
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  p.replace_extension(".meta.json");
  return p;
}

void path_export(const SolutionPath& path, const std::filesystem::path& out,
                 const std::vector<std::string>& column_names) {
  const auto names = names_or_default(column_names, path.dimension());
  std::vector<double> lambdas;
  std::vector<const Eigen::VectorXd*> thetas;
  std::vector<std::size_t> sizes;
  json drops = json::array();
  for (const auto& bp : path.breakpoints) {
    lambdas.push_back(bp.lambda());
    thetas.push_back(&bp.theta);
    // Nonzero or about to enter.
    std::vector<std::size_t> members = active_set(bp.theta);
    members.insert(members.end(), bp.active.begin(), bp.active.end());
    std::sort(members.begin(), members.end());
    sizes.push_back(static_cast<std::size_t>(std::unique(members.begin(), members.end()) - members.begin()));
    if (bp.dropped) drops.push_back({{"step", bp.k}, {"index", *bp.dropped}});
  }
  write_table(out, names, lambdas, thetas, sizes);
  json meta;
  meta["method"] = path.method.empty() ? std::string(path_mode_name(path.mode)) : path.method;
  meta["family"] = path.family;
  meta["mode"] = std::string(path_mode_name(path.mode));
  meta["lambda_scale"] = "squared_error";
  meta["breakpoints"] = path.size();
  meta["separation_flag"] = path.separation_flag;
  meta["ridge_used"] = path.ridge_used;
  meta["drops"] = drops;
  meta["columns"] = names;
  write_sidecar(out, meta);
}

void path_export(const L1Path& path, const std::filesystem::path& out,
                 const std::vector<std::string>& column_names) {
  const std::size_t d = path.thetas.empty() ? column_names.size() : static_cast<std::size_t>(path.thetas[0].size());
  const auto names = names_or_default(column_names, d);
  std::vector<const Eigen::VectorXd*> thetas;
  std::vector<std::size_t> sizes;
  for (const auto& t : path.thetas) {
    thetas.push_back(&t);
    sizes.push_back(active_set(t).size());
  }
  write_table(out, names, path.lambdas, thetas, sizes);
  json meta;
  meta["method"] = "l1";
  meta["family"] = path.family;
  meta["mode"] = "grid";
  meta["lambda_scale"] = "negative_log_likelihood";
  meta["breakpoints"] = path.size();
  std::size_t failed = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (!path.converged[k]) ++failed;
    worst = std::max(worst, path.kkt[k]);
  }
  meta["not_converged"] = failed;
  meta["max_kkt_residual"] = worst;
  meta["columns"] = names;
  write_sidecar(out, meta);
}

PathTable read_path_csv(const std::filesystem::path& csv) {
  NumericTable t = read_numeric_csv(csv);
  if (t.header.size() < 3 || t.header[0] != "step" || t.header[1] != "lambda" || t.header[2] != "active_size")
    throw ParseError(csv.string() + ": not a path export");
  PathTable out;
  out.column_names.assign(t.header.begin() + 3, t.header.end());
  for (Eigen::Index r = 0; r < t.cells.rows(); ++r) {
    out.steps.push_back(static_cast<long>(t.cells(r, 0)));
    out.lambdas.push_back(t.cells(r, 1));
    out.active_sizes.push_back(static_cast<std::size_t>(t.cells(r, 2)));
  }
  out.coefficients = t.cells.rightCols(t.cells.cols() - 3);
  return out;
}

}  // namespace tanlars
