// tanlars: tangent-space sparse GLM estimation from the command line.
//
//   tanlars fit --data F --response NAME --family FAM --method M [--criterion C] [--out path.csv]
//   tanlars simulate --case {A1|A2|B1|B2|C1|C2|custom} [--config cfg.json] --trials N --seed S --out report.json
//   tanlars report --in report.json --format {table|csv}

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "tanlars/data_model.hpp"
#include "tanlars/errors.hpp"
#include "tanlars/glm_family.hpp"
#include "tanlars/glm_mle.hpp"
#include "tanlars/harness.hpp"
#include "tanlars/l1_baseline.hpp"
#include "tanlars/model_selection.hpp"
#include "tanlars/path_io.hpp"
#include "tanlars/tangent_methods.hpp"

using namespace tanlars;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_coefficients(const DesignMatrix& X, const Eigen::VectorXd& theta) {
  double offset = 0.0;
  const Eigen::VectorXd beta = X.to_original_scale(theta, &offset);
  std::printf("  %-16s %22s %22s\n", "column", "normalized", "original_scale");
  for (std::size_t j = 0; j < X.d(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    std::printf("  %-16s %22.12g %22.12g\n", X.column_names()[j].c_str(), theta(jj), beta(jj));
  }
  std::printf("  %-16s %22s %22.12g\n", "(offset)", "", offset);
}

struct FitArgs {
  std::string data, response, family = "binomial", method = "tlars", criterion, out;
  MleOptions mle;
  std::size_t nlambda = 100;
  double lambda_ratio = 1e-4;
};

int run_fit(const FitArgs& a) {
  const GlmFamily family = GlmFamily::from_name(a.family);
  ColumnRef response = a.response;
  if (!a.response.empty() && a.response.find_first_not_of("0123456789") == std::string::npos) {
    // Numeric names are column indices unless a header matches literally.
    const NumericTable head = read_numeric_csv(a.data);
    if (std::find(head.header.begin(), head.header.end(), a.response) == head.header.end())
      response = static_cast<std::size_t>(std::stoul(a.response));
  }
  const Dataset ds = load_dataset(a.data, response, family.domain());
  const Method method = method_from_name(a.method);

  std::printf("data: %s (n=%zu, d=%zu), family %s, method %s\n", a.data.c_str(), ds.X.n(), ds.X.d(),
              std::string(family.name()).c_str(), a.method.c_str());

  std::optional<SelectionResult> selection;
  if (method == Method::l1) {
    const LambdaGrid grid = make_lambda_grid(ds.X, ds.y, family, a.nlambda, a.lambda_ratio);
    const L1Path path = l1_glm_path(ds.X, ds.y, family, grid);
    std::size_t failed = 0;
    for (bool c : path.converged) failed += c ? 0 : 1;
    std::printf("l1 path: %zu grid points, lambda_max %.6g, %zu not converged\n", path.size(), grid.lambda_max, failed);
    if (!a.out.empty()) path_export(path, a.out, ds.X.column_names());
    if (!a.criterion.empty())
      selection = select(path, ds.X, ds.y, family, CriterionKind::from_name(a.criterion), a.mle);
  } else {
    SolutionPath path = method == Method::tlars     ? tlars(ds.X, ds.y, family, a.mle)
                        : method == Method::tlasso1 ? tlasso1(ds.X, ds.y, family, a.mle)
                                                    : tlasso2(ds.X, ds.y, family);
    std::printf("%s path: %zu breakpoints%s\n", a.method.c_str(), path.size(),
                path.separation_flag ? " (separation: ridge-stabilized MLE)" : "");
    for (const auto& bp : path.breakpoints) {
      std::printf("  step %2zu  lambda %-14.8g nonzero %zu%s\n", bp.k, bp.lambda(), active_set(bp.theta).size(),
                  bp.dropped ? "  (drop)" : "");
    }
    if (!a.out.empty()) path_export(path, a.out, ds.X.column_names());
    if (!a.criterion.empty())
      selection = select(path, ds.X, ds.y, family, CriterionKind::from_name(a.criterion), a.mle);
    else {
      std::printf("terminal estimate:\n");
      print_coefficients(ds.X, path.terminal_theta);
    }
  }
  if (selection) {
    std::printf("%s selects path position %zu (%zu active)\n", a.criterion.c_str(), selection->chosen_index,
                active_set(selection->theta_selected).size());
    std::printf("estimate:\n");
    print_coefficients(ds.X, selection->estimate());
  }
  if (!a.out.empty()) std::printf("wrote %s and %s\n", a.out.c_str(), sidecar_path(a.out).string().c_str());
  return 0;
}

struct SimulateArgs {
  std::string case_name, config, out;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
};

int run_simulate(const SimulateArgs& a) {
  CaseConfig cfg;
  if (a.case_name == "custom") {
    if (a.config.empty()) throw std::invalid_argument("--case custom needs --config");
    cfg = config_from_json(slurp(a.config));
  } else {
    cfg = preset_case(a.case_name);
    if (!a.config.empty()) throw std::invalid_argument("--config is only read with --case custom");
  }
  if (a.trials) cfg.m_trials = *a.trials;
  if (a.seed) cfg.base_seed = *a.seed;
  const CaseReport report = run_case(cfg, a.workers);
  const std::string text = report_to_json(report);
  if (a.out.empty() || a.out == "-") {
    std::cout << text;
  } else {
    std::ofstream f(a.out);
    if (!f) throw IoError("cannot write " + a.out);
    f << text;
    std::fprintf(stderr, "wrote %s (%zu trials, %zu failed)\n", a.out.c_str(), report.trials, report.failed_trials);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse GLM estimation in the tangent space at the origin"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Compute a solution path on a CSV dataset");
  fit_cmd->add_option("--data", fit.data, "CSV file with one header row")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--response", fit.response, "Response column name or 0-based index")->required();
  fit_cmd->add_option("--family", fit.family)->check(CLI::IsMember({"gaussian", "binomial", "poisson"}));
  fit_cmd->add_option("--method", fit.method)->check(CLI::IsMember({"tlars", "tlasso1", "tlasso2", "l1"}));
  fit_cmd->add_option("--criterion", fit.criterion)->check(CLI::IsMember({"aic1", "aic2", "bic1", "bic2"}));
  fit_cmd->add_option("--out", fit.out, "Path CSV (a .meta.json sidecar is written next to it)");
  fit_cmd->add_option("--max-iter", fit.mle.max_iter);
  fit_cmd->add_option("--grad-tol", fit.mle.grad_tol);
  fit_cmd->add_option("--ridge", fit.mle.ridge, "Ridge fallback when the MLE diverges (0 = fail)");
  fit_cmd->add_option("--nlambda", fit.nlambda);
  fit_cmd->add_option("--lambda-ratio", fit.lambda_ratio);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo comparison case");
  sim_cmd->add_option("--case", sim.case_name)->required()->check(
      CLI::IsMember({"A1", "A2", "B1", "B2", "C1", "C2", "custom"}));
  sim_cmd->add_option("--config", sim.config, "CaseConfig JSON (with --case custom)");
  sim_cmd->add_option("--trials", sim.trials);
  sim_cmd->add_option("--seed", sim.seed);
  sim_cmd->add_option("--out", sim.out, "Report JSON path (default stdout)");
  sim_cmd->add_option("--workers", sim.workers, "Worker threads")->default_val(std::max(1u, std::thread::hardware_concurrency()));

  std::string report_in, report_format = "table";
  auto* rep_cmd = app.add_subcommand("report", "Print a simulation report");
  rep_cmd->add_option("--in", report_in)->required()->check(CLI::ExistingFile);
  rep_cmd->add_option("--format", report_format)->check(CLI::IsMember({"table", "csv"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*sim_cmd) return run_simulate(sim);
    if (*rep_cmd) {
      const CaseReport r = report_from_json(slurp(report_in));
      std::cout << (report_format == "csv" ? format_report_csv(r) : format_report_table(r));
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
