#include "tanlars/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <json.hpp>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tanlars/errors.hpp"
#include "tanlars/l1_baseline.hpp"
#include "tanlars/tangent_methods.hpp"

namespace tanlars {
namespace {

using json = nlohmann::ordered_json;

constexpr int kMaxAttempts = 10;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string_view family_name(FamilyKind k) { return GlmFamily(k).name(); }

Eigen::MatrixXd draw_raw_design(const CaseConfig& config, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(config.n);
  const auto d = static_cast<Eigen::Index>(config.d);
  Eigen::MatrixXd raw(n, d);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index j = 0; j < d; ++j) raw(a, j) = normal(rng);
  if (config.correlation == Correlation::b_case) {
    for (Eigen::Index a = 0; a < n; ++a) raw(a, 2) = raw(a, 1) + config.noise_sd * normal(rng);
  }
  return raw;
}

ResponseVector draw_response(const CaseConfig& config, const DesignMatrix& X, std::mt19937_64& rng) {
  const GlmFamily family(config.family);
  const Eigen::VectorXd mu = mean_response(family, X, config.theta0);
  Eigen::VectorXd y(mu.size());
  switch (config.family) {
    case FamilyKind::binomial: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (Eigen::Index a = 0; a < y.size(); ++a) y(a) = u(rng) < mu(a) ? 1.0 : 0.0;
      break;
    }
    case FamilyKind::poisson: {
      for (Eigen::Index a = 0; a < y.size(); ++a) {
        std::poisson_distribution<long long> p(mu(a));
        y(a) = static_cast<double>(p(rng));
      }
      break;
    }
    case FamilyKind::gaussian: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Eigen::Index a = 0; a < y.size(); ++a) y(a) = mu(a) + normal(rng);
      break;
    }
  }
  return ResponseVector(std::move(y), family.domain());
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ", ") + p;
  return out;
}

bool same_path(const SolutionPath& a, const SolutionPath& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if ((a.breakpoints[k].theta - b.breakpoints[k].theta).lpNorm<Eigen::Infinity>() > 1e-12) return false;
  return true;
}

MethodOutcome evaluate_method(const CaseConfig& config, const TrialData& td, Method method,
                              const CandidateSet& candidates, bool separation) {
  const GlmFamily family(config.family);
  const auto truth = active_set(config.theta0);
  MethodOutcome out;
  out.method = method;
  out.separation_flag = separation;
  for (const auto& c : candidates.candidates)
    if (c.support == truth) out.seq_contains_truth = true;
  for (const CriterionKind kind : config.criteria) {
    const SelectionResult sel = select(candidates, kind);
    const Eigen::VectorXd& est = sel.estimate();
    CriterionOutcome o;
    o.generalization_error = generalization_error(est, td.X_fresh, td.y_fresh, family, config.metric);
    o.selected_true_model = active_set(sel.theta_selected) == truth;
    o.parameter_sq_error = (est - config.theta0).squaredNorm();
    o.selected_size = active_set(sel.theta_selected).size();
    out.by_criterion[kind.name()] = o;
  }
  // BIC penalizes every extra coefficient more than AIC once n > e^2.
  if (static_cast<double>(config.n) > std::exp(2.0)) {
    for (auto [aic, bic] : {std::pair{"aic1", "bic1"}, std::pair{"aic2", "bic2"}}) {
      auto ia = out.by_criterion.find(aic);
      auto ib = out.by_criterion.find(bic);
      if (ia != out.by_criterion.end() && ib != out.by_criterion.end() &&
          ib->second.selected_size > ia->second.selected_size)
        throw std::logic_error(std::string(bic) + " selected a larger model than " + aic);
    }
  }
  return out;
}

json criterion_json(const CriterionAggregate& c) {
  return json{{"generalization", c.generalization},
              {"model_selection", c.model_selection},
              {"parameter_estimation", c.parameter_estimation}};
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::tlars: return "tlars";
    case Method::tlasso1: return "tlasso1";
    case Method::tlasso2: return "tlasso2";
    case Method::l1: return "l1";
  }
  return "?";
}

Method method_from_name(std::string_view name) {
  for (Method m : {Method::tlars, Method::tlasso1, Method::tlasso2, Method::l1})
    if (method_name(m) == name) return m;
  throw std::invalid_argument("unknown method: " + std::string(name));
}

void CaseConfig::validate() const {
  if (d == 0 || n < 2) throw std::invalid_argument("case needs d >= 1 and n >= 2");
  if (static_cast<std::size_t>(theta0.size()) != d) throw std::invalid_argument("theta0 length must equal d");
  if (m_trials < 1) throw std::invalid_argument("m_trials must be at least 1");
  if (correlation == Correlation::b_case) {
    if (!(noise_sd > 0.0)) throw std::invalid_argument("b_case needs noise_sd > 0");
    if (d < 3) throw std::invalid_argument("b_case needs at least three columns");
  }
  if (methods.empty()) throw std::invalid_argument("no methods configured");
  if (ridge < 0.0) throw std::invalid_argument("ridge must be nonnegative");
}

CaseConfig preset_case(std::string_view name) {
  CaseConfig c;
  c.name = std::string(name);
  c.family = FamilyKind::binomial;
  c.m_trials = 300;
  if (name == "A1" || name == "A2") {
    c.d = 10;
    c.n = name == "A1" ? 100 : 1000;
    c.theta0.resize(10);
    c.theta0 << 10, 10, 10, -10, -10, -10, 0, 0, 0, 0;
  } else if (name == "B1" || name == "B2") {
    c.d = 10;
    c.n = name == "B1" ? 100 : 1000;
    c.theta0 = Eigen::VectorXd::Zero(10);
    c.theta0(0) = 10;
    c.theta0(1) = 10;
    c.correlation = Correlation::b_case;
  } else if (name == "C1" || name == "C2") {
    c.d = 50;
    c.n = name == "C1" ? 100 : 1000;
    c.theta0 = Eigen::VectorXd::Zero(50);
    c.theta0.head(10).setConstant(10);
    c.theta0.segment(10, 10).setConstant(-10);
  } else {
    throw std::invalid_argument("unknown case: " + std::string(name));
  }
  return c;
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial_index) {
  return splitmix64(splitmix64(base_seed) ^ static_cast<std::uint64_t>(trial_index));
}

TrialData generate_trial(const CaseConfig& config, std::size_t trial_index) {
  config.validate();
  if (trial_index >= config.m_trials) throw std::invalid_argument("trial index out of range");
  const std::uint64_t seed = trial_seed(config.base_seed, trial_index);
  for (int attempt = 0;; ++attempt) {
    std::mt19937_64 rng(splitmix64(seed + static_cast<std::uint64_t>(attempt)));
    try {
      DesignMatrix X = normalize_design(draw_raw_design(config, rng));
      ResponseVector y = draw_response(config, X, rng);
      DesignMatrix Xf = normalize_design(draw_raw_design(config, rng));
      ResponseVector yf = draw_response(config, Xf, rng);
      return TrialData{std::move(X), std::move(y), std::move(Xf), std::move(yf), seed, attempt + 1};
    } catch (const ZeroVarianceColumn&) {
      if (attempt + 1 >= kMaxAttempts) throw;
    } catch (const RankDeficient&) {
      if (attempt + 1 >= kMaxAttempts) throw;
    }
  }
}

double generalization_error(const Eigen::VectorXd& theta_hat, const DesignMatrix& X_fresh,
                            const ResponseVector& y_fresh, const GlmFamily& family, GeneralizationMetric metric) {
  const Eigen::VectorXd mu = mean_response(family, X_fresh, theta_hat);
  const Eigen::VectorXd& y = y_fresh.values();
  if (metric == GeneralizationMetric::misclassification) {
    double wrong = 0.0;
    for (Eigen::Index a = 0; a < y.size(); ++a) wrong += ((mu(a) > 0.5 ? 1.0 : 0.0) != y(a)) ? 1.0 : 0.0;
    return wrong / static_cast<double>(y.size());
  }
  return (y - mu).squaredNorm() / static_cast<double>(y.size());
}

TrialSummary run_trial(const CaseConfig& config, std::size_t trial_index) {
  TrialSummary summary;
  summary.trial_index = trial_index;
  summary.seed = trial_seed(config.base_seed, trial_index);
  try {
    const TrialData td = generate_trial(config, trial_index);
    const GlmFamily family(config.family);
    MleOptions mle_opts;
    mle_opts.ridge = config.ridge;
    const bool refits = std::any_of(config.criteria.begin(), config.criteria.end(),
                                    [](CriterionKind k) { return k.evaluate_at == EvaluateAt::refit_mle; });

    std::optional<TangentPaths> tangent;
    auto shared = [&]() -> const TangentPaths& {
      if (!tangent) tangent = tlars_and_tlasso1(td.X, td.y, family, mle_opts);
      return *tangent;
    };

    for (Method m : config.methods) {
      switch (m) {
        case Method::tlars:
        case Method::tlasso1: {
          const TangentPaths& tp = shared();
          const SolutionPath& path = m == Method::tlars ? tp.tlars : tp.tlasso1;
          summary.methods.push_back(evaluate_method(
              config, td, m, build_candidates(path, td.X, td.y, family, refits, mle_opts), path.separation_flag));
          break;
        }
        case Method::tlasso2: {
          const SolutionPath path = tlasso2(td.X, td.y, family);
          summary.methods.push_back(
              evaluate_method(config, td, m, build_candidates(path, td.X, td.y, family, refits, mle_opts), false));
          break;
        }
        case Method::l1: {
          const LambdaGrid grid = make_lambda_grid(td.X, td.y, family, config.nlambda, config.lambda_ratio);
          const L1Path path = l1_glm_path(td.X, td.y, family, grid);
          summary.methods.push_back(
              evaluate_method(config, td, m, build_candidates(path, td.X, td.y, family, refits, mle_opts), false));
          break;
        }
      }
    }
    if (tangent && std::count(config.methods.begin(), config.methods.end(), Method::tlars) &&
        std::count(config.methods.begin(), config.methods.end(), Method::tlasso1))
      summary.tlars_tlasso1_identical = same_path(tangent->tlars, tangent->tlasso1);
  } catch (const Error& e) {
    summary.failed = true;
    summary.failure = e.what();
    summary.methods.clear();
  } catch (const std::invalid_argument& e) {
    summary.failed = true;
    summary.failure = e.what();
    summary.methods.clear();
  }
  return summary;
}

CaseReport aggregate(const CaseConfig& config, const std::vector<TrialSummary>& trials) {
  CaseReport report;
  report.config = config;
  report.trials = trials.size();
  std::size_t ok = 0;
  std::size_t identical = 0;
  std::size_t identical_count = 0;
  for (Method m : config.methods) {
    MethodAggregate& agg = report.methods[std::string(method_name(m))];
    for (CriterionKind k : config.criteria) agg.by_criterion[k.name()];
  }
  for (const TrialSummary& t : trials) {
    if (t.failed) {
      ++report.failed_trials;
      report.failures.push_back("trial " + std::to_string(t.trial_index) + ": " + t.failure);
      continue;
    }
    ++ok;
    if (t.tlars_tlasso1_identical) {
      ++identical_count;
      if (*t.tlars_tlasso1_identical) ++identical;
    }
    for (const MethodOutcome& mo : t.methods) {
      MethodAggregate& agg = report.methods[std::string(method_name(mo.method))];
      agg.seq += mo.seq_contains_truth ? 1.0 : 0.0;
      if (mo.separation_flag) ++agg.separation_trials;
      for (const auto& [name, o] : mo.by_criterion) {
        CriterionAggregate& c = agg.by_criterion[name];
        c.generalization += o.generalization_error;
        c.model_selection += o.selected_true_model ? 1.0 : 0.0;
        c.parameter_estimation += o.parameter_sq_error;
      }
    }
  }
  if (ok > 0) {
    const double inv = 1.0 / static_cast<double>(ok);
    for (auto& [_, agg] : report.methods) {
      agg.seq *= inv;
      for (auto& [__, c] : agg.by_criterion) {
        c.generalization *= inv;
        c.model_selection *= inv;
        c.parameter_estimation *= inv;
      }
    }
  }
  if (identical_count > 0)
    report.tlars_tlasso1_identical = static_cast<double>(identical) / static_cast<double>(identical_count);
  return report;
}

CaseReport run_case(const CaseConfig& config, unsigned workers) {
  config.validate();
  std::vector<TrialSummary> trials(config.m_trials);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(config.m_trials)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < config.m_trials; i = next++) trials[i] = run_trial(config, i);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return aggregate(config, trials);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json config_json(const CaseConfig& c) {
  json j;
  j["name"] = c.name;
  j["d"] = c.d;
  j["n"] = c.n;
  j["theta0"] = std::vector<double>(c.theta0.data(), c.theta0.data() + c.theta0.size());
  j["m_trials"] = c.m_trials;
  j["family"] = std::string(family_name(c.family));
  if (c.correlation == Correlation::b_case)
    j["correlation_structure"] = {{"kind", "b_case"}, {"noise_sd", c.noise_sd}};
  else
    j["correlation_structure"] = {{"kind", "independent"}};
  std::vector<std::string> methods, criteria;
  for (Method m : c.methods) methods.emplace_back(method_name(m));
  for (CriterionKind k : c.criteria) criteria.push_back(k.name());
  j["methods"] = methods;
  j["criteria"] = criteria;
  j["base_seed"] = c.base_seed;
  j["ridge"] = c.ridge;
  j["nlambda"] = c.nlambda;
  j["lambda_ratio"] = c.lambda_ratio;
  j["generalization_metric"] =
      c.metric == GeneralizationMetric::squared_error ? "squared_error" : "misclassification";
  return j;
}

CaseConfig config_parse(const json& j) {
  CaseConfig c;
  c.name = j.value("name", std::string("custom"));
  c.d = j.at("d").get<std::size_t>();
  c.n = j.at("n").get<std::size_t>();
  const auto theta0 = j.at("theta0").get<std::vector<double>>();
  c.theta0 = Eigen::Map<const Eigen::VectorXd>(theta0.data(), static_cast<Eigen::Index>(theta0.size()));
  c.m_trials = j.value("m_trials", std::size_t{1});
  c.family = GlmFamily::from_name(j.value("family", std::string("binomial"))).kind();
  if (j.contains("correlation_structure")) {
    const auto& cs = j["correlation_structure"];
    const std::string kind = cs.is_string() ? cs.get<std::string>() : cs.value("kind", std::string("independent"));
    if (kind == "b_case") {
      c.correlation = Correlation::b_case;
      if (cs.is_object()) c.noise_sd = cs.value("noise_sd", 0.1);
    } else if (kind != "independent") {
      throw std::invalid_argument("unknown correlation_structure: " + kind);
    }
  }
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : j["methods"]) c.methods.push_back(method_from_name(m.get<std::string>()));
  }
  if (j.contains("criteria")) {
    c.criteria.clear();
    for (const auto& k : j["criteria"]) c.criteria.push_back(CriterionKind::from_name(k.get<std::string>()));
  }
  c.base_seed = j.value("base_seed", std::uint64_t{1});
  c.ridge = j.value("ridge", 1e-6);
  c.nlambda = j.value("nlambda", std::size_t{100});
  c.lambda_ratio = j.value("lambda_ratio", 1e-4);
  const std::string metric = j.value("generalization_metric", std::string("squared_error"));
  if (metric == "misclassification")
    c.metric = GeneralizationMetric::misclassification;
  else if (metric != "squared_error")
    throw std::invalid_argument("unknown generalization_metric: " + metric);
  c.validate();
  return c;
}

}  // namespace

std::string config_to_json(const CaseConfig& config) { return config_json(config).dump(2); }

CaseConfig config_from_json(std::string_view text) {
  try {
    return config_parse(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

std::string report_to_json(const CaseReport& r) {
  json j;
  j["config"] = config_json(r.config);
  j["trials"] = r.trials;
  j["failed_trials"] = r.failed_trials;
  j["failures"] = r.failures;
  if (r.tlars_tlasso1_identical) j["tlars_tlasso1_identical"] = *r.tlars_tlasso1_identical;
  json methods = json::object();
  for (Method m : r.config.methods) {
    const std::string name(method_name(m));
    const auto it = r.methods.find(name);
    if (it == r.methods.end()) continue;
    json mj;
    mj["seq"] = it->second.seq;
    mj["separation_trials"] = it->second.separation_trials;
    json crit = json::object();
    for (CriterionKind k : r.config.criteria) {
      const auto c = it->second.by_criterion.find(k.name());
      if (c != it->second.by_criterion.end()) crit[k.name()] = criterion_json(c->second);
    }
    mj["criteria"] = crit;
    methods[name] = mj;
  }
  j["methods"] = methods;
  return j.dump(2) + "\n";
}

CaseReport report_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    CaseReport r;
    r.config = config_parse(j.at("config"));
    r.trials = j.at("trials").get<std::size_t>();
    r.failed_trials = j.at("failed_trials").get<std::size_t>();
    r.failures = j.value("failures", std::vector<std::string>{});
    if (j.contains("tlars_tlasso1_identical")) r.tlars_tlasso1_identical = j["tlars_tlasso1_identical"].get<double>();
    for (const auto& [name, mj] : j.at("methods").items()) {
      MethodAggregate agg;
      agg.seq = mj.at("seq").get<double>();
      agg.separation_trials = mj.value("separation_trials", std::size_t{0});
      for (const auto& [cname, cj] : mj.at("criteria").items()) {
        agg.by_criterion[cname] = CriterionAggregate{cj.at("generalization").get<double>(),
                                                     cj.at("model_selection").get<double>(),
                                                     cj.at("parameter_estimation").get<double>()};
      }
      r.methods[name] = std::move(agg);
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
}

std::string format_report_table(const CaseReport& r) {
  std::ostringstream out;
  char buf[64];
  out << "case " << r.config.name << ": " << family_name(r.config.family) << ", n=" << r.config.n
      << ", d=" << r.config.d << ", trials=" << r.trials << " (failed " << r.failed_trials << ")\n";
  if (r.tlars_tlasso1_identical) {
    std::snprintf(buf, sizeof buf, "%.4f", *r.tlars_tlasso1_identical);
    out << "tlars/tlasso1 identical paths: " << buf << "\n";
  }
  std::vector<std::string> crit;
  for (CriterionKind k : r.config.criteria) crit.push_back(k.name());

  out << "\n" << std::string(10, ' ');
  auto header = [&](const char* title) {
    std::snprintf(buf, sizeof buf, "| %-*s", static_cast<int>(crit.size() * 9), title);
    out << buf;
  };
  header("Generalization (x1e-2)");
  out << "|  Seq   ";
  header("Model selection");
  header("Parameter estimation");
  out << "\n" << std::string(10, ' ');
  for (int block = 0; block < 3; ++block) {
    out << "|";
    if (block == 1) out << "        |";
    for (const auto& c : crit) {
      std::snprintf(buf, sizeof buf, " %8s", c.c_str());
      out << buf;
    }
  }
  out << "\n";
  for (Method m : r.config.methods) {
    const std::string name(method_name(m));
    const auto it = r.methods.find(name);
    if (it == r.methods.end()) continue;
    const auto& agg = it->second;
    std::snprintf(buf, sizeof buf, "%-10s", name.c_str());
    out << buf << "|";
    for (const auto& c : crit) {
      std::snprintf(buf, sizeof buf, " %8.2f", 100.0 * agg.by_criterion.at(c).generalization);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "| %6.4f |", agg.seq);
    out << buf;
    for (const auto& c : crit) {
      std::snprintf(buf, sizeof buf, " %8.4f", agg.by_criterion.at(c).model_selection);
      out << buf;
    }
    out << "|";
    for (const auto& c : crit) {
      std::snprintf(buf, sizeof buf, " %8.1f", agg.by_criterion.at(c).parameter_estimation);
      out << buf;
    }
    out << "\n";
  }
  if (!r.failures.empty()) out << "\nfailures:\n  " << join(r.failures) << "\n";
  return out.str();
}

std::string format_report_csv(const CaseReport& r) {
  std::ostringstream out;
  out << "case,method,criterion,generalization,model_selection,parameter_estimation,seq\n";
  for (Method m : r.config.methods) {
    const std::string name(method_name(m));
    const auto it = r.methods.find(name);
    if (it == r.methods.end()) continue;
    for (CriterionKind k : r.config.criteria) {
      const auto& c = it->second.by_criterion.at(k.name());
      out << r.config.name << ',' << name << ',' << k.name() << ',' << format_double(c.generalization) << ','
          << format_double(c.model_selection) << ',' << format_double(c.parameter_estimation) << ','
          << format_double(it->second.seq) << '\n';
    }
  }
  return out.str();
}

}  // namespace tanlars
