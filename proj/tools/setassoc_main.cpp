#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "setassoc/pipeline.hpp"
#include "setassoc/version.hpp"

namespace {

// Zips the repeated per-source flags into CovariateSource records: one
// annotation per matrix; the window halfwidth and label lists may be given
// once each (shared / auto-numbered) or once per matrix.
std::vector<setassoc::CovariateSource> zip_sources(const std::vector<std::string>& matrices,
                                                   const std::vector<std::string>& annotations,
                                                   const std::vector<std::string>& labels,
                                                   const std::vector<long long>& halfwidths) {
  if (annotations.size() != matrices.size()) {
    throw CLI::ValidationError("--annotation", "need one --annotation per --covariates matrix");
  }
  if (halfwidths.size() != 1 && halfwidths.size() != matrices.size()) {
    throw CLI::ValidationError("--window-halfwidth",
                               "give one shared --window-halfwidth or one per matrix");
  }
  if (!labels.empty() && labels.size() != matrices.size()) {
    throw CLI::ValidationError("--label", "give no --label (auto set1..) or one per matrix");
  }
  std::vector<setassoc::CovariateSource> sources;
  sources.reserve(matrices.size());
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    setassoc::CovariateSource src;
    src.matrix_path = matrices[i];
    src.annotation_path = annotations[i];
    src.label = labels.empty() ? "set" + std::to_string(i + 1) : labels[i];
    src.window_halfwidth = halfwidths.size() == 1 ? halfwidths[0] : halfwidths[i];
    sources.push_back(std::move(src));
  }
  return sources;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint association tests of high-dimensional response and covariate sets"};
  app.set_version_flag("--version", std::string(setassoc::kProgramName) + " " +
                                        setassoc::kVersion);
  app.require_subcommand(1);

  // ---- test ----
  setassoc::TestRunOptions test_opt;
  std::vector<std::string> cov_matrices, cov_annotations, cov_labels;
  std::vector<long long> cov_halfwidths;
  CLI::App* test = app.add_subcommand("test", "run the joint tests genome-wide");
  test->add_option("--responses", test_opt.responses_path, "response matrix TSV")
      ->required();
  test->add_option("--response-annotation", test_opt.response_annotation_path,
                   "response feature annotations TSV")
      ->required();
  test->add_option("--covariates", cov_matrices, "covariate matrix TSV (repeatable)")
      ->required();
  test->add_option("--annotation", cov_annotations,
                   "covariate annotations TSV, one per --covariates");
  test->add_option("--label", cov_labels, "covariate set label, one per --covariates");
  test->add_option("--window-halfwidth", cov_halfwidths,
                   "window halfwidth in basepairs, shared or one per --covariates")
      ->required();
  test->add_option("--confounders", test_opt.confounders_path,
                   "confounder matrix TSV (rows = confounders)");
  test->add_option("--permutations", test_opt.b_permutations, "permutation draws B")
      ->envname("SETASSOC_PERMUTATIONS")
      ->capture_default_str();
  test->add_option("--seed", test_opt.seed, "RNG seed")
      ->envname("SETASSOC_SEED")
      ->capture_default_str();
  test->add_option("--alpha", test_opt.alpha, "selection threshold recorded in the manifest")
      ->capture_default_str();
  test->add_option("--statistic", test_opt.statistic, "joint statistic: sum or with-corr")
      ->check(CLI::IsMember({"sum", "with-corr"}))
      ->capture_default_str();
  test->add_flag("--asymptotic", test_opt.asymptotic,
                 "spectral null distribution instead of permutation (sum statistic only)");
  test->add_flag("--scale-columns", test_opt.scale_columns,
                 "scale covariate columns to unit variance");
  test->add_option("--workers", test_opt.workers, "worker threads (0 = hardware)")
      ->envname("SETASSOC_WORKERS")
      ->capture_default_str();
  test->add_option("--out", test_opt.out_dir, "output directory")->required();

  // ---- simulate ----
  setassoc::SimulateOptions sim_opt;
  CLI::App* sim = app.add_subcommand("simulate", "generate a power-study region");
  sim->add_option("--regime", sim_opt.regime,
                  "x-only | additive | multiplicative | complementary | null")
      ->capture_default_str();
  sim->add_flag("--correlated", sim_opt.correlated, "draw Z = X + U instead of independent Z");
  sim->add_option("--u-sd", sim_opt.u_sd, "sd of U for --correlated")->capture_default_str();
  sim->add_option("--features", sim_opt.n_features, "features per block (I = J = K)")
      ->capture_default_str();
  sim->add_flag("--full-scale", sim_opt.full_scale, "use the full 1000-feature blocks");
  sim->add_option("--samples", sim_opt.n_samples, "sample count N")->capture_default_str();
  sim->add_option("--effect-size", sim_opt.effect_size, "signal coefficient")
      ->capture_default_str();
  sim->add_option("--seed", sim_opt.seed, "RNG seed")
      ->envname("SETASSOC_SEED")
      ->capture_default_str();
  sim->add_option("--out", sim_opt.out_dir, "output directory")->required();

  // ---- roc ----
  setassoc::RocOptions roc_opt;
  CLI::App* roc = app.add_subcommand("roc", "ROC/AUC of a results table against truth labels");
  roc->add_option("--results", roc_opt.results_path, "results.tsv from `test`")->required();
  roc->add_option("--truth", roc_opt.truth_path, "truth.tsv from `simulate`")->required();
  roc->add_option("--p-column", roc_opt.p_column, "p-value column to rank by")
      ->capture_default_str();
  roc->add_option("--out", roc_opt.out_dir, "output directory")->required();

  // ---- report ----
  setassoc::ReportOptions rep_opt;
  CLI::App* rep = app.add_subcommand("report", "selection and per-arm overlap summaries");
  rep->add_option("--results", rep_opt.results_path, "results.tsv from `test`")->required();
  rep->add_option("--alpha", rep_opt.alpha, "selection threshold")->capture_default_str();
  rep->add_option("--out", rep_opt.out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (test->parsed()) {
    try {
      test_opt.covariates = zip_sources(cov_matrices, cov_annotations, cov_labels, cov_halfwidths);
    } catch (const CLI::Error& e) {
      return app.exit(e);
    }
    return setassoc::run_test(test_opt);
  }
  if (sim->parsed()) return setassoc::run_simulate(sim_opt);
  if (roc->parsed()) return setassoc::run_roc(roc_opt);
  if (rep->parsed()) return setassoc::run_report(rep_opt);
  return 1;
}
