#include "setassoc/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "setassoc/error.hpp"
#include "setassoc/genome_map.hpp"
#include "setassoc/matrix_io.hpp"
#include "setassoc/null_dist.hpp"
#include "setassoc/permutation.hpp"
#include "setassoc/report.hpp"
#include "setassoc/rng.hpp"
#include "setassoc/score_stat.hpp"
#include "setassoc/simulate.hpp"
#include "setassoc/version.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace setassoc {

namespace {

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Tracks the files an invocation writes so a failure can remove the partial
// outputs instead of leaving a half-written run directory behind.
class OutputGuard {
 public:
  explicit OutputGuard(const std::string& out_dir) : dir_(out_dir.empty() ? "." : out_dir) {
    fs::create_directories(dir_);
  }
  OutputGuard(const OutputGuard&) = delete;
  OutputGuard& operator=(const OutputGuard&) = delete;
  ~OutputGuard() {
    if (committed_) return;
    for (const auto& f : files_) {
      std::error_code ec;
      fs::remove(f, ec);
    }
  }
  std::string claim(const std::string& name) {
    files_.push_back(dir_ / name);
    return files_.back().string();
  }
  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
  bool committed_ = false;
};

void write_manifest(const std::string& path, const std::string& subcommand,
                    const ordered_json& config, const std::vector<std::string>& outputs) {
  ordered_json m;
  m["program"] = kProgramName;
  m["version"] = kVersion;
  m["subcommand"] = subcommand;
  m["config"] = config;
  m["config_hash"] = hex64(fnv1a64(config.dump()));
  m["outputs"] = outputs;
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << m.dump(2) << '\n';
  if (!out) throw DataError(path + ": write failed");
}

// Plain string table for re-reading our own TSV outputs.
struct Table {
  std::string path;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  long column_index(const std::string& name) const {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c] == name) return static_cast<long>(c);
    }
    throw DataError(path + ": missing column '" + name + "'");
  }
};

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  Table t;
  t.path = path;
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ":1: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.columns = split_tabs(line);
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_tabs(line);
    if (cells.size() != t.columns.size()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(t.columns.size()) + " columns, got " +
                      std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

double parse_double_cell(const std::string& cell, const std::string& path, std::size_t row,
                         const std::string& column) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw DataError(path + ": row " + std::to_string(row + 2) + ": column '" + column +
                    "': cannot parse '" + cell + "' as a number");
  }
  return value;
}

// ---- test subcommand ------------------------------------------------------

struct SourceData {
  CovariateSource cfg;
  DataMatrix matrix;
  AnnotationMap annotations;
  WindowSets windows;
};

struct RowOut {
  bool excluded = false;
  std::string reason;
  std::string line;
};

void validate_test_options(const TestRunOptions& opt) {
  if (opt.responses_path.empty()) throw ContractError("a response matrix is required");
  if (opt.response_annotation_path.empty()) {
    throw ContractError("a response annotation file is required");
  }
  if (opt.covariates.size() < 2) {
    throw ContractError("the joint test needs at least 2 covariate sources, got " +
                        std::to_string(opt.covariates.size()));
  }
  std::set<std::string> labels;
  for (const auto& src : opt.covariates) {
    if (src.label.empty()) throw ContractError("every covariate source needs a label");
    if (!labels.insert(src.label).second) {
      throw ContractError("duplicate covariate label '" + src.label + "'");
    }
    if (src.window_halfwidth <= 0) {
      throw ContractError("covariate source '" + src.label + "' needs a positive window halfwidth");
    }
  }
  if (opt.statistic != "sum" && opt.statistic != "with-corr") {
    throw ContractError("unknown statistic '" + opt.statistic + "' (expected sum or with-corr)");
  }
  if (opt.statistic == "with-corr" && opt.covariates.size() != 2) {
    throw ContractError("the with-corr statistic requires exactly 2 covariate sources");
  }
  if (opt.asymptotic && opt.statistic != "sum") {
    throw ContractError("asymptotic inference is only available for the sum statistic");
  }
  if (!opt.asymptotic && opt.b_permutations < 99) {
    throw ContractError("need at least 99 permutations, got " +
                        std::to_string(opt.b_permutations));
  }
  if (!(opt.alpha > 0.0) || !(opt.alpha > 0.0 && opt.alpha <= 1.0)) {
    throw ContractError("alpha must lie in (0, 1]");
  }
  if (opt.workers < 0) throw ContractError("worker count cannot be negative");
}

ordered_json test_config_json(const TestRunOptions& opt) {
  ordered_json config;
  config["responses"] = opt.responses_path;
  config["response_annotation"] = opt.response_annotation_path;
  config["confounders"] = opt.confounders_path;
  ordered_json sources = ordered_json::array();
  for (const auto& src : opt.covariates) {
    ordered_json s;
    s["matrix"] = src.matrix_path;
    s["annotation"] = src.annotation_path;
    s["label"] = src.label;
    s["window_halfwidth"] = src.window_halfwidth;
    sources.push_back(std::move(s));
  }
  config["covariates"] = std::move(sources);
  config["b_permutations"] = opt.b_permutations;
  config["seed"] = opt.seed;
  config["alpha"] = opt.alpha;
  config["statistic"] = opt.statistic;
  config["asymptotic"] = opt.asymptotic;
  config["scale_columns"] = opt.scale_columns;
  return config;
}

}  // namespace

int run_test(const TestRunOptions& opt) {
  try {
    validate_test_options(opt);

    DataMatrix responses = read_matrix_tsv(opt.responses_path);
    const AnnotationMap response_ann = read_annotations_tsv(opt.response_annotation_path);

    std::vector<SourceData> sources;
    sources.reserve(opt.covariates.size());
    for (const auto& src : opt.covariates) {
      SourceData s;
      s.cfg = src;
      s.matrix = read_matrix_tsv(src.matrix_path);
      s.annotations = read_annotations_tsv(src.annotation_path);
      align_samples(responses, s.matrix, src.matrix_path);
      CovariateWindowSpec spec{src.label, src.window_halfwidth};
      s.windows = build_window_sets(responses, response_ann, s.matrix, s.annotations, spec);
      sources.push_back(std::move(s));
    }

    DataMatrix confounders;
    const bool has_confounders = !opt.confounders_path.empty();
    if (has_confounders) {
      confounders = read_matrix_tsv(opt.confounders_path);
      align_samples(responses, confounders, opt.confounders_path);
    }
    const long n_conf = has_confounders ? confounders.n_features() : 0;

    const long n_responses = responses.n_features();
    const long n_all_samples = responses.n_samples();
    const StatVariant variant =
        opt.statistic == "with-corr" ? StatVariant::kWithCorr : StatVariant::kSumRaw;
    PermutationPlan plan;
    plan.n_permutations = opt.b_permutations;
    plan.seed = opt.seed;

    std::vector<RowOut> out_rows(static_cast<std::size_t>(n_responses));

    const auto process = [&](std::size_t r) {
      RowOut& row = out_rows[r];
      const std::string& rid = responses.feature_ids[r];
      const auto exclude = [&](const std::string& reason) {
        row.excluded = true;
        row.reason = reason;
      };
      try {
        for (const auto& s : sources) {
          if (s.windows.covariate_rows[r].empty()) {
            exclude("no covariates within window for set '" + s.cfg.label + "'");
            return;
          }
        }
        // Complete-case mask: the response, every windowed covariate, and
        // every confounder must be observed for a sample to enter the test.
        std::vector<int> active;
        active.reserve(static_cast<std::size_t>(n_all_samples));
        for (long n = 0; n < n_all_samples; ++n) {
          bool ok = std::isfinite(responses.values(static_cast<long>(r), n));
          for (const auto& s : sources) {
            if (!ok) break;
            for (const int cov_row : s.windows.covariate_rows[r]) {
              if (!std::isfinite(s.matrix.values(cov_row, n))) {
                ok = false;
                break;
              }
            }
          }
          for (long c = 0; ok && c < n_conf; ++c) {
            ok = std::isfinite(confounders.values(c, n));
          }
          if (ok) active.push_back(static_cast<int>(n));
        }
        const long n_active = static_cast<long>(active.size());
        if (n_active < 3) {
          exclude("only " + std::to_string(n_active) + " complete samples");
          return;
        }
        if (n_conf + 1 >= n_active) {
          exclude("too few complete samples for confounder adjustment");
          return;
        }

        ResponseVector y;
        y.id = rid;
        y.values.resize(n_active);
        for (long i = 0; i < n_active; ++i) {
          y.values(i) = responses.values(static_cast<long>(r), active[static_cast<std::size_t>(i)]);
        }
        Eigen::MatrixXd conf_active;
        if (has_confounders) {
          conf_active.resize(n_active, n_conf);
          for (long i = 0; i < n_active; ++i) {
            for (long c = 0; c < n_conf; ++c) {
              conf_active(i, c) = confounders.values(c, active[static_cast<std::size_t>(i)]);
            }
          }
          y.values = residualize_confounders(y.values, conf_active);
        } else {
          y = center_response(y);
        }

        std::vector<CovariateSet> sets;
        sets.reserve(sources.size());
        for (const auto& s : sources) {
          sets.push_back(make_window_covariate_set(s.matrix, s.windows.covariate_rows[r], active,
                                                   s.cfg.label, opt.scale_columns, nullptr));
        }
        long nonzero_sets = 0;
        for (const auto& set : sets) {
          if (set.matrix.cols() > 0) ++nonzero_sets;
        }
        if (nonzero_sets == 0) {
          exclude("no variable covariates in any set on the complete samples");
          return;
        }
        if (variant == StatVariant::kWithCorr) {
          for (const auto& set : sets) {
            if (set.matrix.cols() == 0) {
              exclude("covariate set '" + set.set_label + "' constant on the complete samples");
              return;
            }
          }
        }

        std::vector<SingleSetStat> per_set;
        std::vector<double> p_set;
        double stat_joint = 0.0;
        double p_joint = 1.0;
        std::optional<double> rho;
        if (opt.asymptotic) {
          // With confounders, project the covariate columns onto the residual
          // space as well, and shrink the exchangeable dimension accordingly.
          Eigen::MatrixXd merged_kernel = Eigen::MatrixXd::Zero(n_active, n_active);
          double q_sum = 0.0;
          per_set.reserve(sets.size());
          p_set.reserve(sets.size());
          for (auto& set : sets) {
            if (has_confounders && set.matrix.cols() > 0) {
              for (long c = 0; c < set.matrix.cols(); ++c) {
                set.matrix.col(c) = residualize_confounders(set.matrix.col(c), conf_active);
              }
            }
            per_set.push_back(single_set_stat(y, set));
            q_sum += per_set.back().q_raw;
            Eigen::MatrixXd kernel;
            kernel.noalias() = set.matrix * set.matrix.transpose();
            merged_kernel += kernel;
            SpectralNull null_dist = spectral_decompose(kernel);
            null_dist.n_samples = static_cast<int>(n_active - n_conf);
            p_set.push_back(pvalue_asymptotic(per_set.back().q_raw, null_dist));
          }
          SpectralNull merged = spectral_decompose(merged_kernel);
          merged.n_samples = static_cast<int>(n_active - n_conf);
          stat_joint = q_sum;
          p_joint = pvalue_asymptotic(q_sum, merged);
        } else {
          JointTestResult res = joint_permutation_test(y, sets, variant, plan);
          per_set = std::move(res.per_set);
          p_set = std::move(res.p_set);
          p_joint = res.p_joint;
          if (variant == StatVariant::kWithCorr) {
            stat_joint = res.combined.t2_with_corr.value_or(
                std::numeric_limits<double>::quiet_NaN());
            rho = res.combined.rho_xz;
          } else {
            stat_joint = res.combined.q_sum;
          }
        }

        std::ostringstream line;
        const auto& ann = response_ann.at(rid);
        line << rid << '\t' << ann.chromosome << ann.arm << '\t' << n_active;
        for (std::size_t m = 0; m < sets.size(); ++m) {
          line << '\t' << sets[m].feature_ids.size() << '\t' << format_value(per_set[m].q_raw)
               << '\t' << format_value(per_set[m].t_standardized) << '\t'
               << format_value(p_set[m]);
        }
        line << '\t' << format_value(stat_joint) << '\t' << format_value(p_joint);
        if (variant == StatVariant::kWithCorr) {
          line << '\t' << format_value(rho ? *rho : std::numeric_limits<double>::quiet_NaN());
        }
        row.line = line.str();
      } catch (const DataError& e) {
        exclude(e.what());
      } catch (const NumericError& e) {
        exclude(e.what());
      }
    };

    const int workers = opt.workers == 0 ? default_workers() : opt.workers;
    parallel_for(static_cast<std::size_t>(n_responses), workers, process);

    OutputGuard guard(opt.out_dir);
    const std::string results_path = guard.claim("results.tsv");
    {
      std::ofstream out(results_path);
      if (!out) throw DataError(results_path + ": cannot open for writing");
      out << "response_id\tarm\tn_samples";
      for (const auto& src : opt.covariates) {
        out << "\tj_" << src.label << "\tq_" << src.label << "\tt_" << src.label << "\tp_"
            << src.label;
      }
      out << "\tstat_joint\tp_joint";
      if (variant == StatVariant::kWithCorr) out << "\trho_xz";
      out << '\n';
      for (const auto& row : out_rows) {
        if (!row.excluded) out << row.line << '\n';
      }
      if (!out) throw DataError(results_path + ": write failed");
    }
    const std::string excluded_path = guard.claim("excluded.tsv");
    long n_excluded = 0;
    {
      std::ofstream out(excluded_path);
      if (!out) throw DataError(excluded_path + ": cannot open for writing");
      out << "response_id\treason\n";
      for (std::size_t r = 0; r < out_rows.size(); ++r) {
        if (out_rows[r].excluded) {
          out << responses.feature_ids[r] << '\t' << out_rows[r].reason << '\n';
          ++n_excluded;
        }
      }
      if (!out) throw DataError(excluded_path + ": write failed");
    }
    write_manifest(guard.claim("manifest.json"), "test", test_config_json(opt),
                   {"results.tsv", "excluded.tsv"});
    guard.commit();
    std::cerr << "tested " << (n_responses - n_excluded) << " responses, excluded " << n_excluded
              << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_simulate(const SimulateOptions& opt) {
  try {
    RegionConfig cfg;
    cfg.regime = parse_regime(opt.regime);
    cfg.n_features = opt.full_scale ? 1000 : opt.n_features;
    cfg.n_samples = opt.n_samples;
    cfg.effect_size = opt.effect_size;
    cfg.seed = opt.seed;
    const SimulatedRegion region =
        opt.correlated ? generate_correlated(cfg, opt.u_sd) : generate_region(cfg);

    OutputGuard guard(opt.out_dir);
    write_matrix_tsv(region.responses, guard.claim("responses.tsv"));
    write_matrix_tsv(region.covariates_x, guard.claim("covariates_x.tsv"));
    write_matrix_tsv(region.covariates_z, guard.claim("covariates_z.tsv"));

    // All simulated features sit on one chromosome at 1 kb spacing, response
    // i co-located with covariate columns x_i and z_i; a window halfwidth
    // covering the region span tests every response against the full block.
    std::vector<FeatureAnnotation> annotations;
    annotations.reserve(static_cast<std::size_t>(3 * cfg.n_features));
    const auto annotate = [&](const std::vector<std::string>& ids) {
      for (std::size_t i = 0; i < ids.size(); ++i) {
        annotations.push_back(
            {ids[i], "1", 'q', static_cast<long long>(i + 1) * 1000});
      }
    };
    annotate(region.responses.feature_ids);
    annotate(region.covariates_x.feature_ids);
    annotate(region.covariates_z.feature_ids);
    write_annotations_tsv(annotations, guard.claim("annotations.tsv"));

    {
      const std::string truth_path = guard.claim("truth.tsv");
      std::ofstream out(truth_path);
      if (!out) throw DataError(truth_path + ": cannot open for writing");
      out << "feature_id\ttruth\n";
      for (std::size_t i = 0; i < region.truth.size(); ++i) {
        out << region.responses.feature_ids[i] << '\t' << (region.truth[i] ? 1 : 0) << '\n';
      }
      if (!out) throw DataError(truth_path + ": write failed");
    }

    ordered_json config;
    config["regime"] = opt.regime;
    config["correlated"] = opt.correlated;
    config["u_sd"] = opt.u_sd;
    config["n_features"] = cfg.n_features;
    config["n_samples"] = cfg.n_samples;
    config["effect_size"] = cfg.effect_size;
    config["seed"] = cfg.seed;
    write_manifest(guard.claim("manifest.json"), "simulate", config,
                   {"responses.tsv", "covariates_x.tsv", "covariates_z.tsv", "annotations.tsv",
                    "truth.tsv"});
    guard.commit();
    std::cerr << "simulated " << cfg.n_features << " responses, regime " << opt.regime << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_roc(const RocOptions& opt) {
  try {
    const Table results = read_table(opt.results_path);
    const long id_col = results.column_index("response_id");
    const long p_col = results.column_index(opt.p_column);

    const Table truth_table = read_table(opt.truth_path);
    const long truth_id_col = truth_table.column_index("feature_id");
    const long truth_col = truth_table.column_index("truth");
    std::unordered_map<std::string, bool> truth_by_id;
    for (const auto& row : truth_table.rows) {
      const std::string& flag = row[static_cast<std::size_t>(truth_col)];
      if (flag != "0" && flag != "1") {
        throw DataError(opt.truth_path + ": truth must be 0 or 1, got '" + flag + "'");
      }
      truth_by_id[row[static_cast<std::size_t>(truth_id_col)]] = flag == "1";
    }

    std::vector<double> pvalues;
    std::vector<bool> truth;
    pvalues.reserve(results.rows.size());
    truth.reserve(results.rows.size());
    for (std::size_t r = 0; r < results.rows.size(); ++r) {
      const std::string& rid = results.rows[r][static_cast<std::size_t>(id_col)];
      const auto it = truth_by_id.find(rid);
      if (it == truth_by_id.end()) {
        throw DataError(opt.truth_path + ": no truth label for response '" + rid + "'");
      }
      pvalues.push_back(parse_double_cell(results.rows[r][static_cast<std::size_t>(p_col)],
                                          opt.results_path, r, opt.p_column));
      truth.push_back(it->second);
    }
    const RocCurve curve = roc_from_pvalues(pvalues, truth);

    OutputGuard guard(opt.out_dir);
    {
      const std::string roc_path = guard.claim("roc.tsv");
      std::ofstream out(roc_path);
      if (!out) throw DataError(roc_path + ": cannot open for writing");
      out << "threshold\tfpr\ttpr\n";
      for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
        out << format_value(curve.thresholds[i]) << '\t' << format_value(curve.fpr[i]) << '\t'
            << format_value(curve.tpr[i]) << '\n';
      }
      if (!out) throw DataError(roc_path + ": write failed");
    }
    {
      const std::string auc_path = guard.claim("auc.tsv");
      std::ofstream out(auc_path);
      if (!out) throw DataError(auc_path + ": cannot open for writing");
      out << "auc\n" << format_value(curve.auc) << '\n';
      if (!out) throw DataError(auc_path + ": write failed");
    }
    ordered_json config;
    config["results"] = opt.results_path;
    config["truth"] = opt.truth_path;
    config["p_column"] = opt.p_column;
    write_manifest(guard.claim("manifest.json"), "roc", config, {"roc.tsv", "auc.tsv"});
    guard.commit();
    std::cerr << "auc " << format_value(curve.auc) << " over " << pvalues.size() << " tests\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_report(const ReportOptions& opt) {
  try {
    const Table results = read_table(opt.results_path);
    const long id_col = results.column_index("response_id");
    const long arm_col = results.column_index("arm");
    const long p_joint_col = results.column_index("p_joint");
    // Every p_<label> column except p_joint is a per-set p-value.
    std::vector<std::pair<std::string, long>> set_columns;
    for (std::size_t c = 0; c < results.columns.size(); ++c) {
      const std::string& name = results.columns[c];
      if (name.rfind("p_", 0) == 0 && name != "p_joint") {
        set_columns.emplace_back(name.substr(2), static_cast<long>(c));
      }
    }

    std::vector<TestOutcome> outcomes;
    outcomes.reserve(results.rows.size());
    for (std::size_t r = 0; r < results.rows.size(); ++r) {
      TestOutcome o;
      o.response_id = results.rows[r][static_cast<std::size_t>(id_col)];
      o.arm = results.rows[r][static_cast<std::size_t>(arm_col)];
      o.p_joint = parse_double_cell(results.rows[r][static_cast<std::size_t>(p_joint_col)],
                                    opt.results_path, r, "p_joint");
      for (const auto& [label, col] : set_columns) {
        o.p_set[label] = parse_double_cell(results.rows[r][static_cast<std::size_t>(col)],
                                           opt.results_path, r, "p_" + label);
      }
      outcomes.push_back(std::move(o));
    }

    const auto selections = select(outcomes, opt.alpha);
    const auto arms = arm_summary(selections);

    OutputGuard guard(opt.out_dir);
    write_selection_tsv(selections, guard.claim("selection.tsv"));
    write_arm_summary_tsv(arms, guard.claim("arm_summary.tsv"));
    ordered_json config;
    config["results"] = opt.results_path;
    config["alpha"] = opt.alpha;
    write_manifest(guard.claim("manifest.json"), "report", config,
                   {"selection.tsv", "arm_summary.tsv"});
    guard.commit();
    long n_selected = 0;
    for (const auto& s : selections) n_selected += s.selected_joint ? 1 : 0;
    std::cerr << "selected " << n_selected << " of " << selections.size()
              << " joint tests at alpha " << format_value(opt.alpha) << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace setassoc
