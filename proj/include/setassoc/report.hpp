#pragma once

#include <map>
#include <string>
#include <vector>

namespace setassoc {

// Minimal view of one tested response as needed for selection: the joint
// p-value plus one p-value per covariate set label.
struct TestOutcome {
  std::string response_id;
  std::string arm;  // chromosome + arm, e.g. "12q"
  double p_joint = 1.0;
  std::map<std::string, double> p_set;  // set label -> p-value
};

struct SelectionResult {
  std::string response_id;
  std::string arm;
  double p_joint = 1.0;
  std::map<std::string, double> p_set;
  bool selected_joint = false;
  std::map<std::string, bool> selected_set;
};

// Per-arm aggregation of selection agreement between the joint test and each
// single-set test. Ratios with a zero denominator are NaN ("undefined") and
// render as empty cells, never as 0 or 1.
struct ArmSummary {
  std::string arm;
  long n_tests = 0;
  double prop_selected_joint = 0.0;
  std::map<std::string, double> prop_selected;       // per set label
  std::map<std::string, double> overlap_ratio;       // |set ∩ joint| / |joint|
  std::map<std::string, double> dilution_ratio;      // |set \ joint| / |set|
  std::map<std::string, double> new_discovery_ratio; // |joint \ set| / |joint|
  double joint_only_ratio = 0.0;                     // |joint \ (∪ sets)| / |joint|
};

// Applies the selection threshold p <= alpha (inclusive) to every test type
// independently.
std::vector<SelectionResult> select(const std::vector<TestOutcome>& outcomes, double alpha);

// Aggregates selections per chromosome arm; arms are emitted in sorted order.
std::vector<ArmSummary> arm_summary(const std::vector<SelectionResult>& selections);

// TSV writers (stable column order and %.10g rendering; NaN -> empty cell).
void write_selection_tsv(const std::vector<SelectionResult>& selections, const std::string& path);
void write_arm_summary_tsv(const std::vector<ArmSummary>& arms, const std::string& path);

}  // namespace setassoc
