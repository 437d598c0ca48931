#include "setassoc/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "setassoc/error.hpp"
#include "setassoc/matrix_io.hpp"

namespace setassoc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ratio_or_nan(long numerator, long denominator) {
  if (denominator == 0) return kNaN;
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

void check_pvalue(double p, const std::string& response_id, const std::string& what) {
  if (!(p >= 0.0) || !(p <= 1.0)) {
    throw ContractError("response '" + response_id + "': " + what + " p-value outside [0, 1]");
  }
}

std::string cell(double v) { return std::isnan(v) ? std::string() : format_value(v); }

}  // namespace

std::vector<SelectionResult> select(const std::vector<TestOutcome>& outcomes, double alpha) {
  if (!(alpha > 0.0) || !(alpha <= 1.0)) {
    throw ContractError("selection alpha must lie in (0, 1]");
  }
  std::vector<SelectionResult> out;
  out.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    check_pvalue(o.p_joint, o.response_id, "joint");
    SelectionResult s;
    s.response_id = o.response_id;
    s.arm = o.arm;
    s.p_joint = o.p_joint;
    s.p_set = o.p_set;
    s.selected_joint = o.p_joint <= alpha;
    for (const auto& [label, p] : o.p_set) {
      check_pvalue(p, o.response_id, "set '" + label + "'");
      s.selected_set[label] = p <= alpha;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ArmSummary> arm_summary(const std::vector<SelectionResult>& selections) {
  // Collect the full set-label universe so arms missing a label still get a
  // column (as undefined rather than silently absent).
  std::set<std::string> labels;
  std::set<std::string> arms;
  for (const auto& s : selections) {
    if (s.arm.empty()) throw ContractError("selection for '" + s.response_id + "' lacks an arm");
    arms.insert(s.arm);
    for (const auto& [label, sel] : s.selected_set) {
      (void)sel;
      labels.insert(label);
    }
  }

  std::vector<ArmSummary> out;
  for (const auto& arm : arms) {
    ArmSummary a;
    a.arm = arm;
    long n_joint = 0;
    std::map<std::string, long> n_set;            // selected per label
    std::map<std::string, long> n_overlap;        // set and joint
    std::map<std::string, long> n_set_only;       // set minus joint
    std::map<std::string, long> n_joint_only_set; // joint minus set
    long n_joint_only_all = 0;                    // joint minus union of sets
    for (const auto& label : labels) {
      n_set[label] = n_overlap[label] = n_set_only[label] = n_joint_only_set[label] = 0;
    }

    for (const auto& s : selections) {
      if (s.arm != arm) continue;
      ++a.n_tests;
      if (s.selected_joint) ++n_joint;
      bool any_set = false;
      for (const auto& label : labels) {
        const auto it = s.selected_set.find(label);
        const bool sel = it != s.selected_set.end() && it->second;
        if (sel) {
          ++n_set[label];
          any_set = true;
          if (s.selected_joint) ++n_overlap[label];
          else ++n_set_only[label];
        } else if (s.selected_joint) {
          ++n_joint_only_set[label];
        }
      }
      if (s.selected_joint && !any_set) ++n_joint_only_all;
    }

    a.prop_selected_joint = ratio_or_nan(n_joint, a.n_tests);
    for (const auto& label : labels) {
      a.prop_selected[label] = ratio_or_nan(n_set[label], a.n_tests);
      a.overlap_ratio[label] = ratio_or_nan(n_overlap[label], n_joint);
      a.dilution_ratio[label] = ratio_or_nan(n_set_only[label], n_set[label]);
      a.new_discovery_ratio[label] = ratio_or_nan(n_joint_only_set[label], n_joint);
    }
    a.joint_only_ratio = ratio_or_nan(n_joint_only_all, n_joint);
    out.push_back(std::move(a));
  }
  return out;
}

void write_selection_tsv(const std::vector<SelectionResult>& selections, const std::string& path) {
  std::set<std::string> labels;
  for (const auto& s : selections) {
    for (const auto& [label, sel] : s.selected_set) {
      (void)sel;
      labels.insert(label);
    }
  }
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << "response_id\tarm\tp_joint\tselected_joint";
  for (const auto& label : labels) out << "\tp_" << label << "\tselected_" << label;
  out << '\n';
  for (const auto& s : selections) {
    out << s.response_id << '\t' << s.arm << '\t' << cell(s.p_joint) << '\t'
        << (s.selected_joint ? 1 : 0);
    for (const auto& label : labels) {
      const auto p_it = s.p_set.find(label);
      const auto sel_it = s.selected_set.find(label);
      out << '\t' << (p_it == s.p_set.end() ? std::string() : cell(p_it->second)) << '\t';
      if (sel_it != s.selected_set.end()) out << (sel_it->second ? 1 : 0);
    }
    out << '\n';
  }
  if (!out) throw DataError(path + ": write failed");
}

void write_arm_summary_tsv(const std::vector<ArmSummary>& arms, const std::string& path) {
  std::set<std::string> labels;
  for (const auto& a : arms) {
    for (const auto& [label, v] : a.prop_selected) {
      (void)v;
      labels.insert(label);
    }
  }
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << "arm\tn_tests\tprop_selected_joint";
  for (const auto& label : labels) {
    out << "\tprop_selected_" << label << "\toverlap_" << label << "\tdilution_" << label
        << "\tnew_discovery_" << label;
  }
  out << "\tjoint_only_ratio\n";
  const auto lookup = [](const std::map<std::string, double>& m, const std::string& key) {
    const auto it = m.find(key);
    return it == m.end() ? kNaN : it->second;
  };
  for (const auto& a : arms) {
    out << a.arm << '\t' << a.n_tests << '\t' << cell(a.prop_selected_joint);
    for (const auto& label : labels) {
      out << '\t' << cell(lookup(a.prop_selected, label)) << '\t'
          << cell(lookup(a.overlap_ratio, label)) << '\t' << cell(lookup(a.dilution_ratio, label))
          << '\t' << cell(lookup(a.new_discovery_ratio, label));
    }
    out << '\t' << cell(a.joint_only_ratio) << '\n';
  }
  if (!out) throw DataError(path + ": write failed");
}

}  // namespace setassoc
