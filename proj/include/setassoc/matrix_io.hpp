#pragma once

#include <Eigen/Core>
#include <string>
#include <unordered_map>
#include <vector>

namespace setassoc {

// A features-by-samples numeric matrix as stored on disk: one row per
// feature, first column the feature id, header row carrying sample ids.
// Missing values are NaN in memory and the token "NA" on disk.
struct DataMatrix {
  std::vector<std::string> feature_ids;
  std::vector<std::string> sample_ids;
  Eigen::MatrixXd values;  // feature_ids.size() x sample_ids.size()

  long n_features() const { return static_cast<long>(feature_ids.size()); }
  long n_samples() const { return static_cast<long>(sample_ids.size()); }
};

// Genomic location of one feature.
struct FeatureAnnotation {
  std::string feature_id;
  std::string chromosome;
  char arm = 'q';  // 'p' or 'q'
  long long position = 0;
};

using AnnotationMap = std::unordered_map<std::string, FeatureAnnotation>;

// Reads a TSV matrix. Errors carry "path:line:" context. Rejects ragged
// rows, duplicate feature ids, and non-numeric cells (other than NA).
DataMatrix read_matrix_tsv(const std::string& path);

// Writes the matrix in the same format; numbers are rendered with %.10g so
// repeated runs are byte-identical, NaN as "NA".
void write_matrix_tsv(const DataMatrix& m, const std::string& path);

// Reads a feature annotation TSV with header columns feature_id, chromosome,
// arm, position (any order, extra columns ignored).
AnnotationMap read_annotations_tsv(const std::string& path);

void write_annotations_tsv(const std::vector<FeatureAnnotation>& rows, const std::string& path);

// Reorders the columns of `other` to match `reference`'s sample order.
// Any asymmetric difference in sample ids is a hard error that lists the
// ids missing on each side.
void align_samples(const DataMatrix& reference, DataMatrix& other, const std::string& other_name);

// Stable numeric rendering used by every writer ("%.10g", NaN -> "NA").
std::string format_value(double v);

}  // namespace setassoc
