#include "setassoc/matrix_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "setassoc/error.hpp"

namespace setassoc {

namespace {

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

// Strips a trailing carriage return so files with CRLF endings parse cleanly.
void chomp(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

double parse_cell(const std::string& cell, const std::string& path, long line_no, long col_no) {
  if (cell == "NA" || cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError(path + ":" + std::to_string(line_no) + ": column " + std::to_string(col_no) +
                    ": cannot parse '" + cell + "' as a number");
  }
  return value;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  return in;
}

}  // namespace

std::string format_value(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

DataMatrix read_matrix_tsv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ":1: empty file");
  chomp(line);
  const auto header = split_tabs(line);
  if (header.size() < 2) {
    throw DataError(path + ":1: header needs a feature-id column plus at least one sample");
  }
  DataMatrix m;
  m.sample_ids.assign(header.begin() + 1, header.end());
  const std::size_t n_samples = m.sample_ids.size();
  {
    std::unordered_set<std::string> seen;
    for (const auto& id : m.sample_ids) {
      if (!seen.insert(id).second) throw DataError(path + ":1: duplicate sample id '" + id + "'");
    }
  }

  std::vector<std::vector<double>> rows;
  std::unordered_set<std::string> seen_features;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    chomp(line);
    if (line.empty()) continue;
    const auto cells = split_tabs(line);
    if (cells.size() != n_samples + 1) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(n_samples + 1) + " columns, got " +
                      std::to_string(cells.size()));
    }
    if (!seen_features.insert(cells[0]).second) {
      throw DataError(path + ":" + std::to_string(line_no) + ": duplicate feature id '" +
                      cells[0] + "'");
    }
    m.feature_ids.push_back(cells[0]);
    std::vector<double> row(n_samples);
    for (std::size_t c = 0; c < n_samples; ++c) {
      row[c] = parse_cell(cells[c + 1], path, line_no, static_cast<long>(c + 2));
    }
    rows.push_back(std::move(row));
  }
  m.values.resize(static_cast<long>(rows.size()), static_cast<long>(n_samples));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < n_samples; ++c) {
      m.values(static_cast<long>(r), static_cast<long>(c)) = rows[r][c];
    }
  }
  return m;
}

void write_matrix_tsv(const DataMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << "feature_id";
  for (const auto& s : m.sample_ids) out << '\t' << s;
  out << '\n';
  for (long r = 0; r < m.n_features(); ++r) {
    out << m.feature_ids[static_cast<std::size_t>(r)];
    for (long c = 0; c < m.n_samples(); ++c) out << '\t' << format_value(m.values(r, c));
    out << '\n';
  }
  if (!out) throw DataError(path + ": write failed");
}

AnnotationMap read_annotations_tsv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ":1: empty file");
  chomp(line);
  const auto header = split_tabs(line);
  long id_col = -1, chrom_col = -1, arm_col = -1, pos_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "feature_id") id_col = static_cast<long>(c);
    else if (header[c] == "chromosome") chrom_col = static_cast<long>(c);
    else if (header[c] == "arm") arm_col = static_cast<long>(c);
    else if (header[c] == "position") pos_col = static_cast<long>(c);
  }
  if (id_col < 0 || chrom_col < 0 || arm_col < 0 || pos_col < 0) {
    throw DataError(path + ":1: header must contain feature_id, chromosome, arm, position");
  }
  AnnotationMap out;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    chomp(line);
    if (line.empty()) continue;
    const auto cells = split_tabs(line);
    if (static_cast<long>(cells.size()) <= std::max({id_col, chrom_col, arm_col, pos_col})) {
      throw DataError(path + ":" + std::to_string(line_no) + ": too few columns");
    }
    FeatureAnnotation ann;
    ann.feature_id = cells[static_cast<std::size_t>(id_col)];
    ann.chromosome = cells[static_cast<std::size_t>(chrom_col)];
    const std::string& arm = cells[static_cast<std::size_t>(arm_col)];
    if (arm != "p" && arm != "q") {
      throw DataError(path + ":" + std::to_string(line_no) + ": arm must be 'p' or 'q', got '" +
                      arm + "'");
    }
    ann.arm = arm[0];
    const std::string& pos = cells[static_cast<std::size_t>(pos_col)];
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(pos.data(), pos.data() + pos.size(), value);
    if (ec != std::errc() || ptr != pos.data() + pos.size() || value < 0) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": position must be a nonnegative integer, got '" + pos + "'");
    }
    ann.position = value;
    if (!out.emplace(ann.feature_id, ann).second) {
      throw DataError(path + ":" + std::to_string(line_no) + ": duplicate feature id '" +
                      ann.feature_id + "'");
    }
  }
  return out;
}

void write_annotations_tsv(const std::vector<FeatureAnnotation>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << "feature_id\tchromosome\tarm\tposition\n";
  for (const auto& a : rows) {
    out << a.feature_id << '\t' << a.chromosome << '\t' << a.arm << '\t' << a.position << '\n';
  }
  if (!out) throw DataError(path + ": write failed");
}

void align_samples(const DataMatrix& reference, DataMatrix& other, const std::string& other_name) {
  if (reference.sample_ids == other.sample_ids) return;
  std::unordered_map<std::string, long> other_pos;
  for (long c = 0; c < other.n_samples(); ++c) other_pos.emplace(other.sample_ids[static_cast<std::size_t>(c)], c);
  std::vector<std::string> missing_in_other;
  for (const auto& id : reference.sample_ids) {
    if (!other_pos.count(id)) missing_in_other.push_back(id);
  }
  std::unordered_set<std::string> ref_ids(reference.sample_ids.begin(), reference.sample_ids.end());
  std::vector<std::string> extra_in_other;
  for (const auto& id : other.sample_ids) {
    if (!ref_ids.count(id)) extra_in_other.push_back(id);
  }
  if (!missing_in_other.empty() || !extra_in_other.empty()) {
    std::ostringstream msg;
    msg << other_name << ": sample ids differ from the response matrix;";
    msg << " missing: [";
    for (std::size_t i = 0; i < missing_in_other.size(); ++i) {
      if (i) msg << ", ";
      msg << missing_in_other[i];
    }
    msg << "], extra: [";
    for (std::size_t i = 0; i < extra_in_other.size(); ++i) {
      if (i) msg << ", ";
      msg << extra_in_other[i];
    }
    msg << "]";
    throw DataError(msg.str());
  }
  // Same id multiset, different order: reorder columns to match.
  Eigen::MatrixXd reordered(other.n_features(), other.n_samples());
  for (long c = 0; c < reference.n_samples(); ++c) {
    reordered.col(c) = other.values.col(other_pos.at(reference.sample_ids[static_cast<std::size_t>(c)]));
  }
  other.values = std::move(reordered);
  other.sample_ids = reference.sample_ids;
}

}  // namespace setassoc
