#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "doctest.h"
#include "setassoc/error.hpp"
#include "setassoc/matrix_io.hpp"

using namespace setassoc;
namespace fs = std::filesystem;

namespace {

fs::path tmp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "setassoc_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs fn, which must throw DataError; returns the message for inspection.
std::string data_error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  FAIL("expected a DataError");
  return {};
}

}  // namespace

TEST_CASE("matrix round trip preserves content and bytes") {
  DataMatrix m;
  m.feature_ids = {"f1", "f2"};
  m.sample_ids = {"s1", "s2", "s3"};
  m.values.resize(2, 3);
  m.values << 0.1, -2.5, std::nan(""), 12345678901.0, 1e-7, 1.0 / 3.0;

  const auto p1 = tmp_path("round1.tsv");
  const auto p2 = tmp_path("round2.tsv");
  write_matrix_tsv(m, p1.string());
  const DataMatrix back = read_matrix_tsv(p1.string());
  CHECK(back.feature_ids == m.feature_ids);
  CHECK(back.sample_ids == m.sample_ids);
  for (long r = 0; r < 2; ++r) {
    for (long c = 0; c < 3; ++c) {
      if (std::isnan(m.values(r, c))) {
        CHECK(std::isnan(back.values(r, c)));
      } else {
        // the 10-significant-digit rendering is lossy by design
        CHECK(back.values(r, c) == doctest::Approx(m.values(r, c)).epsilon(1e-9));
      }
    }
  }
  // one round trip reaches the fixed point: rewriting changes no byte
  write_matrix_tsv(back, p2.string());
  CHECK(read_text(p1) == read_text(p2));
}

TEST_CASE("NA, empty cells, and CRLF line endings") {
  const auto p = tmp_path("na.tsv");
  write_text(p, "feature_id\ts1\ts2\r\nf1\tNA\t\r\nf2\t3.5\t-1\r\n");
  const DataMatrix m = read_matrix_tsv(p.string());
  CHECK(m.sample_ids == std::vector<std::string>{"s1", "s2"});
  CHECK(std::isnan(m.values(0, 0)));
  CHECK(std::isnan(m.values(0, 1)));  // empty trailing cell reads as missing
  CHECK(m.values(1, 0) == 3.5);
  CHECK(m.values(1, 1) == -1.0);
}

TEST_CASE("matrix reader rejects malformed input with file:line context") {
  const auto p = tmp_path("bad.tsv");

  write_text(p, "feature_id\ts1\ts2\nf1\t1\t2\nf2\t1\n");
  auto msg = data_error_of([&] { read_matrix_tsv(p.string()); });
  CHECK(msg.find(":3: expected 3 columns, got 2") != std::string::npos);
  CHECK(msg.find(p.string()) != std::string::npos);

  write_text(p, "feature_id\ts1\nf1\t1\nf1\t2\n");
  msg = data_error_of([&] { read_matrix_tsv(p.string()); });
  CHECK(msg.find(":3: duplicate feature id 'f1'") != std::string::npos);

  write_text(p, "feature_id\ts1\ts1\nf1\t1\t2\n");
  msg = data_error_of([&] { read_matrix_tsv(p.string()); });
  CHECK(msg.find(":1: duplicate sample id 's1'") != std::string::npos);

  write_text(p, "feature_id\ts1\ts2\nf1\t1\tabc\n");
  msg = data_error_of([&] { read_matrix_tsv(p.string()); });
  CHECK(msg.find(":2: column 3: cannot parse 'abc'") != std::string::npos);

  write_text(p, "");
  msg = data_error_of([&] { read_matrix_tsv(p.string()); });
  CHECK(msg.find(":1: empty file") != std::string::npos);

  write_text(p, "feature_id\nf1\n");
  msg = data_error_of([&] { read_matrix_tsv(p.string()); });
  CHECK(msg.find("at least one sample") != std::string::npos);

  msg = data_error_of([&] { read_matrix_tsv(tmp_path("missing.tsv").string()); });
  CHECK(msg.find("cannot open") != std::string::npos);
}

TEST_CASE("annotation round trip and flexible column order") {
  std::vector<FeatureAnnotation> rows = {
      {"g1", "7", 'q', 55000000},
      {"g2", "X", 'p', 123},
  };
  const auto p = tmp_path("ann.tsv");
  write_annotations_tsv(rows, p.string());
  AnnotationMap map = read_annotations_tsv(p.string());
  REQUIRE(map.size() == 2);
  CHECK(map.at("g1").chromosome == "7");
  CHECK(map.at("g1").arm == 'q');
  CHECK(map.at("g1").position == 55000000);
  CHECK(map.at("g2").arm == 'p');

  // shuffled header with an extra ignored column
  write_text(p, "note\tposition\tfeature_id\tarm\tchromosome\nx\t42\tg9\tp\t2\n");
  map = read_annotations_tsv(p.string());
  CHECK(map.at("g9").position == 42);
  CHECK(map.at("g9").chromosome == "2");
}

TEST_CASE("annotation reader rejects malformed rows") {
  const auto p = tmp_path("ann_bad.tsv");

  write_text(p, "feature_id\tchromosome\tarm\tposition\ng1\t1\tx\t5\n");
  auto msg = data_error_of([&] { read_annotations_tsv(p.string()); });
  CHECK(msg.find("arm must be 'p' or 'q', got 'x'") != std::string::npos);

  write_text(p, "feature_id\tchromosome\tarm\tposition\ng1\t1\tq\t-5\n");
  msg = data_error_of([&] { read_annotations_tsv(p.string()); });
  CHECK(msg.find("position must be a nonnegative integer") != std::string::npos);

  write_text(p, "feature_id\tchromosome\tposition\ng1\t1\t5\n");
  msg = data_error_of([&] { read_annotations_tsv(p.string()); });
  CHECK(msg.find("header must contain feature_id, chromosome, arm, position") !=
        std::string::npos);

  write_text(p, "feature_id\tchromosome\tarm\tposition\ng1\t1\tq\t5\ng1\t2\tp\t6\n");
  msg = data_error_of([&] { read_annotations_tsv(p.string()); });
  CHECK(msg.find(":3: duplicate feature id 'g1'") != std::string::npos);
}

TEST_CASE("align_samples reorders columns to the reference order") {
  DataMatrix ref;
  ref.feature_ids = {"r1"};
  ref.sample_ids = {"s1", "s2", "s3"};
  ref.values = Eigen::MatrixXd::Zero(1, 3);

  DataMatrix other;
  other.feature_ids = {"c1", "c2"};
  other.sample_ids = {"s3", "s1", "s2"};
  other.values.resize(2, 3);
  other.values << 30, 10, 20, 33, 11, 22;

  align_samples(ref, other, "covariates");
  CHECK(other.sample_ids == ref.sample_ids);
  CHECK(other.values(0, 0) == 10);
  CHECK(other.values(0, 1) == 20);
  CHECK(other.values(0, 2) == 30);
  CHECK(other.values(1, 0) == 11);
  CHECK(other.values(1, 1) == 22);
  CHECK(other.values(1, 2) == 33);
}

TEST_CASE("align_samples reports the asymmetric id difference") {
  DataMatrix ref;
  ref.sample_ids = {"s1", "s2", "s3"};
  ref.values = Eigen::MatrixXd::Zero(0, 3);
  DataMatrix other;
  other.feature_ids = {"c1"};
  other.sample_ids = {"s1", "s3", "s9"};
  other.values = Eigen::MatrixXd::Zero(1, 3);

  const auto msg = data_error_of([&] { align_samples(ref, other, "covariates"); });
  CHECK(msg.find("covariates") != std::string::npos);
  CHECK(msg.find("missing: [s2]") != std::string::npos);
  CHECK(msg.find("extra: [s9]") != std::string::npos);
}

TEST_CASE("format_value renders stable tokens") {
  CHECK(format_value(std::nan("")) == "NA");
  CHECK(format_value(0.1) == "0.1");
  CHECK(format_value(-2.5) == "-2.5");
  CHECK(format_value(1234567890.0) == "1234567890");
  CHECK(format_value(1.0 / 3.0) == "0.3333333333");
  CHECK(format_value(1e-7) == "1e-07");
  CHECK(format_value(0.0) == "0");
}
