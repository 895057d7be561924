#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <gtest/gtest.h>

#include "rvr/dataset_io.hpp"
#include "rvr/errors.hpp"
#include "support.hpp"

using namespace rvr;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("rvr_io_" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(DatasetIo, KindNames) {
  EXPECT_EQ(parse_dataset_kind("pca"), DatasetKind::Pca);
  EXPECT_EQ(parse_dataset_kind("lrmc"), DatasetKind::Lrmc);
  EXPECT_EQ(parse_dataset_kind("spd"), DatasetKind::Spd);
  EXPECT_EQ(parse_dataset_kind("rkm"), DatasetKind::Spd);
  EXPECT_THROW(parse_dataset_kind("mnist"), ConfigError);
  EXPECT_EQ(to_string(DatasetKind::Lrmc), "lrmc");
}

TEST(DatasetIo, PcaRoundTripAndHeaderLayout) {
  TempDir dir;
  const PcaDataset d = *fixtures::pca_data(7, 3, 2, 1);
  save_dataset(dir.file("p.bin"), d);
  const std::string bytes = slurp(dir.file("p.bin"));
  ASSERT_GE(bytes.size(), 16u);
  EXPECT_EQ(std::memcmp(bytes.data(), kDatasetMagic, 8), 0);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), kDatasetVersion);
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 1);  // kind, little-endian u32
  // First sample value lands right after the header and matrix shape.
  const std::size_t offset = 8 + 4 + 4 + 4 * 8 + 2 * 8;
  double first;
  std::memcpy(&first, bytes.data() + offset, 8);
  EXPECT_EQ(first, d.samples(0, 0));

  const Dataset back = load_dataset(dir.file("p.bin"));
  const auto& p = std::get<PcaDataset>(back);
  EXPECT_TRUE(p.samples == d.samples);
  EXPECT_EQ(p.r, 2);
}

TEST(DatasetIo, LrmcRoundTripKeepsTruthAndTest) {
  TempDir dir;
  const LrmcDataset d = *fixtures::lrmc_data(100, 12, 2, 5.0, 2);
  save_dataset(dir.file("l.bin"), d);
  const auto back = std::get<LrmcDataset>(load_dataset(dir.file("l.bin")));
  EXPECT_EQ(back.n, d.n);
  EXPECT_EQ(back.d, d.d);
  EXPECT_EQ(back.r, d.r);
  EXPECT_EQ(back.values, d.values);
  EXPECT_EQ(back.rows, d.rows);
  EXPECT_EQ(back.col_start, d.col_start);
  ASSERT_EQ(back.test.size(), d.test.size());
  for (std::size_t i = 0; i < d.test.size(); ++i) EXPECT_EQ(back.test[i].value, d.test[i].value);
  ASSERT_TRUE(back.truth_basis && back.truth_coeffs);
  EXPECT_TRUE(*back.truth_basis == *d.truth_basis);
  EXPECT_TRUE(*back.truth_coeffs == *d.truth_coeffs);
}

TEST(DatasetIo, SpdRoundTrip) {
  TempDir dir;
  const SpdDataset d = *fixtures::spd_data(5, 3, 10.0, 3);
  save_dataset(dir.file("s.bin"), d);
  const auto back = std::get<SpdDataset>(load_dataset(dir.file("s.bin")));
  ASSERT_EQ(back.n(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_TRUE(back.matrices[i] == d.matrices[i]);
}

TEST(DatasetIo, CorruptFilesAreRejected) {
  TempDir dir;
  {
    std::ofstream os(dir.file("bad.bin"), std::ios::binary);
    os << "NOTADATASETATALL";
  }
  EXPECT_THROW(load_dataset(dir.file("bad.bin")), Error);
  EXPECT_THROW(load_dataset(dir.file("missing.bin")), Error);
  save_dataset(dir.file("t.bin"), *fixtures::pca_data(7, 3, 2, 4));
  const std::string full = slurp(dir.file("t.bin"));
  {
    std::ofstream os(dir.file("trunc.bin"), std::ios::binary);
    os.write(full.data(), static_cast<std::streamsize>(full.size() - 5));
  }
  EXPECT_THROW(load_dataset(dir.file("trunc.bin")), Error);
}

TEST(DatasetIo, MatrixCsvRoundTripsExactly) {
  TempDir dir;
  Rng rng(5);
  const RowMatrix m = rng.normal_matrix(4, 3);
  write_matrix_csv(dir.file("m.csv"), m);
  EXPECT_TRUE(read_matrix_csv(dir.file("m.csv")) == m);
}

TEST(DatasetIo, CsvExportShapes) {
  TempDir dir;
  const LrmcDataset l = *fixtures::lrmc_data(50, 10, 2, 4.0, 6);
  export_dataset_csv(dir.file("l.csv"), l);
  std::ifstream is(dir.file("l.csv"));
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "row,col,value");
  std::size_t lines = 0;
  for (std::string s; std::getline(is, s);) ++lines;
  EXPECT_EQ(lines, l.observed());

  const SpdDataset s = *fixtures::spd_data(3, 2, 5.0, 7);
  export_dataset_csv(dir.file("s.csv"), s);
  const RowMatrix stacked = read_matrix_csv(dir.file("s.csv"));
  EXPECT_EQ(stacked.rows(), 6);
  EXPECT_EQ(stacked.cols(), 2);
}
