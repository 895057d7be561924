#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "rvr/problems.hpp"

namespace rvr {

// Binary container layout (all integers u64 unless noted, little-endian):
//   magic "RVRDATA\0" | u32 version | u32 kind (1 pca, 2 lrmc, 3 spd)
//   | n | d | r | matrix count | per matrix: rows, cols, row-major f64 data.
// PCA stores the n×d samples. LRMC stores training and test triples as k×3
// (row, col, value) matrices, then optionally the d×r basis and r×n
// coefficients of the ground truth. SPD stores the (n·d)×d vertical stack.
inline constexpr char kDatasetMagic[8] = {'R', 'V', 'R', 'D', 'A', 'T', 'A', '\0'};
inline constexpr std::uint32_t kDatasetVersion = 1;

enum class DatasetKind : std::uint32_t { Pca = 1, Lrmc = 2, Spd = 3 };

using Dataset = std::variant<PcaDataset, LrmcDataset, SpdDataset>;

DatasetKind dataset_kind(const Dataset& data);
std::string to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(const std::string& name);  // "pca" | "lrmc" | "spd"

void save_dataset(const std::string& path, const Dataset& data);
Dataset load_dataset(const std::string& path);

// Dense matrix CSV, one row per line, no header.
void write_matrix_csv(const std::string& path, const RowMatrix& m);
RowMatrix read_matrix_csv(const std::string& path);

// CSV form of a dataset: PCA samples, LRMC training triples with a
// "row,col,value" header, or the stacked SPD matrices.
void export_dataset_csv(const std::string& path, const Dataset& data);

}  // namespace rvr
