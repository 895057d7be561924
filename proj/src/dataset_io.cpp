#include "rvr/dataset_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rvr/errors.hpp"
#include "rvr/trace.hpp"

namespace rvr {

DatasetKind dataset_kind(const Dataset& data) {
  return static_cast<DatasetKind>(data.index() + 1);
}

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Pca: return "pca";
    case DatasetKind::Lrmc: return "lrmc";
    case DatasetKind::Spd: return "spd";
  }
  return "?";
}

DatasetKind parse_dataset_kind(const std::string& name) {
  if (name == "pca") return DatasetKind::Pca;
  if (name == "lrmc") return DatasetKind::Lrmc;
  if (name == "spd" || name == "rkm") return DatasetKind::Spd;
  throw ConfigError("unknown dataset kind '" + name + "'");
}

namespace {

class Writer {
 public:
  explicit Writer(const std::string& path) : os_(path, std::ios::binary) {
    if (!os_) throw ConfigError("cannot open '" + path + "' for writing");
  }
  void bytes(const void* p, std::size_t k) { os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(k)); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  template <class M>
  void matrix(const M& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
  }
  void finish(const std::string& path) {
    os_.flush();
    if (!os_) throw ConfigError("failed writing '" + path + "'");
  }

 private:
  void le(std::uint64_t v, int k) {
    std::array<char, 8> buf{};
    for (int i = 0; i < k; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os_.write(buf.data(), k);
  }
  std::ofstream os_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : is_(path, std::ios::binary), path_(path) {
    if (!is_) throw ConfigError("cannot open '" + path + "'");
  }
  void bytes(void* p, std::size_t k) {
    is_.read(static_cast<char*>(p), static_cast<std::streamsize>(k));
    if (!is_) throw ConfigError("'" + path_ + "' is truncated");
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  RowMatrix matrix() {
    const std::uint64_t rows = u64();
    const std::uint64_t cols = u64();
    if (rows > (1ull << 32) || cols > (1ull << 32)) throw ConfigError("'" + path_ + "': bad matrix size");
    RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = f64();
    return m;
  }

 private:
  std::uint64_t le(int k) {
    std::array<unsigned char, 8> buf{};
    bytes(buf.data(), static_cast<std::size_t>(k));
    std::uint64_t v = 0;
    for (int i = 0; i < k; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::ifstream is_;
  std::string path_;
};

RowMatrix triples(const std::vector<MatrixEntry>& entries) {
  RowMatrix m(static_cast<Eigen::Index>(entries.size()), 3);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    m(i, 0) = static_cast<double>(entries[k].row);
    m(i, 1) = static_cast<double>(entries[k].col);
    m(i, 2) = entries[k].value;
  }
  return m;
}

std::vector<MatrixEntry> training_entries(const LrmcDataset& data) {
  std::vector<MatrixEntry> out;
  out.reserve(data.observed());
  for (std::size_t c = 0; c < data.n; ++c)
    for (std::size_t k = data.col_start[c]; k < data.col_start[c + 1]; ++k)
      out.push_back({static_cast<std::size_t>(data.rows[k]), c, data.values[k]});
  return out;
}

std::vector<MatrixEntry> entries_from(const RowMatrix& m, std::size_t d, std::size_t n) {
  if (m.cols() != 3) throw ConfigError("entry matrix must have three columns");
  std::vector<MatrixEntry> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double row = m(i, 0);
    const double col = m(i, 1);
    if (!(row >= 0 && col >= 0 && row < static_cast<double>(d) && col < static_cast<double>(n)) ||
        row != std::floor(row) || col != std::floor(col))
      throw ConfigError("entry index out of range");
    out.push_back({static_cast<std::size_t>(row), static_cast<std::size_t>(col), m(i, 2)});
  }
  return out;
}

}  // namespace

void save_dataset(const std::string& path, const Dataset& data) {
  Writer w(path);
  w.bytes(kDatasetMagic, sizeof kDatasetMagic);
  w.u32(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(dataset_kind(data)));
  if (const auto* p = std::get_if<PcaDataset>(&data)) {
    p->validate();
    w.u64(p->n());
    w.u64(static_cast<std::uint64_t>(p->d()));
    w.u64(static_cast<std::uint64_t>(p->r));
    w.u64(1);
    w.matrix(p->samples);
  } else if (const auto* l = std::get_if<LrmcDataset>(&data)) {
    l->validate();
    const bool truth = l->truth_basis && l->truth_coeffs;
    w.u64(l->n);
    w.u64(static_cast<std::uint64_t>(l->d));
    w.u64(static_cast<std::uint64_t>(l->r));
    w.u64(truth ? 4 : 2);
    w.matrix(triples(training_entries(*l)));
    w.matrix(triples(l->test));
    if (truth) {
      w.matrix(*l->truth_basis);
      w.matrix(*l->truth_coeffs);
    }
  } else {
    const auto& s = std::get<SpdDataset>(data);
    s.validate();
    const Eigen::Index d = s.d();
    w.u64(s.n());
    w.u64(static_cast<std::uint64_t>(d));
    w.u64(static_cast<std::uint64_t>(d));
    w.u64(1);
    RowMatrix stack(static_cast<Eigen::Index>(s.n()) * d, d);
    for (std::size_t i = 0; i < s.n(); ++i)
      stack.middleRows(static_cast<Eigen::Index>(i) * d, d) = s.matrices[i];
    w.matrix(stack);
  }
  w.finish(path);
}

Dataset load_dataset(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kDatasetMagic, sizeof magic) != 0)
    throw ConfigError("'" + path + "' is not a dataset container");
  const std::uint32_t version = r.u32();
  if (version != kDatasetVersion)
    throw ConfigError("'" + path + "': unsupported container version " + std::to_string(version));
  const std::uint32_t kind = r.u32();
  const std::uint64_t n = r.u64();
  const std::uint64_t d = r.u64();
  const std::uint64_t rank = r.u64();
  const std::uint64_t count = r.u64();

  switch (static_cast<DatasetKind>(kind)) {
    case DatasetKind::Pca: {
      if (count != 1) throw ConfigError("PCA container must hold one matrix");
      PcaDataset p{r.matrix(), static_cast<Eigen::Index>(rank)};
      if (p.n() != n || static_cast<std::uint64_t>(p.d()) != d)
        throw ConfigError("PCA container descriptor does not match its matrix");
      p.validate();
      return p;
    }
    case DatasetKind::Lrmc: {
      if (count != 2 && count != 4) throw ConfigError("LRMC container must hold 2 or 4 matrices");
      const RowMatrix train = r.matrix();
      const RowMatrix test = r.matrix();
      LrmcDataset l = LrmcDataset::from_entries(
          static_cast<Eigen::Index>(d), n, static_cast<Eigen::Index>(rank),
          entries_from(train, d, n), entries_from(test, d, n));
      if (count == 4) {
        l.truth_basis = Eigen::MatrixXd(r.matrix());
        l.truth_coeffs = Eigen::MatrixXd(r.matrix());
      }
      l.validate();
      return l;
    }
    case DatasetKind::Spd: {
      if (count != 1) throw ConfigError("SPD container must hold one matrix");
      const RowMatrix stack = r.matrix();
      if (static_cast<std::uint64_t>(stack.rows()) != n * d ||
          static_cast<std::uint64_t>(stack.cols()) != d)
        throw ConfigError("SPD container descriptor does not match its matrix");
      SpdDataset s;
      const auto di = static_cast<Eigen::Index>(d);
      for (std::uint64_t i = 0; i < n; ++i)
        s.matrices.emplace_back(stack.middleRows(static_cast<Eigen::Index>(i) * di, di));
      s.validate();
      return s;
    }
  }
  throw ConfigError("'" + path + "': unknown dataset kind " + std::to_string(kind));
}

void write_matrix_csv(const std::string& path, const RowMatrix& m) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
    os << '\n';
  }
  if (!os) throw ConfigError("failed writing '" + path + "'");
}

RowMatrix read_matrix_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open '" + path + "'");
  std::vector<double> values;
  Eigen::Index cols = -1;
  Eigen::Index rows = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    Eigen::Index c = 0;
    while (std::getline(ss, field, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (field.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ConfigError("'" + path + "': bad number '" + field + "'");
      }
      ++c;
    }
    if (cols >= 0 && c != cols) throw ConfigError("'" + path + "': ragged rows");
    cols = c;
    ++rows;
  }
  if (rows == 0) throw ConfigError("'" + path + "' holds no rows");
  return Eigen::Map<RowMatrix>(values.data(), rows, cols);
}

void export_dataset_csv(const std::string& path, const Dataset& data) {
  if (const auto* p = std::get_if<PcaDataset>(&data)) {
    write_matrix_csv(path, p->samples);
  } else if (const auto* l = std::get_if<LrmcDataset>(&data)) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    os << "row,col,value\n";
    for (const auto& e : training_entries(*l))
      os << e.row << ',' << e.col << ',' << format_double(e.value) << '\n';
    if (!os) throw ConfigError("failed writing '" + path + "'");
  } else {
    const auto& s = std::get<SpdDataset>(data);
    const Eigen::Index d = s.d();
    RowMatrix stack(static_cast<Eigen::Index>(s.n()) * d, d);
    for (std::size_t i = 0; i < s.n(); ++i)
      stack.middleRows(static_cast<Eigen::Index>(i) * d, d) = s.matrices[i];
    write_matrix_csv(path, stack);
  }
}

}  // namespace rvr
