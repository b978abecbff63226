#include "rrhoc/block_matrix.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rrhoc {

BlockPartition::BlockPartition(std::vector<int> sizes)
    : sizes_(std::move(sizes)) {
  if (sizes_.empty()) {
    throw std::invalid_argument("partition needs at least one block");
  }
  offsets_.reserve(sizes_.size());
  for (int s : sizes_) {
    if (s < 0) {
      throw std::invalid_argument("block sizes must be >= 0");
    }
    offsets_.push_back(total_);
    total_ += s;
  }
}

int BlockPartition::size(int b) const {
  if (b < 0 || b >= count()) {
    throw std::out_of_range("block index " + std::to_string(b));
  }
  return sizes_[static_cast<size_t>(b)];
}

int BlockPartition::offset(int b) const {
  if (b < 0 || b >= count()) {
    throw std::out_of_range("block index " + std::to_string(b));
  }
  return offsets_[static_cast<size_t>(b)];
}

BlockMatrix::BlockMatrix(BlockPartition rows, BlockPartition cols)
    : rows_(std::move(rows)), cols_(std::move(cols)),
      data_(Eigen::MatrixXd::Zero(rows_.total(), cols_.total())) {}

BlockMatrix BlockMatrix::square(const BlockPartition& part) {
  return BlockMatrix(part, part);
}

void BlockMatrix::set(int bi, int bj,
                      const Eigen::Ref<const Eigen::MatrixXd>& value) {
  if (value.rows() != rows_.size(bi) || value.cols() != cols_.size(bj)) {
    throw std::invalid_argument(
        "block (" + std::to_string(bi) + ", " + std::to_string(bj) +
        ") expects " + std::to_string(rows_.size(bi)) + "x" +
        std::to_string(cols_.size(bj)) + ", got " +
        std::to_string(value.rows()) + "x" + std::to_string(value.cols()));
  }
  data_.block(rows_.offset(bi), cols_.offset(bj), value.rows(),
              value.cols()) = value;
}

void BlockMatrix::set_sym_pair(int bi, int bj,
                               const Eigen::Ref<const Eigen::MatrixXd>& value) {
  set(bi, bj, value);
  if (bi != bj) {
    set(bj, bi, value.transpose());
  }
}

void BlockMatrix::add(int bi, int bj,
                      const Eigen::Ref<const Eigen::MatrixXd>& value) {
  if (value.rows() != rows_.size(bi) || value.cols() != cols_.size(bj)) {
    throw std::invalid_argument("block shape mismatch in add");
  }
  data_.block(rows_.offset(bi), cols_.offset(bj), value.rows(),
              value.cols()) += value;
}

Eigen::MatrixXd BlockMatrix::block(int bi, int bj) const {
  return data_.block(rows_.offset(bi), cols_.offset(bj), rows_.size(bi),
                     cols_.size(bj));
}

bool BlockMatrix::is_symmetric(double tol) const {
  if (data_.rows() != data_.cols()) {
    return false;
  }
  return (data_ - data_.transpose()).cwiseAbs().maxCoeff() <= tol;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

void write_matrix_csv(const Eigen::MatrixXd& m,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) {
        out << ',';
      }
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      row.push_back(std::stod(cell));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("ragged rows in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    return Eigen::MatrixXd(0, 0);
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
  }
  return m;
}

void write_matrix_bundle(
    const Eigen::MatrixXd& m, const std::filesystem::path& dir,
    const std::string& name,
    const std::vector<std::pair<std::string, int>>& partition) {
  std::filesystem::create_directories(dir);
  write_matrix_csv(m, dir / (name + ".csv"));

  nlohmann::json side;
  side["name"] = name;
  side["rows"] = m.rows();
  side["cols"] = m.cols();
  side["csv"] = name + ".csv";
  if (!partition.empty()) {
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& [label, size] : partition) {
      blocks.push_back({{"label", label}, {"size", size}});
    }
    side["partition"] = blocks;
  }
  std::ofstream out(dir / (name + ".json"));
  if (!out) {
    throw std::runtime_error("cannot open sidecar for " + name);
  }
  out << side.dump(2) << '\n';
}

} // namespace rrhoc
