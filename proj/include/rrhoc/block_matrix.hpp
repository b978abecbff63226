#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rrhoc {

/// Sizes of consecutive blocks along one axis.
class BlockPartition {
public:
  explicit BlockPartition(std::vector<int> sizes);

  int count() const { return static_cast<int>(sizes_.size()); }
  int total() const { return total_; }
  int size(int b) const;
  int offset(int b) const;
  const std::vector<int>& sizes() const { return sizes_; }

private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  int total_ = 0;
};

/// Dense matrix addressed through named block coordinates. Keeps the LMI
/// assembly code close to the block notation it implements.
class BlockMatrix {
public:
  BlockMatrix(BlockPartition rows, BlockPartition cols);
  static BlockMatrix square(const BlockPartition& part);

  const BlockPartition& row_partition() const { return rows_; }
  const BlockPartition& col_partition() const { return cols_; }

  /// Overwrites block (bi, bj); shape-checked.
  void set(int bi, int bj, const Eigen::Ref<const Eigen::MatrixXd>& value);
  /// Writes value at (bi, bj) and value' at (bj, bi).
  void set_sym_pair(int bi, int bj,
                    const Eigen::Ref<const Eigen::MatrixXd>& value);
  void add(int bi, int bj, const Eigen::Ref<const Eigen::MatrixXd>& value);

  Eigen::MatrixXd block(int bi, int bj) const;
  const Eigen::MatrixXd& dense() const { return data_; }
  Eigen::MatrixXd& dense() { return data_; }

  bool is_symmetric(double tol = 1e-12) const;

private:
  BlockPartition rows_;
  BlockPartition cols_;
  Eigen::MatrixXd data_;
};

/// Plain CSV, one row per line, full double precision, no header.
void write_matrix_csv(const Eigen::MatrixXd& m,
                      const std::filesystem::path& path);

/// Reads back what write_matrix_csv produced.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Writes <name>.csv next to a <name>.json sidecar describing shape and,
/// when given, the block partition labels.
void write_matrix_bundle(
    const Eigen::MatrixXd& m, const std::filesystem::path& dir,
    const std::string& name,
    const std::vector<std::pair<std::string, int>>& partition = {});

} // namespace rrhoc
