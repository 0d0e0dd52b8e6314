// Lazily composed complex linear maps: dense/sparse factors, mass-inverse
// applications, scalar multiples, sums, products, and block grids.
#pragma once

#include <memory>
#include <vector>

#include "ncbem/space.hpp"
#include "ncbem/types.hpp"

namespace ncbem {

class LinOp {
 public:
  using Ptr = std::shared_ptr<const LinOp>;
  virtual ~LinOp() = default;
  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  virtual VecXc apply(const VecXc& x) const = 0;
};

LinOp::Ptr dense_op(std::shared_ptr<const MatXc> matrix);
LinOp::Ptr sparse_op(std::shared_ptr<const SparseMatrix> matrix);
LinOp::Ptr sparse_transpose_op(std::shared_ptr<const SparseMatrix> matrix);
LinOp::Ptr mass_inverse_op(std::shared_ptr<const MassInverse> inverse);
LinOp::Ptr identity_op(Eigen::Index n);
LinOp::Ptr zero_op(Eigen::Index rows, Eigen::Index cols);
LinOp::Ptr scaled(Complex factor, LinOp::Ptr op);
LinOp::Ptr sum(std::vector<LinOp::Ptr> terms);
LinOp::Ptr product(std::vector<LinOp::Ptr> chain);  // chain[0] * chain[1] * ... * x

// Block grid of factors acting on stacked coefficient vectors. Null entries
// are zero blocks; each row/column must have a sized entry.
class BlockOperator : public LinOp {
 public:
  BlockOperator(std::vector<std::vector<LinOp::Ptr>> blocks);
  Eigen::Index rows() const override { return total_rows_; }
  Eigen::Index cols() const override { return total_cols_; }
  VecXc apply(const VecXc& x) const override;

  const std::vector<Eigen::Index>& row_offsets() const { return row_offsets_; }
  const std::vector<Eigen::Index>& col_offsets() const { return col_offsets_; }

 private:
  std::vector<std::vector<LinOp::Ptr>> blocks_;
  std::vector<Eigen::Index> row_offsets_, col_offsets_;
  Eigen::Index total_rows_ = 0, total_cols_ = 0;
};

LinOp::Ptr block_op(std::vector<std::vector<LinOp::Ptr>> blocks);

// Applies the operator to unit vectors; for small oracle checks only.
MatXc materialize(const LinOp& op);

}  // namespace ncbem
