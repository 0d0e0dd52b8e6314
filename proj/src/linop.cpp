#include "ncbem/linop.hpp"

#include <stdexcept>
#include <utility>

namespace ncbem {

namespace {

class DenseOp final : public LinOp {
 public:
  explicit DenseOp(std::shared_ptr<const MatXc> m) : m_(std::move(m)) {}
  Eigen::Index rows() const override { return m_->rows(); }
  Eigen::Index cols() const override { return m_->cols(); }
  VecXc apply(const VecXc& x) const override { return (*m_) * x; }

 private:
  std::shared_ptr<const MatXc> m_;
};

class SparseOp final : public LinOp {
 public:
  SparseOp(std::shared_ptr<const SparseMatrix> m, bool transposed)
      : m_(std::move(m)), transposed_(transposed) {}
  Eigen::Index rows() const override { return transposed_ ? m_->cols() : m_->rows(); }
  Eigen::Index cols() const override { return transposed_ ? m_->rows() : m_->cols(); }
  VecXc apply(const VecXc& x) const override {
    const VecX xr = x.real(), xi = x.imag();
    if (transposed_) {
      return VecXc(m_->transpose() * xr) + imag_unit * VecXc(m_->transpose() * xi);
    }
    return VecXc((*m_) * xr) + imag_unit * VecXc((*m_) * xi);
  }

 private:
  std::shared_ptr<const SparseMatrix> m_;
  bool transposed_;
};

class MassInverseOp final : public LinOp {
 public:
  explicit MassInverseOp(std::shared_ptr<const MassInverse> inv) : inv_(std::move(inv)) {}
  Eigen::Index rows() const override { return inv_->size(); }
  Eigen::Index cols() const override { return inv_->size(); }
  VecXc apply(const VecXc& x) const override { return inv_->apply(x); }

 private:
  std::shared_ptr<const MassInverse> inv_;
};

class IdentityOp final : public LinOp {
 public:
  explicit IdentityOp(Eigen::Index n) : n_(n) {}
  Eigen::Index rows() const override { return n_; }
  Eigen::Index cols() const override { return n_; }
  VecXc apply(const VecXc& x) const override { return x; }

 private:
  Eigen::Index n_;
};

class ZeroOp final : public LinOp {
 public:
  ZeroOp(Eigen::Index r, Eigen::Index c) : r_(r), c_(c) {}
  Eigen::Index rows() const override { return r_; }
  Eigen::Index cols() const override { return c_; }
  VecXc apply(const VecXc&) const override { return VecXc::Zero(r_); }

 private:
  Eigen::Index r_, c_;
};

class ScaledOp final : public LinOp {
 public:
  ScaledOp(Complex f, LinOp::Ptr op) : f_(f), op_(std::move(op)) {}
  Eigen::Index rows() const override { return op_->rows(); }
  Eigen::Index cols() const override { return op_->cols(); }
  VecXc apply(const VecXc& x) const override { return f_ * op_->apply(x); }

 private:
  Complex f_;
  LinOp::Ptr op_;
};

class SumOp final : public LinOp {
 public:
  explicit SumOp(std::vector<LinOp::Ptr> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw std::invalid_argument("sum: empty term list");
    for (const auto& t : terms_) {
      if (t->rows() != terms_.front()->rows() || t->cols() != terms_.front()->cols()) {
        throw std::invalid_argument("sum: inconsistent dimensions");
      }
    }
  }
  Eigen::Index rows() const override { return terms_.front()->rows(); }
  Eigen::Index cols() const override { return terms_.front()->cols(); }
  VecXc apply(const VecXc& x) const override {
    VecXc y = terms_.front()->apply(x);
    for (std::size_t i = 1; i < terms_.size(); ++i) y += terms_[i]->apply(x);
    return y;
  }

 private:
  std::vector<LinOp::Ptr> terms_;
};

class ProductOp final : public LinOp {
 public:
  explicit ProductOp(std::vector<LinOp::Ptr> chain) : chain_(std::move(chain)) {
    if (chain_.empty()) throw std::invalid_argument("product: empty chain");
    for (std::size_t i = 0; i + 1 < chain_.size(); ++i) {
      if (chain_[i]->cols() != chain_[i + 1]->rows()) {
        throw std::invalid_argument("product: inconsistent dimensions");
      }
    }
  }
  Eigen::Index rows() const override { return chain_.front()->rows(); }
  Eigen::Index cols() const override { return chain_.back()->cols(); }
  VecXc apply(const VecXc& x) const override {
    VecXc y = chain_.back()->apply(x);
    for (std::size_t i = chain_.size() - 1; i-- > 0;) y = chain_[i]->apply(y);
    return y;
  }

 private:
  std::vector<LinOp::Ptr> chain_;
};

}  // namespace

LinOp::Ptr dense_op(std::shared_ptr<const MatXc> matrix) {
  return std::make_shared<DenseOp>(std::move(matrix));
}
LinOp::Ptr sparse_op(std::shared_ptr<const SparseMatrix> matrix) {
  return std::make_shared<SparseOp>(std::move(matrix), false);
}
LinOp::Ptr sparse_transpose_op(std::shared_ptr<const SparseMatrix> matrix) {
  return std::make_shared<SparseOp>(std::move(matrix), true);
}
LinOp::Ptr mass_inverse_op(std::shared_ptr<const MassInverse> inverse) {
  return std::make_shared<MassInverseOp>(std::move(inverse));
}
LinOp::Ptr identity_op(Eigen::Index n) { return std::make_shared<IdentityOp>(n); }
LinOp::Ptr zero_op(Eigen::Index rows, Eigen::Index cols) { return std::make_shared<ZeroOp>(rows, cols); }
LinOp::Ptr scaled(Complex factor, LinOp::Ptr op) { return std::make_shared<ScaledOp>(factor, std::move(op)); }
LinOp::Ptr sum(std::vector<LinOp::Ptr> terms) { return std::make_shared<SumOp>(std::move(terms)); }
LinOp::Ptr product(std::vector<LinOp::Ptr> chain) { return std::make_shared<ProductOp>(std::move(chain)); }

BlockOperator::BlockOperator(std::vector<std::vector<LinOp::Ptr>> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty() || blocks_.front().empty()) throw std::invalid_argument("block: empty grid");
  const std::size_t ncols = blocks_.front().size();
  std::vector<Eigen::Index> row_size(blocks_.size(), -1), col_size(ncols, -1);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].size() != ncols) throw std::invalid_argument("block: ragged grid");
    for (std::size_t j = 0; j < ncols; ++j) {
      const auto& b = blocks_[i][j];
      if (!b) continue;
      if (row_size[i] < 0) row_size[i] = b->rows();
      if (col_size[j] < 0) col_size[j] = b->cols();
      if (b->rows() != row_size[i] || b->cols() != col_size[j]) {
        throw std::invalid_argument("block: inconsistent block dimensions");
      }
    }
  }
  row_offsets_.push_back(0);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (row_size[i] < 0) throw std::invalid_argument("block: row without sized block");
    row_offsets_.push_back(row_offsets_.back() + row_size[i]);
  }
  col_offsets_.push_back(0);
  for (std::size_t j = 0; j < ncols; ++j) {
    if (col_size[j] < 0) throw std::invalid_argument("block: column without sized block");
    col_offsets_.push_back(col_offsets_.back() + col_size[j]);
  }
  total_rows_ = row_offsets_.back();
  total_cols_ = col_offsets_.back();
}

VecXc BlockOperator::apply(const VecXc& x) const {
  if (x.size() != total_cols_) throw std::invalid_argument("block: vector size mismatch");
  VecXc y = VecXc::Zero(total_rows_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    for (std::size_t j = 0; j < blocks_[i].size(); ++j) {
      const auto& b = blocks_[i][j];
      if (!b) continue;
      y.segment(row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]) +=
          b->apply(x.segment(col_offsets_[j], col_offsets_[j + 1] - col_offsets_[j]));
    }
  }
  return y;
}

LinOp::Ptr block_op(std::vector<std::vector<LinOp::Ptr>> blocks) {
  return std::make_shared<BlockOperator>(std::move(blocks));
}

MatXc materialize(const LinOp& op) {
  MatXc out(op.rows(), op.cols());
  VecXc e = VecXc::Zero(op.cols());
  for (Eigen::Index j = 0; j < op.cols(); ++j) {
    e[j] = 1.0;
    out.col(j) = op.apply(e);
    e[j] = 0.0;
  }
  return out;
}

}  // namespace ncbem
