#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tcatch {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Mode sizes (p_1, ..., p_M) of a dense tensor.
///
/// Every mode has at least one entry, except that the trailing mode of a
/// stacked dataset tensor may be empty (zero observations).
class TensorShape {
public:
  TensorShape() = default;
  explicit TensorShape(std::vector<std::size_t> dims);
  TensorShape(std::initializer_list<std::size_t> dims);

  std::size_t order() const noexcept { return dims_.size(); }
  std::size_t operator[](std::size_t mode) const { return dims_[mode]; }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }

  /// Number of entries, prod_m p_m.
  std::size_t size() const noexcept { return size_; }

  /// prod_{m < mode} p_m, the stride of `mode` in vec order.
  std::size_t stride(std::size_t mode) const;

  /// Shape with mode `mode` removed.
  TensorShape drop(std::size_t mode) const;
  /// Shape with mode `mode` replaced by `extent`.
  TensorShape with(std::size_t mode, std::size_t extent) const;
  /// Shape with one trailing mode of extent `extent` appended.
  TensorShape append(std::size_t extent) const;

  friend bool operator==(const TensorShape&, const TensorShape&) = default;

private:
  std::vector<std::size_t> dims_;
  std::size_t size_ = 0;
};

/// 1-based multi-index (j_1, ..., j_M).
struct MultiIndex {
  std::vector<std::size_t> coords;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// Dense M-way array of doubles stored in vec order: index 1 varies fastest,
/// so a matrix is stored column-major.
class DenseTensor {
public:
  DenseTensor() = default;
  /// Zero tensor of the given shape.
  explicit DenseTensor(TensorShape shape);
  DenseTensor(TensorShape shape, std::vector<double> data);

  static DenseTensor from_matrix(const Matrix& m);

  const TensorShape& shape() const noexcept { return shape_; }
  std::size_t order() const noexcept { return shape_.order(); }
  std::size_t dim(std::size_t mode) const { return shape_[mode]; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  double operator[](std::size_t linear) const { return data_[linear]; }
  double& operator[](std::size_t linear) { return data_[linear]; }

  /// Element access by a 1-based multi-index; bounds-checked.
  double at(const MultiIndex& index) const;
  double& at(const MultiIndex& index);

  /// View as a column-major (size x 1) Eigen vector.
  Eigen::Map<const Vector> as_vector() const;
  Eigen::Map<Vector> as_vector();

  /// Reinterpret the storage under a new shape with the same element count.
  DenseTensor reshaped(TensorShape shape) const&;
  DenseTensor reshaped(TensorShape shape) &&;

  /// Observation `i` of a stacked tensor: the slice at index i of the last mode.
  DenseTensor slice_last(std::size_t i) const;

  /// Column-major (rows x cols) view, rows * cols == size().
  Eigen::Map<const Matrix> as_matrix(std::size_t rows, std::size_t cols) const;
  Eigen::Map<Matrix> as_matrix(std::size_t rows, std::size_t cols);

private:
  TensorShape shape_;
  std::vector<double> data_;
};

/// vec(t): the flat storage in vec order.
Vector vec(const DenseTensor& t);

/// Mode-k matricization T_(k), a p_k x prod_{m != k} p_m matrix. `mode` is
/// 0-based.
Matrix mode_matricize(const DenseTensor& t, std::size_t mode);

/// Inverse of mode_matricize for a target shape.
DenseTensor fold(const Matrix& unfolded, std::size_t mode, const TensorShape& shape);

/// t x_k m, with m of size d x p_k.
DenseTensor mode_product(const DenseTensor& t, std::size_t mode, const Matrix& m);

/// t xbar_k v: contracts mode k against v, giving a tensor of order M - 1.
/// Contracting a 1-way tensor yields a single-entry tensor of shape (1).
DenseTensor mode_vector_product(const DenseTensor& t, std::size_t mode,
                                const Vector& v);

/// Tucker product [[core; G_1, ..., G_M]] = core x_1 G_1 x_2 ... x_M G_M.
DenseTensor tucker(const DenseTensor& core, std::span<const Matrix> factors);

/// sum of elementwise products; shapes must match.
double inner(const DenseTensor& a, const DenseTensor& b);

/// Maps a 1-based linear vec position to its 1-based multi-index.
MultiIndex linear_to_multi_index(std::size_t linear, const TensorShape& shape);

/// Maps a 1-based multi-index to its 1-based linear vec position.
std::size_t multi_to_linear(const MultiIndex& index, const TensorShape& shape);

/// 0-based fast path used inside hot loops: writes the 0-based coordinates of
/// 0-based position `linear` into `coords`.
void unravel(std::size_t linear, const TensorShape& shape,
             std::span<std::size_t> coords);

} // namespace tcatch
