#include "tcatch/tensor.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "tcatch/errors.hpp"

namespace tcatch {

namespace {

std::size_t checked_product(const std::vector<std::size_t>& dims) {
  std::size_t total = 1;
  for (std::size_t d : dims) {
    if (d != 0 && total > std::numeric_limits<std::size_t>::max() / d)
      throw DimensionError("tensor element count overflows");
    total *= d;
  }
  return total;
}

// Paper-style modulo: a mod b == b when b divides a.
std::size_t mod_one_based(std::size_t a, std::size_t b) {
  const std::size_t r = a % b;
  return r == 0 ? b : r;
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

void check_mode(const DenseTensor& t, std::size_t mode) {
  if (mode >= t.order())
    throw DimensionError("mode " + std::to_string(mode) + " out of range for order-" +
                         std::to_string(t.order()) + " tensor");
}

} // namespace

TensorShape::TensorShape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw DimensionError("tensor shape needs at least one mode");
  for (std::size_t m = 0; m + 1 < dims_.size(); ++m)
    if (dims_[m] == 0) throw DimensionError("tensor mode " + std::to_string(m + 1) + " is empty");
  size_ = checked_product(dims_);
}

TensorShape::TensorShape(std::initializer_list<std::size_t> dims)
    : TensorShape(std::vector<std::size_t>(dims)) {}

std::size_t TensorShape::stride(std::size_t mode) const {
  std::size_t s = 1;
  for (std::size_t m = 0; m < mode; ++m) s *= dims_[m];
  return s;
}

TensorShape TensorShape::drop(std::size_t mode) const {
  std::vector<std::size_t> d = dims_;
  d.erase(d.begin() + static_cast<std::ptrdiff_t>(mode));
  if (d.empty()) d.push_back(1);
  return TensorShape(std::move(d));
}

TensorShape TensorShape::with(std::size_t mode, std::size_t extent) const {
  std::vector<std::size_t> d = dims_;
  d.at(mode) = extent;
  return TensorShape(std::move(d));
}

TensorShape TensorShape::append(std::size_t extent) const {
  std::vector<std::size_t> d = dims_;
  d.push_back(extent);
  return TensorShape(std::move(d));
}

DenseTensor::DenseTensor(TensorShape shape)
    : shape_(std::move(shape)), data_(shape_.size(), 0.0) {}

DenseTensor::DenseTensor(TensorShape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_.size())
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape size " + std::to_string(shape_.size()));
}

DenseTensor DenseTensor::from_matrix(const Matrix& m) {
  DenseTensor t(TensorShape{static_cast<std::size_t>(m.rows()),
                            static_cast<std::size_t>(m.cols())});
  t.as_matrix(m.rows(), m.cols()) = m;
  return t;
}

double DenseTensor::at(const MultiIndex& index) const {
  return data_[multi_to_linear(index, shape_) - 1];
}

double& DenseTensor::at(const MultiIndex& index) {
  return data_[multi_to_linear(index, shape_) - 1];
}

Eigen::Map<const Vector> DenseTensor::as_vector() const {
  return {data_.data(), static_cast<Eigen::Index>(data_.size())};
}

Eigen::Map<Vector> DenseTensor::as_vector() {
  return {data_.data(), static_cast<Eigen::Index>(data_.size())};
}

DenseTensor DenseTensor::reshaped(TensorShape shape) const& {
  return DenseTensor(std::move(shape), data_);
}

DenseTensor DenseTensor::reshaped(TensorShape shape) && {
  return DenseTensor(std::move(shape), std::move(data_));
}

DenseTensor DenseTensor::slice_last(std::size_t i) const {
  const std::size_t last = order() - 1;
  if (order() < 2) throw DimensionError("slice_last needs a tensor of order >= 2");
  if (i >= shape_[last]) throw DimensionError("observation index out of range");
  const std::size_t block = shape_.stride(last);
  std::vector<double> d(data_.begin() + static_cast<std::ptrdiff_t>(i * block),
                        data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * block));
  return DenseTensor(shape_.drop(last), std::move(d));
}

Eigen::Map<const Matrix> DenseTensor::as_matrix(std::size_t rows, std::size_t cols) const {
  if (rows * cols != data_.size()) throw DimensionError("matrix view size mismatch");
  return {data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

Eigen::Map<Matrix> DenseTensor::as_matrix(std::size_t rows, std::size_t cols) {
  if (rows * cols != data_.size()) throw DimensionError("matrix view size mismatch");
  return {data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

Vector vec(const DenseTensor& t) { return t.as_vector(); }

Matrix mode_matricize(const DenseTensor& t, std::size_t mode) {
  check_mode(t, mode);
  const std::size_t left = t.shape().stride(mode);
  const std::size_t pk = t.dim(mode);
  const std::size_t right = pk == 0 ? 0 : t.size() / (left * pk);
  Matrix out(pk, left * right);
  const double* src = t.data().data();
  for (std::size_t r = 0; r < right; ++r)
    for (std::size_t ik = 0; ik < pk; ++ik)
      for (std::size_t i = 0; i < left; ++i)
        out(ik, r * left + i) = src[(r * pk + ik) * left + i];
  return out;
}

DenseTensor fold(const Matrix& unfolded, std::size_t mode, const TensorShape& shape) {
  if (mode >= shape.order()) throw DimensionError("fold: mode out of range");
  const std::size_t left = shape.stride(mode);
  const std::size_t pk = shape[mode];
  const std::size_t right = pk == 0 ? 0 : shape.size() / (left * pk);
  if (static_cast<std::size_t>(unfolded.rows()) != pk ||
      static_cast<std::size_t>(unfolded.cols()) != left * right)
    throw DimensionError("fold: matrix does not match target shape");
  DenseTensor t(shape);
  double* dst = t.data().data();
  for (std::size_t r = 0; r < right; ++r)
    for (std::size_t ik = 0; ik < pk; ++ik)
      for (std::size_t i = 0; i < left; ++i)
        dst[(r * pk + ik) * left + i] = unfolded(ik, r * left + i);
  return t;
}

DenseTensor mode_product(const DenseTensor& t, std::size_t mode, const Matrix& m) {
  check_mode(t, mode);
  const std::size_t pk = t.dim(mode);
  if (static_cast<std::size_t>(m.cols()) != pk)
    throw DimensionError("mode_product: matrix has " + std::to_string(m.cols()) +
                         " columns, mode " + std::to_string(mode + 1) + " has extent " +
                         std::to_string(pk));
  const auto d = static_cast<std::size_t>(m.rows());
  DenseTensor out(t.shape().with(mode, d));
  const std::size_t left = t.shape().stride(mode);
  const std::size_t right = pk == 0 ? 0 : t.size() / (left * pk);
  if (right == 0 || d == 0) return out;

  // Every slab of fixed trailing indices is a (left x p_k) column-major block
  // of the mode-k unfolding's transpose, so one GEMM per slab suffices.
  const auto L = static_cast<Eigen::Index>(left);
  const auto P = static_cast<Eigen::Index>(pk);
  const auto D = static_cast<Eigen::Index>(d);
  if (left == 1) {
    Eigen::Map<const Matrix> src(t.data().data(), P, static_cast<Eigen::Index>(right));
    Eigen::Map<Matrix> dst(out.data().data(), D, static_cast<Eigen::Index>(right));
    dst.noalias() = m * src;
    return out;
  }
  const Matrix mt = m.transpose();
  for (std::size_t r = 0; r < right; ++r) {
    Eigen::Map<const Matrix> src(t.data().data() + r * left * pk, L, P);
    Eigen::Map<Matrix> dst(out.data().data() + r * left * d, L, D);
    dst.noalias() = src * mt;
  }
  return out;
}

DenseTensor mode_vector_product(const DenseTensor& t, std::size_t mode, const Vector& v) {
  check_mode(t, mode);
  const std::size_t pk = t.dim(mode);
  if (static_cast<std::size_t>(v.size()) != pk)
    throw DimensionError("mode_vector_product: vector length " + std::to_string(v.size()) +
                         " does not match mode extent " + std::to_string(pk));
  DenseTensor out(t.shape().drop(mode));
  const std::size_t left = t.shape().stride(mode);
  const std::size_t right = pk == 0 ? 0 : t.size() / (left * pk);
  const auto L = static_cast<Eigen::Index>(left);
  const auto P = static_cast<Eigen::Index>(pk);
  for (std::size_t r = 0; r < right; ++r) {
    Eigen::Map<const Matrix> src(t.data().data() + r * left * pk, L, P);
    Eigen::Map<Vector> dst(out.data().data() + r * left, L);
    dst.noalias() = src * v;
  }
  return out;
}

DenseTensor tucker(const DenseTensor& core, std::span<const Matrix> factors) {
  if (factors.size() != core.order())
    throw DimensionError("tucker: need one factor per mode (" + std::to_string(core.order()) +
                         "), got " + std::to_string(factors.size()));
  DenseTensor out = core;
  for (std::size_t m = 0; m < factors.size(); ++m) out = mode_product(out, m, factors[m]);
  return out;
}

double inner(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape() != b.shape()) throw DimensionError("inner: shape mismatch");
  return a.as_vector().dot(b.as_vector());
}

MultiIndex linear_to_multi_index(std::size_t linear, const TensorShape& shape) {
  const std::size_t order = shape.order();
  if (linear < 1 || linear > shape.size())
    throw DimensionError("linear index " + std::to_string(linear) + " out of range [1, " +
                         std::to_string(shape.size()) + "]");
  // s[m] holds s_m for m = 2..M+1 (1-based as written), stored at s[m].
  std::vector<std::size_t> s(order + 2, 0);
  s[order + 1] = linear;
  for (std::size_t m = order; m >= 2; --m) s[m] = mod_one_based(s[m + 1], shape.stride(m - 1));
  MultiIndex out;
  out.coords.resize(order);
  out.coords[0] = mod_one_based(order >= 2 ? s[2] : linear, shape[0]);
  for (std::size_t m = 2; m <= order; ++m)
    out.coords[m - 1] = ceil_div(s[m + 1], shape.stride(m - 1));
  return out;
}

std::size_t multi_to_linear(const MultiIndex& index, const TensorShape& shape) {
  if (index.coords.size() != shape.order())
    throw DimensionError("multi-index has " + std::to_string(index.coords.size()) +
                         " coordinates, tensor order is " + std::to_string(shape.order()));
  std::size_t linear = 1;
  std::size_t stride = 1;
  for (std::size_t m = 0; m < shape.order(); ++m) {
    const std::size_t c = index.coords[m];
    if (c < 1 || c > shape[m])
      throw DimensionError("multi-index coordinate " + std::to_string(c) + " out of range for mode " +
                           std::to_string(m + 1));
    linear += (c - 1) * stride;
    stride *= shape[m];
  }
  return linear;
}

void unravel(std::size_t linear, const TensorShape& shape, std::span<std::size_t> coords) {
  for (std::size_t m = 0; m < shape.order(); ++m) {
    coords[m] = linear % shape[m];
    linear /= shape[m];
  }
}

} // namespace tcatch
