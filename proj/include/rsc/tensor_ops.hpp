#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace rsc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Bilinear maps B in L(A (x) B; U) are stored as (dimU, dimA*dimB) matrices
// acting on column-major flattenings: column index (a, b) -> a + b*dimA.
// The first tensor slot is always the one paired with delta-X / the row
// index of a second-level tensor.

inline Vec flatten(const Mat& m) {
  return Eigen::Map<const Vec>(m.data(), m.size());
}

inline Mat unflatten(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw std::invalid_argument("unflatten: size mismatch");
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

inline Vec vec_outer(const Vec& a, const Vec& b) {
  Mat m = a * b.transpose();
  return flatten(m);
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// B(v (x) w) for B in L(A (x) B; U).
inline Vec apply_bilinear(const Mat& bil, const Vec& a, const Vec& b) {
  return bil * vec_outer(a, b);
}

// B(T) for a full second-level tensor T (dimA x dimB).
inline Vec apply_bilinear(const Mat& bil, const Mat& tensor) {
  return bil * flatten(tensor);
}

// B(P., Q.): precompose both slots; P: dimA x dimA2, Q: dimB x dimB2.
// vec(P X Q^T) = (Q kron P) vec(X).
inline Mat precompose_both(const Mat& bil, const Mat& p, const Mat& q) {
  return bil * kron(q, p);
}

// B(P., .): precompose the first slot only.
inline Mat precompose_first(const Mat& bil, Eigen::Index dim_b, const Mat& p) {
  return bil * kron(Mat::Identity(dim_b, dim_b), p);
}

// B(., Q.): precompose the second slot only.
inline Mat precompose_second(const Mat& bil, Eigen::Index dim_a, const Mat& q) {
  return bil * kron(q, Mat::Identity(dim_a, dim_a));
}

// B^T(b (x) a) := B(a (x) b).
inline Mat bilinear_transpose(const Mat& bil, Eigen::Index dim_a, Eigen::Index dim_b) {
  if (bil.cols() != dim_a * dim_b) throw std::invalid_argument("bilinear_transpose: dims");
  Mat out(bil.rows(), dim_b * dim_a);
  for (Eigen::Index a = 0; a < dim_a; ++a)
    for (Eigen::Index b = 0; b < dim_b; ++b)
      out.col(b + a * dim_b) = bil.col(a + b * dim_a);
  return out;
}

// B(x (x) .) in L(B; U): contract the first slot with a fixed vector.
inline Mat contract_first(const Mat& bil, Eigen::Index dim_a, Eigen::Index dim_b, const Vec& x) {
  if (bil.cols() != dim_a * dim_b || x.size() != dim_a)
    throw std::invalid_argument("contract_first: dims");
  Mat out(bil.rows(), dim_b);
  for (Eigen::Index b = 0; b < dim_b; ++b)
    out.col(b) = bil.middleCols(b * dim_a, dim_a) * x;
  return out;
}

// B(. (x) x) in L(A; U): contract the second slot with a fixed vector.
inline Mat contract_second(const Mat& bil, Eigen::Index dim_a, Eigen::Index dim_b, const Vec& x) {
  if (bil.cols() != dim_a * dim_b || x.size() != dim_b)
    throw std::invalid_argument("contract_second: dims");
  Mat out = Mat::Zero(bil.rows(), dim_a);
  for (Eigen::Index b = 0; b < dim_b; ++b)
    out += bil.middleCols(b * dim_a, dim_a) * x(b);
  return out;
}

inline Mat sym(const Mat& m) { return 0.5 * (m + m.transpose()); }

inline double frob(const Mat& m) { return m.norm(); }

}  // namespace rsc
