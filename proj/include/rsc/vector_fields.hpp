#pragma once

#include <string>
#include <vector>

#include "rsc/controlled.hpp"

namespace rsc {

// Scalar building block with three analytic derivatives: a*g(b*x+c)+d for the
// trig/tanh/exp kinds, or a cubic polynomial.
struct Fun1D {
  enum class Kind { Const, Poly, Sin, Cos, Tanh, Exp };
  Kind kind = Kind::Const;
  double a = 0, b = 1, c = 0, d = 0;
  double p0 = 0, p1 = 0, p2 = 0, p3 = 0;  // Poly coefficients

  double v(double x) const;
  double d1(double x) const;
  double d2(double x) const;
  double d3(double x) const;
};

Fun1D fun_const(double c);
Fun1D fun_linear(double slope, double intercept = 0.0);
Fun1D fun_poly(double p0, double p1, double p2, double p3 = 0.0);
Fun1D fun_sin(double a, double b = 1.0, double c = 0.0, double d = 0.0);
Fun1D fun_cos(double a, double b = 1.0, double c = 0.0, double d = 0.0);
Fun1D fun_tanh(double a = 1.0, double b = 1.0);
Fun1D fun_exp(double a = 1.0, double b = 1.0);

// x -> (rows x cols) matrix with directional derivatives up to third order.
struct MatrixField {
  int dim_in = 1;
  int rows = 1, cols = 1;
  std::function<Mat(const Vec&)> value;
  std::function<Mat(const Vec&, const Vec&)> d1;
  std::function<Mat(const Vec&, const Vec&, const Vec&)> d2;
  std::function<Mat(const Vec&, const Vec&, const Vec&, const Vec&)> d3;
};

// Entry (i,j) is fns[i][j] applied to coordinate sel[i][j] (componentwise).
MatrixField componentwise_field(int dim_in, std::vector<std::vector<Fun1D>> fns,
                                std::vector<std::vector<int>> sel = {});

// B + sum_k x_k A_k.
MatrixField linear_matrix_field(std::vector<Mat> a_k, Mat b);

struct VectorFieldPair {
  MatrixField mu;     // (dX x 1)
  MatrixField sigma;  // (dX x dZ)
  int dim_x() const { return mu.rows; }
  int dim_z() const { return sigma.cols; }
};

// Max deviation of d1/d2/d3 from central differences of value/d1/d2.
double fd_validate(const MatrixField& f, const Box& box, double h, int points = 5);

// Test functions g with analytic gradient and Hessian (vector-valued allowed).
struct TestFunction {
  int dim_in = 1, dim_out = 1;
  std::function<Vec(const Vec&)> value;
  std::function<Mat(const Vec&)> grad;  // (dU x dX)
  std::function<Mat(const Vec&)> hess;  // (dU x dX^2)
};

TestFunction identity_test(int dim);
TestFunction test_from_fun(const Fun1D& f);            // scalar, dim 1
TestFunction tanh_of_sum(const Vec& weights);          // tanh(w.x)

// Named registry used by the scenario configs.
Fun1D fun_from_name(const std::string& name, const std::vector<double>& params);

}  // namespace rsc
