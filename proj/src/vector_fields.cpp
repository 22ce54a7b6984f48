#include "rsc/vector_fields.hpp"

#include <cmath>
#include <stdexcept>

namespace rsc {

namespace {

// derivatives of the base g and its first three derivatives
void base_derivs(Fun1D::Kind k, double u, double* g) {
  switch (k) {
    case Fun1D::Kind::Sin:
      g[0] = std::sin(u); g[1] = std::cos(u); g[2] = -std::sin(u); g[3] = -std::cos(u);
      return;
    case Fun1D::Kind::Cos:
      g[0] = std::cos(u); g[1] = -std::sin(u); g[2] = -std::cos(u); g[3] = std::sin(u);
      return;
    case Fun1D::Kind::Tanh: {
      double t = std::tanh(u), s = 1.0 - t * t;
      g[0] = t; g[1] = s; g[2] = -2.0 * t * s; g[3] = -2.0 * s * (1.0 - 3.0 * t * t);
      return;
    }
    case Fun1D::Kind::Exp: {
      double e = std::exp(u);
      g[0] = g[1] = g[2] = g[3] = e;
      return;
    }
    default:
      g[0] = g[1] = g[2] = g[3] = 0.0;
      return;
  }
}

}  // namespace

double Fun1D::v(double x) const {
  if (kind == Kind::Const) return d;
  if (kind == Kind::Poly) return p0 + x * (p1 + x * (p2 + x * p3));
  double g[4];
  base_derivs(kind, b * x + c, g);
  return a * g[0] + d;
}

double Fun1D::d1(double x) const {
  if (kind == Kind::Const) return 0.0;
  if (kind == Kind::Poly) return p1 + x * (2.0 * p2 + 3.0 * p3 * x);
  double g[4];
  base_derivs(kind, b * x + c, g);
  return a * b * g[1];
}

double Fun1D::d2(double x) const {
  if (kind == Kind::Const) return 0.0;
  if (kind == Kind::Poly) return 2.0 * p2 + 6.0 * p3 * x;
  double g[4];
  base_derivs(kind, b * x + c, g);
  return a * b * b * g[2];
}

double Fun1D::d3(double x) const {
  if (kind == Kind::Const) return 0.0;
  if (kind == Kind::Poly) return 6.0 * p3;
  double g[4];
  base_derivs(kind, b * x + c, g);
  return a * b * b * b * g[3];
}

Fun1D fun_const(double c) { Fun1D f; f.kind = Fun1D::Kind::Const; f.d = c; return f; }
Fun1D fun_linear(double slope, double intercept) {
  Fun1D f; f.kind = Fun1D::Kind::Poly; f.p0 = intercept; f.p1 = slope; return f;
}
Fun1D fun_poly(double p0, double p1, double p2, double p3) {
  Fun1D f; f.kind = Fun1D::Kind::Poly; f.p0 = p0; f.p1 = p1; f.p2 = p2; f.p3 = p3; return f;
}
Fun1D fun_sin(double a, double b, double c, double d) {
  Fun1D f; f.kind = Fun1D::Kind::Sin; f.a = a; f.b = b; f.c = c; f.d = d; return f;
}
Fun1D fun_cos(double a, double b, double c, double d) {
  Fun1D f; f.kind = Fun1D::Kind::Cos; f.a = a; f.b = b; f.c = c; f.d = d; return f;
}
Fun1D fun_tanh(double a, double b) { Fun1D f; f.kind = Fun1D::Kind::Tanh; f.a = a; f.b = b; return f; }
Fun1D fun_exp(double a, double b) { Fun1D f; f.kind = Fun1D::Kind::Exp; f.a = a; f.b = b; return f; }

MatrixField componentwise_field(int dim_in, std::vector<std::vector<Fun1D>> fns,
                                std::vector<std::vector<int>> sel) {
  const int rows = static_cast<int>(fns.size());
  const int cols = static_cast<int>(fns[0].size());
  if (sel.empty()) {
    sel.assign(rows, std::vector<int>(cols, 0));
    if (dim_in > 1)
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) sel[i][j] = i % dim_in;
  }
  MatrixField f;
  f.dim_in = dim_in;
  f.rows = rows;
  f.cols = cols;
  f.value = [=](const Vec& x) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = fns[i][j].v(x(sel[i][j]));
    return m;
  };
  f.d1 = [=](const Vec& x, const Vec& w) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = fns[i][j].d1(x(sel[i][j])) * w(sel[i][j]);
    return m;
  };
  f.d2 = [=](const Vec& x, const Vec& w, const Vec& u) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        m(i, j) = fns[i][j].d2(x(sel[i][j])) * w(sel[i][j]) * u(sel[i][j]);
    return m;
  };
  f.d3 = [=](const Vec& x, const Vec& w, const Vec& u, const Vec& v) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        m(i, j) = fns[i][j].d3(x(sel[i][j])) * w(sel[i][j]) * u(sel[i][j]) * v(sel[i][j]);
    return m;
  };
  return f;
}

MatrixField linear_matrix_field(std::vector<Mat> a_k, Mat b) {
  MatrixField f;
  f.dim_in = static_cast<int>(a_k.size());
  f.rows = static_cast<int>(b.rows());
  f.cols = static_cast<int>(b.cols());
  f.value = [a_k, b](const Vec& x) {
    Mat m = b;
    for (std::size_t k = 0; k < a_k.size(); ++k) m += x(k) * a_k[k];
    return m;
  };
  f.d1 = [a_k, b](const Vec&, const Vec& w) {
    Mat m = Mat::Zero(b.rows(), b.cols());
    for (std::size_t k = 0; k < a_k.size(); ++k) m += w(k) * a_k[k];
    return m;
  };
  f.d2 = [b](const Vec&, const Vec&, const Vec&) { return Mat::Zero(b.rows(), b.cols()); };
  f.d3 = [b](const Vec&, const Vec&, const Vec&, const Vec&) {
    return Mat::Zero(b.rows(), b.cols());
  };
  return f;
}

double fd_validate(const MatrixField& f, const Box& box, double h, int points) {
  auto pts = lattice(box, points);
  double worst = 0.0;
  for (const Vec& x : pts) {
    for (int i = 0; i < f.dim_in; ++i) {
      Vec ei = Vec::Unit(f.dim_in, i);
      Mat fd1 = (f.value(Vec(x + h * ei)) - f.value(Vec(x - h * ei))) / (2.0 * h);
      worst = std::max(worst, (fd1 - f.d1(x, ei)).norm());
      for (int j = 0; j < f.dim_in; ++j) {
        Vec ej = Vec::Unit(f.dim_in, j);
        Mat fd2 = (f.d1(Vec(x + h * ej), ei) - f.d1(Vec(x - h * ej), ei)) / (2.0 * h);
        worst = std::max(worst, (fd2 - f.d2(x, ei, ej)).norm());
        Mat fd3 = (f.d2(Vec(x + h * ej), ei, ei) - f.d2(Vec(x - h * ej), ei, ei)) / (2.0 * h);
        worst = std::max(worst, (fd3 - f.d3(x, ei, ei, ej)).norm());
      }
    }
  }
  return worst;
}

TestFunction identity_test(int dim) {
  TestFunction g;
  g.dim_in = g.dim_out = dim;
  g.value = [](const Vec& x) { return x; };
  g.grad = [dim](const Vec&) { return Mat::Identity(dim, dim); };
  g.hess = [dim](const Vec&) { return Mat::Zero(dim, dim * dim); };
  return g;
}

TestFunction test_from_fun(const Fun1D& f) {
  TestFunction g;
  g.value = [f](const Vec& x) { return Vec::Constant(1, f.v(x(0))); };
  g.grad = [f](const Vec& x) { return Mat::Constant(1, 1, f.d1(x(0))); };
  g.hess = [f](const Vec& x) { return Mat::Constant(1, 1, f.d2(x(0))); };
  return g;
}

TestFunction tanh_of_sum(const Vec& weights) {
  TestFunction g;
  g.dim_in = static_cast<int>(weights.size());
  g.dim_out = 1;
  g.value = [weights](const Vec& x) { return Vec::Constant(1, std::tanh(weights.dot(x))); };
  g.grad = [weights](const Vec& x) {
    double t = std::tanh(weights.dot(x));
    return Mat((1.0 - t * t) * weights.transpose());
  };
  g.hess = [weights](const Vec& x) {
    double t = std::tanh(weights.dot(x));
    Mat h = -2.0 * t * (1.0 - t * t) * (weights * weights.transpose());
    Mat out(1, weights.size() * weights.size());
    out.row(0) = flatten(h).transpose();
    return out;
  };
  return g;
}

Fun1D fun_from_name(const std::string& name, const std::vector<double>& p) {
  auto at = [&](std::size_t i, double def) { return i < p.size() ? p[i] : def; };
  if (name == "const") return fun_const(at(0, 0.0));
  if (name == "linear") return fun_linear(at(0, 1.0), at(1, 0.0));
  if (name == "poly") return fun_poly(at(0, 0.0), at(1, 0.0), at(2, 0.0), at(3, 0.0));
  if (name == "sin") return fun_sin(at(0, 1.0), at(1, 1.0), at(2, 0.0), at(3, 0.0));
  if (name == "cos") return fun_cos(at(0, 1.0), at(1, 1.0), at(2, 0.0), at(3, 0.0));
  if (name == "tanh") return fun_tanh(at(0, 1.0), at(1, 1.0));
  if (name == "exp") return fun_exp(at(0, 1.0), at(1, 1.0));
  throw std::invalid_argument("unknown field function: " + name);
}

}  // namespace rsc
