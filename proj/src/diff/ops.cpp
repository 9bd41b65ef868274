// SPDX-License-Identifier: Apache-2.0
#include "tabllp/diff/ops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tabllp::diff {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                              b.shape_string());
}

enum class Broadcast { Same, Row, Col, Scalar };

Broadcast broadcast_kind(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::Same;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::Scalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::Row;
  if (b.cols() == 1 && b.rows() == a.rows()) return Broadcast::Col;
  shape_error(op, a, b);
}

// Expands b to a's shape.
Matrix expand(const Matrix& b, Broadcast kind, Eigen::Index rows, Eigen::Index cols) {
  switch (kind) {
    case Broadcast::Same:
      return b;
    case Broadcast::Row:
      return b.replicate(rows, 1);
    case Broadcast::Col:
      return b.replicate(1, cols);
    case Broadcast::Scalar:
      return Matrix::Constant(rows, cols, b(0, 0));
  }
  return b;
}

// Sums a full-shape gradient back down to b's shape.
Matrix reduce(const Matrix& g, Broadcast kind) {
  switch (kind) {
    case Broadcast::Same:
      return g;
    case Broadcast::Row:
      return g.colwise().sum();
    case Broadcast::Col:
      return g.rowwise().sum();
    case Broadcast::Scalar:
      return Matrix::Constant(1, 1, g.sum());
  }
  return g;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  return Tensor::make_result(a.value() * b.value(), "matmul", {a, b}, [](Node& n) {
    auto& x = *n.inputs[0];
    auto& y = *n.inputs[1];
    if (x.requires_grad) x.accumulate(n.grad * y.value.transpose());
    if (y.requires_grad) y.accumulate(x.value.transpose() * n.grad);
  });
}

Tensor transpose(const Tensor& a) {
  return Tensor::make_result(a.value().transpose(), "transpose", {a}, [](Node& n) {
    n.inputs[0]->accumulate(n.grad.transpose());
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  const auto kind = broadcast_kind("add", a, b);
  Matrix out = a.value() + expand(b.value(), kind, a.rows(), a.cols());
  return Tensor::make_result(std::move(out), "add", {a, b}, [kind](Node& n) {
    if (n.inputs[0]->requires_grad) n.inputs[0]->accumulate(n.grad);
    if (n.inputs[1]->requires_grad) n.inputs[1]->accumulate(reduce(n.grad, kind));
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  const auto kind = broadcast_kind("sub", a, b);
  Matrix out = a.value() - expand(b.value(), kind, a.rows(), a.cols());
  return Tensor::make_result(std::move(out), "sub", {a, b}, [kind](Node& n) {
    if (n.inputs[0]->requires_grad) n.inputs[0]->accumulate(n.grad);
    if (n.inputs[1]->requires_grad) n.inputs[1]->accumulate(-reduce(n.grad, kind));
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const auto kind = broadcast_kind("mul", a, b);
  Matrix bx = expand(b.value(), kind, a.rows(), a.cols());
  Matrix out = a.value().cwiseProduct(bx);
  return Tensor::make_result(std::move(out), "mul", {a, b}, [kind, bx = std::move(bx)](Node& n) {
    auto& x = *n.inputs[0];
    auto& y = *n.inputs[1];
    if (x.requires_grad) x.accumulate(n.grad.cwiseProduct(bx));
    if (y.requires_grad) y.accumulate(reduce(n.grad.cwiseProduct(x.value), kind));
  });
}

Tensor div(const Tensor& a, const Tensor& b) {
  const auto kind = broadcast_kind("div", a, b);
  Matrix bx = expand(b.value(), kind, a.rows(), a.cols());
  // Denominator magnitude floored at kEpsilon, sign preserved.
  Matrix safe = bx.unaryExpr([](Scalar v) {
    if (std::abs(v) >= kEpsilon) return v;
    return v < 0 ? -kEpsilon : kEpsilon;
  });
  Matrix out = a.value().cwiseQuotient(safe);
  return Tensor::make_result(
      out, "div", {a, b}, [kind, safe = std::move(safe), out](Node& n) {
        auto& x = *n.inputs[0];
        auto& y = *n.inputs[1];
        if (x.requires_grad) x.accumulate(n.grad.cwiseQuotient(safe));
        if (y.requires_grad) {
          Matrix g = -n.grad.cwiseProduct(out).cwiseQuotient(safe);
          y.accumulate(reduce(g, kind));
        }
      });
}

Tensor scale(const Tensor& a, Scalar s) {
  return Tensor::make_result(a.value() * s, "scale", {a},
                             [s](Node& n) { n.inputs[0]->accumulate(n.grad * s); });
}

Tensor add_scalar(const Tensor& a, Scalar s) {
  Matrix out = a.value().array() + s;
  return Tensor::make_result(std::move(out), "add_scalar", {a},
                             [](Node& n) { n.inputs[0]->accumulate(n.grad); });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor exp(const Tensor& a) {
  Matrix out = a.value().array().exp();
  return Tensor::make_result(out, "exp", {a}, [out](Node& n) {
    n.inputs[0]->accumulate(n.grad.cwiseProduct(out));
  });
}

Tensor log(const Tensor& a) {
  Matrix clamped = a.value().cwiseMax(kEpsilon);
  Matrix out = clamped.array().log();
  return Tensor::make_result(std::move(out), "log", {a}, [clamped](Node& n) {
    const auto& x = n.inputs[0]->value;
    Matrix g = n.grad.cwiseQuotient(clamped);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x.data()[i] < kEpsilon) g.data()[i] = 0.0;
    }
    n.inputs[0]->accumulate(g);
  });
}

Tensor relu(const Tensor& a) {
  Matrix out = a.value().cwiseMax(0.0);
  return Tensor::make_result(std::move(out), "relu", {a}, [](Node& n) {
    const auto& x = n.inputs[0]->value;
    Matrix g = (x.array() > 0.0).select(n.grad, 0.0);
    n.inputs[0]->accumulate(g);
  });
}

Tensor softmax(const Tensor& a) {
  Matrix out = a.value();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return Tensor::make_result(out, "softmax", {a}, [out](Node& n) {
    // dL/dx = s * (g - <g, s>) per row
    Matrix gs = n.grad.cwiseProduct(out);
    Vector dot = gs.rowwise().sum();
    Matrix g = gs - out.cwiseProduct(dot.replicate(1, out.cols()));
    n.inputs[0]->accumulate(g);
  });
}

Tensor sum(const Tensor& a, Axis axis) {
  const auto rows = a.rows();
  const auto cols = a.cols();
  switch (axis) {
    case Axis::All:
      return Tensor::make_result(Matrix::Constant(1, 1, a.value().sum()), "sum", {a},
                                 [rows, cols](Node& n) {
                                   n.inputs[0]->accumulate(Matrix::Constant(rows, cols, n.grad(0, 0)));
                                 });
    case Axis::Rows:
      return Tensor::make_result(a.value().colwise().sum(), "sum", {a}, [rows](Node& n) {
        n.inputs[0]->accumulate(n.grad.replicate(rows, 1));
      });
    case Axis::Cols:
      return Tensor::make_result(a.value().rowwise().sum(), "sum", {a}, [cols](Node& n) {
        n.inputs[0]->accumulate(n.grad.replicate(1, cols));
      });
  }
  throw std::invalid_argument("sum: bad axis");
}

Tensor mean(const Tensor& a, Axis axis) {
  if (a.size() == 0) throw std::invalid_argument("mean: empty tensor " + a.shape_string());
  switch (axis) {
    case Axis::All:
      return scale(sum(a, axis), 1.0 / static_cast<Scalar>(a.size()));
    case Axis::Rows:
      return scale(sum(a, axis), 1.0 / static_cast<Scalar>(a.rows()));
    case Axis::Cols:
      return scale(sum(a, axis), 1.0 / static_cast<Scalar>(a.cols()));
  }
  throw std::invalid_argument("mean: bad axis");
}

Tensor concat(std::span<const Tensor> parts, Axis axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  if (axis == Axis::All) throw std::invalid_argument("concat: axis must be Rows or Cols");
  const bool by_cols = axis == Axis::Cols;
  Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = parts[0].cols();
  Eigen::Index total = 0;
  std::vector<Eigen::Index> offsets;
  for (const auto& p : parts) {
    if (by_cols && p.rows() != rows) shape_error("concat", parts[0], p);
    if (!by_cols && p.cols() != cols) shape_error("concat", parts[0], p);
    offsets.push_back(total);
    total += by_cols ? p.cols() : p.rows();
  }
  Matrix out = by_cols ? Matrix(rows, total) : Matrix(total, cols);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (by_cols) {
      out.middleCols(offsets[k], parts[k].cols()) = parts[k].value();
    } else {
      out.middleRows(offsets[k], parts[k].rows()) = parts[k].value();
    }
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return Tensor::make_result(std::move(out), "concat", std::move(inputs),
                             [by_cols, offsets](Node& n) {
                               for (std::size_t k = 0; k < n.inputs.size(); ++k) {
                                 auto& in = *n.inputs[k];
                                 if (!in.requires_grad) continue;
                                 if (by_cols) {
                                   in.accumulate(n.grad.middleCols(offsets[k], in.value.cols()));
                                 } else {
                                   in.accumulate(n.grad.middleRows(offsets[k], in.value.rows()));
                                 }
                               }
                             });
}

Tensor concat(std::initializer_list<Tensor> parts, Axis axis) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
}

Tensor slice_cols(const Tensor& a, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > a.cols()) {
    throw std::invalid_argument("slice: columns [" + std::to_string(begin) + ", " +
                                std::to_string(begin + count) + ") out of range for shape " +
                                a.shape_string());
  }
  const auto rows = a.rows();
  const auto cols = a.cols();
  return Tensor::make_result(a.value().middleCols(begin, count), "slice", {a},
                             [rows, cols, begin, count](Node& n) {
                               Matrix g = Matrix::Zero(rows, cols);
                               g.middleCols(begin, count) = n.grad;
                               n.inputs[0]->accumulate(g);
                             });
}

Tensor gather_rows(const Tensor& a, std::span<const Eigen::Index> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= a.rows()) {
      throw std::invalid_argument("gather: row index " + std::to_string(rows[i]) +
                                  " out of range for shape " + a.shape_string());
    }
    out.row(static_cast<Eigen::Index>(i)) = a.value().row(rows[i]);
  }
  std::vector<Eigen::Index> idx(rows.begin(), rows.end());
  return Tensor::make_result(std::move(out), "gather", {a}, [idx](Node& n) {
    auto& in = *n.inputs[0];
    Matrix g = Matrix::Zero(in.value.rows(), in.value.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) g.row(idx[i]) += n.grad.row(static_cast<Eigen::Index>(i));
    in.accumulate(g);
  });
}

Tensor normalize_rows(const Tensor& a) {
  Vector norms = a.value().rowwise().norm();
  Matrix out = a.value();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    if (norms(r) < kEpsilon) {
      out.row(r).setZero();
    } else {
      out.row(r) /= norms(r);
    }
  }
  return Tensor::make_result(out, "normalize", {a}, [out, norms](Node& n) {
    // d(x/|x|) = (g - u <g, u>) / |x|
    Matrix g(out.rows(), out.cols());
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      if (norms(r) < kEpsilon) {
        g.row(r).setZero();
        continue;
      }
      const Scalar d = n.grad.row(r).dot(out.row(r));
      g.row(r) = (n.grad.row(r) - d * out.row(r)) / norms(r);
    }
    n.inputs[0]->accumulate(g);
  });
}

Tensor cosine_similarity(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) shape_error("cosine_similarity", a, b);
  return matmul(normalize_rows(a), transpose(normalize_rows(b)));
}

Tensor layer_norm(const Tensor& a, Scalar eps) {
  const auto d = static_cast<Scalar>(a.cols());
  Matrix xhat(a.rows(), a.cols());
  Vector inv_std(a.rows());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const Scalar mu = a.value().row(r).mean();
    RowVector c = a.value().row(r).array() - mu;
    const Scalar var = c.squaredNorm() / d;
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = c * inv_std(r);
  }
  return Tensor::make_result(xhat, "layer_norm", {a}, [xhat, inv_std, d](Node& n) {
    Matrix g(xhat.rows(), xhat.cols());
    for (Eigen::Index r = 0; r < xhat.rows(); ++r) {
      const auto gr = n.grad.row(r);
      const Scalar mean_g = gr.mean();
      const Scalar mean_gx = gr.dot(xhat.row(r)) / d;
      g.row(r) = inv_std(r) * (gr.array() - mean_g - xhat.row(r).array() * mean_gx).matrix();
    }
    n.inputs[0]->accumulate(g);
  });
}

}  // namespace tabllp::diff
