// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tabllp/diff/tensor.hpp"

#include <span>
#include <vector>

namespace tabllp::diff {

/// Reduction direction. `Rows` collapses the row dimension (result 1 x cols),
/// `Cols` collapses the column dimension (result rows x 1).
enum class Axis { All, Rows, Cols };

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// Elementwise binary ops. `b` may match `a`'s shape, be a 1 x cols row
// (broadcast over rows), a rows x 1 column (broadcast over columns) or 1 x 1.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, Scalar s);
Tensor add_scalar(const Tensor& a, Scalar s);
Tensor neg(const Tensor& a);

Tensor exp(const Tensor& a);
/// Natural log with the input clamped to >= kEpsilon. Clamped entries get
/// zero gradient.
Tensor log(const Tensor& a);
Tensor relu(const Tensor& a);

/// Row-wise softmax with max subtraction.
Tensor softmax(const Tensor& a);

Tensor sum(const Tensor& a, Axis axis = Axis::All);
Tensor mean(const Tensor& a, Axis axis = Axis::All);

/// Concatenation along columns (Axis::Cols) or rows (Axis::Rows).
Tensor concat(std::span<const Tensor> parts, Axis axis = Axis::Cols);
Tensor concat(std::initializer_list<Tensor> parts, Axis axis = Axis::Cols);

Tensor slice_cols(const Tensor& a, Eigen::Index begin, Eigen::Index count);
/// Row gather; indices may repeat (gradients are summed).
Tensor gather_rows(const Tensor& a, std::span<const Eigen::Index> rows);

/// Rows scaled to unit L2 norm; rows with norm < kEpsilon become zero.
Tensor normalize_rows(const Tensor& a);
/// Pairwise cosine similarity between rows of `a` (m x d) and `b` (n x d),
/// giving m x n. A zero row has similarity 0 with everything.
Tensor cosine_similarity(const Tensor& a, const Tensor& b);

/// Row-wise layer normalisation without affine parameters.
Tensor layer_norm(const Tensor& a, Scalar eps = 1e-5);

}  // namespace tabllp::diff
