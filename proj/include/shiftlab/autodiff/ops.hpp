// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shiftlab/autodiff/tape.hpp"

namespace shiftlab::ad {

/// Inputs to log() are clamped below at this value; gradient is zero inside the clamp.
inline constexpr double kLogFloor = 1e-12;

Var matmul(Var a, Var b);
Var transpose(Var a);
Var reshape(Var a, Shape shape);

// Elementwise binary ops. Shapes must match, or the second (or first) operand
// is a scalar, or a rank-1 [d] / [1 x d] row broadcast over the leading axis.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);

Var add_scalar(Var a, double s);
Var mul_scalar(Var a, double s);
/// s - a
Var rsub_scalar(double s, Var a);

Var relu(Var a);
Var sigmoid(Var a);
Var log(Var a);
Var exp(Var a);
Var neg(Var a);
Var square(Var a);
/// Values clamped into [lo, hi]; gradient passes only where unclamped.
Var clamp(Var a, double lo, double hi);

/// Zeroes each element with probability `rate`, scales survivors by 1/(1-rate).
/// The keep pattern depends only on (seed, element index).
Var dropout(Var a, double rate, std::uint64_t seed);

/// out[index[e]] += src[e] over rows; rank-1 src is treated as [E x 1].
Var scatter_sum(Var src, std::span<const std::size_t> index, std::size_t out_size);
/// out[e] = src[index[e]] over rows.
Var gather_rows(Var src, std::span<const std::size_t> index);

enum class Reduce { kSum, kMean, kMax };
/// Rank-2: axis 0 -> [cols], axis 1 -> [rows]. Rank-1: axis 0 -> [1].
Var reduce(Var a, Reduce kind, std::size_t axis);
Var sum_all(Var a);
Var mean_all(Var a);

/// x[i, :] * s[i]
Var scale_rows(Var x, Var s);
/// sqrt(sum_j x[i,j]^2) floored at eps; gradient is zero where the floor applies.
Var row_l2_norm(Var x, double eps = 1e-12);
/// sum_j a[i,j] * b[i,j]
Var row_dot(Var a, Var b);

Var concat_cols(Var a, Var b);
/// Stacks along the leading axis; rank-1 inputs give a rank-1 result.
Var concat_rows(Var a, Var b);

Var logsumexp_rows(Var x);
Var softmax_rows(Var x);
/// out[i] = x[i, col[i]]
Var pick(Var x, std::span<const std::size_t> col);

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator*(Var a, double s);
Var operator*(double s, Var a);
Var operator+(Var a, double s);
Var operator-(double s, Var a);

}  // namespace shiftlab::ad
