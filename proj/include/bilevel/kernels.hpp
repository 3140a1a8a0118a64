#pragma once

// Finite-sum logistic kernels over the rows of a feature matrix.
//
// Two implementations with the same signatures:
//   serial::   plain loops, the reference used by the tests;
//   parallel:: OpenMP over fixed 256-row blocks, partial results combined in block order.
// The block layout does not depend on the thread count, so parallel results are bitwise
// reproducible across runs and machines; they match serial:: up to summation order.
//
// `weights` scales each row's term; an empty vector means unit weights. All sums are divided
// by the number of rows.

#include "bilevel/linalg.hpp"

namespace bilevel::kernels {

inline constexpr Index kBlockRows = 256;

double sigmoid(double m);
/// log(1 + exp(m)) - label * m, evaluated without overflow.
double logistic_loss_term(double margin, double label);

namespace serial {
double logistic_loss(const RowMatrix& X, const Vector& labels, const Vector& weights,
                     const Vector& w);
/// (1/N) sum_i weight_i (sigmoid(x_i.w) - label_i) x_i
Vector logistic_grad(const RowMatrix& X, const Vector& labels, const Vector& weights,
                     const Vector& w);
/// (1/N) sum_i weight_i p_i (1 - p_i) (x_i.z) x_i
Vector logistic_hvp(const RowMatrix& X, const Vector& weights, const Vector& w, const Vector& z);
/// r_i = (sigmoid(x_i.w) - label_i) (x_i.z), one entry per row
Vector residual_dot(const RowMatrix& X, const Vector& labels, const Vector& w, const Vector& z);
Matrix logistic_hessian(const RowMatrix& X, const Vector& weights, const Vector& w);
}  // namespace serial

namespace parallel {
double logistic_loss(const RowMatrix& X, const Vector& labels, const Vector& weights,
                     const Vector& w);
Vector logistic_grad(const RowMatrix& X, const Vector& labels, const Vector& weights,
                     const Vector& w);
Vector logistic_hvp(const RowMatrix& X, const Vector& weights, const Vector& w, const Vector& z);
Vector residual_dot(const RowMatrix& X, const Vector& labels, const Vector& w, const Vector& z);
Matrix logistic_hessian(const RowMatrix& X, const Vector& weights, const Vector& w);
}  // namespace parallel

}  // namespace bilevel::kernels
