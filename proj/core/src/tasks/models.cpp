#include "fedcvr/tasks/models.hpp"

#include <cmath>
#include <limits>

#include "fedcvr/error.hpp"

namespace fedcvr::tasks {

LossGrad regression_loss_and_grad(const ModelParams& theta, const Matrix& x, const Vector& y) {
  if (x.cols() != theta.size() || x.rows() != y.size()) throw Error("regression: dimension mismatch");
  if (x.rows() == 0) throw Error("regression: empty batch");
  const double n = static_cast<double>(x.rows());
  const Vector residual = x * theta - y;
  LossGrad out;
  out.loss = residual.squaredNorm() / n;
  out.grad = (2.0 / n) * (x.transpose() * residual);
  return out;
}

namespace {

Matrix weight_view(const ModelParams& theta, std::size_t classes, Eigen::Index features) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      theta.data(), static_cast<Eigen::Index>(classes), features);
}

// Row-wise log-softmax of the logits.
Matrix log_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double top = logits.row(r).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) sum += std::exp(logits(r, c) - top);
    const double lse = top + std::log(sum);
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

Eigen::Index class_of(double label, std::size_t classes) {
  const auto c = static_cast<Eigen::Index>(std::llround(label));
  if (c < 0 || c >= static_cast<Eigen::Index>(classes)) throw Error("classification: label out of range");
  return c;
}

}  // namespace

LossGrad cross_entropy_loss_and_grad(const ModelParams& theta, const Matrix& x, const Vector& y,
                                     std::size_t classes) {
  if (theta.size() != static_cast<Eigen::Index>(classes) * x.cols() || x.rows() != y.size()) {
    throw Error("classification: dimension mismatch");
  }
  if (x.rows() == 0) throw Error("classification: empty batch");
  const double n = static_cast<double>(x.rows());
  const Matrix w = weight_view(theta, classes, x.cols());
  const Matrix logp = log_softmax(x * w.transpose());

  Matrix delta = logp.array().exp().matrix();  // softmax probabilities
  double loss = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Eigen::Index c = class_of(y(r), classes);
    loss -= logp(r, c);
    delta(r, c) -= 1.0;
  }
  const Matrix grad_w = (delta.transpose() * x) / n;  // classes x features

  LossGrad out;
  out.loss = loss / n;
  out.grad.resize(theta.size());
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      out.grad.data(), grad_w.rows(), grad_w.cols()) = grad_w;
  return out;
}

LossGrad LinearRegressionModel::loss_and_grad(const ModelParams& theta, const Matrix& x, const Vector& y) const {
  return regression_loss_and_grad(theta, x, y);
}

Evaluation LinearRegressionModel::evaluate(const ModelParams& theta, const Dataset& data) const {
  if (data.x.cols() != theta.size()) throw Error("regression: dimension mismatch");
  const Vector residual = data.x * theta - data.y;
  return {residual.squaredNorm() / static_cast<double>(data.x.rows()),
          std::numeric_limits<double>::quiet_NaN()};
}

LossGrad SoftmaxRegressionModel::loss_and_grad(const ModelParams& theta, const Matrix& x, const Vector& y) const {
  return cross_entropy_loss_and_grad(theta, x, y, classes_);
}

Evaluation SoftmaxRegressionModel::evaluate(const ModelParams& theta, const Dataset& data) const {
  const Matrix w = weight_view(theta, classes_, data.x.cols());
  const Matrix logits = data.x * w.transpose();
  const Matrix logp = log_softmax(logits);
  double loss = 0.0;
  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < data.x.rows(); ++r) {
    const Eigen::Index c = class_of(data.y(r), classes_);
    loss -= logp(r, c);
    Eigen::Index predicted = 0;
    logits.row(r).maxCoeff(&predicted);  // first maximum on ties
    if (predicted == c) ++correct;
  }
  const double n = static_cast<double>(data.x.rows());
  return {loss / n, static_cast<double>(correct) / n};
}

}  // namespace fedcvr::tasks
