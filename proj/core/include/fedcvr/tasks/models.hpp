#pragma once

#include <cstddef>
#include <memory>
#include <span>

#include "fedcvr/linalg.hpp"
#include "fedcvr/tasks/dataset.hpp"

namespace fedcvr::tasks {

struct LossGrad {
  double loss = 0.0;
  ModelParams grad;
};

struct Evaluation {
  double loss = 0.0;
  /// NaN for tasks without an accuracy metric.
  double accuracy = 0.0;
};

/// Mean squared error (1/n) sum (<theta, x> - y)^2 and its gradient.
LossGrad regression_loss_and_grad(const ModelParams& theta, const Matrix& x, const Vector& y);

/// Multinomial logistic regression. `theta` is the row-major flattening of
/// a classes x features weight matrix; `y` holds class indices.
LossGrad cross_entropy_loss_and_grad(const ModelParams& theta, const Matrix& x, const Vector& y,
                                     std::size_t classes);

/// Task model behind the local trainer and the evaluation path.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::size_t param_dim() const = 0;
  virtual bool has_accuracy() const = 0;
  virtual LossGrad loss_and_grad(const ModelParams& theta, const Matrix& x, const Vector& y) const = 0;
  virtual Evaluation evaluate(const ModelParams& theta, const Dataset& data) const = 0;
};

class LinearRegressionModel final : public Model {
 public:
  explicit LinearRegressionModel(std::size_t features) : features_(features) {}

  std::size_t param_dim() const override { return features_; }
  bool has_accuracy() const override { return false; }
  LossGrad loss_and_grad(const ModelParams& theta, const Matrix& x, const Vector& y) const override;
  Evaluation evaluate(const ModelParams& theta, const Dataset& data) const override;

 private:
  std::size_t features_;
};

class SoftmaxRegressionModel final : public Model {
 public:
  SoftmaxRegressionModel(std::size_t features, std::size_t classes)
      : features_(features), classes_(classes) {}

  std::size_t param_dim() const override { return features_ * classes_; }
  bool has_accuracy() const override { return true; }
  LossGrad loss_and_grad(const ModelParams& theta, const Matrix& x, const Vector& y) const override;
  Evaluation evaluate(const ModelParams& theta, const Dataset& data) const override;

  std::size_t classes() const noexcept { return classes_; }

 private:
  std::size_t features_;
  std::size_t classes_;
};

}  // namespace fedcvr::tasks
