#pragma once

#include <vector>

#include <Eigen/Core>

#include "oodgen/nn/params.hpp"

namespace oodgen {

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(ParamSet& params) = 0;
};

class Adam : public Optimizer {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamSet& params) override;

  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

class Adagrad : public Optimizer {
 public:
  explicit Adagrad(double lr, double eps = 1e-10) : lr_(lr), eps_(eps) {}

  void step(ParamSet& params) override;

 private:
  double lr_, eps_;
  std::vector<Eigen::MatrixXd> accum_;
};

}  // namespace oodgen
