#include "oodgen/nn/optim.hpp"

#include <cmath>

namespace oodgen {

void Adam::step(ParamSet& params) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::size_t i = 0;
  for (auto& p : params) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
    p.value.array() -=
        lr_ * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + eps_);
    ++i;
  }
}

void Adagrad::step(ParamSet& params) {
  if (accum_.empty()) {
    for (const auto& p : params)
      accum_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
  }
  std::size_t i = 0;
  for (auto& p : params) {
    accum_[i].array() += p.grad.array().square();
    p.value.array() -= lr_ * p.grad.array() / (accum_[i].array().sqrt() + eps_);
    ++i;
  }
}

}  // namespace oodgen
