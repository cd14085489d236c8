#pragma once

#include <deque>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "oodgen/rng.hpp"

namespace oodgen {

struct Param {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;
};

// Owns a model's trainable parameters. Uses a deque so references handed out
// by add() stay valid as more parameters are registered.
class ParamSet {
 public:
  Param& add(const std::string& name, int rows, int cols) {
    params_.push_back(Param{name, Eigen::MatrixXd::Zero(rows, cols),
                            Eigen::MatrixXd::Zero(rows, cols)});
    return params_.back();
  }

  Param& add_uniform(const std::string& name, int rows, int cols, double bound, Rng& rng) {
    Param& p = add(name, rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) p.value(r, c) = rng.uniform(-bound, bound);
    return p;
  }

  void zero_grad() {
    for (auto& p : params_) p.grad.setZero();
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

  std::vector<double> flatten_values() const { return flatten([](const Param& p) -> const Eigen::MatrixXd& { return p.value; }); }
  std::vector<double> flatten_grads() const { return flatten([](const Param& p) -> const Eigen::MatrixXd& { return p.grad; }); }

  void set_values(const std::vector<double>& flat) {
    std::size_t k = 0;
    for (auto& p : params_) {
      for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = flat.at(k++);
    }
  }

  void copy_values_from(const ParamSet& other) {
    if (other.params_.size() != params_.size())
      throw std::runtime_error("ParamSet: shape mismatch in copy_values_from");
    for (std::size_t i = 0; i < params_.size(); ++i) params_[i].value = other.params_[i].value;
  }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  std::size_t size() const { return params_.size(); }
  Param& at(std::size_t i) { return params_[i]; }
  const Param& at(std::size_t i) const { return params_[i]; }

 private:
  template <typename Accessor>
  std::vector<double> flatten(Accessor acc) const {
    std::vector<double> flat;
    flat.reserve(scalar_count());
    for (const auto& p : params_) {
      const Eigen::MatrixXd& m = acc(p);
      flat.insert(flat.end(), m.data(), m.data() + m.size());
    }
    return flat;
  }

  std::deque<Param> params_;
};

}  // namespace oodgen
