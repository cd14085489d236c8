#pragma once

#include <string>

#include <Eigen/Core>

#include "oodgen/nn/params.hpp"

namespace oodgen {

// One GRU step over a column-batched input (columns = batch lanes).
//
//   r = sigmoid(Wr x + Ur h + br)
//   z = sigmoid(Wz x + Uz h + bz)
//   n = tanh(Wn x + bn + r .* (Un h + bhn))
//   h' = (1 - z) .* n + z .* h
struct GruCell {
  Param *Wr, *Wz, *Wn;    // input weights, H x I
  Param *Ur, *Uz, *Un;    // recurrent weights, H x H
  Param *br, *bz, *bn, *bhn;  // biases, H x 1
  int input_dim = 0;
  int hidden_dim = 0;

  static GruCell create(ParamSet& params, const std::string& prefix, int input_dim,
                        int hidden_dim, Rng& rng);

  struct Cache {
    Eigen::MatrixXd x, h_prev, r, z, n, rec_n;  // rec_n = Un h_prev + bhn
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& h_prev,
                          Cache* cache) const;

  // Accumulates parameter gradients; returns dx and dh_prev.
  void backward(const Eigen::MatrixXd& dh, const Cache& cache, Eigen::MatrixXd* dx,
                Eigen::MatrixXd* dh_prev) const;
};

}  // namespace oodgen
