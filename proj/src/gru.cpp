#include "oodgen/nn/gru.hpp"

#include <cmath>

namespace oodgen {

namespace {
inline Eigen::ArrayXXd sigmoid(const Eigen::MatrixXd& m) {
  return 1.0 / (1.0 + (-m.array()).exp());
}
}  // namespace

GruCell GruCell::create(ParamSet& params, const std::string& prefix, int input_dim,
                        int hidden_dim, Rng& rng) {
  GruCell c;
  c.input_dim = input_dim;
  c.hidden_dim = hidden_dim;
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  c.Wr = &params.add_uniform(prefix + ".Wr", hidden_dim, input_dim, bound, rng);
  c.Wz = &params.add_uniform(prefix + ".Wz", hidden_dim, input_dim, bound, rng);
  c.Wn = &params.add_uniform(prefix + ".Wn", hidden_dim, input_dim, bound, rng);
  c.Ur = &params.add_uniform(prefix + ".Ur", hidden_dim, hidden_dim, bound, rng);
  c.Uz = &params.add_uniform(prefix + ".Uz", hidden_dim, hidden_dim, bound, rng);
  c.Un = &params.add_uniform(prefix + ".Un", hidden_dim, hidden_dim, bound, rng);
  c.br = &params.add(prefix + ".br", hidden_dim, 1);
  c.bz = &params.add(prefix + ".bz", hidden_dim, 1);
  c.bn = &params.add(prefix + ".bn", hidden_dim, 1);
  c.bhn = &params.add(prefix + ".bhn", hidden_dim, 1);
  return c;
}

Eigen::MatrixXd GruCell::forward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& h_prev,
                                 Cache* cache) const {
  const Eigen::MatrixXd r =
      sigmoid((Wr->value * x + Ur->value * h_prev).colwise() + br->value.col(0));
  const Eigen::MatrixXd z =
      sigmoid((Wz->value * x + Uz->value * h_prev).colwise() + bz->value.col(0));
  const Eigen::MatrixXd rec_n = (Un->value * h_prev).colwise() + bhn->value.col(0);
  const Eigen::MatrixXd n =
      (((Wn->value * x).colwise() + bn->value.col(0)).array() + r.array() * rec_n.array())
          .tanh();
  Eigen::MatrixXd h =
      ((1.0 - z.array()) * n.array() + z.array() * h_prev.array()).matrix();
  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->r = r;
    cache->z = z;
    cache->n = n;
    cache->rec_n = rec_n;
  }
  return h;
}

void GruCell::backward(const Eigen::MatrixXd& dh, const Cache& c, Eigen::MatrixXd* dx,
                       Eigen::MatrixXd* dh_prev) const {
  const Eigen::ArrayXXd dz = dh.array() * (c.h_prev.array() - c.n.array());
  const Eigen::ArrayXXd dn = dh.array() * (1.0 - c.z.array());
  Eigen::ArrayXXd dhp = dh.array() * c.z.array();

  const Eigen::ArrayXXd da_n = dn * (1.0 - c.n.array().square());
  const Eigen::ArrayXXd dr = da_n * c.rec_n.array();
  const Eigen::ArrayXXd d_rec_n = da_n * c.r.array();

  const Eigen::ArrayXXd da_z = dz * c.z.array() * (1.0 - c.z.array());
  const Eigen::ArrayXXd da_r = dr * c.r.array() * (1.0 - c.r.array());

  const Eigen::MatrixXd m_da_n = da_n.matrix();
  const Eigen::MatrixXd m_d_rec_n = d_rec_n.matrix();
  const Eigen::MatrixXd m_da_z = da_z.matrix();
  const Eigen::MatrixXd m_da_r = da_r.matrix();

  Wn->grad.noalias() += m_da_n * c.x.transpose();
  bn->grad.col(0).noalias() += m_da_n.rowwise().sum();
  Un->grad.noalias() += m_d_rec_n * c.h_prev.transpose();
  bhn->grad.col(0).noalias() += m_d_rec_n.rowwise().sum();

  Wz->grad.noalias() += m_da_z * c.x.transpose();
  bz->grad.col(0).noalias() += m_da_z.rowwise().sum();
  Uz->grad.noalias() += m_da_z * c.h_prev.transpose();

  Wr->grad.noalias() += m_da_r * c.x.transpose();
  br->grad.col(0).noalias() += m_da_r.rowwise().sum();
  Ur->grad.noalias() += m_da_r * c.h_prev.transpose();

  dhp += (Un->value.transpose() * m_d_rec_n).array();
  dhp += (Uz->value.transpose() * m_da_z).array();
  dhp += (Ur->value.transpose() * m_da_r).array();

  if (dx) {
    dx->noalias() = Wn->value.transpose() * m_da_n;
    dx->noalias() += Wz->value.transpose() * m_da_z;
    dx->noalias() += Wr->value.transpose() * m_da_r;
  }
  if (dh_prev) *dh_prev = dhp.matrix();
}

}  // namespace oodgen
