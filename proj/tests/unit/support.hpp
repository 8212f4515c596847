#pragma once

#include <complex>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "core/model.hpp"

namespace spinbus::test {

// Reference values produced by tests/oracle/kron_oracle.py.
inline const nlohmann::json& oracle() {
  static const nlohmann::json data = [] {
    std::ifstream in(SPINBUS_ORACLE_FILE);
    return nlohmann::json::parse(in);
  }();
  return data;
}

inline std::vector<double> oracle_vector(const std::string& key) {
  return oracle().at(key).get<std::vector<double>>();
}

// Full 2^N Hamiltonian in the bit-pattern basis, built from 2x2 spin
// matrices by Kronecker products. Independent of the sector code.
inline Eigen::MatrixXd kron_hamiltonian(const SpinSystemSpec& spec) {
  const int n = spec.n_sites();
  using C = std::complex<double>;
  using M = Eigen::MatrixXcd;
  M sx(2, 2), sy(2, 2), sz(2, 2);
  // Index 0 is down, 1 is up (bit set).
  sx << 0, 0.5, 0.5, 0;
  sy << 0, C(0, 0.5), C(0, -0.5), 0;
  sz << -0.5, 0, 0, 0.5;
  auto site_op = [n](const M& o, int site) {
    M m = M::Identity(1, 1);
    for (int k = n - 1; k >= 0; --k) {
      const M f = k == site ? o : M::Identity(2, 2);
      M next(m.rows() * 2, m.cols() * 2);
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = m(r, c) * f;
      m = next;
    }
    return m;
  };
  const Eigen::Index dim = Eigen::Index{1} << n;
  M h = M::Zero(dim, dim);
  for (const auto& b : spec.bonds()) {
    h += b.coupling * (site_op(sx, b.i) * site_op(sx, b.j) + site_op(sy, b.i) * site_op(sy, b.j) +
                       site_op(sz, b.i) * site_op(sz, b.j));
  }
  for (int i = 0; i < n; ++i) h -= spec.fields()[static_cast<std::size_t>(i)] * site_op(sz, i);
  return h.real();
}

}  // namespace spinbus::test
