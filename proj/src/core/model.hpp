#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/basis.hpp"

namespace spinbus {

/// Dense sector matrices above this dimension are refused.
inline constexpr std::size_t kDenseDimensionCap = 20000;

struct Bond {
  int i;
  int j;
  double coupling;  // units of J0

  bool operator==(const Bond&) const = default;
};

/// H = sum_bonds J_ij s_i.s_j - sum_i b_i s_iz, with b_i = g mu_B B_i / J0.
class SpinSystemSpec {
 public:
  SpinSystemSpec(int n_sites, std::vector<Bond> bonds, std::vector<double> fields,
                 std::string label = {});

  int n_sites() const noexcept { return n_sites_; }
  const std::vector<Bond>& bonds() const noexcept { return bonds_; }
  const std::vector<double>& fields() const noexcept { return fields_; }
  const std::string& label() const noexcept { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  bool has_zero_field() const noexcept;

  bool operator==(const SpinSystemSpec&) const = default;

 private:
  int n_sites_;
  std::vector<Bond> bonds_;
  std::vector<double> fields_;
  std::string label_;
};

SpinSystemSpec make_chain(int n_sites, std::span<const double> couplings,
                          std::span<const double> fields);
SpinSystemSpec make_ring(int n_sites, std::span<const double> couplings,
                         std::span<const double> fields);

/// Uniform open chain (J = 1) in a uniform field b.
SpinSystemSpec uniform_chain(int n_sites, double field = 0.0);
SpinSystemSpec uniform_ring(int n_sites, double field = 0.0);

struct QubitAttachment {
  char qubit;     // 'A' or 'B'
  int bus_site;   // 0-based
  double coupling;
};

/// N J_alpha / (pi^2 J0), the ratio of the qubit-bus coupling to the bus gap.
double perturbation_ratio(int n_bus, double coupling);

/// Ratios above this are reported as outside the perturbative regime.
inline constexpr double kPerturbativeRatioLimit = 0.1;

/// Appends one site per attachment after the bus sites and bonds it to its
/// bus site. Qubit sites carry `qubit_field` (zero by default).
SpinSystemSpec attach_qubits(const SpinSystemSpec& bus, std::span<const QubitAttachment> attachments,
                             std::vector<std::string>* warnings = nullptr,
                             double qubit_field = 0.0);

/// Sector Hamiltonian in a form suited to repeated products: the diagonal is
/// precomputed and off-diagonal bond flips are generated on the fly.
class SectorOperator {
 public:
  SectorOperator(const SpinSystemSpec& spec, const SectorBasis& basis);

  std::size_t dimension() const noexcept { return basis_->size(); }
  void apply(std::span<const double> x, std::span<double> y) const;
  const std::vector<double>& diagonal() const noexcept { return diagonal_; }

 private:
  struct FlipTerm {
    BitState mask;
    double half_coupling;
  };
  const SectorBasis* basis_;
  std::vector<double> diagonal_;
  std::vector<FlipTerm> flips_;
};

Eigen::MatrixXd build_sector_matrix(const SpinSystemSpec& spec, const SectorBasis& basis,
                                    std::size_t dense_cap = kDenseDimensionCap);
Eigen::MatrixXd build_sector_matrix(const SpinSystemSpec& spec, int n_up,
                                    std::size_t dense_cap = kDenseDimensionCap);

/// y = H x without forming H.
void apply_hamiltonian(const SpinSystemSpec& spec, const SectorBasis& basis,
                       std::span<const double> x, std::span<double> y);
Eigen::VectorXd apply_hamiltonian(const SpinSystemSpec& spec, int n_up, const Eigen::VectorXd& x);

/// <v|H_J|v> and <v|H_Z|v> for a real vector in `basis`.
double exchange_energy(const SpinSystemSpec& spec, const SectorBasis& basis,
                       std::span<const double> v);
double zeeman_energy(const SpinSystemSpec& spec, const SectorBasis& basis, std::span<const double> v);

std::string spec_to_json(const SpinSystemSpec& spec);
SpinSystemSpec spec_from_json(const std::string& text);

}  // namespace spinbus
