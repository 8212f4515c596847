#include "core/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <utility>

#include <json.hpp>

#include "core/errors.hpp"

namespace spinbus {

SpinSystemSpec::SpinSystemSpec(int n_sites, std::vector<Bond> bonds, std::vector<double> fields,
                               std::string label)
    : n_sites_(n_sites), bonds_(std::move(bonds)), fields_(std::move(fields)), label_(std::move(label)) {
  if (n_sites < 1 || n_sites > kMaxSites) {
    throw ParameterError("n_sites must be in [1, " + std::to_string(kMaxSites) + "]");
  }
  if (fields_.size() != static_cast<std::size_t>(n_sites)) {
    throw ParameterError("expected " + std::to_string(n_sites) + " fields, got " +
                         std::to_string(fields_.size()));
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& b : bonds_) {
    if (b.i < 0 || b.i >= n_sites || b.j < 0 || b.j >= n_sites) {
      throw ParameterError("bond (" + std::to_string(b.i) + "," + std::to_string(b.j) +
                           ") references a site outside the system");
    }
    if (b.i == b.j) throw ParameterError("bond endpoints must differ");
    if (!std::isfinite(b.coupling)) throw ParameterError("bond coupling must be finite");
    if (!seen.emplace(std::min(b.i, b.j), std::max(b.i, b.j)).second) {
      throw ParameterError("duplicate bond (" + std::to_string(b.i) + "," + std::to_string(b.j) + ")");
    }
  }
  for (double f : fields_) {
    if (!std::isfinite(f)) throw ParameterError("fields must be finite");
  }
}

bool SpinSystemSpec::has_zero_field() const noexcept {
  return std::all_of(fields_.begin(), fields_.end(), [](double f) { return f == 0.0; });
}

namespace {

SpinSystemSpec make_linear(int n_sites, std::span<const double> couplings,
                           std::span<const double> fields, bool periodic) {
  if (n_sites < 2) throw ParameterError("a chain needs at least two sites");
  const std::size_t n_bonds = periodic ? static_cast<std::size_t>(n_sites)
                                       : static_cast<std::size_t>(n_sites - 1);
  if (couplings.size() != n_bonds) {
    throw ParameterError("expected " + std::to_string(n_bonds) + " couplings, got " +
                         std::to_string(couplings.size()));
  }
  std::vector<Bond> bonds;
  bonds.reserve(n_bonds);
  for (std::size_t k = 0; k < n_bonds; ++k) {
    const int i = static_cast<int>(k);
    bonds.push_back({i, (i + 1) % n_sites, couplings[k]});
  }
  return SpinSystemSpec(n_sites, std::move(bonds), std::vector<double>(fields.begin(), fields.end()));
}

}  // namespace

SpinSystemSpec make_chain(int n_sites, std::span<const double> couplings,
                          std::span<const double> fields) {
  return make_linear(n_sites, couplings, fields, false);
}

SpinSystemSpec make_ring(int n_sites, std::span<const double> couplings,
                         std::span<const double> fields) {
  return make_linear(n_sites, couplings, fields, true);
}

SpinSystemSpec uniform_chain(int n_sites, double field) {
  const std::vector<double> j(static_cast<std::size_t>(std::max(n_sites - 1, 0)), 1.0);
  const std::vector<double> b(static_cast<std::size_t>(std::max(n_sites, 0)), field);
  return make_chain(n_sites, j, b);
}

SpinSystemSpec uniform_ring(int n_sites, double field) {
  const std::vector<double> j(static_cast<std::size_t>(std::max(n_sites, 0)), 1.0);
  const std::vector<double> b(static_cast<std::size_t>(std::max(n_sites, 0)), field);
  return make_ring(n_sites, j, b);
}

double perturbation_ratio(int n_bus, double coupling) {
  return static_cast<double>(n_bus) * coupling / (std::numbers::pi * std::numbers::pi);
}

SpinSystemSpec attach_qubits(const SpinSystemSpec& bus, std::span<const QubitAttachment> attachments,
                             std::vector<std::string>* warnings, double qubit_field) {
  if (attachments.size() > 2) throw ParameterError("at most two qubits can be attached");
  if (attachments.size() == 2 && attachments[0].bus_site == attachments[1].bus_site) {
    throw ParameterError("qubits must attach to distinct bus sites");
  }
  if (attachments.size() == 2 && attachments[0].qubit == attachments[1].qubit) {
    throw ParameterError("qubit labels must differ");
  }
  auto bonds = bus.bonds();
  auto fields = bus.fields();
  int next = bus.n_sites();
  for (const auto& a : attachments) {
    if (a.qubit != 'A' && a.qubit != 'B') throw ParameterError("qubit label must be A or B");
    if (a.bus_site < 0 || a.bus_site >= bus.n_sites()) {
      throw ParameterError("qubit " + std::string(1, a.qubit) + " attached to nonexistent bus site " +
                           std::to_string(a.bus_site));
    }
    if (!(a.coupling > 0.0)) throw ParameterError("qubit-bus coupling must be positive");
    const double ratio = perturbation_ratio(bus.n_sites(), a.coupling);
    if (warnings && ratio > kPerturbativeRatioLimit) {
      warnings->push_back("qubit " + std::string(1, a.qubit) + ": N J/(pi^2 J0) = " +
                          std::to_string(ratio) + " is not small; perturbative couplings unreliable");
    }
    bonds.push_back({next, a.bus_site, a.coupling});
    fields.push_back(qubit_field);
    ++next;
  }
  return SpinSystemSpec(next, std::move(bonds), std::move(fields), bus.label());
}

SectorOperator::SectorOperator(const SpinSystemSpec& spec, const SectorBasis& basis)
    : basis_(&basis), diagonal_(basis.size(), 0.0) {
  if (spec.n_sites() != basis.n_sites()) throw ParameterError("spec and basis sizes differ");
  for (const auto& b : spec.bonds()) {
    flips_.push_back({(BitState{1} << b.i) | (BitState{1} << b.j), 0.5 * b.coupling});
  }
  const auto& fields = spec.fields();
  for (std::size_t r = 0; r < basis.size(); ++r) {
    const BitState s = basis.state(r);
    double d = 0.0;
    for (const auto& b : spec.bonds()) {
      d += b.coupling * spin_z(s, b.i) * spin_z(s, b.j);
    }
    for (int i = 0; i < spec.n_sites(); ++i) d -= fields[static_cast<std::size_t>(i)] * spin_z(s, i);
    diagonal_[r] = d;
  }
}

void SectorOperator::apply(std::span<const double> x, std::span<double> y) const {
  const std::size_t dim = basis_->size();
  if (x.size() != dim || y.size() != dim) throw ParameterError("vector length does not match sector");
  const auto states = basis_->states();
  for (std::size_t r = 0; r < dim; ++r) {
    const BitState s = states[r];
    double acc = diagonal_[r] * x[r];
    for (const auto& f : flips_) {
      const BitState m = s & f.mask;
      if (m != 0 && m != f.mask) acc += f.half_coupling * x[basis_->rank(s ^ f.mask)];
    }
    y[r] = acc;
  }
}

Eigen::MatrixXd build_sector_matrix(const SpinSystemSpec& spec, const SectorBasis& basis,
                                    std::size_t dense_cap) {
  if (basis.size() > dense_cap) {
    throw ResourceError("sector dimension " + std::to_string(basis.size()) +
                        " exceeds the dense cap " + std::to_string(dense_cap) +
                        "; use the matrix-free solver");
  }
  const SectorOperator op(spec, basis);
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const BitState s = basis.state(static_cast<std::size_t>(r));
    h(r, r) = op.diagonal()[static_cast<std::size_t>(r)];
    for (const auto& b : spec.bonds()) {
      if (((s >> b.i) & 1U) != ((s >> b.j) & 1U)) {
        const BitState t = s ^ ((BitState{1} << b.i) | (BitState{1} << b.j));
        h(static_cast<Eigen::Index>(basis.rank(t)), r) += 0.5 * b.coupling;
      }
    }
  }
  return h;
}

Eigen::MatrixXd build_sector_matrix(const SpinSystemSpec& spec, int n_up, std::size_t dense_cap) {
  const SectorBasis basis(spec.n_sites(), n_up);
  return build_sector_matrix(spec, basis, dense_cap);
}

void apply_hamiltonian(const SpinSystemSpec& spec, const SectorBasis& basis,
                       std::span<const double> x, std::span<double> y) {
  SectorOperator(spec, basis).apply(x, y);
}

Eigen::VectorXd apply_hamiltonian(const SpinSystemSpec& spec, int n_up, const Eigen::VectorXd& x) {
  const SectorBasis basis(spec.n_sites(), n_up);
  if (static_cast<std::size_t>(x.size()) != basis.size()) {
    throw ParameterError("vector length does not match sector dimension");
  }
  Eigen::VectorXd y(x.size());
  apply_hamiltonian(spec, basis, std::span<const double>(x.data(), basis.size()),
                    std::span<double>(y.data(), basis.size()));
  return y;
}

double exchange_energy(const SpinSystemSpec& spec, const SectorBasis& basis,
                       std::span<const double> v) {
  if (v.size() != basis.size()) throw ParameterError("vector length does not match sector");
  double e = 0.0;
  for (std::size_t r = 0; r < basis.size(); ++r) {
    const BitState s = basis.state(r);
    double acc = 0.0;
    for (const auto& b : spec.bonds()) {
      acc += b.coupling * spin_z(s, b.i) * spin_z(s, b.j) * v[r];
      if (((s >> b.i) & 1U) != ((s >> b.j) & 1U)) {
        const BitState t = s ^ ((BitState{1} << b.i) | (BitState{1} << b.j));
        acc += 0.5 * b.coupling * v[basis.rank(t)];
      }
    }
    e += v[r] * acc;
  }
  return e;
}

double zeeman_energy(const SpinSystemSpec& spec, const SectorBasis& basis, std::span<const double> v) {
  if (v.size() != basis.size()) throw ParameterError("vector length does not match sector");
  double e = 0.0;
  for (std::size_t r = 0; r < basis.size(); ++r) {
    const BitState s = basis.state(r);
    double d = 0.0;
    for (int i = 0; i < spec.n_sites(); ++i) d -= spec.fields()[static_cast<std::size_t>(i)] * spin_z(s, i);
    e += v[r] * v[r] * d;
  }
  return e;
}

std::string spec_to_json(const SpinSystemSpec& spec) {
  nlohmann::ordered_json j;
  j["n_sites"] = spec.n_sites();
  auto bonds = nlohmann::ordered_json::array();
  for (const auto& b : spec.bonds()) bonds.push_back({b.i, b.j, b.coupling});
  j["bonds"] = std::move(bonds);
  j["fields"] = spec.fields();
  j["label"] = spec.label();
  return j.dump();
}

SpinSystemSpec spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("spec JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParameterError("spec JSON must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "n_sites" && key != "bonds" && key != "fields" && key != "label") {
      throw ParameterError("spec JSON: unknown key '" + key + "'");
    }
  }
  try {
    const int n = j.at("n_sites").get<int>();
    std::vector<Bond> bonds;
    for (const auto& b : j.at("bonds")) {
      if (!b.is_array() || b.size() != 3) throw ParameterError("spec JSON: bonds are [i, j, J] triples");
      bonds.push_back({b[0].get<int>(), b[1].get<int>(), b[2].get<double>()});
    }
    auto fields = j.at("fields").get<std::vector<double>>();
    std::string label = j.value("label", std::string{});
    return SpinSystemSpec(n, std::move(bonds), std::move(fields), std::move(label));
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("spec JSON: ") + e.what());
  }
}

}  // namespace spinbus
