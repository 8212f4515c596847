#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace spinbus {

/// Bit pattern of N spin-1/2 sites. Bit i set means site i is up (s_z = +1/2).
using BitState = std::uint32_t;

inline constexpr int kMaxSites = 24;

/// One target of an operator acting on a basis state.
struct MatrixElement {
  std::size_t target;
  double amplitude;
};

enum class PauliAxis { x, y, z };

/// Pauli matrix element with an optional factor of i. sigma_y produces
/// imaginary amplitudes; they are carried as a real value plus this flag.
struct PauliElement {
  std::size_t target;
  double amplitude;
  bool imaginary;
};

/// All N-bit patterns with exactly n_up set bits, in increasing order.
///
/// Index lookup uses the colexicographic rank sum_k C(p_k, k) over the set
/// bit positions p_1 < p_2 < ..., which coincides with the position in the
/// sorted pattern list. The sum is split at the middle bit so that a lookup
/// is two table reads.
class SectorBasis {
 public:
  SectorBasis(int n_sites, int n_up);

  int n_sites() const noexcept { return n_sites_; }
  int n_up() const noexcept { return n_up_; }
  /// Twice the total S_z, i.e. 2*n_up - N (an integer).
  int twice_sz() const noexcept { return 2 * n_up_ - n_sites_; }
  double sz() const noexcept { return 0.5 * twice_sz(); }

  std::size_t size() const noexcept { return states_.size(); }
  BitState state(std::size_t index) const { return states_[index]; }
  std::span<const BitState> states() const noexcept { return states_; }

  /// Index of a pattern that is known to belong to this sector.
  std::size_t rank(BitState s) const noexcept {
    const BitState low = s & low_mask_;
    const BitState high = s >> low_bits_;
    const int pc = __builtin_popcount(low);
    return static_cast<std::size_t>(low_rank_[low]) +
           static_cast<std::size_t>(high_rank_[static_cast<std::size_t>(pc) * high_span_ + high]);
  }

  /// Index of an arbitrary pattern, or nullopt if it is not in the sector.
  std::optional<std::size_t> find(BitState s) const noexcept;

 private:
  int n_sites_;
  int n_up_;
  int low_bits_;
  BitState low_mask_;
  std::size_t high_span_;
  std::vector<BitState> states_;
  std::vector<std::uint32_t> low_rank_;
  std::vector<std::uint32_t> high_rank_;
};

/// Checked factory; rejects n_sites outside [1, 24] and n_up outside [0, N].
SectorBasis build_sector(int n_sites, int n_up);

std::uint64_t binomial(int n, int k);

/// Matrix elements of s_i . s_j on basis state `state_index`.
std::vector<MatrixElement> apply_exchange_bond(const SectorBasis& basis, int i, int j,
                                               std::size_t state_index);

/// Matrix elements of the Pauli operator sigma_axis at `site` acting on a
/// state of `from`. sigma_z stays in the sector; sigma_x and sigma_y map
/// n_up to n_up +- 1 and only the component landing in `to` is returned.
std::vector<PauliElement> apply_sigma(const SectorBasis& from, const SectorBasis& to, int site,
                                      PauliAxis axis, std::size_t state_index);

/// Pauli z eigenvalue (+1 up, -1 down) of `site` in pattern `s`.
inline double pauli_z(BitState s, int site) noexcept {
  return ((s >> site) & 1U) ? 1.0 : -1.0;
}

/// Spin-1/2 z eigenvalue (+-1/2). The Hamiltonian is written in spin
/// operators while moments and couplings use Pauli operators; this is the
/// only place the factor of two between them appears.
inline double spin_z(BitState s, int site) noexcept { return 0.5 * pauli_z(s, site); }

}  // namespace spinbus
