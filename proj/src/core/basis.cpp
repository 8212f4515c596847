#include "core/basis.hpp"

#include <cstdlib>
#include <string>

#include "core/errors.hpp"

namespace spinbus {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

SectorBasis::SectorBasis(int n_sites, int n_up) : n_sites_(n_sites), n_up_(n_up) {
  if (n_sites < 1 || n_sites > kMaxSites) {
    throw ParameterError("n_sites must be in [1, " + std::to_string(kMaxSites) + "], got " +
                         std::to_string(n_sites));
  }
  if (n_up < 0 || n_up > n_sites) {
    throw ParameterError("n_up must be in [0, " + std::to_string(n_sites) + "], got " +
                         std::to_string(n_up));
  }

  const auto dim = binomial(n_sites, n_up);
  states_.reserve(dim);
  if (n_up == 0) {
    states_.push_back(0);
  } else {
    // Gosper's hack walks the fixed-popcount patterns in increasing order.
    BitState s = (BitState{1} << n_up) - 1;
    const BitState limit = BitState{1} << n_sites;
    while (s < limit) {
      states_.push_back(s);
      const BitState c = s & (~s + 1);
      const BitState r = s + c;
      if (r == 0) break;
      s = (((r ^ s) >> 2) / c) | r;
    }
  }

  low_bits_ = n_sites / 2;
  low_mask_ = (BitState{1} << low_bits_) - 1;
  const int high_bits = n_sites - low_bits_;
  high_span_ = std::size_t{1} << high_bits;

  low_rank_.assign(std::size_t{1} << low_bits_, 0);
  for (std::size_t low = 0; low < low_rank_.size(); ++low) {
    std::uint64_t r = 0;
    int k = 0;
    for (int p = 0; p < low_bits_; ++p) {
      if ((low >> p) & 1U) r += binomial(p, ++k);
    }
    low_rank_[low] = static_cast<std::uint32_t>(r);
  }

  high_rank_.assign(static_cast<std::size_t>(low_bits_ + 1) * high_span_, 0);
  for (int pc = 0; pc <= low_bits_; ++pc) {
    for (std::size_t high = 0; high < high_span_; ++high) {
      std::uint64_t r = 0;
      int k = pc;
      for (int q = 0; q < high_bits; ++q) {
        if ((high >> q) & 1U) r += binomial(q + low_bits_, ++k);
      }
      high_rank_[static_cast<std::size_t>(pc) * high_span_ + high] = static_cast<std::uint32_t>(r);
    }
  }
}

std::optional<std::size_t> SectorBasis::find(BitState s) const noexcept {
  if (n_sites_ < 32 && (s >> n_sites_) != 0) return std::nullopt;
  if (__builtin_popcount(s) != n_up_) return std::nullopt;
  return rank(s);
}

SectorBasis build_sector(int n_sites, int n_up) { return SectorBasis(n_sites, n_up); }

namespace {

void check_site(const SectorBasis& basis, int site) {
  if (site < 0 || site >= basis.n_sites()) {
    throw ParameterError("site index " + std::to_string(site) + " out of range [0, " +
                         std::to_string(basis.n_sites()) + ")");
  }
}

void check_state(const SectorBasis& basis, std::size_t state_index) {
  if (state_index >= basis.size()) {
    throw ParameterError("state index " + std::to_string(state_index) + " out of range");
  }
}

}  // namespace

std::vector<MatrixElement> apply_exchange_bond(const SectorBasis& basis, int i, int j,
                                               std::size_t state_index) {
  check_site(basis, i);
  check_site(basis, j);
  if (i == j) throw ParameterError("exchange bond needs two distinct sites");
  check_state(basis, state_index);

  const BitState s = basis.state(state_index);
  const bool bi = (s >> i) & 1U;
  const bool bj = (s >> j) & 1U;
  if (bi == bj) return {{state_index, 0.25}};
  const BitState flipped = s ^ ((BitState{1} << i) | (BitState{1} << j));
  return {{state_index, -0.25}, {basis.rank(flipped), 0.5}};
}

std::vector<PauliElement> apply_sigma(const SectorBasis& from, const SectorBasis& to, int site,
                                      PauliAxis axis, std::size_t state_index) {
  check_site(from, site);
  check_state(from, state_index);
  if (from.n_sites() != to.n_sites()) throw ParameterError("sector bases have different sizes");

  const BitState s = from.state(state_index);
  const bool up = (s >> site) & 1U;
  if (axis == PauliAxis::z) {
    if (to.n_up() != from.n_up()) throw ParameterError("sigma_z preserves the sector");
    return {{state_index, up ? 1.0 : -1.0, false}};
  }

  // sigma_x and sigma_y flip the bit; the raising and lowering parts land in
  // different sectors.
  const int target_up = up ? from.n_up() - 1 : from.n_up() + 1;
  if (to.n_up() != target_up) {
    if (std::abs(to.n_up() - from.n_up()) != 1) {
      throw ParameterError("sigma_x/sigma_y map n_up to n_up +- 1");
    }
    return {};
  }
  const BitState flipped = s ^ (BitState{1} << site);
  const std::size_t target = to.rank(flipped);
  if (axis == PauliAxis::x) return {{target, 1.0, false}};
  // sigma_y |up> = i|down>, sigma_y |down> = -i|up>
  return {{target, up ? 1.0 : -1.0, true}};
}

}  // namespace spinbus
