#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fermelim {

using cplx = std::complex<double>;
using index_t = std::int64_t;

enum class FactorKind { FermionMode, LinkQudit, Qubit };
enum class FactorRole { Matter, AuxChi, AuxF, GaugeLink, Z2Aux };

struct Factor {
  std::string label;
  FactorKind kind = FactorKind::Qubit;
  FactorRole role = FactorRole::GaugeLink;
  int dim = 2;
  bool fermionic = false;
};

inline Factor matter_factor(std::string label) {
  return Factor{std::move(label), FactorKind::FermionMode, FactorRole::Matter, 2, true};
}
inline Factor chi_factor(std::string label) {
  return Factor{std::move(label), FactorKind::FermionMode, FactorRole::AuxChi, 2, true};
}
inline Factor auxf_factor(std::string label) {
  return Factor{std::move(label), FactorKind::FermionMode, FactorRole::AuxF, 2, true};
}
inline Factor link_factor(std::string label, int dim) {
  return Factor{std::move(label), FactorKind::LinkQudit, FactorRole::GaugeLink, dim, false};
}
inline Factor z2aux_factor(std::string label) {
  return Factor{std::move(label), FactorKind::Qubit, FactorRole::Z2Aux, 2, false};
}

// Tensor-product index space. Factor 0 is the least significant digit:
// stride(0) = 1 and index = sum_k digit_k * stride(k).
class SpaceLayout {
 public:
  SpaceLayout() = default;

  int add_factor(const Factor& f) {
    factors_.push_back(f);
    rebuild();
    return static_cast<int>(factors_.size()) - 1;
  }

  void erase_factor(int pos) {
    factors_.erase(factors_.begin() + pos);
    rebuild();
  }

  void insert_factor(int pos, const Factor& f) {
    factors_.insert(factors_.begin() + pos, f);
    rebuild();
  }

  int num_factors() const { return static_cast<int>(factors_.size()); }
  const Factor& factor(int k) const { return factors_[k]; }
  index_t total_dim() const { return total_dim_; }
  index_t stride(int k) const { return strides_[k]; }

  int find(const std::string& label) const {
    for (int k = 0; k < num_factors(); ++k)
      if (factors_[k].label == label) return k;
    return -1;
  }

  int at(const std::string& label) const {
    int k = find(label);
    if (k < 0) throw std::out_of_range("no factor labeled " + label);
    return k;
  }

  int digit(index_t idx, int k) const {
    return static_cast<int>((idx / strides_[k]) % factors_[k].dim);
  }

  index_t with_digit(index_t idx, int k, int val) const {
    return idx + (static_cast<index_t>(val) - digit(idx, k)) * strides_[k];
  }

  // index in the layout obtained by erase_factor(pos), given this factor's digit is fixed
  index_t erase_digit(index_t idx, int pos) const {
    index_t lo = idx % strides_[pos];
    index_t hi = idx / (strides_[pos] * factors_[pos].dim);
    return lo + hi * strides_[pos];
  }

  std::vector<int> fermionic_positions() const {
    std::vector<int> out;
    for (int k = 0; k < num_factors(); ++k)
      if (factors_[k].fermionic) out.push_back(k);
    return out;
  }

 private:
  void rebuild() {
    strides_.resize(factors_.size());
    index_t s = 1;
    for (std::size_t k = 0; k < factors_.size(); ++k) {
      strides_[k] = s;
      s *= factors_[k].dim;
    }
    total_dim_ = s;
  }

  std::vector<Factor> factors_;
  std::vector<index_t> strides_;
  index_t total_dim_ = 1;
};

}
