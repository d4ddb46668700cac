#pragma once

#include "dicke/model.hpp"

namespace dicke {

/// Index map of the fluctuation vector v = (a, a+, b_0..b_n, b_0+..b_n+).
struct Layout {
  int modes = 3;  ///< atomic modes, n_max + 1

  explicit Layout(int atomic_modes) : modes(atomic_modes) {}

  int size() const { return 2 + 2 * modes; }
  static constexpr int a() { return 0; }
  static constexpr int ad() { return 1; }
  int b(int j) const { return 2 + j; }
  int bd(int j) const { return 2 + modes + j; }
};

/// Steady-state second moments <v_mu v_nu> of the fluctuation operators.
struct CorrelationTable {
  ComplexMatrix moments;

  CorrelationTable() = default;
  explicit CorrelationTable(int atomic_modes)
      : moments(ComplexMatrix::Zero(Layout(atomic_modes).size(), Layout(atomic_modes).size())) {}
  explicit CorrelationTable(ComplexMatrix m) : moments(std::move(m)) {}

  Layout layout() const { return Layout((static_cast<int>(moments.rows()) - 2) / 2); }
  int modes() const { return layout().modes; }

  Complex operator()(int mu, int nu) const { return moments(mu, nu); }

  /// <a+ a>
  Complex photon_number() const { return moments(Layout::ad(), Layout::a()); }
  /// <a a>
  Complex photon_anomalous() const { return moments(Layout::a(), Layout::a()); }

  /// <a+ b_j> as a vector over j.
  ComplexVector ad_b() const { return row_block(Layout::ad(), 2); }
  /// <a b_j>
  ComplexVector a_b() const { return row_block(Layout::a(), 2); }
  /// <b_j+ a>
  ComplexVector bd_a() const { return moments.col(Layout::a()).segment(2 + modes(), modes()); }
  /// <b_j a>
  ComplexVector b_a() const { return moments.col(Layout::a()).segment(2, modes()); }
  /// <b_j+ b_k>
  ComplexMatrix bd_b() const { return moments.block(2 + modes(), 2, modes(), modes()); }

  /// Total depletion sum_j Re <b_j+ b_j>.
  double depletion() const { return bd_b().diagonal().real().sum(); }

private:
  ComplexVector row_block(int row, int start) const {
    return moments.row(row).segment(start, modes()).transpose();
  }
};

}  // namespace dicke
