// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors
//
// Two-site Hubbard model on four qubits. Qubit order is (1up, 2up, 1dn,
// 2dn) with qubit 0 as the most significant bit; same-spin hopping pairs
// are adjacent so the Jordan-Wigner strings between them are empty.

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qpt/gate.hpp"
#include "qpt/gate_library.hpp"

namespace qpt {

using RMatrix = Eigen::MatrixXd;

constexpr std::size_t kSystemQubits = 4;
constexpr std::size_t kSystemDim = 16;

struct HubbardParams {
  double t = 1.0;
  double U = 1.0;
  double W = 1.0;

  // Dimensionless strength used by the perturbation series.
  double lambda() const { return W / 4.0; }
  void validate() const;
};

RMatrix annihilation_operator(QubitId mode);
RMatrix number_operator(QubitId mode);
RMatrix total_number_operator();

RMatrix build_h0(const HubbardParams& params);
// W * (n1up + n1dn)(n2up + n2dn); diagonal.
RMatrix build_v(const HubbardParams& params);
// 4 * n1 * n2, the operator multiplying lambda = W/4.
RMatrix unit_perturbation();
// Z1u Z2u + Z1u Z2d + Z1d Z2u + Z1d Z2d, what the circuits exponentiate.
RMatrix zz_sum();

struct EnergyLevel {
  double energy = 0.0;
  std::vector<BasisIndex> members;
  std::size_t degeneracy() const { return members.size(); }
};

struct SpectrumTable {
  std::vector<EnergyLevel> levels;           // ascending energy
  std::vector<Eigen::VectorXcd> assignment;  // label -> eigenvector
  std::vector<double> label_energy;          // label -> energy

  std::size_t level_of(BasisIndex label) const;
  double energy(BasisIndex label) const { return label_energy.at(label); }
  // Columns are assignment vectors.
  CMatrix basis_matrix() const;
};

constexpr double kDegeneracyTol = 1e-9;

// Labels each basis state by the column of `disentangler` it maps to.
// Throws when a column is not an H0 eigenvector, or when the energies do
// not match an independent diagonalization.
SpectrumTable make_spectrum_table(const HubbardParams& params, const CMatrix& disentangler);
// Uses the circuit disentangler for these parameters.
SpectrumTable make_spectrum_table(const HubbardParams& params);

// Scales a vector so its largest-magnitude entry is real and positive.
Eigen::VectorXcd phase_fixed(const Eigen::VectorXcd& v);

struct PTReference {
  BasisIndex k = 0;
  double E0 = 0.0;
  double E1 = 0.0;
  std::vector<Complex> psi1;  // coefficient of each label's eigenvector
  double E2 = 0.0;
};

// Rayleigh-Schroedinger corrections for label k with perturbation v.
PTReference pt_corrections(const SpectrumTable& spectrum, const RMatrix& v, BasisIndex k);

// <psi_k | V^dagger | psi1>, the alternative route to E2.
double second_order_from_state(const SpectrumTable& spectrum, const RMatrix& v, const PTReference& ref);

// <psi_k | 4 n1 n2 - zz_sum | psi_k>: constant dropped by the circuits.
double circuit_energy_offset(const SpectrumTable& spectrum, BasisIndex k);

struct SweepPoint {
  double lambda = 0.0;
  double ground_energy = 0.0;
};

// Ground energy of H0 + lambda * 4 n1 n2 for each grid point.
std::vector<SweepPoint> exact_eigen_sweep(const HubbardParams& params, const std::vector<double>& lambda_grid);

struct SeriesFit {
  double first = 0.0;
  double second = 0.0;
};

// Least-squares fit of E(l) - e0 = a l + b l^2 + c l^3.
SeriesFit fit_energy_series(const std::vector<SweepPoint>& points, double e0);

}  // namespace qpt
