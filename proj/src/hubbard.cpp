// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors

#include "qpt/hubbard.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "qpt/error.hpp"
#include "qpt/pt_circuits.hpp"

namespace qpt {

namespace {

int bit(std::size_t index, QubitId q) { return static_cast<int>((index >> (kSystemQubits - 1 - q)) & 1u); }

constexpr double kResidualTol = 1e-8;

}  // namespace

void HubbardParams::validate() const {
  if (!(t > 0.0)) throw Error(ErrorCode::kInvalidArgument, "hopping t must be positive");
  if (!std::isfinite(U) || !std::isfinite(W)) throw Error(ErrorCode::kInvalidArgument, "U and W must be finite");
}

RMatrix annihilation_operator(QubitId mode) {
  if (mode >= kSystemQubits) throw Error(ErrorCode::kInvalidQubit, "mode out of range");
  RMatrix a = RMatrix::Zero(kSystemDim, kSystemDim);
  for (std::size_t i = 0; i < kSystemDim; ++i) {
    if (!bit(i, mode)) continue;
    int parity = 0;
    for (QubitId p = 0; p < mode; ++p) parity += bit(i, p);
    const std::size_t j = i ^ (std::size_t{1} << (kSystemQubits - 1 - mode));
    a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = (parity % 2) ? -1.0 : 1.0;
  }
  return a;
}

RMatrix number_operator(QubitId mode) {
  const RMatrix a = annihilation_operator(mode);
  return a.transpose() * a;
}

RMatrix total_number_operator() {
  RMatrix n = RMatrix::Zero(kSystemDim, kSystemDim);
  for (QubitId q = 0; q < kSystemQubits; ++q) n += number_operator(q);
  return n;
}

RMatrix build_h0(const HubbardParams& params) {
  params.validate();
  RMatrix c[kSystemQubits], n[kSystemQubits];
  for (QubitId q = 0; q < kSystemQubits; ++q) {
    c[q] = annihilation_operator(q);
    n[q] = c[q].transpose() * c[q];
  }
  // Modes: 0 = 1up, 1 = 2up, 2 = 1dn, 3 = 2dn.
  RMatrix hop = c[0].transpose() * c[1] + c[1].transpose() * c[0] + c[2].transpose() * c[3] +
                c[3].transpose() * c[2];
  return -params.t * hop + params.U * (n[0] * n[2] + n[1] * n[3]);
}

RMatrix build_v(const HubbardParams& params) {
  const RMatrix site1 = number_operator(0) + number_operator(2);
  const RMatrix site2 = number_operator(1) + number_operator(3);
  return params.W * site1 * site2;
}

RMatrix unit_perturbation() { return build_v(HubbardParams{1.0, 0.0, 4.0}); }

RMatrix zz_sum() {
  RMatrix z[kSystemQubits];
  const RMatrix id = RMatrix::Identity(kSystemDim, kSystemDim);
  for (QubitId q = 0; q < kSystemQubits; ++q) z[q] = id - 2.0 * number_operator(q);
  return z[0] * z[1] + z[0] * z[3] + z[2] * z[1] + z[2] * z[3];
}

std::size_t SpectrumTable::level_of(BasisIndex label) const {
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& m = levels[l].members;
    if (std::find(m.begin(), m.end(), label) != m.end()) return l;
  }
  throw Error(ErrorCode::kInvalidArgument, "label " + std::to_string(label) + " not in spectrum table");
}

CMatrix SpectrumTable::basis_matrix() const {
  CMatrix m(kSystemDim, kSystemDim);
  for (std::size_t n = 0; n < assignment.size(); ++n) m.col(static_cast<Eigen::Index>(n)) = assignment[n];
  return m;
}

Eigen::VectorXcd phase_fixed(const Eigen::VectorXcd& v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  const Complex z = v(arg);
  if (std::abs(z) == 0.0) return v;
  return v * (std::abs(z) / z);
}

SpectrumTable make_spectrum_table(const HubbardParams& params, const CMatrix& disentangler) {
  if (disentangler.rows() != static_cast<Eigen::Index>(kSystemDim) || disentangler.cols() != disentangler.rows()) {
    throw Error(ErrorCode::kInvalidArgument, "disentangler must be 16x16");
  }
  const CMatrix h0 = build_h0(params).cast<Complex>();
  SpectrumTable table;
  for (std::size_t n = 0; n < kSystemDim; ++n) {
    const Eigen::VectorXcd v = disentangler.col(static_cast<Eigen::Index>(n));
    const double e = v.dot(h0 * v).real();
    const double residual = (h0 * v - e * v).norm();
    if (residual > kResidualTol) {
      throw Error(ErrorCode::kInvalidArgument,
                  "column " + std::to_string(n) + " is not an eigenvector (residual " + std::to_string(residual) + ")");
    }
    table.assignment.push_back(v);
    table.label_energy.push_back(e);
  }

  // Independent check: the multiset of label energies must be the spectrum.
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(build_h0(params));
  std::vector<double> sorted = table.label_energy;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < kSystemDim; ++i) {
    if (std::abs(sorted[i] - solver.eigenvalues()(static_cast<Eigen::Index>(i))) > kResidualTol) {
      throw Error(ErrorCode::kInvalidArgument, "label energies disagree with direct diagonalization");
    }
  }

  std::vector<BasisIndex> order(kSystemDim);
  for (std::size_t i = 0; i < kSystemDim; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](BasisIndex a, BasisIndex b) { return table.label_energy[a] < table.label_energy[b]; });
  for (BasisIndex label : order) {
    const double e = table.label_energy[label];
    if (!table.levels.empty()) {
      const double gap = std::abs(e - table.levels.back().energy);
      if (gap < kDegeneracyTol) {
        table.levels.back().members.push_back(label);
        continue;
      }
      if (gap < 1e-6) {
        throw Error(ErrorCode::kDegenerateSplit, "levels closer than 1e-6 but further than 1e-9 apart");
      }
    }
    table.levels.push_back({e, {label}});
  }
  for (auto& level : table.levels) {
    double mean = 0.0;
    for (BasisIndex m : level.members) mean += table.label_energy[m];
    level.energy = mean / static_cast<double>(level.members.size());
    std::sort(level.members.begin(), level.members.end());
  }
  return table;
}

SpectrumTable make_spectrum_table(const HubbardParams& params) {
  return make_spectrum_table(params, unitary_of(build_u_dis(params)));
}

PTReference pt_corrections(const SpectrumTable& spectrum, const RMatrix& v, BasisIndex k) {
  if (k >= kSystemDim) throw Error(ErrorCode::kInvalidArgument, "target label out of range");
  const std::size_t level = spectrum.level_of(k);
  if (spectrum.levels[level].degeneracy() > 1) {
    throw Error(ErrorCode::kDegenerateTarget, "label " + std::to_string(k) + " sits in a level of degeneracy " +
                                                  std::to_string(spectrum.levels[level].degeneracy()));
  }
  const CMatrix a = spectrum.basis_matrix();
  const CMatrix vt = a.adjoint() * v.cast<Complex>() * a;
  const auto ki = static_cast<Eigen::Index>(k);

  PTReference ref;
  ref.k = k;
  ref.E0 = spectrum.energy(k);
  ref.E1 = vt(ki, ki).real();
  ref.psi1.assign(kSystemDim, Complex(0.0, 0.0));
  for (std::size_t m = 0; m < kSystemDim; ++m) {
    const double gap = ref.E0 - spectrum.energy(m);
    if (std::abs(gap) < kDegeneracyTol) continue;
    const Complex vmk = vt(static_cast<Eigen::Index>(m), ki);
    ref.psi1[m] = vmk / gap;
    ref.E2 += std::norm(vmk) / gap;
  }
  return ref;
}

double second_order_from_state(const SpectrumTable& spectrum, const RMatrix& v, const PTReference& ref) {
  Eigen::VectorXcd psi1 = Eigen::VectorXcd::Zero(kSystemDim);
  for (std::size_t m = 0; m < kSystemDim; ++m) psi1 += ref.psi1[m] * spectrum.assignment[m];
  const Eigen::VectorXcd& psi0 = spectrum.assignment[ref.k];
  return psi0.dot(v.cast<Complex>().adjoint() * psi1).real();
}

double circuit_energy_offset(const SpectrumTable& spectrum, BasisIndex k) {
  const CMatrix diff = (unit_perturbation() - zz_sum()).cast<Complex>();
  const Eigen::VectorXcd& psi = spectrum.assignment.at(k);
  return psi.dot(diff * psi).real();
}

std::vector<SweepPoint> exact_eigen_sweep(const HubbardParams& params, const std::vector<double>& lambda_grid) {
  if (lambda_grid.empty()) throw Error(ErrorCode::kInvalidArgument, "lambda grid is empty");
  const RMatrix h0 = build_h0(params);
  const RMatrix v = unit_perturbation();
  std::vector<SweepPoint> out;
  out.reserve(lambda_grid.size());
  for (double lam : lambda_grid) {
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(h0 + lam * v, Eigen::EigenvaluesOnly);
    out.push_back({lam, solver.eigenvalues()(0)});
  }
  return out;
}

SeriesFit fit_energy_series(const std::vector<SweepPoint>& points, double e0) {
  if (points.size() < 3) throw Error(ErrorCode::kRankDeficient, "series fit needs at least three points");
  Eigen::MatrixXd a(points.size(), 3);
  Eigen::VectorXd y(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double l = points[i].lambda;
    a.row(static_cast<Eigen::Index>(i)) << l, l * l, l * l * l;
    y(static_cast<Eigen::Index>(i)) = points[i].ground_energy - e0;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 3) throw Error(ErrorCode::kRankDeficient, "degenerate lambda grid");
  const Eigen::VectorXd coef = qr.solve(y);
  return {coef(0), coef(1)};
}

}  // namespace qpt
