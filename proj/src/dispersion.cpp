#include "pulseprop/dispersion.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pulseprop::dispersion {

KGParams::KGParams(double v_, double kbar_) : v(v_), kbar(kbar_) {
  if (v == 0.0) throw std::invalid_argument("KGParams: v must be nonzero");
  if (kbar == 0.0) throw std::invalid_argument("KGParams: kbar must be nonzero");
}

double kg_omega1(double k, double v) { return std::hypot(k, v); }

std::array<double, 7> maxwell_omegas(double k_mag) {
  if (k_mag < 0.0)
    throw std::invalid_argument("maxwell_omegas: wavenumber magnitude must be >= 0");
  const double rp = std::sqrt(2.0 * (1.0 + k_mag) + k_mag * k_mag);
  const double rm = std::sqrt(2.0 * (1.0 - k_mag) + k_mag * k_mag);
  const double w1 = 0.5 * (rp + rm);
  const double w2 = std::sqrt(2.0);
  const double w3 = 0.5 * (rp - rm);
  return {w1, w2, w3, 0.0, -w3, -w2, -w1};
}

namespace {

std::vector<double> sorted_descending(Eigen::VectorXd vals) {
  std::vector<double> out(vals.data(), vals.data() + vals.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

Eigen::Matrix3d cross_matrix(const std::array<double, 3>& k) {
  Eigen::Matrix3d K;
  K << 0, -k[2], k[1], k[2], 0, -k[0], -k[1], k[0], 0;
  return K;
}

}  // namespace

std::vector<double> eigen_oracle_kg(double k, double v) {
  Eigen::Matrix2cd M;
  const std::complex<double> I(0.0, 1.0);
  // A(k) + E/i with A(k) = [[0,k],[k,0]], E = [[0,-v],[v,0]].
  M << 0.0, k + I * v, k - I * v, 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(M, Eigen::EigenvaluesOnly);
  return sorted_descending(es.eigenvalues());
}

std::vector<double> eigen_oracle_maxwell(const std::array<double, 3>& k) {
  using Mat = Eigen::Matrix<std::complex<double>, 12, 12>;
  Mat M = Mat::Zero();
  const Eigen::Matrix3d K = cross_matrix(k);
  const Eigen::Matrix3d Id = Eigen::Matrix3d::Identity();
  const std::complex<double> I(0.0, 1.0);

  // A(k): curl blocks acting on (B,E); unknowns ordered (B,E,Q,P).
  M.block<3, 3>(0, 3) = K.cast<std::complex<double>>();
  M.block<3, 3>(3, 0) = (-K).cast<std::complex<double>>();
  // E/i with E = [[0,0,0,0],[0,0,I,0],[0,-I,0,I],[0,0,-I,0]].
  M.block<3, 3>(3, 6) = (Id / I).eval();
  M.block<3, 3>(6, 3) = (-Id / I).eval();
  M.block<3, 3>(6, 9) = (Id / I).eval();
  M.block<3, 3>(9, 6) = (-Id / I).eval();

  if (!M.isApprox(M.adjoint(), 1e-14))
    throw std::runtime_error("eigen_oracle_maxwell: assembled symbol is not hermitian");

  Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
  return sorted_descending(es.eigenvalues());
}

CarrierPoint CarrierPoint::at(const KGParams& p) {
  CarrierPoint c;
  c.kbar = p.kbar;
  c.omega = kg_omega1(p.kbar, p.v);
  const double w = c.omega;
  c.cg = p.kbar / w;
  c.hess = p.v * p.v / (w * w * w);
  c.third = -3.0 * p.v * p.v * p.kbar / (w * w * w * w * w);
  return c;
}

double CarrierPoint::v() const { return std::sqrt(omega * omega - kbar * kbar); }

PadeCoefficients pade_coefficients(double kbar, double v) {
  const KGParams p(v, kbar);  // validates nonzero
  const double w2 = v * v + kbar * kbar;
  PadeCoefficients out;
  out.b = 2.0 * kbar / w2;
  out.B = (v * v + 4.0 * kbar * kbar) / (4.0 * w2 * w2);
  out.C = kbar * (3.0 * v * v + 4.0 * kbar * kbar) / ((4.0 * w2 * w2) * std::sqrt(w2));
  // 4 - b^2/B simplifies to the rational form below.
  out.hyp_margin = 4.0 * v * v / (v * v + 4.0 * kbar * kbar);
  if (!(out.B > 0.0))
    throw std::invalid_argument("pade_coefficients: B must be positive");
  if (!(out.hyp_margin > 0.0))
    throw std::invalid_argument("pade_coefficients: 4 - b^2/B must be positive");
  return out;
}

AssumptionReport assumption_checks(double kbar, double v) {
  const KGParams p(v, kbar);
  AssumptionReport r;
  r.omega_bar = kg_omega1(kbar, v);
  r.c0 = r.omega_bar + std::abs(v);

  const double w3k = kg_omega1(3.0 * kbar, v);
  r.omega_at_3kbar = {w3k, -w3k};
  const double target = 3.0 * r.omega_bar;
  const double tol = 1e-12 * std::max(1.0, std::abs(target));
  r.third_harmonic_free = true;
  for (int j = 0; j < 2; ++j) {
    if (std::abs(r.omega_at_3kbar[j] - target) <= tol) {
      r.third_harmonic_free = false;
      r.offending_branch = j + 1;
    }
  }
  return r;
}

double symbol_exact(double xi, double eps, const CarrierPoint& c) {
  if (!(eps > 0.0)) throw std::invalid_argument("symbol: eps must be positive");
  const double v = c.v();
  const double num = xi * (2.0 * c.kbar + eps * xi);
  return num / (kg_omega1(c.kbar + eps * xi, v) + c.omega);
}

double symbol_taylor2(double xi, double eps, const CarrierPoint& c) {
  if (!(eps > 0.0)) throw std::invalid_argument("symbol: eps must be positive");
  return c.cg * xi + eps * 0.5 * c.hess * xi * xi;
}

double symbol_pade32(double xi, double eps, const CarrierPoint& c,
                     const PadeCoefficients& p) {
  if (!(eps > 0.0)) throw std::invalid_argument("symbol: eps must be positive");
  const double s = eps * xi;
  const double num = xi * (c.cg + s * (0.5 * c.hess + c.cg * p.b) + s * s * p.C);
  const double den = 1.0 + s * (p.b + s * p.B);
  return num / den;
}

double SymbolModel::operator()(double xi, double eps) const {
  switch (kind) {
    case SymbolKind::Exact:
      return symbol_exact(xi, eps, carrier);
    case SymbolKind::Taylor2:
      return symbol_taylor2(xi, eps, carrier);
    case SymbolKind::Pade32:
      return symbol_pade32(xi, eps, carrier, pade);
  }
  throw std::logic_error("SymbolModel: unknown kind");
}

double c_schrod(double xi, double eps, const CarrierPoint& c) {
  const double diff = symbol_exact(xi, eps, c) - symbol_taylor2(xi, eps, c);
  const double axi = std::abs(xi);
  return diff / (eps * eps * (1.0 + axi * axi * axi));
}

double c_improved(double xi, double eps, const CarrierPoint& c,
                  const PadeCoefficients& p) {
  const double diff = symbol_exact(xi, eps, c) - symbol_pade32(xi, eps, c, p);
  const double axi = std::abs(xi);
  return diff / (eps * eps * (1.0 + axi * axi * axi));
}

}  // namespace pulseprop::dispersion
