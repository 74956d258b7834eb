#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "spectral.hpp"

namespace coarsebundle {

// Terminal slack: a truncated chain of length k must end within rho times its start.
inline constexpr double drift_rho = 2.0;

struct DriftEstimate {
  std::vector<double> truncations;  // C_1 .. C_k, nondecreasing
  std::optional<double> limit;      // closed form, diagonalizable words only
  bool diagonalizable = true;
};

namespace detail {

inline Eigen::MatrixXd word_matrix(std::vector<RatMatrix> const& gens, MatrixWord const& word) {
  if (word.empty()) throw InvalidArgument("empty word");
  for (std::size_t g = 0; g < gens.size(); ++g)
    if (determinant(gens[g]) == 0) throw SingularGenerator("generator " + std::to_string(g));
  return to_eigen(evaluate_word(word, gens));
}

inline void check_invertible(Eigen::MatrixXd const& w) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w);
  auto const& s = svd.singularValues();
  if (s.size() == 0 || s(s.size() - 1) <= 1e-12 * std::max(1.0, s(0))) throw SingularGenerator("word matrix");
}

// Eigen-coordinates u = V c with unit eigenvector columns, if V is well conditioned.
inline std::optional<Eigen::ComplexEigenSolver<Eigen::MatrixXcd>> diagonalize(Eigen::MatrixXd const& w) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(w.cast<std::complex<double>>());
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
  auto const& s = svd.singularValues();
  if (s(s.size() - 1) < 1e-8 * s(0)) return std::nullopt;
  return es;
}

// Per coordinate of modulus a and multiplier L: least constant drift bringing
// L^k a back within rho a, i.e. (L-1)(L^k - rho) a / (L^k - 1).
inline double truncated_drift(double L, double a, std::size_t k) {
  if (L <= 1 || a == 0) return 0;
  double logLk = static_cast<double>(k) * std::log(L);
  if (logLk <= std::log(drift_rho)) return 0;
  double inv = std::exp(-logLk);  // 1 / L^k
  return (L - 1) * a * (1 - drift_rho * inv) / (1 - inv);
}

}  // namespace detail

inline DriftEstimate drift_seminorm(Eigen::MatrixXd const& w, std::vector<double> const& u, std::size_t k) {
  Eigen::Index const n = w.rows();
  if (static_cast<Eigen::Index>(u.size()) != n) throw RankMismatch("separation vector");
  detail::check_invertible(w);
  Eigen::VectorXd uv = Eigen::Map<Eigen::VectorXd const>(u.data(), n);
  DriftEstimate est;
  if (auto es = detail::diagonalize(w)) {
    Eigen::VectorXcd c = es->eigenvectors().partialPivLu().solve(uv.cast<std::complex<double>>());
    double lim = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      lim = std::max(lim, std::max(0.0, std::abs(es->eigenvalues()(i)) - 1) * std::abs(c(i)));
    for (std::size_t j = 1; j <= k; ++j) {
      double cj = 0;
      for (Eigen::Index i = 0; i < n; ++i)
        cj = std::max(cj, detail::truncated_drift(std::abs(es->eigenvalues()(i)), std::abs(c(i)), j));
      est.truncations.push_back(est.truncations.empty() ? cj : std::max(cj, est.truncations.back()));
    }
    est.limit = lim;
    return est;
  }
  if (n != 2) throw NotDiagonalizable("only 2x2 Jordan blocks are supported");
  est.diagonalizable = false;
  // Jordan basis: v1 = (W - lambda) v2, v2 a unit vector off the eigenline.
  double lambda = w.trace() / 2;
  Eigen::Matrix2d N = w - lambda * Eigen::Matrix2d::Identity();
  Eigen::Vector2d v2 = N.col(0).norm() >= N.col(1).norm() ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1);
  Eigen::Vector2d v1 = N * v2;
  double s = v1.norm();
  Eigen::Matrix2d P;
  P.col(0) = v1 / s;
  P.col(1) = v2 / s;  // keeps J = [[lambda, 1], [0, lambda]]
  Eigen::Matrix2d J = P.inverse() * w * P;
  Eigen::Vector2d u0 = P.inverse() * uv;
  double r = drift_rho * u0.cwiseAbs().maxCoeff();
  // Feasible iff J^j u0 lies in the zonotope C * sum_{m<j} J^m [-1,1]^2 + r [-1,1]^2;
  // test the support function along every facet normal.
  std::vector<Eigen::Vector2d> gens{{1, 0}, {0, 1}};
  Eigen::Matrix2d Jm = Eigen::Matrix2d::Identity();
  Eigen::Vector2d p = u0;
  for (std::size_t j = 1; j <= k; ++j) {
    if (j > 1) {
      Jm = J * Jm;
      gens.push_back(Jm.col(0));
      gens.push_back(Jm.col(1));
    }
    p = J * p;
    double cj = 0;
    for (auto const& g : gens) {
      Eigen::Vector2d nrm(-g(1), g(0));
      if (nrm.norm() == 0) continue;
      nrm.normalize();
      double spread = 0;
      for (std::size_t m = 2; m < gens.size(); ++m) spread += std::fabs(nrm.dot(gens[m]));
      spread += std::fabs(nrm(0)) + std::fabs(nrm(1));  // the m = 0 term
      double need = std::fabs(nrm.dot(p)) - r * (std::fabs(nrm(0)) + std::fabs(nrm(1)));
      if (need > 0) cj = std::max(cj, need / spread);
    }
    // The exact sequence is monotone; the running max absorbs rounding.
    est.truncations.push_back(est.truncations.empty() ? cj : std::max(cj, est.truncations.back()));
  }
  return est;
}

inline DriftEstimate drift_seminorm(std::vector<RatMatrix> const& gens, MatrixWord const& word,
                                    std::vector<double> const& u, std::size_t k) {
  return drift_seminorm(detail::word_matrix(gens, word), u, k);
}

// Vectors with zero drift: the contracting generalized eigenspace plus the
// honest eigenvectors of unit-modulus eigenvalues. Orthonormal columns.
inline Eigen::MatrixXd foliation_kernel(Eigen::MatrixXd const& w, double tol = 1e-9) {
  detail::check_invertible(w);
  Eigen::Index const n = w.rows();
  SpectralSplit split = eigen_split(w, tol);
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  std::vector<Eigen::VectorXd> cols;
  for (Eigen::Index c = 0; c < split.contracting.cols(); ++c) cols.push_back(split.contracting.col(c));
  std::vector<std::complex<double>> seen;
  for (Eigen::Index k = 0; k < split.eigenvalues.size(); ++k) {
    std::complex<double> z = split.eigenvalues(k);
    if (std::fabs(std::abs(z) - 1) > tol || z.imag() < -tol) continue;
    if (std::any_of(seen.begin(), seen.end(), [&](auto y) { return std::abs(y - z) < 1e-6; })) continue;
    seen.push_back(z);
    Eigen::MatrixXd f = std::fabs(z.imag()) <= tol ? Eigen::MatrixXd(w - z.real() * id)
                                                   : Eigen::MatrixXd(w * w - 2 * z.real() * w + std::norm(z) * id);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(f, Eigen::ComputeFullV);
    auto const& s = svd.singularValues();
    double scale = std::max(1.0, s(0));
    for (Eigen::Index i = 0; i < n; ++i)
      if (s(i) <= 1e-7 * scale) cols.push_back(svd.matrixV().col(i));
  }
  if (cols.empty()) return Eigen::MatrixXd(n, 0);
  Eigen::MatrixXd a(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) a.col(static_cast<Eigen::Index>(i)) = cols[i];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-7) ++rank;
  return svd.matrixU().leftCols(rank);
}

inline Eigen::MatrixXd foliation_kernel(std::vector<RatMatrix> const& gens, MatrixWord const& word) {
  return foliation_kernel(detail::word_matrix(gens, word));
}

}  // namespace coarsebundle
