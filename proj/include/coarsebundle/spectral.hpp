#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "matrix.hpp"

namespace coarsebundle {

inline Eigen::MatrixXd to_eigen(RatMatrix const& m) {
  Eigen::MatrixXd r(m.size(), m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) r(i, j) = m(i, j).get_d();
  return r;
}

// Log-singular-value distance sqrt(sum log^2 sigma_i(A^-1 B)); a left-invariant
// stand-in for the word metric on GL_n.
inline double gl_distance(RatMatrix const& a, RatMatrix const& b) {
  RatMatrix q = inverse(a) * b;
  if (q.size() == 1) return std::fabs(std::log(std::fabs(q(0, 0).get_d())));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(q));
  double s = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    double l = std::log(svd.singularValues()(i));
    s += l * l;
  }
  return std::sqrt(s);
}

struct SpectralSplit {
  Eigen::MatrixXd expanding;   // columns form an orthonormal basis
  Eigen::MatrixXd neutral;
  Eigen::MatrixXd contracting;
  Eigen::VectorXcd eigenvalues;
};

namespace detail {

// Orthonormal basis of the image of p, assumed of rank `dim`.
inline Eigen::MatrixXd image_basis(Eigen::MatrixXd const& p, Eigen::Index dim) {
  if (dim == 0) return Eigen::MatrixXd(p.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(p, Eigen::ComputeFullU);
  return svd.matrixU().leftCols(dim);
}

}  // namespace detail

// Real invariant subspaces by modulus of eigenvalue. The subspace for a group
// of eigenvalues is the image of the product of (M - lambda)^mult over the
// eigenvalues outside the group; complex pairs enter as real quadratics.
inline SpectralSplit eigen_split(Eigen::MatrixXd const& m, double tol = 1e-9) {
  Eigen::Index const n = m.rows();
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  Eigen::VectorXcd ev = es.eigenvalues();
  auto group_of = [&](std::complex<double> z) {
    double a = std::abs(z);
    return a > 1 + tol ? 0 : (a < 1 - tol ? 2 : 1);
  };
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd basis[3];
  for (int g = 0; g < 3; ++g) {
    Eigen::MatrixXd p = id;
    Eigen::Index dim = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      std::complex<double> z = ev(k);
      if (group_of(z) == g) {
        ++dim;
        continue;
      }
      if (z.imag() > 0) {
        p = p * (m * m - 2 * z.real() * m + std::norm(z) * id);
      } else if (z.imag() == 0) {
        p = p * (m - z.real() * id);
      }
    }
    basis[g] = detail::image_basis(p, dim);
  }
  return {basis[0], basis[1], basis[2], ev};
}

inline SpectralSplit eigen_split(RatMatrix const& m, double tol = 1e-9) {
  if (determinant(m) == 0) throw SingularMatrix();
  return eigen_split(to_eigen(m), tol);
}

}  // namespace coarsebundle
