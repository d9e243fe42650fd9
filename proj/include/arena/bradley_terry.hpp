// Copyright 2026 The Agent Arena Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ARENA_BRADLEY_TERRY_HPP_
#define ARENA_BRADLEY_TERRY_HPP_

// Dense Bradley-Terry kernels. Everything here works on a credited-win matrix
// W where W(i, j) is the (possibly fractional) number of times model i beat
// model j, and is templated on the scalar type of the Eigen operands.
//
// Log-likelihood:   L(b) = sum_ij W(i, j) * log sigmoid(b_i - b_j)
// Gradient:         g_i  = sum_j W(i, j) - N(i, j) * p(i, j)
// Neg. Hessian:     Laplacian with edge weights N(i, j) * p(i, j) * p(j, i)
// where N = W + W^T and p(i, j) = sigmoid(b_i - b_j).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace arena::bt {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// P(i beats j) = e^bi / (e^bi + e^bj), evaluated after shifting by max(bi, bj)
// so neither exponent overflows.
template <typename Scalar>
Scalar WinProbability(Scalar beta_i, Scalar beta_j) {
  using std::exp;
  const Scalar shift = std::max(beta_i, beta_j);
  const Scalar ei = exp(beta_i - shift);
  const Scalar ej = exp(beta_j - shift);
  return ei / (ei + ej);
}

// log sigmoid(x) without overflow for large |x|.
template <typename Scalar>
Scalar LogSigmoid(Scalar x) {
  using std::exp;
  using std::log1p;
  return x >= Scalar(0) ? -log1p(exp(-x)) : x - log1p(exp(x));
}

template <typename Derived>
Matrix<typename Derived::Scalar> WinProbabilityMatrix(
    const Eigen::MatrixBase<Derived>& beta) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index m = beta.size();
  Matrix<Scalar> p(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      p(i, j) = WinProbability<Scalar>(beta(i), beta(j));
    }
  }
  return p;
}

template <typename DerivedB, typename DerivedW>
typename DerivedB::Scalar LogLikelihood(
    const Eigen::MatrixBase<DerivedB>& beta,
    const Eigen::MatrixBase<DerivedW>& wins) {
  using Scalar = typename DerivedB::Scalar;
  Scalar total(0);
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
      if (i == j || wins(i, j) == Scalar(0)) continue;
      total += wins(i, j) * LogSigmoid<Scalar>(beta(i) - beta(j));
    }
  }
  return total;
}

template <typename DerivedB, typename DerivedW>
Vector<typename DerivedB::Scalar> Gradient(
    const Eigen::MatrixBase<DerivedB>& beta,
    const Eigen::MatrixBase<DerivedW>& wins) {
  using Scalar = typename DerivedB::Scalar;
  const Matrix<Scalar> p = WinProbabilityMatrix(beta);
  const Matrix<Scalar> battles = wins + wins.transpose();
  Vector<Scalar> g = wins.rowwise().sum();
  g -= (battles.array() * p.array()).matrix().rowwise().sum();
  // Diagonal terms are W(i,i) - 2W(i,i) * 0.5 = 0, so no correction needed.
  return g;
}

// Negative Hessian of the log-likelihood (a weighted graph Laplacian).
template <typename DerivedB, typename DerivedW>
Matrix<typename DerivedB::Scalar> NegativeHessian(
    const Eigen::MatrixBase<DerivedB>& beta,
    const Eigen::MatrixBase<DerivedW>& wins) {
  using Scalar = typename DerivedB::Scalar;
  const Matrix<Scalar> p = WinProbabilityMatrix(beta);
  const Matrix<Scalar> battles = wins + wins.transpose();
  Matrix<Scalar> h =
      -(battles.array() * p.array() * p.transpose().array()).matrix();
  h.diagonal().setZero();
  h.diagonal() = -h.rowwise().sum();
  return h;
}

// True when every model can reach every other along "beat" edges, the
// condition for a finite maximum-likelihood estimate to exist.
template <typename DerivedW>
bool StronglyConnected(const Eigen::MatrixBase<DerivedW>& wins) {
  const Eigen::Index m = wins.rows();
  if (m <= 1) return true;
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(static_cast<std::size_t>(m), 0);
    std::vector<Eigen::Index> stack = {0};
    seen[0] = 1;
    while (!stack.empty()) {
      const Eigen::Index i = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < m; ++j) {
        const auto w = transpose ? wins(j, i) : wins(i, j);
        if (!seen[static_cast<std::size_t>(j)] && w > 0) {
          seen[static_cast<std::size_t>(j)] = 1;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char s) { return s != 0; });
  };
  return reaches_all(false) && reaches_all(true);
}

template <typename Scalar>
struct SolveOptions {
  Scalar gradient_tolerance = Scalar(1e-8);
  int max_iterations = 200;
};

template <typename Scalar>
struct SolveResult {
  Vector<Scalar> beta;
  Scalar log_likelihood = Scalar(0);
  Scalar gradient_norm = Scalar(0);
  int iterations = 0;
  bool converged = false;
};

// Damped Newton ascent on L(b) restricted to sum(b) = 0. The Laplacian has
// the all-ones null space, so the step solves (H + 11^T) d = g; since the
// gradient sums to zero the step does too and the anchor is preserved.
template <typename DerivedW>
SolveResult<typename DerivedW::Scalar> Solve(
    const Eigen::MatrixBase<DerivedW>& wins,
    const SolveOptions<typename DerivedW::Scalar>& options = {}) {
  using Scalar = typename DerivedW::Scalar;
  const Eigen::Index m = wins.rows();
  SolveResult<Scalar> result;
  result.beta = Vector<Scalar>::Zero(m);
  result.log_likelihood = LogLikelihood(result.beta, wins);
  const Matrix<Scalar> ones = Matrix<Scalar>::Ones(m, m);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const Vector<Scalar> g = Gradient(result.beta, wins);
    result.gradient_norm = g.template lpNorm<Eigen::Infinity>();
    result.iterations = iter;
    if (result.gradient_norm <= options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    const Matrix<Scalar> h = NegativeHessian(result.beta, wins) + ones;
    Vector<Scalar> step = h.ldlt().solve(g);
    step.array() -= step.mean();
    Scalar t(1);
    for (int halvings = 0; halvings < 60; ++halvings) {
      const Vector<Scalar> candidate = result.beta + t * step;
      const Scalar ll = LogLikelihood(candidate, wins);
      if (ll >= result.log_likelihood) {
        result.beta = candidate;
        result.log_likelihood = ll;
        break;
      }
      t /= Scalar(2);
    }
    if (t < std::numeric_limits<Scalar>::epsilon()) break;
  }
  result.beta.array() -= result.beta.mean();
  result.log_likelihood = LogLikelihood(result.beta, wins);
  if (!result.converged) {
    const Vector<Scalar> g = Gradient(result.beta, wins);
    result.gradient_norm = g.template lpNorm<Eigen::Infinity>();
    result.converged = result.gradient_norm <= options.gradient_tolerance;
  }
  return result;
}

// rank_m = 1 + #{m' : b_m' > b_m}.
template <typename Derived>
Eigen::VectorXi PointRanks(const Eigen::MatrixBase<Derived>& beta) {
  const Eigen::Index m = beta.size();
  Eigen::VectorXi ranks = Eigen::VectorXi::Ones(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (beta(j) > beta(i)) ++ranks(i);
    }
  }
  return ranks;
}

// rank_m = 1 + #{m' : lower_m' > upper_m}: only models whose whole interval
// sits above m's push it down.
template <typename DerivedL, typename DerivedU>
Eigen::VectorXi IntervalRanks(const Eigen::MatrixBase<DerivedL>& lower,
                              const Eigen::MatrixBase<DerivedU>& upper) {
  const Eigen::Index m = lower.size();
  Eigen::VectorXi ranks = Eigen::VectorXi::Ones(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j != i && lower(j) > upper(i)) ++ranks(i);
    }
  }
  return ranks;
}

}  // namespace arena::bt

#endif  // ARENA_BRADLEY_TERRY_HPP_
