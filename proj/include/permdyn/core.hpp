#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace permdyn {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using Index = std::int64_t;

inline constexpr cplx I_UNIT{0.0, 1.0};

// Error categories. Each one maps to a distinct failure class callers may
// want to tell apart (the CLI turns all of them into exit code 2).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error { using Error::Error; };
struct InvalidGateError : Error { using Error::Error; };
struct ResourceError : Error { using Error::Error; };
struct PreconditionError : Error { using Error::Error; };
struct ModeError : Error { using Error::Error; };
struct NoDecompositionError : Error { using Error::Error; };
struct NotPresentError : Error { using Error::Error; };
struct ConsistencyError : Error { using Error::Error; };

struct Limits {
  Index dense_cap = 4096;      // largest dense matrix dimension
  Index state_cap = 20000;     // largest state-vector length
  int perm_budget = 10;        // largest n for n!-term sums
  int threads = 1;
};

inline Limits& limits() {
  static Limits l;
  return l;
}

inline Index ipow(Index base, int exp) {
  Index r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

inline Index factorial(int n) {
  Index r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

inline Index binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  Index r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline void require_dense(Index dim, const char* what) {
  if (dim > limits().dense_cap)
    throw ResourceError(std::string(what) + ": dimension " + std::to_string(dim) +
                        " exceeds dense cap " + std::to_string(limits().dense_cap));
}

inline void require_perm_budget(int n, const char* what) {
  if (n > limits().perm_budget)
    throw ResourceError(std::string(what) + ": n = " + std::to_string(n) +
                        " exceeds permutation-sum budget " +
                        std::to_string(limits().perm_budget));
}

// Deterministic per-stream generator: (seed, stream) -> independent engine.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

inline Vec random_complex_gaussian(Index len, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(len);
  for (Index i = 0; i < len; ++i) v[i] = cplx(g(rng), g(rng));
  return v;
}

// Haar unitary on U(m): Ginibre matrix, QR, then fix the phases of R's diagonal.
inline Mat haar_unitary(Index m, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat z(m, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < m; ++i) z(i, j) = cplx(g(rng), g(rng)) / std::sqrt(2.0);
  Eigen::HouseholderQR<Mat> qr(z);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < m; ++j) {
    double a = std::abs(r(j, j));
    cplx ph = a > 0 ? r(j, j) / a : cplx(1.0);
    q.col(j) *= ph;
  }
  return q;
}

inline Mat haar_special_unitary(Index m, std::mt19937_64& rng) {
  Mat u = haar_unitary(m, rng);
  cplx det = u.determinant();
  return u * std::pow(det, -1.0 / static_cast<double>(m));
}

inline bool is_unitary(const Mat& u, double tol = 1e-10) {
  if (u.rows() != u.cols()) return false;
  return (u.adjoint() * u - Mat::Identity(u.rows(), u.cols())).norm() < tol * std::max<Index>(1, u.rows());
}

// Splits [0, count) across limits().threads workers. Each worker writes only
// to its own slot, so results are reproducible for a fixed thread count.
template <class F>
void parallel_chunks(Index count, F&& body) {
  int t = std::max(1, limits().threads);
  if (t == 1 || count < 2) {
    body(0, Index{0}, count);
    return;
  }
  t = static_cast<int>(std::min<Index>(t, count));
  std::vector<std::thread> pool;
  Index chunk = (count + t - 1) / t;
  for (int w = 0; w < t; ++w) {
    Index lo = w * chunk, hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, w, lo, hi] { body(w, lo, hi); });
  }
  for (auto& th : pool) th.join();
}

inline int worker_count(Index count) {
  return static_cast<int>(std::max<Index>(1, std::min<Index>(std::max(1, limits().threads), count)));
}

}  // namespace permdyn
