#pragma once

#include "permdyn/core.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace permdyn {

// A permutation of n sites. Public constructors take 1-indexed sites;
// internally images are 0-indexed. Composition follows operator order:
// (a * b)(i) = a(b(i)), so that P(a)P(b) = P(a * b).
class PermutationWord {
 public:
  PermutationWord() = default;

  static PermutationWord identity(int n) {
    PermutationWord p;
    p.img_.resize(n);
    std::iota(p.img_.begin(), p.img_.end(), 0);
    return p;
  }

  // images[i-1] = σ(i), 1-indexed.
  static PermutationWord from_images(const std::vector<int>& one_based) {
    PermutationWord p;
    p.img_.reserve(one_based.size());
    for (int v : one_based) p.img_.push_back(v - 1);
    p.validate();
    return p;
  }

  static PermutationWord from_zero_based(std::vector<int> images) {
    PermutationWord p;
    p.img_ = std::move(images);
    p.validate();
    return p;
  }

  static PermutationWord transposition(int n, int a, int b) {
    check_site(n, a);
    check_site(n, b);
    if (a == b) throw InvalidGateError("transposition needs two distinct sites");
    PermutationWord p = identity(n);
    std::swap(p.img_[a - 1], p.img_[b - 1]);
    return p;
  }

  // Cycle s1 -> s2 -> ... -> sk -> s1 (1-indexed sites).
  static PermutationWord cycle(int n, const std::vector<int>& sites) {
    PermutationWord p = identity(n);
    std::vector<bool> seen(n, false);
    for (int s : sites) {
      check_site(n, s);
      if (seen[s - 1]) throw DimensionError("cycle repeats site " + std::to_string(s));
      seen[s - 1] = true;
    }
    for (std::size_t k = 0; k < sites.size(); ++k)
      p.img_[sites[k] - 1] = sites[(k + 1) % sites.size()] - 1;
    return p;
  }

  // Operator product of cycles in the listed order: P(c1) P(c2) ... .
  static PermutationWord from_cycles(int n, const std::vector<std::vector<int>>& cycles) {
    PermutationWord p = identity(n);
    for (const auto& c : cycles) p = p * cycle(n, c);
    return p;
  }

  int n() const { return static_cast<int>(img_.size()); }
  int operator()(int i) const { return img_[i]; }
  int image1(int i) const { return img_[i - 1] + 1; }
  const std::vector<int>& images() const { return img_; }

  std::vector<int> images1() const {
    std::vector<int> r(img_.size());
    for (std::size_t i = 0; i < img_.size(); ++i) r[i] = img_[i] + 1;
    return r;
  }

  PermutationWord operator*(const PermutationWord& rhs) const {
    if (n() != rhs.n()) throw DimensionError("composing permutations of different size");
    PermutationWord r;
    r.img_.resize(img_.size());
    for (int i = 0; i < n(); ++i) r.img_[i] = img_[rhs.img_[i]];
    return r;
  }

  bool operator==(const PermutationWord& o) const { return img_ == o.img_; }
  bool operator<(const PermutationWord& o) const { return img_ < o.img_; }

  PermutationWord inverse() const {
    PermutationWord r;
    r.img_.resize(img_.size());
    for (int i = 0; i < n(); ++i) r.img_[img_[i]] = i;
    return r;
  }

  bool is_identity() const {
    for (int i = 0; i < n(); ++i)
      if (img_[i] != i) return false;
    return true;
  }

  // Cycle lengths, sorted descending (fixed points included as 1-cycles).
  std::vector<int> cycle_type() const {
    std::vector<int> t;
    std::vector<bool> seen(img_.size(), false);
    for (int i = 0; i < n(); ++i) {
      if (seen[i]) continue;
      int len = 0;
      for (int j = i; !seen[j]; j = img_[j]) {
        seen[j] = true;
        ++len;
      }
      t.push_back(len);
    }
    std::sort(t.begin(), t.end(), std::greater<int>());
    return t;
  }

  int sign() const {
    int s = 1;
    for (int len : cycle_type())
      if (len % 2 == 0) s = -s;
    return s;
  }

  // Factorization into transpositions (1-indexed pairs) whose operator
  // product, in listed order, equals this permutation.
  std::vector<std::pair<int, int>> transpositions() const {
    std::vector<std::pair<int, int>> out;
    std::vector<bool> seen(img_.size(), false);
    for (int i = 0; i < n(); ++i) {
      if (seen[i]) continue;
      std::vector<int> cyc;
      for (int j = i; !seen[j]; j = img_[j]) {
        seen[j] = true;
        cyc.push_back(j + 1);
      }
      // (c1 c2 ... ck) = (c1 c2)(c2 c3)...(c_{k-1} c_k) in operator order.
      for (std::size_t k = 0; k + 1 < cyc.size(); ++k) out.emplace_back(cyc[k], cyc[k + 1]);
    }
    return out;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << '[';
    for (int i = 0; i < n(); ++i) os << (i ? "," : "") << img_[i] + 1;
    os << ']';
    return os.str();
  }

 private:
  static void check_site(int n, int s) {
    if (s < 1 || s > n)
      throw DimensionError("site " + std::to_string(s) + " outside 1.." + std::to_string(n));
  }

  void validate() const {
    std::vector<bool> seen(img_.size(), false);
    for (int v : img_) {
      if (v < 0 || v >= n() || seen[v]) throw DimensionError("images do not form a bijection");
      seen[v] = true;
    }
  }

  std::vector<int> img_;
};

// Walks S_n in lexicographic order of one-line notation, carrying the sign.
class PermutationEnumerator {
 public:
  explicit PermutationEnumerator(int n) : cur_(n), sign_(1) { std::iota(cur_.begin(), cur_.end(), 0); }

  const std::vector<int>& images() const { return cur_; }
  int sign() const { return sign_; }
  PermutationWord word() const { return PermutationWord::from_zero_based(cur_); }

  bool next() {
    int n = static_cast<int>(cur_.size());
    int k = n - 2;
    while (k >= 0 && cur_[k] > cur_[k + 1]) --k;
    if (k < 0) return false;
    int l = n - 1;
    while (cur_[l] < cur_[k]) --l;
    std::swap(cur_[k], cur_[l]);
    sign_ = -sign_;
    int len = n - 1 - k;
    std::reverse(cur_.begin() + k + 1, cur_.end());
    if ((len / 2) % 2 == 1) sign_ = -sign_;
    return true;
  }

 private:
  std::vector<int> cur_;
  int sign_;
};

// All permutations of n in lexicographic order (n small).
inline std::vector<PermutationWord> all_permutations(int n) {
  std::vector<PermutationWord> out;
  out.reserve(static_cast<std::size_t>(factorial(n)));
  PermutationEnumerator e(n);
  do out.push_back(e.word());
  while (e.next());
  return out;
}

inline PermutationWord random_permutation(int n, std::mt19937_64& rng) {
  std::vector<int> img(n);
  std::iota(img.begin(), img.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<int> u(0, i);
    std::swap(img[i], img[u(rng)]);
  }
  return PermutationWord::from_zero_based(img);
}

}  // namespace permdyn
