#pragma once

#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "permest/errors.hpp"

namespace permest {

using cplx = std::complex<double>;

/// Dense row-major complex matrix. Entries are always finite.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), entries_(rows * cols) {}

  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != rows_ * cols_) {
      throw DomainError("entry count does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    for (const cplx& z : entries_) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw DomainError("matrix entries must be finite");
      }
    }
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix filled(std::size_t rows, std::size_t cols, cplx value) {
    return ComplexMatrix(rows, cols, std::vector<cplx>(rows * cols, value));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return entries_.empty(); }

  cplx& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  const std::vector<cplx>& entries() const noexcept { return entries_; }

  /// True when every entry is real (zero imaginary part) and >= 0.
  bool nonnegative_real() const noexcept {
    for (const cplx& z : entries_) {
      if (z.imag() != 0.0 || !(z.real() >= 0.0)) return false;
    }
    return true;
  }

  ComplexMatrix scaled(cplx c) const {
    ComplexMatrix out = *this;
    for (cplx& z : out.entries_) z *= c;
    return out;
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
  }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_) throw DomainError("matrix product dimension mismatch");
    ComplexMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t l = 0; l < a.cols_; ++l) {
        const cplx ail = a(i, l);
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += ail * b(l, j);
      }
    return out;
  }

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> entries_;
};

/// Base matrix B (n x k) with column multiplicities s_1..s_k summing to n.
class MultiplicitySpec {
 public:
  MultiplicitySpec(ComplexMatrix base, std::vector<unsigned> mults) : base_(std::move(base)), mults_(std::move(mults)) {
    if (mults_.size() != base_.cols()) {
      throw DomainError("expected " + std::to_string(base_.cols()) + " multiplicities, got " +
                        std::to_string(mults_.size()));
    }
    std::size_t total = 0;
    for (unsigned s : mults_) {
      if (s == 0) throw DomainError("multiplicities must be positive");
      total += s;
    }
    if (total != base_.rows()) {
      throw DomainError("multiplicities sum to " + std::to_string(total) + " but base has " +
                        std::to_string(base_.rows()) + " rows");
    }
  }

  /// Every column taken once; requires a square matrix.
  static MultiplicitySpec unit(ComplexMatrix a) {
    std::vector<unsigned> ones(a.cols(), 1);
    return MultiplicitySpec(std::move(a), std::move(ones));
  }

  const ComplexMatrix& base() const noexcept { return base_; }
  const std::vector<unsigned>& mults() const noexcept { return mults_; }
  std::size_t n() const noexcept { return base_.rows(); }
  std::size_t k() const noexcept { return base_.cols(); }

  /// Moduli s_i + 1 of the roots-of-unity sample domain.
  std::vector<unsigned> moduli() const {
    std::vector<unsigned> m(mults_);
    for (unsigned& v : m) ++v;
    return m;
  }

 private:
  ComplexMatrix base_;
  std::vector<unsigned> mults_;
};

/// The n x n matrix whose columns are column i of B repeated s_i times, in order.
inline ComplexMatrix expand(const MultiplicitySpec& spec) {
  const ComplexMatrix& b = spec.base();
  ComplexMatrix a(spec.n(), spec.n());
  std::size_t col = 0;
  for (std::size_t j = 0; j < spec.k(); ++j) {
    for (unsigned rep = 0; rep < spec.mults()[j]; ++rep, ++col) {
      for (std::size_t i = 0; i < spec.n(); ++i) a(i, col) = b(i, j);
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// Text format: "rows cols" header, then one line per row holding 2*cols
// numbers (re im re im ...). Lines starting with '#' and blank lines are
// skipped.

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool skippable(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  return i == line.size() || line[i] == '#';
}

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <class T>
bool parse_number(std::string_view tok, T& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

}  // namespace detail

inline ComplexMatrix parse_matrix(std::istream& in) {
  using Kind = ParseError::Kind;
  std::string line;
  std::size_t lineno = 0;
  auto next_content = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!detail::skippable(line)) return true;
    }
    return false;
  };

  if (!next_content()) throw ParseError(Kind::empty_input, lineno, "empty input");
  const auto header = detail::split_ws(line);
  std::size_t rows = 0, cols = 0;
  if (header.size() != 2 || !detail::parse_number(header[0], rows) || !detail::parse_number(header[1], cols) ||
      rows == 0 || cols == 0) {
    throw ParseError(Kind::bad_header, lineno, "expected header 'rows cols' with positive integers");
  }

  std::vector<cplx> entries;
  entries.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!next_content()) {
      throw ParseError(Kind::dimension_mismatch, lineno,
                       "row " + std::to_string(r + 1) + " missing (expected " + std::to_string(rows) + " rows)");
    }
    const auto toks = detail::split_ws(line);
    if (toks.size() != 2 * cols) {
      throw ParseError(Kind::dimension_mismatch, lineno,
                       "row " + std::to_string(r + 1) + " has " + std::to_string(toks.size()) + " numbers, expected " +
                           std::to_string(2 * cols));
    }
    for (std::size_t t = 0; t < toks.size(); t += 2) {
      double re = 0, im = 0;
      if (!detail::parse_number(toks[t], re) || !detail::parse_number(toks[t + 1], im) || !std::isfinite(re) ||
          !std::isfinite(im)) {
        throw ParseError(Kind::non_numeric, lineno,
                         "non-numeric or non-finite token near '" + std::string(toks[t]) + "'");
      }
      entries.emplace_back(re, im);
    }
  }
  if (next_content()) {
    throw ParseError(Kind::dimension_mismatch, lineno, "unexpected data after " + std::to_string(rows) + " rows");
  }
  return ComplexMatrix(rows, cols, std::move(entries));
}

inline ComplexMatrix parse_matrix(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_matrix(in);
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string serialize(const ComplexMatrix& m) {
  std::string out = std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += ' ';
      out += format_double(m(i, j).real());
      out += ' ';
      out += format_double(m(i, j).imag());
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spectral norm

struct SpectralNormResult {
  double value = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Largest singular value by power iteration on A^H A.
///
/// The start vector is a fixed pseudo-random unit vector, so results are
/// deterministic. Stops once the eigen-residual ||A^H A v - s^2 v|| / s^2
/// drops to `tol`. The reported value is the Rayleigh quotient, which never
/// overestimates.
inline SpectralNormResult spectral_norm(const ComplexMatrix& a, double tol = 1e-10, std::size_t max_iter = 10000) {
  if (a.empty()) throw DomainError("spectral norm of an empty matrix");
  if (!(tol > 0)) throw DomainError("tolerance must be positive");
  const std::size_t rows = a.rows(), cols = a.cols();
  {
    bool zero = true;
    for (const cplx& z : a.entries()) zero = zero && z == cplx(0);
    if (zero) return {0.0, 0, 0.0};
  }

  std::vector<cplx> v(cols);
  {
    std::uint64_t state = 0x9e3779b97f4a7c15ULL;
    double norm2 = 0.0;
    for (cplx& z : v) {
      const double re = 0.5 + static_cast<double>(detail::splitmix64(state) >> 11) * 0x1.0p-53;
      const double im = 0.25 * static_cast<double>(detail::splitmix64(state) >> 11) * 0x1.0p-53;
      z = cplx(re, im);
      norm2 += std::norm(z);
    }
    for (cplx& z : v) z /= std::sqrt(norm2);
  }
  std::vector<cplx> av(rows), w(cols);

  auto apply = [&]() {
    for (std::size_t i = 0; i < rows; ++i) {
      cplx s = 0;
      for (std::size_t j = 0; j < cols; ++j) s += a(i, j) * v[j];
      av[i] = s;
    }
    for (std::size_t j = 0; j < cols; ++j) {
      cplx s = 0;
      for (std::size_t i = 0; i < rows; ++i) s += std::conj(a(i, j)) * av[i];
      w[j] = s;
    }
  };

  double best = 0.0, residual = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    apply();
    double rayleigh = 0.0;
    for (const cplx& z : av) rayleigh += std::norm(z);
    if (rayleigh == 0.0) return {0.0, it, 0.0};
    double res2 = 0.0, wnorm2 = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      res2 += std::norm(w[j] - rayleigh * v[j]);
      wnorm2 += std::norm(w[j]);
    }
    best = std::sqrt(rayleigh);
    residual = std::sqrt(res2) / rayleigh;
    if (residual <= tol) return {best, it, residual};
    const double inv = 1.0 / std::sqrt(wnorm2);
    for (std::size_t j = 0; j < cols; ++j) v[j] = w[j] * inv;
  }
  throw ConvergenceError("power iteration did not converge", best, residual);
}

}  // namespace permest
