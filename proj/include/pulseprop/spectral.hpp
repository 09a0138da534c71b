#pragma once

#include <complex>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

// Uniform periodic grid, normalized discrete Fourier transform, Fourier
// multipliers, and the discrete norms (L2, Linf, Wiener) used everywhere
// else. Coefficients are normalized so that f(x) = sum_m c_m exp(i xi_m x);
// a unit plane wave has a single unit coefficient.

namespace pulseprop::spectral {

class PeriodicGrid {
 public:
  PeriodicGrid(double length, std::size_t n);  // n must be an even power of two

  double length() const { return length_; }
  std::size_t size() const { return n_; }
  double dx() const { return length_ / static_cast<double>(n_); }
  double node(std::size_t m) const { return dx() * static_cast<double>(m); }

  // Signed wavenumber of FFT bin m, in [-N/2, N/2) * 2*pi/L.
  double wavenumber(std::size_t m) const;
  // Nyquist magnitude pi*N/L.
  double max_wavenumber() const;
  const std::vector<double>& wavenumbers() const { return xi_; }

  bool operator==(const PeriodicGrid& o) const {
    return length_ == o.length_ && n_ == o.n_;
  }

 private:
  double length_;
  std::size_t n_;
  std::vector<double> xi_;
};

using GridPtr = std::shared_ptr<const PeriodicGrid>;

GridPtr make_grid(double length, std::size_t n);

enum class Space { Physical, Spectral };

class Field {
 public:
  Field() = default;
  Field(GridPtr grid, Space space);  // zero-initialized
  Field(GridPtr grid, Space space, std::vector<std::complex<double>> values);

  const PeriodicGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  Space space() const { return space_; }
  std::size_t size() const { return values_.size(); }

  std::span<std::complex<double>> values() { return values_; }
  std::span<const std::complex<double>> values() const { return values_; }
  std::complex<double>& operator[](std::size_t i) { return values_[i]; }
  const std::complex<double>& operator[](std::size_t i) const { return values_[i]; }

 private:
  GridPtr grid_;
  Space space_ = Space::Physical;
  std::vector<std::complex<double>> values_;
};

// Normalized transforms; exact algebraic inverses of one another.
Field forward(const Field& physical);
Field inverse(const Field& spectral);

// Returns the argument converted to the requested space (no copy when
// already there).
Field to_space(const Field& f, Space s);

// Coefficientwise product with a symbol sampled on the grid wavenumbers
// (FFT bin order). Physical inputs are transformed and transformed back.
// Throws on size mismatch or non-finite symbol samples.
Field apply_multiplier(const Field& f, std::span<const std::complex<double>> symbol);
Field apply_multiplier(const Field& f, std::span<const double> symbol);

// d/dx as the multiplier i*xi with the Nyquist bin zeroed.
Field derivative(const Field& f);

// Sum of coefficient magnitudes; dilation invariant for resolved profiles.
double wiener_norm(const Field& f);

struct Norms {
  double l2 = 0;    // quadrature weight L/N
  double linf = 0;  // max over nodes
};
Norms norms(const Field& f);

// Trigonometric interpolation onto a finer power-of-two grid (same length).
Field upsample(const Field& f, std::size_t n_target);

// Snapshot formats: CSV rows "x,re,im" and raw little-endian binary
// (uint64 N followed by interleaved re/im doubles).
void write_csv(const std::filesystem::path& path, const Field& physical);
void write_raw(const std::filesystem::path& path, const Field& physical);
Field read_raw(const std::filesystem::path& path, GridPtr grid);

}  // namespace pulseprop::spectral
