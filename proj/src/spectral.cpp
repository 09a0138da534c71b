#include "pulseprop/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "fftw_lock.hpp"

namespace pulseprop::detail {
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace pulseprop::detail

namespace pulseprop::spectral {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// FFTW planning is not thread-safe; plan execution on distinct arrays is.
// Plans are created once per size with FFTW_ESTIMATE (deterministic choice,
// no timing-dependent algorithm selection) and reused via the new-array
// execute interface.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  void execute(std::size_t n, int sign, std::complex<double>* data) {
    fftw_plan plan = nullptr;
    {
      std::scoped_lock lock(detail::fftw_planner_mutex());
      auto key = std::pair<std::size_t, int>(n, sign);
      auto it = plans_.find(key);
      if (it == plans_.end()) {
        std::vector<std::complex<double>> scratch(n);
        fftw_plan p = fftw_plan_dft_1d(
            static_cast<int>(n), reinterpret_cast<fftw_complex*>(scratch.data()),
            reinterpret_cast<fftw_complex*>(scratch.data()), sign,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p) throw std::runtime_error("fftw plan creation failed");
        it = plans_.emplace(key, p).first;
      }
      plan = it->second;
    }
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
  }

 private:
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

void require_same_grid(const Field& f, std::size_t symbol_size) {
  if (f.size() != symbol_size)
    throw std::invalid_argument("apply_multiplier: symbol/grid size mismatch");
}

}  // namespace

PeriodicGrid::PeriodicGrid(double length, std::size_t n) : length_(length), n_(n) {
  if (!(length > 0.0)) throw std::invalid_argument("PeriodicGrid: length must be positive");
  if (!is_pow2(n) || n < 2)
    throw std::invalid_argument("PeriodicGrid: sample count must be a power of two >= 2");
  xi_.resize(n);
  const double dxi = 2.0 * std::numbers::pi / length;
  for (std::size_t m = 0; m < n; ++m) {
    const auto signed_m = (m < n / 2) ? static_cast<long long>(m)
                                      : static_cast<long long>(m) - static_cast<long long>(n);
    xi_[m] = dxi * static_cast<double>(signed_m);
  }
}

double PeriodicGrid::wavenumber(std::size_t m) const { return xi_.at(m); }

double PeriodicGrid::max_wavenumber() const {
  return std::numbers::pi * static_cast<double>(n_) / length_;
}

GridPtr make_grid(double length, std::size_t n) {
  // Grids are immutable and shared; identical requests reuse one instance.
  static std::mutex mtx;
  static std::map<std::pair<double, std::size_t>, GridPtr> cache;
  std::scoped_lock lock(mtx);
  auto& slot = cache[{length, n}];
  if (!slot) slot = std::make_shared<const PeriodicGrid>(length, n);
  return slot;
}

Field::Field(GridPtr grid, Space space)
    : grid_(std::move(grid)), space_(space), values_(grid_->size()) {}

Field::Field(GridPtr grid, Space space, std::vector<std::complex<double>> values)
    : grid_(std::move(grid)), space_(space), values_(std::move(values)) {
  if (values_.size() != grid_->size())
    throw std::invalid_argument("Field: value count does not match grid");
}

Field forward(const Field& f) {
  if (f.space() != Space::Physical)
    throw std::invalid_argument("forward: expected a physical-space field");
  Field out(f.grid_ptr(), Space::Spectral,
            std::vector<std::complex<double>>(f.values().begin(), f.values().end()));
  PlanCache::instance().execute(out.size(), FFTW_FORWARD, out.values().data());
  const double inv_n = 1.0 / static_cast<double>(out.size());
  for (auto& c : out.values()) c *= inv_n;
  return out;
}

Field inverse(const Field& f) {
  if (f.space() != Space::Spectral)
    throw std::invalid_argument("inverse: expected a spectral-space field");
  Field out(f.grid_ptr(), Space::Physical,
            std::vector<std::complex<double>>(f.values().begin(), f.values().end()));
  PlanCache::instance().execute(out.size(), FFTW_BACKWARD, out.values().data());
  return out;
}

Field to_space(const Field& f, Space s) {
  if (f.space() == s) return f;
  return s == Space::Spectral ? forward(f) : inverse(f);
}

template <typename Scalar>
static Field apply_multiplier_impl(const Field& f, std::span<const Scalar> symbol) {
  for (const auto& s : symbol) {
    if constexpr (std::is_same_v<Scalar, double>) {
      if (!std::isfinite(s)) throw std::invalid_argument("apply_multiplier: non-finite symbol");
    } else {
      if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
        throw std::invalid_argument("apply_multiplier: non-finite symbol");
    }
  }
  const bool was_physical = f.space() == Space::Physical;
  Field spec = to_space(f, Space::Spectral);
  require_same_grid(spec, symbol.size());
  for (std::size_t m = 0; m < symbol.size(); ++m) spec[m] *= symbol[m];
  return was_physical ? inverse(spec) : spec;
}

Field apply_multiplier(const Field& f, std::span<const std::complex<double>> symbol) {
  return apply_multiplier_impl(f, symbol);
}

Field apply_multiplier(const Field& f, std::span<const double> symbol) {
  return apply_multiplier_impl(f, symbol);
}

Field derivative(const Field& f) {
  const auto& grid = f.grid();
  std::vector<std::complex<double>> symbol(grid.size());
  for (std::size_t m = 0; m < grid.size(); ++m)
    symbol[m] = std::complex<double>(0.0, grid.wavenumber(m));
  symbol[grid.size() / 2] = 0.0;  // asymmetric Nyquist bin
  return apply_multiplier(f, std::span<const std::complex<double>>(symbol));
}

double wiener_norm(const Field& f) {
  Field spec = to_space(f, Space::Spectral);
  double sum = 0.0;
  for (const auto& c : spec.values()) sum += std::abs(c);
  return sum;
}

Norms norms(const Field& f) {
  Field phys = to_space(f, Space::Physical);
  Norms out;
  double sum2 = 0.0;
  for (const auto& z : phys.values()) {
    const double a = std::norm(z);
    sum2 += a;
    out.linf = std::max(out.linf, a);
  }
  out.linf = std::sqrt(out.linf);
  out.l2 = std::sqrt(sum2 * phys.grid().dx());
  return out;
}

Field upsample(const Field& f, std::size_t n_target) {
  const std::size_t n = f.grid().size();
  if (n_target < n) throw std::invalid_argument("upsample: target grid is coarser");
  if (n_target == n) return f;
  Field spec = to_space(f, Space::Spectral);
  auto grid2 = make_grid(f.grid().length(), n_target);
  Field out(grid2, Space::Spectral);
  // Copy |m| < N/2; the source Nyquist bin is dropped (band-limited use).
  for (std::size_t m = 0; m + 1 <= n / 2; ++m) out[m] = spec[m];
  for (std::size_t m = n / 2 + 1; m < n; ++m) out[n_target - (n - m)] = spec[m];
  return f.space() == Space::Physical ? inverse(out) : out;
}

void write_csv(const std::filesystem::path& path, const Field& field) {
  Field phys = to_space(field, Space::Physical);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_csv: cannot open " + path.string());
  os << "x,re,im\n";
  char line[96];
  for (std::size_t m = 0; m < phys.size(); ++m) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", phys.grid().node(m),
                  phys[m].real(), phys[m].imag());
    os << line;
  }
}

void write_raw(const std::filesystem::path& path, const Field& field) {
  Field phys = to_space(field, Space::Physical);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_raw: cannot open " + path.string());
  const std::uint64_t n = phys.size();
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (std::size_t m = 0; m < phys.size(); ++m) {
    const double re = phys[m].real(), im = phys[m].imag();
    os.write(reinterpret_cast<const char*>(&re), sizeof re);
    os.write(reinterpret_cast<const char*>(&im), sizeof im);
  }
}

Field read_raw(const std::filesystem::path& path, GridPtr grid) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_raw: cannot open " + path.string());
  std::uint64_t n = 0;
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!is || n != grid->size())
    throw std::runtime_error("read_raw: sample count does not match grid");
  Field out(std::move(grid), Space::Physical);
  for (std::size_t m = 0; m < n; ++m) {
    double re = 0, im = 0;
    is.read(reinterpret_cast<char*>(&re), sizeof re);
    is.read(reinterpret_cast<char*>(&im), sizeof im);
    out[m] = {re, im};
  }
  if (!is) throw std::runtime_error("read_raw: truncated file");
  return out;
}

}  // namespace pulseprop::spectral
