#include "atpm/walsh.hpp"

#include <bit>
#include <string>

namespace atpm::walsh {

namespace {

std::size_t bit_reverse(std::size_t x, int bits) {
  std::size_t r = 0;
  for (int b = 0; b < bits; ++b) {
    r = (r << 1) | (x & 1u);
    x >>= 1;
  }
  return r;
}

void require_power_of_two(std::size_t n) {
  if (!is_power_of_two(n)) {
    throw InvalidArgument("length " + std::to_string(n) + " is not a power of two");
  }
}

/// In-place natural-order fast Walsh-Hadamard transform (unnormalized).
void hadamard_in_place(std::vector<double>& a) {
  const std::size_t n = a.size();
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += h << 1) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double x = a[j];
        const double y = a[j + h];
        a[j] = x + y;
        a[j + h] = x - y;
      }
    }
  }
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && std::has_single_bit(n); }

std::size_t padded_length(std::size_t length) {
  if (length == 0) throw InvalidArgument("cannot pad an empty series");
  if (is_power_of_two(length)) return length;
  return std::size_t{1} << std::bit_width(length);
}

std::vector<double> pad(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  out.resize(padded_length(values.size()), 0.0);
  return out;
}

std::size_t sequency_to_natural(std::size_t m, std::size_t t2) {
  const int bits = std::countr_zero(t2);
  return bit_reverse(m ^ (m >> 1), bits);
}

std::vector<std::vector<int>> walsh_matrix(std::size_t t2, std::size_t max_size) {
  require_power_of_two(t2);
  if (t2 > max_size) {
    throw InvalidArgument("walsh_matrix size " + std::to_string(t2) +
                          " exceeds cap " + std::to_string(max_size));
  }
  std::vector<std::vector<int>> rows(t2, std::vector<int>(t2));
  for (std::size_t m = 0; m < t2; ++m) {
    const std::size_t h = sequency_to_natural(m, t2);
    for (std::size_t n = 0; n < t2; ++n) {
      rows[m][n] = (std::popcount(h & n) & 1) ? -1 : 1;
    }
  }
  return rows;
}

WalshSpectrum fwft(std::span<const double> padded, std::size_t original_length) {
  require_power_of_two(padded.size());
  const std::size_t t2 = padded.size();
  std::vector<double> natural(padded.begin(), padded.end());
  hadamard_in_place(natural);

  WalshSpectrum s;
  s.t2 = t2;
  s.original_length = original_length == 0 ? t2 : original_length;
  s.coefficients.resize(t2);
  for (std::size_t m = 0; m < t2; ++m) {
    s.coefficients[m] = natural[sequency_to_natural(m, t2)];
  }
  return s;
}

std::vector<double> ifwft(const WalshSpectrum& spectrum) {
  const std::size_t t2 = spectrum.coefficients.size();
  require_power_of_two(t2);
  std::vector<double> natural(t2);
  for (std::size_t m = 0; m < t2; ++m) {
    natural[sequency_to_natural(m, t2)] = spectrum.coefficients[m];
  }
  hadamard_in_place(natural);
  const double scale = 1.0 / static_cast<double>(t2);
  for (auto& v : natural) v *= scale;
  return natural;
}

WalshSpectrum transform_codes(const CodeSequence& codes) {
  std::vector<double> values(codes.begin(), codes.end());
  return fwft(pad(values), codes.size());
}

std::vector<WalshSpectrum> transform_one_hot(const CodeSequence& codes) {
  std::vector<WalshSpectrum> out;
  out.reserve(kActivityCount);
  for (int c = 0; c < kActivityCount; ++c) {
    std::vector<double> indicator(codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i) indicator[i] = codes[i] == c ? 1.0 : 0.0;
    out.push_back(fwft(pad(indicator), codes.size()));
  }
  return out;
}

}  // namespace atpm::walsh
