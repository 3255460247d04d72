#pragma once

// Sequency-ordered Walsh-Fourier transform.
//
// Row m (0-based) of the transform matrix is the Sylvester-Hadamard row
// bit_reverse(gray(m)); it changes sign exactly m times. The matrix is
// symmetric with W * W = T2 * I.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "atpm/common.hpp"

namespace atpm::walsh {

struct WalshSpectrum {
  std::vector<double> coefficients;  // index 0 is sequency 1 (the DC row)
  std::size_t t2 = 0;
  std::size_t original_length = 0;
};

bool is_power_of_two(std::size_t n);

/// Padded length: T itself when T is a power of two, else 2^(floor(log2 T)+1).
std::size_t padded_length(std::size_t length);

std::vector<double> pad(std::span<const double> values);

/// Dense ±1 matrix, row-major. Only for testing and diagnostics.
std::vector<std::vector<int>> walsh_matrix(std::size_t t2, std::size_t max_size = 1024);

/// Natural-order row index of sequency row `m` for size t2.
std::size_t sequency_to_natural(std::size_t m, std::size_t t2);

WalshSpectrum fwft(std::span<const double> padded, std::size_t original_length = 0);
std::vector<double> ifwft(const WalshSpectrum& spectrum);

/// Spectrum of a code sequence taken as integer values.
WalshSpectrum transform_codes(const CodeSequence& codes);

/// One spectrum per activity code over the 0/1 indicator series.
std::vector<WalshSpectrum> transform_one_hot(const CodeSequence& codes);

}  // namespace atpm::walsh
