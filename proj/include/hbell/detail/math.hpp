#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace hbell::detail {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// log(n!) by direct accumulation; exact-ish for the index range we use.
inline double log_factorial(int n)
{
    static const auto table = [] {
        std::array<double, 321> t{};
        t[0] = 0.0;
        for (int i = 1; i < static_cast<int>(t.size()); ++i)
            t[static_cast<size_t>(i)] = t[static_cast<size_t>(i - 1)] + std::log(double(i));
        return t;
    }();
    return table[static_cast<size_t>(n)];
}

inline double factorial(int n)
{
    static const auto table = [] {
        std::array<double, 171> t{};
        t[0] = 1.0;
        for (int i = 1; i < static_cast<int>(t.size()); ++i)
            t[static_cast<size_t>(i)] = t[static_cast<size_t>(i - 1)] * double(i);
        return t;
    }();
    if (n < static_cast<int>(table.size())) return table[static_cast<size_t>(n)];
    return std::exp(log_factorial(n));
}

inline double binomial(int n, int k)
{
    if (k < 0 || k > n) return 0.0;
    return std::exp(log_factorial(n) - log_factorial(k) - log_factorial(n - k));
}

// Poisson pmf e^{-lambda} lambda^n / n!.
inline double poisson_pmf(double lambda, int n)
{
    if (n < 0) return 0.0;
    if (lambda == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(-lambda + n * std::log(lambda) - log_factorial(n));
}

// Upper tail P(X >= n) for X ~ Poisson(lambda); simple summed complement
// with a geometric cap for the far tail.
inline double poisson_tail(double lambda, int n)
{
    if (n <= 0) return 1.0;
    // Sum pmf from n upward until terms decay geometrically.
    double term = poisson_pmf(lambda, n);
    double sum = term;
    for (int k = n + 1; k < n + 2000; ++k) {
        term *= lambda / double(k);
        sum += term;
        if (double(k) > 2.0 * lambda && term < 1e-300) break;
    }
    return sum;
}

}  // namespace hbell::detail
