#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hbell/bell.hpp"
#include "hbell/types.hpp"

// Extremal CH values over measurement settings: multi-start Nelder-Mead over
// (alpha, phi, R) per setting under the chosen constraint, deterministic for
// a given (problem, restarts, seed).

namespace hbell::optimize {

enum class Direction { Maximize, Minimize };

enum class Constraint {
    Free,         // all twelve parameters
    UnprimedOff,  // A and B pinned to off
    PrimedOff,    // A' and B' pinned to off
    MixedOff,     // A and B' pinned to off (one off choice per observer)
    Symmetric,    // Alice = Bob per setting (six parameters)
};

struct Bounds {
    double alpha_max = 3.0;
};

struct OptProblem {
    InputSpec input;
    bell::EventScheme scheme{};
    Direction direction = Direction::Maximize;
    Constraint constraint = Constraint::Free;
    double eta = 1.0;
    Bounds bounds{};

    void validate() const;
};

struct OptResult {
    bell::CHValue best{};
    bell::Settings4 settings{};
    std::array<double, 4> residuals{};  // |R - eta alpha^2| per setting
    double residual_max = 0.0;          // over settings that are not off
    int restarts_used = 0;
    int restarts_converged = 0;
    std::uint64_t seed = 0;
    // Extrema smaller than the significance floor (1e-9) carry no reliable
    // violation; flagged rather than suppressed.
    bool reliable = false;
};

OptResult optimize_ch(const OptProblem& problem, int restarts = 64, std::uint64_t seed = 1,
                      std::span<const bell::Settings4> warm_starts = {});

struct ScanPoint {
    double p = 0.0;
    OptResult result{};
    bool ok = false;
    std::string error;
};

// One optimization per grid point, warm-started from the neighbor's optimum.
std::vector<ScanPoint> scan_p(const OptProblem& templ, std::span<const double> p_grid,
                              int restarts, std::uint64_t seed);

enum class Side { Upper, Lower };

// Violation map in the (p, alpha^2) plane for the vacuum-one-photon family:
// on-settings frozen at the optimum for each p except the oscillator
// intensity, which is swept jointly at both stations.
struct RegionRow {
    double p = 0.0;
    double alpha0_sq = 0.0;  // optimal intensity at this p
    double phi0 = 0.0;       // optimal phase used for the row
    std::vector<std::uint8_t> violated;
};
struct RegionResult {
    Side side = Side::Upper;
    std::vector<double> p_grid;
    std::vector<double> a2_grid;
    std::vector<RegionRow> rows;
};
RegionResult violation_region(std::span<const double> p_grid, std::span<const double> a2_grid,
                              Side side, int restarts, std::uint64_t seed);

// Monte Carlo robustness of the violation against oscillator-intensity noise:
// mean of |CH(a^2) - CH(a0^2)| / |CH(a0^2)| in percent, a^2 drawn from a
// normal around the optimum with the lower tail rejected at 0.
double zeta(double p, double sigma_rel, int n_samples, std::uint64_t seed,
            Side side = Side::Upper, int restarts = 32);

struct EtaThreshold {
    double eta_min = 1.0;
    double p_at_min = 0.0;
    double best_ch = 0.0;
    bell::Settings4 settings{};
};
// Smallest detector efficiency whose best violation over p and settings still
// reaches the significance level; bisection over eta.
EtaThreshold eta_threshold(double significance, std::span<const double> p_grid,
                           std::uint64_t seed, int restarts = 6);

// Published fit for the optimal oscillator intensity of the maximize scan.
double alpha0_sq_fit(double p);

struct FitCheckPoint {
    double p = 0.0;
    double alpha0_sq_opt = 0.0;
    double alpha0_sq_fitted = 0.0;
    double deviation = 0.0;
};
struct FitCheck {
    std::vector<FitCheckPoint> points;
    double max_deviation = 0.0;
};
FitCheck fit_check_alpha0(std::span<const double> p_grid, int restarts, std::uint64_t seed);

// Number of worker threads used for restarts (HBELL_THREADS, default: cores).
int worker_threads();

}  // namespace hbell::optimize
