#pragma once

#include <complex>
#include <span>
#include <vector>

#include "hbell/types.hpp"

// Brute-force reference arithmetic in truncated multimode Fock space.
// Everything here works on explicit amplitude arrays; it is the slow,
// assumption-free path used to validate the closed-form module.

namespace hbell::fock {

using cdouble = std::complex<double>;

// Chooses per-mode photon-number cutoffs for coherent amplitudes so the
// neglected Poisson tail stays below tail_tol.
struct TruncationPolicy {
    double tail_tol = 1e-12;
    int floor = 12;
    int hard_cap = 72;

    // max(floor, ceil(a^2 + 10 sqrt(a^2+1))); throws numerical_error above hard_cap.
    int cutoff_for(double alpha) const;
};

struct LossChannel {
    double eta = 1.0;
};

// Dense amplitude array over photon occupations, row-major, one cutoff per
// mode. Indices beyond a mode's cutoff are implicitly zero.
class FockVector {
public:
    FockVector() = default;
    explicit FockVector(std::vector<int> dims);

    int mode_count() const { return static_cast<int>(dims_.size()); }
    int dim(int mode) const { return dims_[static_cast<size_t>(mode)]; }
    int cutoff(int mode) const { return dims_[static_cast<size_t>(mode)] - 1; }
    const std::vector<int>& dims() const { return dims_; }

    size_t size() const { return amps_.size(); }
    cdouble& operator[](size_t flat) { return amps_[flat]; }
    const cdouble& operator[](size_t flat) const { return amps_[flat]; }

    size_t flat_index(std::span<const int> occ) const;
    cdouble& at(std::span<const int> occ) { return amps_[flat_index(occ)]; }
    const cdouble& at(std::span<const int> occ) const { return amps_[flat_index(occ)]; }

    double squared_norm() const;

    std::span<const cdouble> amplitudes() const { return amps_; }
    std::span<cdouble> amplitudes() { return amps_; }

private:
    std::vector<int> dims_;
    std::vector<cdouble> amps_;
};

// Photon-number probability array with the same indexing as FockVector.
// Once a loss channel has acted the state is no longer pure, but all
// remaining operations here are diagonal in photon number, so tracking
// probabilities is sufficient.
class ProbArray {
public:
    ProbArray() = default;
    explicit ProbArray(std::vector<int> dims);
    explicit ProbArray(const FockVector& state);

    int mode_count() const { return static_cast<int>(dims_.size()); }
    int dim(int mode) const { return dims_[static_cast<size_t>(mode)]; }
    const std::vector<int>& dims() const { return dims_; }

    size_t size() const { return probs_.size(); }
    double& operator[](size_t flat) { return probs_[flat]; }
    const double& operator[](size_t flat) const { return probs_[flat]; }

    size_t flat_index(std::span<const int> occ) const;
    double at(std::span<const int> occ) const { return probs_[flat_index(occ)]; }

    double total() const;

private:
    std::vector<int> dims_;
    std::vector<double> probs_;
};

// |alpha e^{i phi}> truncated at the policy cutoff.
FockVector coherent_state(double alpha, double phi, const TruncationPolicy& policy = {});

// Two-mode source state on (b1, b2); amplitudes exactly as the family defines.
FockVector build_input(const InputSpec& spec, const TruncationPolicy& policy = {});

FockVector tensor(const FockVector& a, const FockVector& b);

// Two-mode transform with a general 2x2 unitary acting on creation operators:
//   a+ -> u00 c+ + u10 d+,   b+ -> u01 c+ + u11 d+.
// Output dims on the pair grow to hold the full joint photon number, so the
// transform is exactly norm-preserving.
struct ModeUnitary {
    cdouble u00, u01, u10, u11;
};
FockVector apply_two_mode_unitary(const FockVector& state, int i, int j, const ModeUnitary& u);

// Physical beamsplitter of mixing angle chi (cos chi = sqrt(T)):
//   c = cos(chi) a + i sin(chi) b,   d = i sin(chi) a + cos(chi) b.
FockVector apply_beamsplitter(const FockVector& state, int i, int j, double chi);

// Detection-side loss: mix the mode with a vacuum ancilla on a beamsplitter
// of transmissivity eta and marginalize the lost photons. Returns photon
// statistics (the channel output is diagonal in photon number for our use).
ProbArray apply_loss(const FockVector& state, int mode, LossChannel channel);
ProbArray apply_loss(const ProbArray& probs, int mode, LossChannel channel);

double detection_prob(const FockVector& state, std::span<const int> pattern);

// Full pipeline: |alpha1> (x) input (x) |alpha2>, both station beamsplitters,
// loss eta at all four outputs, then the joint probability of (e1, e2).
double oracle_event_prob(const InputSpec& spec, const Setting& s1, const Setting& s2,
                         EventPattern e1, EventPattern e2, double eta = 1.0,
                         const TruncationPolicy& policy = {});

// Local probability for one party, marginalizing the other party's outcomes.
// party is 1 (modes c1,d1) or 2 (modes c2,d2).
double oracle_local_prob(const InputSpec& spec, int party, const Setting& s,
                         EventPattern e, double eta = 1.0,
                         const TruncationPolicy& policy = {});

// Final four-mode detection statistics (c1,d1,c2,d2) of the pipeline above;
// exposed so tests can read marginals and totals directly.
ProbArray oracle_statistics(const InputSpec& spec, const Setting& s1, const Setting& s2,
                            double eta = 1.0, const TruncationPolicy& policy = {});

}  // namespace hbell::fock
