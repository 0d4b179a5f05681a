#pragma once

#include <complex>
#include <functional>
#include <utility>

#include "hbell/types.hpp"

// Closed-form detection probabilities for the homodyne stations (fast path).
// Two independent routes live here on purpose: the single-photon-event
// expressions coded term by term as published, and the general-pattern forms
// built from per-station amplitudes with all singular prefactors cancelled
// algebraically. Both are validated against the Fock oracle.

namespace hbell::closedform {

using cdouble = std::complex<double>;

// Per-station amplitudes for detecting (n,m) photons in outputs (c,d):
//   lo     — local oscillator alone in the signal port's place (signal vacuum)
//   photon — one signal photon entering port b alongside the oscillator
// These are the building blocks of the general-pattern formulas; each carries
// its own factorial and sqrt(R),sqrt(T) factors so no negative powers appear.
struct StationAmps {
    cdouble lo;
    cdouble photon;
};
StationAmps station_amplitudes(const Setting& s, int n, int m);

// ---- vacuum-one-photon family ----------------------------------------------

// Joint probability of a single photon in d and none in c at both stations.
double joint_prob_single(double p, const Setting& s1, const Setting& s2);

// Local probability of the same event at one station (both parties share the
// same functional form; the published party-2 expression with its doubled
// sin(phi2) is treated as the mirror of party 1).
double local_prob_single(double p, const Setting& s);

// With the other party off: returns {P(on,off), P(off,off)}.
std::pair<double, double> offpair_probs(double p, const Setting& s_on);

// General pattern (n1,m1;n2,m2) at the two stations.
double joint_prob_general(double p, const Setting& s1, const Setting& s2,
                          EventPattern e1, EventPattern e2);

// General local pattern (n,m).
double local_prob_general(double p, const Setting& s, EventPattern e);

// On-station detects (n,m); the off-station detects exactly one photon.
double mixed_onoff_joint(double p, const Setting& s_on, EventPattern e);

// ---- photon-pair family -----------------------------------------------------

struct PairProbs {
    double joint;
    double local1;
    double local2;
};
// Single-photon events (0,1) at both stations.
PairProbs pair_probs(double p, const Setting& s1, const Setting& s2);

// General patterns for the pair family.
double pair_joint_general(double p, const Setting& s1, const Setting& s2,
                          EventPattern e1, EventPattern e2);
double pair_local_general(double p, const Setting& s, EventPattern e);

// ---- detector inefficiency ---------------------------------------------------

// Binomially weighted sum over unobserved photons. prob_source must return the
// ideal probability of an inflated pattern. The truncation tail is bounded via
// the Poisson tails of the local-oscillator intensities (lo_mean1/2 = alpha^2)
// plus at most signal_max source photons in total; the sum stops once the
// bound drops below tail_tol and throws numerical_error if the cap (60 extra
// photons) cannot meet it.
double convolve_inefficiency(
    const std::function<double(EventPattern, EventPattern)>& prob_source, double eta,
    EventPattern target1, EventPattern target2, double lo_mean1, double lo_mean2,
    int signal_max = 2, double tail_tol = 1e-12);

double convolve_inefficiency(const std::function<double(EventPattern)>& prob_source,
                             double eta, EventPattern target, double lo_mean,
                             int signal_max = 1, double tail_tol = 1e-12);

// Same binomial sums, factorized through the per-station amplitude structure
// (one thinning sum per station instead of a fourfold product sum). Exact for
// the families below; used by the CH evaluator for speed.
double joint_prob_eta(StateFamily family, double p, const Setting& s1, const Setting& s2,
                      EventPattern e1, EventPattern e2, double eta, double tail_tol = 1e-12);
double local_prob_eta(StateFamily family, double p, int party, const Setting& s,
                      EventPattern e, double eta, double tail_tol = 1e-12);

}  // namespace hbell::closedform
