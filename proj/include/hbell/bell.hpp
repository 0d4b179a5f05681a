#pragma once

#include <array>

#include "hbell/types.hpp"

// Clauser-Horne inequality assembly:
//   -1 <= P(A,B) + P(A,B') + P(A',B) - P(A',B') - P(A) - P(B) <= 0.

namespace hbell::bell {

enum class SchemeVariant {
    SinglePhotonDM,  // event = 0 photons in c, 1 in d, all settings
    SinglePhotonCM,  // event = 1 in c, 0 in d
    FixedNM,         // same (n,m) for all settings
    MixedOnOff,      // on-stations detect (n,m); off-stations one photon
};

struct EventScheme {
    SchemeVariant variant = SchemeVariant::SinglePhotonDM;
    EventPattern nm{0, 1};

    static EventScheme single_photon_dm() { return {SchemeVariant::SinglePhotonDM, {0, 1}}; }
    static EventScheme single_photon_cm() { return {SchemeVariant::SinglePhotonCM, {1, 0}}; }
    static EventScheme fixed_nm(int n, int m) { return {SchemeVariant::FixedNM, {n, m}}; }
    static EventScheme mixed_onoff(int n, int m) { return {SchemeVariant::MixedOnOff, {n, m}}; }

    // The detection event a station looks for under this scheme.
    EventPattern event_for(const Setting& s) const
    {
        if (variant == SchemeVariant::MixedOnOff && s.is_off()) return {0, 1};
        return nm;
    }
};

// Index order of settings and joint components everywhere below:
// A, A', B, B' and P(A,B), P(A,B'), P(A',B), P(A',B'), P(A), P(B).
using Settings4 = std::array<Setting, 4>;

struct CHProblem {
    InputSpec input;
    Settings4 settings{};
    EventScheme scheme{};
    double eta = 1.0;

    void validate() const;
};

struct CHValue {
    double value = 0.0;
    std::array<double, 6> components{};

    double joint_ab() const { return components[0]; }
    double joint_abp() const { return components[1]; }
    double joint_apb() const { return components[2]; }
    double joint_apbp() const { return components[3]; }
    double local_a() const { return components[4]; }
    double local_b() const { return components[5]; }
};

// Evaluates all six probabilities (closed forms where the family has them,
// Fock oracle otherwise, binomial thinning when eta < 1) and combines them.
CHValue ch_value(const CHProblem& problem);

// Hardy's construction translated to the symmetric input state: on-settings
// R = 1/2, alpha^2 = p/(2(1-p)), phi = pi/2 (unprimed); primed settings off.
Settings4 hardy_settings(double p);

// e^{-p/(1-p)} p^2 / (16(1-p)).
double hardy_ch_closed(double p);

// CH at p=1 with unprimed off, primed on at (alpha, R):
// -1 + [e^{-a^2} a^2 - 2 e^{-2a^2} a^2 (1-R)] R.
double ch_p1_closed(double alpha, double R);

// |CH + 1/2|; violation of either bound iff > 1/2.
double absolute_form(const CHValue& ch);
double absolute_form(double ch);

// ch_max / p.
double relative_ch(double ch_max, double p);

// Root of e^{x} = 2(1 - 2x): the stationarity condition of ch_p1_closed on
// the R = alpha^2 line (x = alpha^2 = R at the optimum).
double p1_stationarity_root();

// Root of e^{x} = 2(1 - x): where ch_p1_closed crosses -1 on the same line
// (the zero-violation boundary).
double p1_boundary_root();

}  // namespace hbell::bell
