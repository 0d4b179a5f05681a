#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace hbell {

// Numerical failure distinct from bad input: truncation caps exceeded,
// non-convergent sums, all optimizer restarts failed.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One party's measurement choice: local-oscillator amplitude/phase and the
// reflectivity R = sin^2(chi) of the station beamsplitter. The "off" setting
// is alpha = 0, R = 0 (beamsplitter fully transmitting, oscillator dark).
struct Setting {
    double alpha = 0.0;
    double phi = 0.0;
    double reflectivity = 0.0;

    constexpr double transmittivity() const { return 1.0 - reflectivity; }
    double chi() const { return std::asin(std::sqrt(reflectivity)); }
    constexpr bool is_off() const { return alpha == 0.0 && reflectivity == 0.0; }

    static constexpr Setting off() { return Setting{}; }
    static Setting on(double alpha, double phi, double reflectivity)
    {
        Setting s{alpha, phi, reflectivity};
        s.validate();
        return s;
    }

    void validate() const
    {
        if (!(alpha >= 0.0) || !std::isfinite(alpha))
            throw std::invalid_argument("Setting: alpha must be finite and >= 0");
        if (!(reflectivity >= 0.0 && reflectivity <= 1.0))
            throw std::invalid_argument("Setting: reflectivity must be in [0,1]");
        if (!std::isfinite(phi))
            throw std::invalid_argument("Setting: phi must be finite");
    }
};

// Photon-count outcome at one station: n photons in output c, m in output d.
struct EventPattern {
    int n = 0;
    int m = 1;

    friend constexpr bool operator==(EventPattern a, EventPattern b)
    {
        return a.n == b.n && a.m == b.m;
    }
};

enum class StateFamily { Vac1Photon, Unbalanced, PhotonPair };

// Two-mode source state fed into the measurement stations.
//   Vac1Photon(p):    sqrt(1-p)|00> + sqrt(p/2)(|01> + |10>)
//   Unbalanced(p,xi): sqrt(1-p)|00> + sqrt(p)(cos xi |01> + sin xi |10>)
//   PhotonPair(p):    sqrt(1-p)|00> + sqrt(p)|11>
// |01> means one photon in mode b2 and none in b1.
struct InputSpec {
    StateFamily family = StateFamily::Vac1Photon;
    double p = 0.0;
    double xi = 0.0;

    static InputSpec vac1photon(double p)
    {
        InputSpec s{StateFamily::Vac1Photon, p, 0.0};
        s.validate();
        return s;
    }
    static InputSpec unbalanced(double p, double xi)
    {
        InputSpec s{StateFamily::Unbalanced, p, xi};
        s.validate();
        return s;
    }
    static InputSpec photonpair(double p)
    {
        InputSpec s{StateFamily::PhotonPair, p, 0.0};
        s.validate();
        return s;
    }

    void validate() const
    {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("InputSpec: p must be in [0,1]");
        if (family == StateFamily::Unbalanced &&
            !(xi >= 0.0 && xi <= std::asin(1.0)))  // [0, pi/2]
            throw std::invalid_argument("InputSpec: xi must be in [0, pi/2]");
    }
};

std::string to_string(StateFamily family);
StateFamily family_from_string(const std::string& name);

}  // namespace hbell
