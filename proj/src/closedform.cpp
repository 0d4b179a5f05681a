#include "hbell/closedform.hpp"

#include <cmath>
#include <limits>

#include "hbell/detail/math.hpp"

namespace hbell::closedform {

using detail::binomial;
using detail::factorial;
using detail::poisson_pmf;

namespace {

// gamma^k / sqrt(k!)
cdouble coh_term(int k, cdouble gamma)
{
    cdouble u = 1.0;
    for (int i = 1; i <= k; ++i) u *= gamma / std::sqrt(double(i));
    return u;
}

double sqrt_nn(double x)
{
    return std::sqrt(std::max(x, 0.0));  // guards tiny negative round-off under sqrt
}

}  // namespace

StationAmps station_amplitudes(const Setting& s, int n, int m)
{
    const double R = s.reflectivity;
    const double T = 1.0 - R;
    const cdouble phase = std::exp(cdouble(0.0, s.phi));
    const cdouble gc = std::sqrt(T) * s.alpha * phase;
    const cdouble gd = cdouble(0.0, 1.0) * std::sqrt(R) * s.alpha * phase;
    const double envelope = std::exp(-0.5 * s.alpha * s.alpha);

    StationAmps a;
    a.lo = envelope * coh_term(n, gc) * coh_term(m, gd);
    cdouble ph{};
    if (n >= 1) ph += cdouble(0.0, 1.0) * std::sqrt(R) * std::sqrt(double(n)) * coh_term(n - 1, gc) * coh_term(m, gd);
    if (m >= 1) ph += std::sqrt(T) * std::sqrt(double(m)) * coh_term(n, gc) * coh_term(m - 1, gd);
    a.photon = envelope * ph;
    return a;
}

double joint_prob_single(double p, const Setting& s1, const Setting& s2)
{
    const double a1 = s1.alpha, a2 = s2.alpha;
    const double R1 = s1.reflectivity, R2 = s2.reflectivity;
    const double f1 = s1.phi, f2 = s2.phi;
    const double env = std::exp(-a1 * a1 - a2 * a2);
    const double bracket =
        (1.0 - p) * R1 * R2 * a1 * a1 * a2 * a2 +
        (p / 2.0) * (a1 * a1 * R1 * (1.0 - R2) + (1.0 - R1) * a2 * a2 * R2 +
                     2.0 * a1 * a2 * sqrt_nn(R1 * R2 * (1.0 - R1) * (1.0 - R2)) * std::cos(f1 - f2)) -
        a1 * a2 * sqrt_nn(2.0 * p * (1.0 - p) * R1 * R2) *
            (sqrt_nn((1.0 - R1) * R2) * a2 * std::sin(f1) + sqrt_nn(R1 * (1.0 - R2)) * a1 * std::sin(f2));
    return env * bracket;
}

double local_prob_single(double p, const Setting& s)
{
    const double a = s.alpha, R = s.reflectivity, f = s.phi;
    return 0.5 * std::exp(-a * a) *
           (p * (1.0 - R) + a * a * (2.0 - p) * R -
            2.0 * std::sqrt(2.0) * a * sqrt_nn(p * (1.0 - p) * R * (1.0 - R)) * std::sin(f));
}

std::pair<double, double> offpair_probs(double p, const Setting& s_on)
{
    const double a2 = s_on.alpha * s_on.alpha;
    return {(p / 2.0) * s_on.reflectivity * a2 * std::exp(-a2), 0.0};
}

double joint_prob_general(double p, const Setting& s1, const Setting& s2, EventPattern e1,
                          EventPattern e2)
{
    const StationAmps x1 = station_amplitudes(s1, e1.n, e1.m);
    const StationAmps x2 = station_amplitudes(s2, e2.n, e2.m);
    const cdouble amp = std::sqrt(1.0 - p) * x1.lo * x2.lo +
                        std::sqrt(p / 2.0) * (x1.photon * x2.lo + x1.lo * x2.photon);
    return std::norm(amp);
}

double local_prob_general(double p, const Setting& s, EventPattern e)
{
    const StationAmps x = station_amplitudes(s, e.n, e.m);
    const cdouble amp = std::sqrt(1.0 - p) * x.lo + std::sqrt(p / 2.0) * x.photon;
    return std::norm(amp) + (p / 2.0) * std::norm(x.lo);
}

double mixed_onoff_joint(double p, const Setting& s_on, EventPattern e)
{
    const double a2 = s_on.alpha * s_on.alpha;
    const double R = s_on.reflectivity;
    return p / (2.0 * factorial(e.m) * factorial(e.n)) * std::exp(-a2) *
           std::pow(a2, e.m + e.n) * std::pow(R, e.m) * std::pow(1.0 - R, e.n);
}

PairProbs pair_probs(double p, const Setting& s1, const Setting& s2)
{
    const double a1 = s1.alpha, a2 = s2.alpha;
    const double R1 = s1.reflectivity, R2 = s2.reflectivity;
    PairProbs out;
    out.joint = std::exp(-a1 * a1 - a2 * a2) *
                ((1.0 - p) * R1 * R2 * a1 * a1 * a2 * a2 + p * (1.0 - R1) * (1.0 - R2) -
                 2.0 * a1 * a2 * sqrt_nn(p * (1.0 - p)) * sqrt_nn(R1 * (1.0 - R1)) *
                     sqrt_nn(R2 * (1.0 - R2)) * std::cos(s1.phi + s2.phi));
    out.local1 = std::exp(-a1 * a1) * ((1.0 - p) * R1 * a1 * a1 + p * (1.0 - R1));
    out.local2 = std::exp(-a2 * a2) * ((1.0 - p) * R2 * a2 * a2 + p * (1.0 - R2));
    return out;
}

double pair_joint_general(double p, const Setting& s1, const Setting& s2, EventPattern e1,
                          EventPattern e2)
{
    const StationAmps x1 = station_amplitudes(s1, e1.n, e1.m);
    const StationAmps x2 = station_amplitudes(s2, e2.n, e2.m);
    const cdouble amp = std::sqrt(1.0 - p) * x1.lo * x2.lo + std::sqrt(p) * x1.photon * x2.photon;
    return std::norm(amp);
}

double pair_local_general(double p, const Setting& s, EventPattern e)
{
    const StationAmps x = station_amplitudes(s, e.n, e.m);
    return (1.0 - p) * std::norm(x.lo) + p * std::norm(x.photon);
}

namespace {

// Bound on the summed ideal probability over all patterns with exactly t total
// photons: at most signal_max source photons plus Poissonian oscillator light.
double shell_prob_bound(double lambda, int signal_max, int t)
{
    const int k = std::max(0, t - signal_max);
    if (double(k) < lambda) return 1.0;  // below the Poisson mode the bound is vacuous
    return double(signal_max + 1) * poisson_pmf(lambda, k);
}

// Sum of bound terms for shells s = from..from+span (extra undetected photons).
// Returns infinity when the window has not visibly converged yet.
double tail_bound(double eta, int event_total, double lambda, int signal_max, int from, int span = 48)
{
    double sum = 0.0;
    double last = 0.0;
    for (int s = from; s < from + span; ++s) {
        last = binomial(event_total + s, event_total) * std::pow(1.0 - eta, s) *
               shell_prob_bound(lambda, signal_max, event_total + s);
        sum += last;
    }
    if (last > 1e-6 * sum) return std::numeric_limits<double>::infinity();
    return sum;
}

constexpr int kExtraPhotonCap = 60;

}  // namespace

double convolve_inefficiency(
    const std::function<double(EventPattern, EventPattern)>& prob_source, double eta,
    EventPattern t1, EventPattern t2, double lo_mean1, double lo_mean2, int signal_max,
    double tail_tol)
{
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("convolve_inefficiency: eta must be in (0,1]");
    const int E = t1.n + t1.m + t2.n + t2.m;
    const double etaE = std::pow(eta, E);
    if (eta == 1.0) return etaE * prob_source(t1, t2);

    const double lambda = lo_mean1 + lo_mean2;
    double acc = 0.0;
    for (int s = 0; s <= kExtraPhotonCap; ++s) {
        for (int s1 = 0; s1 <= s; ++s1) {
            const int s2 = s - s1;
            for (int n = 0; n <= s1; ++n) {
                const int m = s1 - n;
                const double w1 = binomial(t1.n + n, t1.n) * binomial(t1.m + m, t1.m);
                for (int n2 = 0; n2 <= s2; ++n2) {
                    const int m2 = s2 - n2;
                    const double w2 = binomial(t2.n + n2, t2.n) * binomial(t2.m + m2, t2.m);
                    acc += w1 * w2 * etaE * std::pow(1.0 - eta, s) *
                           prob_source({t1.n + n, t1.m + m}, {t2.n + n2, t2.m + m2});
                }
            }
        }
        if (tail_bound(eta, E, lambda, signal_max, s + 1) * etaE < tail_tol) return acc;
    }
    throw numerical_error("convolve_inefficiency: tail bound not met within photon cap");
}

double convolve_inefficiency(const std::function<double(EventPattern)>& prob_source, double eta,
                             EventPattern target, double lo_mean, int signal_max, double tail_tol)
{
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("convolve_inefficiency: eta must be in (0,1]");
    const int E = target.n + target.m;
    const double etaE = std::pow(eta, E);
    if (eta == 1.0) return etaE * prob_source(target);

    double acc = 0.0;
    for (int s = 0; s <= kExtraPhotonCap; ++s) {
        for (int n = 0; n <= s; ++n) {
            const int m = s - n;
            acc += binomial(target.n + n, target.n) * binomial(target.m + m, target.m) * etaE *
                   std::pow(1.0 - eta, s) * prob_source({target.n + n, target.m + m});
        }
        if (tail_bound(eta, E, lo_mean, signal_max, s + 1) * etaE < tail_tol) return acc;
    }
    throw numerical_error("convolve_inefficiency: tail bound not met within photon cap");
}

namespace {

struct ThinnedSums {
    double lo2 = 0.0;          // sum w |C|^2
    double photon2 = 0.0;      // sum w |D|^2
    cdouble cross{};           // sum w D conj(C)
};

// One binomial thinning sum per station; the joint formulas below recombine
// these because every term of the ideal probability factorizes per station.
ThinnedSums station_thinned(const Setting& s, EventPattern e, double eta, double tail_tol)
{
    ThinnedSums out;
    const int K = e.n + e.m;
    const double etaK = std::pow(eta, K);
    const double lambda = s.alpha * s.alpha;
    for (int shell = 0; shell <= kExtraPhotonCap; ++shell) {
        double tl = 0.0, tp = 0.0;
        cdouble tc{};
        const double decay = std::pow(1.0 - eta, shell);
        if (shell == 0 || decay > 0.0) {
            for (int n = 0; n <= shell; ++n) {
                const int m = shell - n;
                const double w =
                    binomial(e.n + n, e.n) * binomial(e.m + m, e.m) * etaK * decay;
                const StationAmps a = station_amplitudes(s, e.n + n, e.m + m);
                tl += w * std::norm(a.lo);
                tp += w * std::norm(a.photon);
                tc += w * a.photon * std::conj(a.lo);
            }
        }
        out.lo2 += tl;
        out.photon2 += tp;
        out.cross += tc;
        if (eta == 1.0) return out;
        if (2.0 * tail_bound(eta, K, lambda, 1, shell + 1) * etaK < tail_tol) return out;
    }
    throw numerical_error("station_thinned: tail bound not met within photon cap");
}

}  // namespace

double joint_prob_eta(StateFamily family, double p, const Setting& s1, const Setting& s2,
                      EventPattern e1, EventPattern e2, double eta, double tail_tol)
{
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("joint_prob_eta: eta must be in (0,1]");
    const ThinnedSums t1 = station_thinned(s1, e1, eta, tail_tol);
    const ThinnedSums t2 = station_thinned(s2, e2, eta, tail_tol);
    switch (family) {
        case StateFamily::Vac1Photon:
            return (1.0 - p) * t1.lo2 * t2.lo2 +
                   (p / 2.0) * (t1.photon2 * t2.lo2 + t1.lo2 * t2.photon2) +
                   std::sqrt(2.0 * p * (1.0 - p)) *
                       (t1.cross.real() * t2.lo2 + t1.lo2 * t2.cross.real()) +
                   p * (t1.cross * std::conj(t2.cross)).real();
        case StateFamily::PhotonPair:
            return (1.0 - p) * t1.lo2 * t2.lo2 + p * t1.photon2 * t2.photon2 +
                   2.0 * std::sqrt(p * (1.0 - p)) * (t1.cross * t2.cross).real();
        case StateFamily::Unbalanced:
            throw std::invalid_argument("joint_prob_eta: unbalanced family has no closed forms");
    }
    throw std::logic_error("joint_prob_eta: unknown family");
}

double local_prob_eta(StateFamily family, double p, int /*party*/, const Setting& s,
                      EventPattern e, double eta, double tail_tol)
{
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("local_prob_eta: eta must be in (0,1]");
    const ThinnedSums t = station_thinned(s, e, eta, tail_tol);
    switch (family) {
        case StateFamily::Vac1Photon:
            return (1.0 - p / 2.0) * t.lo2 + (p / 2.0) * t.photon2 +
                   std::sqrt(2.0 * p * (1.0 - p)) * t.cross.real();
        case StateFamily::PhotonPair:
            return (1.0 - p) * t.lo2 + p * t.photon2;
        case StateFamily::Unbalanced:
            throw std::invalid_argument("local_prob_eta: unbalanced family has no closed forms");
    }
    throw std::logic_error("local_prob_eta: unknown family");
}

}  // namespace hbell::closedform
