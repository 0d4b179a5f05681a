#include "hbell/bell.hpp"

#include <cmath>

#include "hbell/closedform.hpp"
#include "hbell/detail/math.hpp"
#include "hbell/fock.hpp"

namespace hbell::bell {

void CHProblem::validate() const
{
    input.validate();
    for (const Setting& s : settings) s.validate();
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("CHProblem: eta must be in (0,1]");
    if (scheme.nm.n < 0 || scheme.nm.m < 0)
        throw std::invalid_argument("CHProblem: negative event pattern");
    if (scheme.variant == SchemeVariant::MixedOnOff) {
        const bool alice_off = settings[0].is_off() || settings[1].is_off();
        const bool bob_off = settings[2].is_off() || settings[3].is_off();
        if (!alice_off || !bob_off)
            throw std::invalid_argument(
                "CHProblem: mixed_onoff needs an off setting on each side");
    }
}

namespace {

double joint_prob(const CHProblem& pb, const Setting& sa, const Setting& sb)
{
    const EventPattern ea = pb.scheme.event_for(sa);
    const EventPattern eb = pb.scheme.event_for(sb);
    const double p = pb.input.p;
    if (pb.input.family == StateFamily::Unbalanced)
        return fock::oracle_event_prob(pb.input, sa, sb, ea, eb, pb.eta);
    if (pb.eta < 1.0)
        return closedform::joint_prob_eta(pb.input.family, p, sa, sb, ea, eb, pb.eta);
    if (pb.input.family == StateFamily::PhotonPair)
        return closedform::pair_joint_general(p, sa, sb, ea, eb);
    if (ea == EventPattern{0, 1} && eb == EventPattern{0, 1})
        return closedform::joint_prob_single(p, sa, sb);
    return closedform::joint_prob_general(p, sa, sb, ea, eb);
}

double local_prob(const CHProblem& pb, int party, const Setting& s)
{
    const EventPattern e = pb.scheme.event_for(s);
    const double p = pb.input.p;
    if (pb.input.family == StateFamily::Unbalanced)
        return fock::oracle_local_prob(pb.input, party, s, e, pb.eta);
    if (pb.eta < 1.0)
        return closedform::local_prob_eta(pb.input.family, p, party, s, e, pb.eta);
    if (pb.input.family == StateFamily::PhotonPair)
        return closedform::pair_local_general(p, s, e);
    if (e == EventPattern{0, 1}) return closedform::local_prob_single(p, s);
    return closedform::local_prob_general(p, s, e);
}

}  // namespace

CHValue ch_value(const CHProblem& problem)
{
    problem.validate();
    const Setting& a = problem.settings[0];
    const Setting& ap = problem.settings[1];
    const Setting& b = problem.settings[2];
    const Setting& bp = problem.settings[3];

    CHValue out;
    out.components[0] = joint_prob(problem, a, b);
    out.components[1] = joint_prob(problem, a, bp);
    out.components[2] = joint_prob(problem, ap, b);
    out.components[3] = joint_prob(problem, ap, bp);
    out.components[4] = local_prob(problem, 1, a);
    out.components[5] = local_prob(problem, 2, b);
    out.value = out.components[0] + out.components[1] + out.components[2] - out.components[3] -
                out.components[4] - out.components[5];
    return out;
}

Settings4 hardy_settings(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("hardy_settings: p must be strictly inside (0,1)");
    const double alpha = std::sqrt(p / (2.0 * (1.0 - p)));
    const Setting on = Setting::on(alpha, detail::kPi / 2.0, 0.5);
    return {on, Setting::off(), on, Setting::off()};
}

double hardy_ch_closed(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("hardy_ch_closed: p must be strictly inside (0,1)");
    return std::exp(-p / (1.0 - p)) * p * p / (16.0 * (1.0 - p));
}

double ch_p1_closed(double alpha, double R)
{
    const double a2 = alpha * alpha;
    return -1.0 + (std::exp(-a2) * a2 - 2.0 * std::exp(-2.0 * a2) * a2 * (1.0 - R)) * R;
}

double absolute_form(double ch) { return std::abs(ch + 0.5); }
double absolute_form(const CHValue& ch) { return absolute_form(ch.value); }

double relative_ch(double ch_max, double p)
{
    if (!(p > 0.0)) throw std::invalid_argument("relative_ch: p must be > 0");
    return ch_max / p;
}

namespace {

// Bisection to ~1e-14; both target functions are strictly monotone on the
// bracketing intervals used below.
double bisect(double lo, double hi, double (*f)(double))
{
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((flo < 0.0) == (fm < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-15) break;
    }
    return 0.5 * (lo + hi);
}

double stationarity_fn(double x) { return std::exp(x) - 2.0 * (1.0 - 2.0 * x); }
double boundary_fn(double x) { return std::exp(x) - 2.0 * (1.0 - x); }

}  // namespace

double p1_stationarity_root() { return bisect(0.0, 0.25, stationarity_fn); }
double p1_boundary_root() { return bisect(0.25, 0.5, boundary_fn); }

}  // namespace hbell::bell
