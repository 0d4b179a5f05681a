#include "hbell/fock.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>

#include "hbell/detail/math.hpp"

namespace hbell::fock {

using detail::log_factorial;

int TruncationPolicy::cutoff_for(double alpha) const
{
    const double a2 = alpha * alpha;
    const int n = std::max(floor, static_cast<int>(std::ceil(a2 + 10.0 * std::sqrt(a2 + 1.0))));
    if (n > hard_cap)
        throw numerical_error("TruncationPolicy: required cutoff " + std::to_string(n) +
                              " exceeds hard cap " + std::to_string(hard_cap) +
                              " (alpha = " + std::to_string(alpha) + ")");
    return n;
}

FockVector::FockVector(std::vector<int> dims) : dims_(std::move(dims))
{
    size_t n = 1;
    for (int d : dims_) {
        if (d <= 0) throw std::invalid_argument("FockVector: nonpositive mode dimension");
        n *= static_cast<size_t>(d);
    }
    amps_.assign(n, cdouble{});
}

size_t FockVector::flat_index(std::span<const int> occ) const
{
    assert(occ.size() == dims_.size());
    size_t idx = 0;
    for (size_t k = 0; k < dims_.size(); ++k) {
        assert(occ[k] >= 0 && occ[k] < dims_[k]);
        idx = idx * static_cast<size_t>(dims_[k]) + static_cast<size_t>(occ[k]);
    }
    return idx;
}

double FockVector::squared_norm() const
{
    double s = 0.0;
    for (const cdouble& a : amps_) s += std::norm(a);
    return s;
}

ProbArray::ProbArray(std::vector<int> dims) : dims_(std::move(dims))
{
    size_t n = 1;
    for (int d : dims_) n *= static_cast<size_t>(d);
    probs_.assign(n, 0.0);
}

ProbArray::ProbArray(const FockVector& state) : dims_(state.dims())
{
    probs_.resize(state.size());
    for (size_t k = 0; k < probs_.size(); ++k) probs_[k] = std::norm(state[k]);
}

size_t ProbArray::flat_index(std::span<const int> occ) const
{
    assert(occ.size() == dims_.size());
    size_t idx = 0;
    for (size_t k = 0; k < dims_.size(); ++k) {
        assert(occ[k] >= 0 && occ[k] < dims_[k]);
        idx = idx * static_cast<size_t>(dims_[k]) + static_cast<size_t>(occ[k]);
    }
    return idx;
}

double ProbArray::total() const
{
    return std::accumulate(probs_.begin(), probs_.end(), 0.0);
}

FockVector coherent_state(double alpha, double phi, const TruncationPolicy& policy)
{
    if (alpha < 0.0) throw std::invalid_argument("coherent_state: alpha must be >= 0");
    const int cutoff = policy.cutoff_for(alpha);
    FockVector v(std::vector<int>{cutoff + 1});
    const cdouble g = alpha * std::exp(cdouble(0.0, phi));
    cdouble amp = std::exp(-0.5 * alpha * alpha);
    v[0] = amp;
    for (int n = 1; n <= cutoff; ++n) {
        amp *= g / std::sqrt(double(n));
        v[static_cast<size_t>(n)] = amp;
    }
    return v;
}

FockVector build_input(const InputSpec& spec, const TruncationPolicy&)
{
    spec.validate();
    FockVector v(std::vector<int>{2, 2});
    const double p = spec.p;
    const int b1 = 2;  // stride of mode b1 in the flat (2,2) layout
    switch (spec.family) {
        case StateFamily::Vac1Photon:
            v[0] = std::sqrt(1.0 - p);
            v[1] = std::sqrt(p / 2.0);       // |01>: photon in b2
            v[static_cast<size_t>(b1)] = std::sqrt(p / 2.0);  // |10>
            break;
        case StateFamily::Unbalanced:
            v[0] = std::sqrt(1.0 - p);
            v[1] = std::sqrt(p) * std::cos(spec.xi);
            v[static_cast<size_t>(b1)] = std::sqrt(p) * std::sin(spec.xi);
            break;
        case StateFamily::PhotonPair:
            v[0] = std::sqrt(1.0 - p);
            v[static_cast<size_t>(b1) + 1] = std::sqrt(p);  // |11>
            break;
    }
    return v;
}

FockVector tensor(const FockVector& a, const FockVector& b)
{
    std::vector<int> dims = a.dims();
    dims.insert(dims.end(), b.dims().begin(), b.dims().end());
    FockVector out(std::move(dims));
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == cdouble{}) continue;
        const size_t base = i * b.size();
        for (size_t j = 0; j < b.size(); ++j) out[base + j] = a[i] * b[j];
    }
    return out;
}

namespace {

// Amplitude vector of (t00 c+ + t10 d+)^k (t01 c+ + t11 d+)^l |0,0> / sqrt(k! l!)
// over outputs |n, k+l-n>.
std::vector<cdouble> pair_expansion(int k, int l, const ModeUnitary& u)
{
    const int s = k + l;
    std::vector<cdouble> coef(static_cast<size_t>(s) + 1, cdouble{});
    for (int n = 0; n <= s; ++n) {
        const int m = s - n;
        cdouble acc{};
        const int ulo = std::max(0, n - l);
        const int uhi = std::min(k, n);
        for (int uu = ulo; uu <= uhi; ++uu) {
            const int vv = n - uu;
            double b = std::exp(log_factorial(k) - log_factorial(uu) - log_factorial(k - uu) +
                                log_factorial(l) - log_factorial(vv) - log_factorial(l - vv));
            cdouble term = b;
            term *= std::pow(u.u00, uu) * std::pow(u.u10, k - uu);
            term *= std::pow(u.u01, vv) * std::pow(u.u11, l - vv);
            acc += term;
        }
        const double norm =
            std::exp(0.5 * (log_factorial(n) + log_factorial(m) - log_factorial(k) - log_factorial(l)));
        coef[static_cast<size_t>(n)] = acc * norm;
    }
    return coef;
}

std::vector<size_t> strides_of(const std::vector<int>& dims)
{
    std::vector<size_t> st(dims.size());
    size_t acc = 1;
    for (size_t k = dims.size(); k-- > 0;) {
        st[k] = acc;
        acc *= static_cast<size_t>(dims[k]);
    }
    return st;
}

}  // namespace

FockVector apply_two_mode_unitary(const FockVector& state, int i, int j, const ModeUnitary& u)
{
    const int nmodes = state.mode_count();
    if (i == j || i < 0 || j < 0 || i >= nmodes || j >= nmodes)
        throw std::invalid_argument("apply_two_mode_unitary: invalid mode indices");

    const int di = state.dim(i);
    const int dj = state.dim(j);
    const int smax = (di - 1) + (dj - 1);

    std::vector<int> odims = state.dims();
    odims[static_cast<size_t>(i)] = smax + 1;
    odims[static_cast<size_t>(j)] = smax + 1;
    FockVector out(odims);

    // One expansion per distinct input pair (k, l); everything else is scatter.
    std::vector<std::vector<cdouble>> expansion(static_cast<size_t>(di) * static_cast<size_t>(dj));
    for (int k = 0; k < di; ++k)
        for (int l = 0; l < dj; ++l)
            expansion[static_cast<size_t>(k * dj + l)] = pair_expansion(k, l, u);

    const auto istr = strides_of(state.dims());
    const auto ostr = strides_of(odims);

    std::vector<int> occ(static_cast<size_t>(nmodes), 0);
    const size_t n_in = state.size();
    for (size_t flat = 0; flat < n_in; ++flat) {
        const cdouble amp = state[flat];
        if (amp != cdouble{}) {
            const int k = occ[static_cast<size_t>(i)];
            const int l = occ[static_cast<size_t>(j)];
            size_t base = 0;
            for (int mmode = 0; mmode < nmodes; ++mmode)
                if (mmode != i && mmode != j)
                    base += static_cast<size_t>(occ[static_cast<size_t>(mmode)]) * ostr[static_cast<size_t>(mmode)];
            const auto& coef = expansion[static_cast<size_t>(k * dj + l)];
            const int s = k + l;
            for (int n = 0; n <= s; ++n) {
                if (coef[static_cast<size_t>(n)] == cdouble{}) continue;
                out[base + static_cast<size_t>(n) * ostr[static_cast<size_t>(i)] +
                    static_cast<size_t>(s - n) * ostr[static_cast<size_t>(j)]] +=
                    coef[static_cast<size_t>(n)] * amp;
            }
        }
        // advance multi-index
        for (int mmode = nmodes; mmode-- > 0;) {
            if (++occ[static_cast<size_t>(mmode)] < state.dim(mmode)) break;
            occ[static_cast<size_t>(mmode)] = 0;
        }
        (void)istr;
    }
    return out;
}

FockVector apply_beamsplitter(const FockVector& state, int i, int j, double chi)
{
    const double c = std::cos(chi);
    const cdouble is = cdouble(0.0, std::sin(chi));
    return apply_two_mode_unitary(state, i, j, ModeUnitary{c, is, is, c});
}

namespace {

// Thinning weights w[n][j] = |<n-j, j| U_loss |n, 0>|^2 from the generic pair
// expansion of the real loss beamsplitter (Appendix-style ancilla model).
std::vector<std::vector<double>> loss_weights(int dim, double eta)
{
    const double rt = std::sqrt(eta);
    const double rr = std::sqrt(1.0 - eta);
    const ModeUnitary u{rt, -rr, rr, rt};
    std::vector<std::vector<double>> w(static_cast<size_t>(dim));
    for (int n = 0; n < dim; ++n) {
        auto coef = pair_expansion(n, 0, u);
        // coef[k] multiplies |k, n-k>; kept photons k, lost photons n-k.
        std::vector<double> row(static_cast<size_t>(n) + 1, 0.0);
        for (int kept = 0; kept <= n; ++kept)
            row[static_cast<size_t>(n - kept)] = std::norm(coef[static_cast<size_t>(kept)]);
        w[static_cast<size_t>(n)] = std::move(row);  // row[j]: j photons lost
    }
    return w;
}

ProbArray smear_mode(const ProbArray& in, int mode, double eta)
{
    if (eta == 1.0) return in;
    const int nmodes = in.mode_count();
    const int d = in.dim(mode);
    const auto w = loss_weights(d, eta);

    ProbArray out(in.dims());
    const auto str = strides_of(in.dims());
    const size_t stride = str[static_cast<size_t>(mode)];

    std::vector<int> occ(static_cast<size_t>(nmodes), 0);
    for (size_t flat = 0; flat < in.size(); ++flat) {
        const double pr = in[flat];
        if (pr != 0.0) {
            const int n = occ[static_cast<size_t>(mode)];
            const auto& row = w[static_cast<size_t>(n)];
            for (int j = 0; j <= n; ++j)
                out[flat - static_cast<size_t>(j) * stride] += row[static_cast<size_t>(j)] * pr;
        }
        for (int mmode = nmodes; mmode-- > 0;) {
            if (++occ[static_cast<size_t>(mmode)] < in.dim(mmode)) break;
            occ[static_cast<size_t>(mmode)] = 0;
        }
    }
    return out;
}

}  // namespace

ProbArray apply_loss(const FockVector& state, int mode, LossChannel channel)
{
    if (mode < 0 || mode >= state.mode_count())
        throw std::invalid_argument("apply_loss: invalid mode index");
    if (!(channel.eta >= 0.0 && channel.eta <= 1.0))
        throw std::invalid_argument("apply_loss: eta must be in [0,1]");
    return smear_mode(ProbArray(state), mode, channel.eta);
}

ProbArray apply_loss(const ProbArray& probs, int mode, LossChannel channel)
{
    if (mode < 0 || mode >= probs.mode_count())
        throw std::invalid_argument("apply_loss: invalid mode index");
    if (!(channel.eta >= 0.0 && channel.eta <= 1.0))
        throw std::invalid_argument("apply_loss: eta must be in [0,1]");
    return smear_mode(probs, mode, channel.eta);
}

double detection_prob(const FockVector& state, std::span<const int> pattern)
{
    for (size_t k = 0; k < pattern.size(); ++k)
        if (pattern[k] < 0 || pattern[k] >= state.dim(static_cast<int>(k)))
            throw std::invalid_argument("detection_prob: pattern outside cutoff");
    return std::norm(state.at(pattern));
}

namespace {

// Pipeline state over modes [a1, b1, b2, a2] -> [c1, d1, d2, c2].
FockVector pipeline_state(const InputSpec& spec, const Setting& s1, const Setting& s2,
                          const TruncationPolicy& policy)
{
    s1.validate();
    s2.validate();
    FockVector lo1 = coherent_state(s1.alpha, s1.phi, policy);
    FockVector lo2 = coherent_state(s2.alpha, s2.phi, policy);
    FockVector st = tensor(tensor(lo1, build_input(spec, policy)), lo2);
    st = apply_beamsplitter(st, 0, 1, s1.chi());  // (a1,b1) -> (c1,d1)
    st = apply_beamsplitter(st, 3, 2, s2.chi());  // (a2,b2) -> (c2,d2)
    return st;
}

ProbArray pipeline_probs(const InputSpec& spec, const Setting& s1, const Setting& s2,
                         double eta, const TruncationPolicy& policy)
{
    FockVector st = pipeline_state(spec, s1, s2, policy);
    ProbArray pr(st);
    if (eta < 1.0)
        for (int mode = 0; mode < 4; ++mode) pr = smear_mode(pr, mode, eta);
    return pr;
}

}  // namespace

double oracle_event_prob(const InputSpec& spec, const Setting& s1, const Setting& s2,
                         EventPattern e1, EventPattern e2, double eta,
                         const TruncationPolicy& policy)
{
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("oracle_event_prob: eta must be in (0,1]");
    if (e1.n < 0 || e1.m < 0 || e2.n < 0 || e2.m < 0)
        throw std::invalid_argument("oracle_event_prob: negative pattern");
    ProbArray pr = pipeline_probs(spec, s1, s2, eta, policy);
    // layout [c1, d1, d2, c2]
    if (e1.n >= pr.dim(0) || e1.m >= pr.dim(1) || e2.m >= pr.dim(2) || e2.n >= pr.dim(3))
        return 0.0;
    const int occ[4] = {e1.n, e1.m, e2.m, e2.n};
    return pr.at(occ);
}

double oracle_local_prob(const InputSpec& spec, int party, const Setting& s, EventPattern e,
                         double eta, const TruncationPolicy& policy)
{
    if (party != 1 && party != 2) throw std::invalid_argument("oracle_local_prob: party must be 1 or 2");
    const Setting off = Setting::off();
    const Setting& s1 = (party == 1) ? s : off;
    const Setting& s2 = (party == 2) ? s : off;
    ProbArray pr = pipeline_probs(spec, s1, s2, eta, policy);

    // Sum the other party's outcomes up to cutoff. layout [c1, d1, d2, c2].
    const int cn = (party == 1) ? 0 : 3;
    const int cm = (party == 1) ? 1 : 2;
    if (e.n >= pr.dim(cn) || e.m >= pr.dim(cm)) return 0.0;

    double sum = 0.0;
    std::vector<int> occ(4, 0);
    for (size_t flat = 0; flat < pr.size(); ++flat) {
        if (occ[static_cast<size_t>(cn)] == e.n && occ[static_cast<size_t>(cm)] == e.m)
            sum += pr[flat];
        for (int mmode = 4; mmode-- > 0;) {
            if (++occ[static_cast<size_t>(mmode)] < pr.dim(mmode)) break;
            occ[static_cast<size_t>(mmode)] = 0;
        }
    }
    return sum;
}

ProbArray oracle_statistics(const InputSpec& spec, const Setting& s1, const Setting& s2,
                            double eta, const TruncationPolicy& policy)
{
    ProbArray pr = pipeline_probs(spec, s1, s2, eta, policy);
    // permute [c1, d1, d2, c2] -> [c1, d1, c2, d2]
    std::vector<int> dims = {pr.dim(0), pr.dim(1), pr.dim(3), pr.dim(2)};
    ProbArray out(dims);
    std::vector<int> occ(4, 0);
    for (size_t flat = 0; flat < pr.size(); ++flat) {
        if (pr[flat] != 0.0) {
            const int perm[4] = {occ[0], occ[1], occ[3], occ[2]};
            out[out.flat_index(perm)] = pr[flat];
        }
        for (int mmode = 4; mmode-- > 0;) {
            if (++occ[static_cast<size_t>(mmode)] < pr.dim(mmode)) break;
            occ[static_cast<size_t>(mmode)] = 0;
        }
    }
    return out;
}

}  // namespace hbell::fock
