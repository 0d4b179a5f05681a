#include "hbell/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>

#include "hbell/detail/math.hpp"
#include "hbell/detail/nelder_mead.hpp"
#include "hbell/detail/rng.hpp"

namespace hbell::optimize {

using detail::kTwoPi;

void OptProblem::validate() const
{
    input.validate();
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("OptProblem: eta must be in (0,1]");
    if (!(bounds.alpha_max > 0.0))
        throw std::invalid_argument("OptProblem: alpha_max must be positive");
    if (scheme.variant == bell::SchemeVariant::MixedOnOff && constraint != Constraint::UnprimedOff &&
        constraint != Constraint::PrimedOff && constraint != Constraint::MixedOff)
        throw std::invalid_argument(
            "OptProblem: mixed on/off events need an on/off settings constraint");
}

int worker_threads()
{
    if (const char* env = std::getenv("HBELL_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

// Maps the active parameter vector to the four settings. Index order within
// a block is (alpha, phi, R); blocks follow the A, A', B, B' order.
struct Layout {
    Constraint constraint;
    double alpha_max;

    int dims() const { return constraint == Constraint::Free ? 12 : 6; }

    void box(std::vector<double>& lo, std::vector<double>& hi) const
    {
        const int n = dims();
        lo.assign(static_cast<size_t>(n), 0.0);
        hi.resize(static_cast<size_t>(n));
        for (int k = 0; k < n; ++k) {
            switch (k % 3) {
                case 0: hi[static_cast<size_t>(k)] = alpha_max; break;
                case 1: hi[static_cast<size_t>(k)] = kTwoPi; break;
                default: hi[static_cast<size_t>(k)] = 1.0; break;
            }
        }
    }

    bell::Settings4 unpack(std::span<const double> x) const
    {
        const auto s = [&](int block) {
            return Setting{x[static_cast<size_t>(3 * block)], x[static_cast<size_t>(3 * block + 1)],
                           x[static_cast<size_t>(3 * block + 2)]};
        };
        switch (constraint) {
            case Constraint::Free: return bell::Settings4{s(0), s(1), s(2), s(3)};
            case Constraint::UnprimedOff:
                return bell::Settings4{Setting::off(), s(0), Setting::off(), s(1)};
            case Constraint::PrimedOff:
                return bell::Settings4{s(0), Setting::off(), s(1), Setting::off()};
            case Constraint::MixedOff:
                return bell::Settings4{Setting::off(), s(0), s(1), Setting::off()};
            case Constraint::Symmetric: return bell::Settings4{s(0), s(1), s(0), s(1)};
        }
        throw std::logic_error("Layout: unknown constraint");
    }

    std::vector<double> pack(const bell::Settings4& st) const
    {
        std::vector<double> x(static_cast<size_t>(dims()));
        const auto put = [&](int block, const Setting& s) {
            x[static_cast<size_t>(3 * block)] = std::min(s.alpha, alpha_max);
            x[static_cast<size_t>(3 * block + 1)] = s.phi;
            x[static_cast<size_t>(3 * block + 2)] = s.reflectivity;
        };
        switch (constraint) {
            case Constraint::Free:
                put(0, st[0]); put(1, st[1]); put(2, st[2]); put(3, st[3]);
                break;
            case Constraint::UnprimedOff: put(0, st[1]); put(1, st[3]); break;
            case Constraint::PrimedOff: put(0, st[0]); put(1, st[2]); break;
            case Constraint::MixedOff: put(0, st[1]); put(1, st[2]); break;
            case Constraint::Symmetric: put(0, st[0]); put(1, st[1]); break;
        }
        return x;
    }
};

bool family_is_symmetric(StateFamily f)
{
    return f == StateFamily::Vac1Photon || f == StateFamily::PhotonPair;
}

double wrap_phase(double phi)
{
    phi = std::fmod(phi, kTwoPi);
    return phi < 0.0 ? phi + kTwoPi : phi;
}

bool phase_inert(const Setting& s)
{
    return s.alpha == 0.0 || s.reflectivity == 0.0 || s.reflectivity == 1.0;
}

std::array<double, 12> flatten(const bell::Settings4& st)
{
    std::array<double, 12> v{};
    for (int k = 0; k < 4; ++k) {
        v[static_cast<size_t>(3 * k)] = st[static_cast<size_t>(k)].alpha;
        v[static_cast<size_t>(3 * k) + 1] = st[static_cast<size_t>(k)].phi;
        v[static_cast<size_t>(3 * k) + 2] = st[static_cast<size_t>(k)].reflectivity;
    }
    return v;
}

// Deterministic representative among the exact symmetry partners: inert
// phases zeroed, the sin-preserving reflection phi -> pi - phi applied jointly
// if it gives a lexicographically smaller vector, parties swapped likewise
// for symmetric families.
bell::Settings4 canonicalize(const OptProblem& pb, bell::Settings4 st)
{
    for (Setting& s : st) {
        s.phi = wrap_phase(s.phi);
        if (phase_inert(s)) s.phi = 0.0;
    }

    bell::Settings4 reflected = st;
    for (Setting& s : reflected) {
        if (!phase_inert(s)) s.phi = wrap_phase(detail::kPi - s.phi);
    }
    if (flatten(reflected) < flatten(st)) st = reflected;

    const bool swappable = family_is_symmetric(pb.input.family) &&
                           pb.constraint != Constraint::MixedOff;
    if (swappable) {
        bell::Settings4 swapped = {st[2], st[3], st[0], st[1]};
        if (flatten(swapped) < flatten(st)) st = swapped;
    }
    return st;
}

struct Candidate {
    double objective = 0.0;  // sign-adjusted, smaller is better
    bell::Settings4 settings{};
    bool converged = false;
    bool valid = false;
};

bool candidate_better(const Candidate& a, const Candidate& b)
{
    if (!b.valid) return a.valid;
    if (!a.valid) return false;
    if (a.objective != b.objective) return a.objective < b.objective;
    return flatten(a.settings) < flatten(b.settings);
}

}  // namespace

OptResult optimize_ch(const OptProblem& problem, int restarts, std::uint64_t seed,
                      std::span<const bell::Settings4> warm_starts)
{
    problem.validate();
    if (restarts < 1) throw std::invalid_argument("optimize_ch: restarts must be >= 1");

    const Layout layout{problem.constraint, problem.bounds.alpha_max};
    const int dim = layout.dims();
    std::vector<double> lo, hi;
    layout.box(lo, hi);

    const double sign = (problem.direction == Direction::Maximize) ? -1.0 : 1.0;
    const auto objective = [&](const std::vector<double>& x) {
        bell::CHProblem pb{problem.input, layout.unpack(x), problem.scheme, problem.eta};
        return sign * bell::ch_value(pb).value;
    };

    // Starting points: warm starts first, then a low-discrepancy sweep of the
    // box. Every third fresh start pins one settings pair at the off corner,
    // which is where the interesting optima live.
    std::vector<std::vector<double>> starts;
    starts.reserve(static_cast<size_t>(restarts));
    for (const auto& w : warm_starts) {
        if (static_cast<int>(starts.size()) >= restarts) break;
        starts.push_back(layout.pack(w));
    }
    detail::Xoshiro256 shift_rng(detail::substream_seed(seed, 0));
    detail::RSequence rseq(dim, shift_rng.uniform());
    std::vector<double> unit(static_cast<size_t>(dim));
    for (int k = static_cast<int>(starts.size()); k < restarts; ++k) {
        rseq.next(unit.data());
        std::vector<double> x(static_cast<size_t>(dim));
        for (int d = 0; d < dim; ++d) {
            double u = unit[static_cast<size_t>(d)];
            if (d % 3 == 0) u *= 0.5;  // bias oscillator amplitudes toward the weak-field range
            x[static_cast<size_t>(d)] = lo[static_cast<size_t>(d)] + u * (hi[static_cast<size_t>(d)] - lo[static_cast<size_t>(d)]);
        }
        if (layout.constraint == Constraint::Free || layout.constraint == Constraint::Symmetric) {
            const int phase = k % 3;
            if (phase == 1) {  // unprimed block(s) at off
                x[0] = 0.0;
                x[2] = 0.0;
                if (layout.constraint == Constraint::Free) x[6] = x[8] = 0.0;
            } else if (phase == 2) {  // primed block(s) at off
                x[3] = 0.0;
                x[5] = 0.0;
                if (layout.constraint == Constraint::Free) x[9] = x[11] = 0.0;
            }
        }
        starts.push_back(std::move(x));
    }

    detail::NelderMeadOptions coarse;
    coarse.max_iter = 400 * dim;
    coarse.f_tol = 1e-14;
    coarse.x_tol = 1e-9;
    detail::NelderMeadOptions polish = coarse;
    polish.init_step = 0.02;

    std::vector<Candidate> cands(starts.size());
    std::atomic<size_t> cursor{0};
    const int nthreads = std::min(worker_threads(), static_cast<int>(starts.size()));
    const auto work = [&]() {
        for (;;) {
            const size_t i = cursor.fetch_add(1);
            if (i >= starts.size()) return;
            auto r = detail::nelder_mead(objective, starts[i], lo, hi, coarse);
            r = detail::nelder_mead(objective, r.x, lo, hi, polish);
            Candidate c;
            c.converged = r.converged;
            c.settings = canonicalize(problem, layout.unpack(r.x));
            bell::CHProblem pb{problem.input, c.settings, problem.scheme, problem.eta};
            c.objective = sign * bell::ch_value(pb).value;
            c.valid = std::isfinite(c.objective);
            cands[i] = c;
        }
    };
    if (nthreads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(nthreads));
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    // Deterministic reduction independent of thread completion order.
    const Candidate* best = nullptr;
    int n_converged = 0;
    for (const Candidate& c : cands) {
        if (c.converged) ++n_converged;
        if (best == nullptr || candidate_better(c, *best)) best = &c;
    }
    if (best == nullptr || !best->valid || n_converged == 0)
        throw numerical_error("optimize_ch: no restart converged");

    OptResult out;
    out.settings = best->settings;
    bell::CHProblem pb{problem.input, out.settings, problem.scheme, problem.eta};
    out.best = bell::ch_value(pb);
    out.restarts_used = static_cast<int>(starts.size());
    out.restarts_converged = n_converged;
    out.seed = seed;
    out.reliable = std::abs(out.best.value) >= 1e-9;
    for (size_t k = 0; k < 4; ++k) {
        const Setting& s = out.settings[k];
        out.residuals[k] = std::abs(s.reflectivity - problem.eta * s.alpha * s.alpha);
        if (!s.is_off()) out.residual_max = std::max(out.residual_max, out.residuals[k]);
    }
    return out;
}

std::vector<ScanPoint> scan_p(const OptProblem& templ, std::span<const double> p_grid,
                              int restarts, std::uint64_t seed)
{
    std::vector<ScanPoint> out;
    out.reserve(p_grid.size());
    std::vector<bell::Settings4> warm;
    for (size_t i = 0; i < p_grid.size(); ++i) {
        ScanPoint pt;
        pt.p = p_grid[i];
        OptProblem pb = templ;
        pb.input.p = pt.p;
        try {
            pb.input.validate();
            const OptResult r =
                optimize_ch(pb, restarts, detail::substream_seed(seed, i), warm);
            pt.result = r;
            pt.ok = true;
            warm.assign(1, r.settings);
        } catch (const std::exception& e) {
            pt.ok = false;
            pt.error = e.what();
            warm.clear();
        }
        out.push_back(std::move(pt));
    }
    return out;
}

namespace {

OptProblem side_problem(double p, Side side)
{
    OptProblem pb;
    pb.input = InputSpec::vac1photon(p);
    pb.scheme = bell::EventScheme::single_photon_dm();
    if (side == Side::Upper) {
        pb.direction = Direction::Maximize;
        pb.constraint = Constraint::PrimedOff;
    } else {
        pb.direction = Direction::Minimize;
        pb.constraint = Constraint::UnprimedOff;
    }
    return pb;
}

// On-station pair of a side-constrained result: (A,B) upper, (A',B') lower.
std::pair<const Setting&, const Setting&> on_stations(const bell::Settings4& st, Side side)
{
    if (side == Side::Upper) return {st[0], st[2]};
    return {st[1], st[3]};
}

}  // namespace

RegionResult violation_region(std::span<const double> p_grid, std::span<const double> a2_grid,
                              Side side, int restarts, std::uint64_t seed)
{
    if (p_grid.empty() || a2_grid.empty())
        throw std::invalid_argument("violation_region: empty grid");

    RegionResult out;
    out.side = side;
    out.p_grid.assign(p_grid.begin(), p_grid.end());
    out.a2_grid.assign(a2_grid.begin(), a2_grid.end());

    std::vector<bell::Settings4> warm;
    for (size_t i = 0; i < p_grid.size(); ++i) {
        const double p = p_grid[i];
        const OptProblem pb = side_problem(p, side);
        const OptResult opt =
            optimize_ch(pb, restarts, detail::substream_seed(seed, i), warm);
        warm.assign(1, opt.settings);

        const auto [on1, on2] = on_stations(opt.settings, side);
        RegionRow row;
        row.p = p;
        row.alpha0_sq = 0.5 * (on1.alpha * on1.alpha + on2.alpha * on2.alpha);
        row.phi0 = on1.phi;
        row.violated.resize(a2_grid.size());

        for (size_t j = 0; j < a2_grid.size(); ++j) {
            const double a2 = a2_grid[j];
            Setting on{std::sqrt(a2), row.phi0, row.alpha0_sq};
            bell::Settings4 st = (side == Side::Upper)
                                     ? bell::Settings4{on, Setting::off(), on, Setting::off()}
                                     : bell::Settings4{Setting::off(), on, Setting::off(), on};
            bell::CHProblem chp{pb.input, st, pb.scheme, 1.0};
            const double v = bell::ch_value(chp).value;
            row.violated[j] = (side == Side::Upper) ? (v > 1e-9) : (v < -1.0 - 1e-9);
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

double zeta(double p, double sigma_rel, int n_samples, std::uint64_t seed, Side side, int restarts)
{
    if (n_samples < 1) throw std::invalid_argument("zeta: n_samples must be >= 1");
    if (sigma_rel < 0.0) throw std::invalid_argument("zeta: sigma_rel must be >= 0");

    const OptProblem pb = side_problem(p, side);
    const OptResult opt = optimize_ch(pb, restarts, detail::substream_seed(seed, 0));
    const double ch0 = opt.best.value;
    if (std::abs(ch0) < 1e-9)
        throw std::invalid_argument("zeta: no reliable violation at this p");
    if (sigma_rel == 0.0) return 0.0;

    const auto [on1, on2] = on_stations(opt.settings, side);
    const double alpha0_sq = 0.5 * (on1.alpha * on1.alpha + on2.alpha * on2.alpha);
    const double sigma = sigma_rel * alpha0_sq;

    detail::Xoshiro256 rng(detail::substream_seed(seed, 1));
    double acc = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        double a2 = alpha0_sq + sigma * rng.normal();
        while (a2 < 0.0) a2 = alpha0_sq + sigma * rng.normal();  // lower tail rejected at 0

        bell::Settings4 st = opt.settings;
        if (side == Side::Upper) {
            st[0].alpha = st[2].alpha = std::sqrt(a2);
        } else {
            st[1].alpha = st[3].alpha = std::sqrt(a2);
        }
        bell::CHProblem chp{pb.input, st, pb.scheme, 1.0};
        acc += std::abs(bell::ch_value(chp).value - ch0) / std::abs(ch0);
    }
    return 100.0 * acc / n_samples;
}

namespace {

struct EtaScanBest {
    double ch = -std::numeric_limits<double>::infinity();
    double p = 0.0;
    bell::Settings4 settings{};
};

// Best violation over the p grid at fixed eta; warm starts flow along the
// grid and across eta evaluations via warm_map.
EtaScanBest best_over_p(double eta, std::span<const double> p_grid, int restarts,
                        std::uint64_t seed, std::vector<bell::Settings4>& warm_map)
{
    EtaScanBest best;
    warm_map.resize(p_grid.size());
    for (size_t i = 0; i < p_grid.size(); ++i) {
        const double p = p_grid[i];
        OptProblem pb;
        pb.input = InputSpec::vac1photon(p);
        pb.scheme = bell::EventScheme::single_photon_dm();
        pb.direction = Direction::Maximize;
        pb.constraint = Constraint::Symmetric;
        pb.eta = eta;

        // Known structure of the optimum as a deterministic warm start.
        const double a2 = alpha0_sq_fit(p);
        bell::Settings4 guess{Setting{std::sqrt(a2), detail::kPi / 2.0, eta * a2}, Setting::off(),
                              Setting{std::sqrt(a2), detail::kPi / 2.0, eta * a2}, Setting::off()};
        std::vector<bell::Settings4> warm{guess};
        if (warm_map[i][0].alpha != 0.0 || warm_map[i][1].alpha != 0.0)
            warm.push_back(warm_map[i]);
        if (i > 0) warm.push_back(warm_map[i - 1]);

        const OptResult r = optimize_ch(pb, restarts, detail::substream_seed(seed, i), warm);
        warm_map[i] = r.settings;
        if (r.best.value > best.ch) {
            best.ch = r.best.value;
            best.p = p;
            best.settings = r.settings;
        }
    }
    return best;
}

}  // namespace

EtaThreshold eta_threshold(double significance, std::span<const double> p_grid,
                           std::uint64_t seed, int restarts)
{
    if (!(significance > 0.0))
        throw std::invalid_argument("eta_threshold: significance must be positive");
    if (p_grid.empty()) throw std::invalid_argument("eta_threshold: empty p grid");

    std::vector<bell::Settings4> warm_map;
    double lo = 0.80, hi = 1.0;
    EtaScanBest at_hi = best_over_p(hi, p_grid, restarts, seed, warm_map);
    if (at_hi.ch < significance)
        throw numerical_error("eta_threshold: no violation even at eta = 1");

    EtaScanBest at_lo = best_over_p(lo, p_grid, restarts, seed, warm_map);
    while (at_lo.ch >= significance) {
        hi = lo;
        at_hi = at_lo;
        lo -= 0.10;
        if (lo <= 0.0) throw numerical_error("eta_threshold: threshold below eta = 0.1");
        at_lo = best_over_p(lo, p_grid, restarts, seed, warm_map);
    }

    while (hi - lo > 1e-3) {
        const double mid = 0.5 * (lo + hi);
        const EtaScanBest at_mid = best_over_p(mid, p_grid, restarts, seed, warm_map);
        if (at_mid.ch >= significance) {
            hi = mid;
            at_hi = at_mid;
        } else {
            lo = mid;
        }
    }

    EtaThreshold out;
    out.eta_min = hi;
    out.p_at_min = at_hi.p;
    out.best_ch = at_hi.ch;
    out.settings = at_hi.settings;
    return out;
}

double alpha0_sq_fit(double p)
{
    return 1.0 - std::pow(1.0 - std::pow(p, 0.39634), 0.453581);
}

FitCheck fit_check_alpha0(std::span<const double> p_grid, int restarts, std::uint64_t seed)
{
    OptProblem templ;
    templ.input = InputSpec::vac1photon(0.5);
    templ.scheme = bell::EventScheme::single_photon_dm();
    templ.direction = Direction::Maximize;
    templ.constraint = Constraint::PrimedOff;

    FitCheck out;
    const auto scan = scan_p(templ, p_grid, restarts, seed);
    for (const ScanPoint& pt : scan) {
        if (!pt.ok) throw numerical_error("fit_check_alpha0: scan failed at p = " + std::to_string(pt.p));
        const auto [on1, on2] = on_stations(pt.result.settings, Side::Upper);
        FitCheckPoint fp;
        fp.p = pt.p;
        fp.alpha0_sq_opt = 0.5 * (on1.alpha * on1.alpha + on2.alpha * on2.alpha);
        fp.alpha0_sq_fitted = alpha0_sq_fit(pt.p);
        fp.deviation = std::abs(fp.alpha0_sq_opt - fp.alpha0_sq_fitted);
        out.max_deviation = std::max(out.max_deviation, fp.deviation);
        out.points.push_back(fp);
    }
    return out;
}

}  // namespace hbell::optimize
