#pragma once

// Probing the CTC channel along families of input states that converge to a
// common centre, and witness-based classification of gates as ephemerally
// discontinuous (no continuous choice of sigma_U(rho) exists) or physically
// discontinuous (no choice makes rho_hat continuous).
//
// A witness is a pair of approach directions along which Q_U(rho) is a
// singleton at every probed epsilon, whose forced limits both lie in the
// (multi-valued) set at the centre and differ by more than jump_tol. Any
// selection rule must then jump at the centre. Finding no witness proves
// nothing, hence the verdict name continuous_witnessed_none.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ctckit/core.hpp"
#include "ctckit/deutsch_map.hpp"
#include "ctckit/rng.hpp"
#include "ctckit/selection.hpp"

namespace ctckit {

// A one-parameter family of input states rho(eps) with rho(eps) -> centre as
// eps -> 0, either
//   pure rotation: |psi(eps)> = sqrt(1 - eps)|c> + sqrt(eps)|t>,  <c|t> = 0
//   convex mix:     rho(eps)  = (1 - eps) centre + eps target.
class StateFamily {
public:
    enum class Kind { PureRotation, ConvexMix };

    static StateFamily pure_rotation(ComplexVector centre, ComplexVector target, std::string label) {
        if (centre.size() != target.size()) throw DimensionError("pure_rotation: vector sizes differ");
        const double cn = centre.norm();
        if (cn == 0.0) throw InvalidStateError("pure_rotation: zero centre vector");
        centre /= cn;
        target -= centre * centre.dot(target);
        const double tn = target.norm();
        if (tn < 1e-12) throw InvalidStateError("pure_rotation: target has no component orthogonal to the centre");
        target /= tn;
        StateFamily f(Kind::PureRotation, std::move(label));
        f.centre_ = centre * centre.adjoint();
        f.target_ = target * target.adjoint();
        f.centre_vec_ = std::move(centre);
        f.target_vec_ = std::move(target);
        return f;
    }

    static StateFamily convex_mix(const DensityOperator& centre, const DensityOperator& target, std::string label) {
        if (centre.dim() != target.dim()) throw DimensionError("convex_mix: dimension mismatch");
        StateFamily f(Kind::ConvexMix, std::move(label));
        f.centre_ = centre.matrix();
        f.target_ = target.matrix();
        return f;
    }

    DensityOperator at(double eps) const {
        if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidStateError("state family parameter must lie in [0, 1]");
        if (kind_ == Kind::PureRotation) {
            const ComplexVector psi = std::sqrt(1.0 - eps) * centre_vec_ + std::sqrt(eps) * target_vec_;
            return DensityOperator(psi * psi.adjoint());
        }
        return DensityOperator((1.0 - eps) * centre_ + eps * target_);
    }

    Kind kind() const noexcept { return kind_; }
    const std::string& label() const noexcept { return label_; }
    Index dim() const noexcept { return centre_.rows(); }
    DensityOperator centre() const { return DensityOperator(centre_); }
    // Target state (|t><t| for pure rotations).
    DensityOperator target() const { return DensityOperator(target_); }
    const ComplexVector& centre_vector() const noexcept { return centre_vec_; }
    const ComplexVector& target_vector() const noexcept { return target_vec_; }

    // Identity of the family's content, used for memoisation.
    std::string key() const {
        std::string k = label_;
        k.push_back(kind_ == Kind::PureRotation ? 'p' : 'm');
        append_bytes(k, centre_);
        append_bytes(k, target_);
        return k;
    }

private:
    StateFamily(Kind kind, std::string label) : kind_(kind), label_(std::move(label)) {}

    static void append_bytes(std::string& s, const ComplexMatrix& m) {
        s.append(reinterpret_cast<const char*>(m.data()), static_cast<std::size_t>(m.size()) * sizeof(Complex));
    }

    Kind kind_;
    std::string label_;
    ComplexMatrix centre_;
    ComplexMatrix target_;
    ComplexVector centre_vec_;
    ComplexVector target_vec_;
};

inline std::vector<double> default_epsilons() { return {0.2, 0.1, 0.05, 0.01, 0.001}; }

struct ProbePath {
    std::string label;
    DensityOperator centre;
    StateFamily direction_a;
    StateFamily direction_b;
    std::vector<double> epsilons;  // strictly decreasing, in (0, 1]

    void validate() const {
        if (epsilons.empty()) throw InvalidStateError("probe path '" + label + "' has an empty epsilon grid");
        for (std::size_t i = 0; i < epsilons.size(); ++i) {
            if (!(epsilons[i] > 0.0 && epsilons[i] <= 1.0))
                throw InvalidStateError("probe path '" + label + "': epsilons must lie in (0, 1]");
            if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
                throw InvalidStateError("probe path '" + label + "': epsilons must be strictly decreasing");
        }
        for (const StateFamily* f : {&direction_a, &direction_b}) {
            if (f->dim() != centre.dim()) throw DimensionError("probe path '" + label + "': family dimension mismatch");
            if (trace_distance(f->centre(), centre) > 1e-12)
                throw InvalidStateError("probe path '" + label + "': family '" + f->label() + "' does not approach the centre");
            double prev = std::numeric_limits<double>::infinity();
            for (double e : epsilons) {
                const double d = trace_distance(f->at(e), centre);
                if (d > prev + 1e-12)
                    throw InvalidStateError("probe path '" + label + "': distance to centre increases along '" +
                                            f->label() + "'");
                prev = d;
            }
        }
    }

    std::vector<std::pair<double, DensityOperator>> samples(const StateFamily& f) const {
        std::vector<std::pair<double, DensityOperator>> out;
        for (double e : epsilons) out.emplace_back(e, f.at(e));
        return out;
    }
};

enum class PathStrategyKind { ExampleGate, VertexPairs, RandomSeeded };

inline std::string to_string(PathStrategyKind k) {
    switch (k) {
        case PathStrategyKind::ExampleGate: return "paper_example";
        case PathStrategyKind::VertexPairs: return "vertex_pairs";
        case PathStrategyKind::RandomSeeded: return "random_seeded";
    }
    return "unknown";
}

inline PathStrategyKind parse_path_strategy(const std::string& s) {
    if (s == "paper_example" || s == "paper-example") return PathStrategyKind::ExampleGate;
    if (s == "vertex_pairs" || s == "vertex-pairs") return PathStrategyKind::VertexPairs;
    if (s == "random_seeded" || s == "random-seeded" || s == "random") return PathStrategyKind::RandomSeeded;
    throw ParseError("unknown probe strategy '" + s + "' (expected paper_example, vertex_pairs or random_seeded)");
}

struct PathStrategy {
    PathStrategyKind kind = PathStrategyKind::VertexPairs;
    std::uint64_t seed = 0;
    Index random_directions = 6;  // per centre, random_seeded only
    std::vector<double> epsilons = default_epsilons();
};

namespace detail {

inline ComplexVector basis_vector(Index dim, Index i) {
    ComplexVector v = ComplexVector::Zero(dim);
    v(i) = 1.0;
    return v;
}

inline void add_pairs(std::vector<ProbePath>& out, Index dim1, Index c, const std::vector<StateFamily>& dirs,
                      const std::vector<double>& eps) {
    for (std::size_t i = 0; i < dirs.size(); ++i)
        for (std::size_t j = i + 1; j < dirs.size(); ++j)
            out.push_back(ProbePath{"centre " + std::to_string(c) + ": " + dirs[i].label() + " | " + dirs[j].label(),
                                    DensityOperator::basis_state(dim1, c), dirs[i], dirs[j], eps});
}

}  // namespace detail

// The two-sided approach to |00><00| on a two-qubit non-time-traveller:
//   a: |0><0| (x) diag(1 - eps, eps)      b: diag(1 - eps, eps) (x) |0><0|.
inline ProbePath example_gate_path(std::vector<double> epsilons = default_epsilons()) {
    const DensityOperator centre = DensityOperator::basis_state(4, 0);
    return ProbePath{"paper_example",
                     centre,
                     StateFamily::convex_mix(centre, DensityOperator::basis_state(4, 1), "rhoA"),
                     StateFamily::convex_mix(centre, DensityOperator::basis_state(4, 2), "rhoC"),
                     std::move(epsilons)};
}

// paper_example: the single path above (requires dim1 = 4).
// vertex_pairs: centres at every computational basis state |c> of H1 (products
//   of basis states of any factorisation), directions pure rotations from |c>
//   towards each other basis vector |w> and towards (|w1> + |w2>)/sqrt2 for
//   each pair of other basis vectors; one path per unordered direction pair.
// random_seeded: the same centres with random_directions random pure targets
//   orthogonal to |c>, drawn from the seed.
inline std::vector<ProbePath> generate_probe_paths(const UnitaryGate& u, const PathStrategy& s = {}) {
    const Index d1 = u.dim1();
    std::vector<ProbePath> out;
    switch (s.kind) {
        case PathStrategyKind::ExampleGate:
            if (d1 != 4) throw DimensionError("paper_example paths need a 4-dimensional non-time-traveller");
            out.push_back(example_gate_path(s.epsilons));
            break;
        case PathStrategyKind::VertexPairs:
            for (Index c = 0; c < d1; ++c) {
                const ComplexVector cv = detail::basis_vector(d1, c);
                std::vector<StateFamily> dirs;
                for (Index w = 0; w < d1; ++w)
                    if (w != c)
                        dirs.push_back(StateFamily::pure_rotation(cv, detail::basis_vector(d1, w),
                                                                  std::to_string(c) + "->" + std::to_string(w)));
                for (Index w1 = 0; w1 < d1; ++w1)
                    for (Index w2 = w1 + 1; w2 < d1; ++w2) {
                        if (w1 == c || w2 == c) continue;
                        dirs.push_back(StateFamily::pure_rotation(
                            cv, detail::basis_vector(d1, w1) + detail::basis_vector(d1, w2),
                            std::to_string(c) + "->" + std::to_string(w1) + "+" + std::to_string(w2)));
                    }
                detail::add_pairs(out, d1, c, dirs, s.epsilons);
            }
            break;
        case PathStrategyKind::RandomSeeded: {
            SeededRng rng(s.seed);
            for (Index c = 0; c < d1; ++c) {
                const ComplexVector cv = detail::basis_vector(d1, c);
                std::vector<StateFamily> dirs;
                for (Index r = 0; r < s.random_directions && d1 > 1; ++r) {
                    ComplexVector t(d1);
                    for (Index i = 0; i < d1; ++i) t(i) = Complex(rng.normal(), rng.normal());
                    t(c) = 0.0;
                    dirs.push_back(StateFamily::pure_rotation(cv, t, std::to_string(c) + "->r" + std::to_string(r)));
                }
                detail::add_pairs(out, d1, c, dirs, s.epsilons);
            }
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Probing

struct PointRecord {
    double epsilon = 0.0;  // 0 for the centre
    double distance_to_centre = 0.0;
    Index k = -1;          // -1 when the solver failed
    std::optional<DensityOperator> particular;
    std::optional<DensityOperator> sigma;
    std::optional<DensityOperator> rho_hat;
    double entropy = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    std::vector<std::string> warnings;
    std::string error;
};

struct DirectionTrace {
    std::string label;
    std::vector<PointRecord> points;
};

struct ProbeTrace {
    ProbePath path;
    PointRecord centre;
    DirectionTrace a;
    DirectionTrace b;
};

inline PointRecord evaluate_point(const UnitaryGate& u, const DensityOperator& rho, double eps, double distance,
                                  const SelectionRule& rule, const FixedPointOptions& fopt) {
    PointRecord r;
    r.epsilon = eps;
    r.distance_to_centre = distance;
    try {
        ChannelResult ch = ctc_channel(u, rho, rule, fopt);
        r.k = ch.fixed_points.k();
        r.particular = ch.fixed_points.particular;
        r.warnings = ch.fixed_points.warnings;
        r.entropy = ch.selection.entropy;
        r.converged = ch.selection.converged;
        r.sigma = std::move(ch.selection.sigma);
        r.rho_hat = std::move(ch.rho_hat);
    } catch (const Error& e) {
        r.error = e.what();
    }
    return r;
}

// Per-epsilon records along both directions plus the record at the centre.
// Solver failures are recorded per point and do not stop the sweep.
inline ProbeTrace probe(const UnitaryGate& u, const ProbePath& path, const SelectionRule& rule = {},
                        const FixedPointOptions& fopt = {}) {
    path.validate();
    detail::check_scenario_dims(u, path.centre.dim(), u.dim2(), "probe");
    ProbeTrace t{path, evaluate_point(u, path.centre, 0.0, 0.0, rule, fopt), {path.direction_a.label(), {}},
                 {path.direction_b.label(), {}}};
    for (double e : path.epsilons) {
        const DensityOperator ra = path.direction_a.at(e);
        const DensityOperator rb = path.direction_b.at(e);
        t.a.points.push_back(evaluate_point(u, ra, e, trace_distance(ra, path.centre), rule, fopt));
        t.b.points.push_back(evaluate_point(u, rb, e, trace_distance(rb, path.centre), rule, fopt));
    }
    return t;
}

// One row per epsilon per direction. The running jumps compare the two
// directions at the same epsilon and are empty when either point failed.
inline void write_probe_csv(const ProbeTrace& t, std::ostream& os) {
    const auto old = os.precision(17);
    os << "direction,epsilon,distance_to_centre,k,entropy,converged,sigma_00,rho_hat_00,sigma_jump_running,"
          "rho_hat_jump_running,error\n";
    for (int side = 0; side < 2; ++side) {
        const DirectionTrace& d = side == 0 ? t.a : t.b;
        const DirectionTrace& other = side == 0 ? t.b : t.a;
        for (std::size_t i = 0; i < d.points.size(); ++i) {
            const PointRecord& p = d.points[i];
            const PointRecord* q = i < other.points.size() ? &other.points[i] : nullptr;
            os << d.label << ',' << p.epsilon << ',' << p.distance_to_centre << ',' << p.k << ',' << p.entropy << ','
               << (p.converged ? 1 : 0) << ',';
            if (p.sigma) os << (*p.sigma)(0, 0).real();
            os << ',';
            if (p.rho_hat) os << (*p.rho_hat)(0, 0).real();
            os << ',';
            if (q && p.sigma && q->sigma) os << trace_distance(*p.sigma, *q->sigma);
            os << ',';
            if (q && p.rho_hat && q->rho_hat) os << trace_distance(*p.rho_hat, *q->rho_hat);
            std::string err = p.error;
            for (char& c : err)
                if (c == '"') c = '\'';
            os << ",\"" << err << "\"\n";
        }
    }
    os.precision(old);
}

// ---------------------------------------------------------------------------
// Classification

enum class Verdict { ContinuousWitnessedNone = 0, Ephemeral = 1, Physical = 2 };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::ContinuousWitnessedNone: return "continuous_witnessed_none";
        case Verdict::Ephemeral: return "ephemeral";
        case Verdict::Physical: return "physical";
    }
    return "unknown";
}

inline Verdict parse_verdict(const std::string& s) {
    if (s == "continuous_witnessed_none") return Verdict::ContinuousWitnessedNone;
    if (s == "ephemeral") return Verdict::Ephemeral;
    if (s == "physical") return Verdict::Physical;
    throw ParseError("unknown verdict '" + s + "'");
}

struct ClassifyOptions {
    PathStrategy strategy;
    double jump_tol = 0.1;  // trace distance
    // The epsilon grid is extended by refinement_factor this many times when a
    // jump lies within near_factor of jump_tol.
    Index max_refinements = 2;
    double refinement_factor = 0.1;
    double near_factor = 2.0;
    SelectionRule rule;  // used for the witness trace only
    FixedPointOptions fixed_point;
    bool build_witness = true;
};

struct PathEvidence {
    std::string label;
    Verdict level = Verdict::ContinuousWitnessedNone;
    bool singleton_a = false;
    bool singleton_b = false;
    bool limits_in_centre = false;
    double sigma_jump = 0.0;
    double rho_hat_jump = 0.0;
    Index refinements = 0;
    std::vector<double> epsilons;  // grid actually used
    std::string note;              // why the path is inconclusive, if it is
};

struct GateClassification {
    Verdict verdict = Verdict::ContinuousWitnessedNone;
    double sigma_jump = 0.0;
    double rho_hat_jump = 0.0;
    std::optional<ProbeTrace> witness;
    std::vector<PathEvidence> evidence;
    Index paths_examined = 0;
};

namespace detail {

struct DirectionLimit {
    bool singleton = false;
    std::vector<Index> ks;
    std::optional<DensityOperator> rho;  // at the finest epsilon
    std::optional<DensityOperator> sigma;
    std::optional<DensityOperator> rho_hat;
    std::string note;
};

inline std::string grid_key(const std::vector<double>& eps) {
    std::string k;
    k.append(reinterpret_cast<const char*>(eps.data()), eps.size() * sizeof(double));
    return k;
}

class LimitCache {
public:
    LimitCache(const UnitaryGate& u, const FixedPointOptions& fopt) : u_(u), fopt_(fopt) {}

    const DirectionLimit& direction(const StateFamily& f, const std::vector<double>& eps) {
        const std::string key = f.key() + '|' + grid_key(eps);
        if (auto it = dirs_.find(key); it != dirs_.end()) return it->second;
        DirectionLimit lim;
        lim.singleton = true;
        for (double e : eps) {
            const DensityOperator rho = f.at(e);
            try {
                const FixedPointSet fps = fixed_point_set(u_, rho, fopt_);
                lim.ks.push_back(fps.k());
                if (fps.k() != 0) {
                    lim.singleton = false;
                    lim.note = "Q is not a singleton along '" + f.label() + "' at eps = " + std::to_string(e);
                    break;
                }
                if (e == eps.back()) {
                    lim.rho = rho;
                    lim.sigma = fps.particular;
                    lim.rho_hat = evolve_out(u_, rho, fps.particular);
                }
            } catch (const Error& err) {
                lim.singleton = false;
                lim.note = "solver failure along '" + f.label() + "': " + err.what();
                break;
            }
        }
        return dirs_.emplace(key, std::move(lim)).first->second;
    }

    const FixedPointSet& centre(const DensityOperator& c) {
        std::string key(reinterpret_cast<const char*>(c.matrix().data()),
                        static_cast<std::size_t>(c.matrix().size()) * sizeof(Complex));
        if (auto it = centres_.find(key); it != centres_.end()) return it->second;
        return centres_.emplace(key, fixed_point_set(u_, c, fopt_)).first->second;
    }

private:
    const UnitaryGate& u_;
    const FixedPointOptions& fopt_;
    std::map<std::string, DirectionLimit> dirs_;
    std::map<std::string, FixedPointSet> centres_;
};

inline bool near_threshold(double jump, const ClassifyOptions& opt) {
    return jump >= opt.jump_tol / opt.near_factor && jump <= opt.jump_tol * opt.near_factor;
}

inline PathEvidence evaluate_path(const ProbePath& path, const ClassifyOptions& opt, LimitCache& cache) {
    PathEvidence ev;
    ev.label = path.label;
    ev.epsilons = path.epsilons;
    const DirectionLimit* a = &cache.direction(path.direction_a, ev.epsilons);
    const DirectionLimit* b = &cache.direction(path.direction_b, ev.epsilons);
    auto jumps = [&] {
        ev.sigma_jump = trace_distance(*a->sigma, *b->sigma);
        ev.rho_hat_jump = trace_distance(*a->rho_hat, *b->rho_hat);
    };
    if (a->singleton && b->singleton) {
        jumps();
        while (ev.refinements < opt.max_refinements &&
               (near_threshold(ev.sigma_jump, opt) || near_threshold(ev.rho_hat_jump, opt))) {
            ev.epsilons.push_back(ev.epsilons.back() * opt.refinement_factor);
            ++ev.refinements;
            a = &cache.direction(path.direction_a, ev.epsilons);
            b = &cache.direction(path.direction_b, ev.epsilons);
            if (!(a->singleton && b->singleton)) break;
            jumps();
        }
    }
    ev.singleton_a = a->singleton;
    ev.singleton_b = b->singleton;
    if (!(a->singleton && b->singleton)) {
        ev.note = !a->singleton ? a->note : b->note;
        return ev;
    }
    if (ev.sigma_jump <= opt.jump_tol) return ev;

    // Limits of fixed points are fixed points of the limit map. A fixed point
    // of the map at rho has residual at most td(rho, centre) under the centre
    // map (partial trace and unitary conjugation are trace-norm contractions).
    const FixedPointSet& qc = cache.centre(path.centre);
    auto in_centre = [&](const DirectionLimit& d) {
        MembershipOptions mo;
        mo.tolerance = trace_distance(*d.rho, path.centre) + qc.options.residual_tol;
        mo.check_affine = false;
        return membership(qc, *d.sigma, mo).member;
    };
    ev.limits_in_centre = in_centre(*a) && in_centre(*b);
    if (!ev.limits_in_centre) {
        ev.note = "approach limits are not consistent states at the centre";
        return ev;
    }
    ev.level = ev.rho_hat_jump > opt.jump_tol ? Verdict::Physical : Verdict::Ephemeral;
    return ev;
}

inline bool stronger(const PathEvidence& x, const PathEvidence& y) {
    if (x.level != y.level) return x.level > y.level;
    if (x.rho_hat_jump != y.rho_hat_jump) return x.rho_hat_jump > y.rho_hat_jump;
    return x.sigma_jump > y.sigma_jump;
}

}  // namespace detail

inline GateClassification classify_paths(const UnitaryGate& u, const std::vector<ProbePath>& paths,
                                         const ClassifyOptions& opt = {}) {
    GateClassification gc;
    detail::LimitCache cache(u, opt.fixed_point);
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        paths[i].validate();
        detail::check_scenario_dims(u, paths[i].centre.dim(), u.dim2(), "classify");
        gc.evidence.push_back(detail::evaluate_path(paths[i], opt, cache));
        const PathEvidence& ev = gc.evidence.back();
        if (ev.singleton_a && ev.singleton_b && (!best || detail::stronger(ev, gc.evidence[*best]))) best = i;
    }
    gc.paths_examined = static_cast<Index>(paths.size());
    if (best) {
        const PathEvidence& ev = gc.evidence[*best];
        gc.verdict = ev.level;
        gc.sigma_jump = ev.sigma_jump;
        gc.rho_hat_jump = ev.rho_hat_jump;
        if (opt.build_witness) {
            ProbePath wp = paths[*best];
            wp.epsilons = ev.epsilons;
            gc.witness = probe(u, wp, opt.rule, opt.fixed_point);
        }
    }
    return gc;
}

inline GateClassification classify(const UnitaryGate& u, const ClassifyOptions& opt = {}) {
    return classify_paths(u, generate_probe_paths(u, opt.strategy), opt);
}

}  // namespace ctckit
