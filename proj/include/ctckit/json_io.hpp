#pragma once

// JSON encoding of the library's values (nlohmann::json).
//
// Matrices:  { "rows": r, "cols": c, "re": [...], "im": [...] }, row-major.
// Gates:     { "dim1", "dim2", "perm": [images of basis indices] } for
//            permutation gates, { "dim1", "dim2", "matrix": {...} } otherwise.
// States accept, besides the matrix form, the shorthands
//   { "bloch": [x, y, z] }, { "diag": [...] }, { "ket": [...] | {"re", "im"} },
//   { "basis": {"dim": d, "index": i} } and { "product": [state, ...] }.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "ctckit/core.hpp"
#include "ctckit/deutsch_map.hpp"
#include "ctckit/discontinuity.hpp"
#include "ctckit/selection.hpp"

namespace ctckit::io {

using json = nlohmann::json;

inline std::string fnv1a_hex(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace detail {

inline const json& field(const json& j, const char* key) {
    if (!j.is_object()) throw ParseError(std::string("expected a JSON object with field '") + key + "'");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'");
    return *it;
}

template <class T>
T get(const json& j, const char* key) {
    try {
        return field(j, key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return get<T>(j, key);
}

template <class T>
T as(const json& j, const char* what) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Linear algebra

inline json to_json(const ComplexMatrix& m) {
    std::vector<double> re, im;
    re.reserve(static_cast<std::size_t>(m.size()));
    im.reserve(static_cast<std::size_t>(m.size()));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            re.push_back(m(i, j).real());
            im.push_back(m(i, j).imag());
        }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

inline ComplexMatrix matrix_from_json(const json& j) {
    const auto rows = detail::get<Index>(j, "rows");
    const auto cols = detail::get<Index>(j, "cols");
    if (rows < 0 || cols < 0) throw ParseError("matrix dimensions must be non-negative");
    const auto re = detail::get<std::vector<double>>(j, "re");
    const auto im = detail::get_or<std::vector<double>>(j, "im", std::vector<double>(re.size(), 0.0));
    const auto n = static_cast<std::size_t>(rows * cols);
    if (re.size() != n || im.size() != n)
        throw ParseError("matrix: expected " + std::to_string(n) + " entries in 're' and 'im'");
    ComplexMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index c = 0; c < cols; ++c) {
            const auto k = static_cast<std::size_t>(i * cols + c);
            m(i, c) = Complex(re[k], im[k]);
        }
    if (!all_finite(m)) throw ParseError("matrix has non-finite entries");
    return m;
}

inline json to_json(const RealVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline RealVector real_vector_from_json(const json& j) {
    const auto v = detail::as<std::vector<double>>(j, "real vector");
    return Eigen::Map<const RealVector>(v.data(), static_cast<Index>(v.size()));
}

inline json to_json(const RealMatrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(RealVector(m.row(i).transpose())));
    return rows;
}

inline RealMatrix real_matrix_from_json(const json& j, Index cols_if_empty = 0) {
    const auto rows = detail::as<std::vector<std::vector<double>>>(j, "real matrix");
    const Index cols = rows.empty() ? cols_if_empty : static_cast<Index>(rows.front().size());
    RealMatrix m(static_cast<Index>(rows.size()), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<Index>(rows[i].size()) != cols) throw ParseError("real matrix has ragged rows");
        for (Index c = 0; c < cols; ++c) m(static_cast<Index>(i), c) = rows[i][static_cast<std::size_t>(c)];
    }
    return m;
}

// ---------------------------------------------------------------------------
// States and gates

inline json to_json(const DensityOperator& s) { return to_json(s.matrix()); }

inline json to_json(const BlochVector& v) { return {{"x", v.x}, {"y", v.y}, {"z", v.z}}; }

inline ComplexVector ket_from_json(const json& j) {
    if (j.is_array()) {
        const auto re = detail::as<std::vector<double>>(j, "ket");
        ComplexVector v(static_cast<Index>(re.size()));
        for (std::size_t i = 0; i < re.size(); ++i) v(static_cast<Index>(i)) = re[i];
        return v;
    }
    const auto re = detail::get<std::vector<double>>(j, "re");
    const auto im = detail::get_or<std::vector<double>>(j, "im", std::vector<double>(re.size(), 0.0));
    if (im.size() != re.size()) throw ParseError("ket: 're' and 'im' lengths differ");
    ComplexVector v(static_cast<Index>(re.size()));
    for (std::size_t i = 0; i < re.size(); ++i) v(static_cast<Index>(i)) = Complex(re[i], im[i]);
    return v;
}

inline DensityOperator density_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("density operator must be a JSON object");
    if (j.contains("rows")) return DensityOperator(matrix_from_json(j));
    if (j.contains("bloch")) {
        const auto v = detail::get<std::vector<double>>(j, "bloch");
        if (v.size() != 3) throw ParseError("bloch: expected three components");
        return from_bloch({v[0], v[1], v[2]});
    }
    if (j.contains("diag")) return DensityOperator::diagonal(detail::get<std::vector<double>>(j, "diag"));
    if (j.contains("ket")) return DensityOperator::pure(ket_from_json(j.at("ket")));
    if (j.contains("basis")) {
        const json& b = j.at("basis");
        return DensityOperator::basis_state(detail::get<Index>(b, "dim"), detail::get<Index>(b, "index"));
    }
    if (j.contains("product")) {
        const json& fs = j.at("product");
        if (!fs.is_array() || fs.empty()) throw ParseError("product: expected a non-empty list of factor states");
        ComplexMatrix m = density_from_json(fs.front()).matrix();
        for (std::size_t i = 1; i < fs.size(); ++i) m = kron(m, density_from_json(fs[i]).matrix());
        return DensityOperator(std::move(m));
    }
    throw ParseError("unrecognised density operator encoding");
}

inline json to_json(const UnitaryGate& u) {
    json j{{"dim1", u.dim1()}, {"dim2", u.dim2()}};
    if (u.is_permutation())
        j["perm"] = *u.permutation();
    else
        j["matrix"] = to_json(u.matrix());
    return j;
}

inline UnitaryGate gate_from_json(const json& j) {
    if (j.is_object() && j.contains("named")) {
        const auto name = detail::get<std::string>(j, "named");
        if (name == "example_discontinuous") return example_discontinuous_gate();
        if (name == "identity") return UnitaryGate::identity(detail::get<Index>(j, "dim1"), detail::get<Index>(j, "dim2"));
        if (name == "swap") return UnitaryGate::swap(detail::get<Index>(j, "dim"));
        throw ParseError("unknown named gate '" + name + "'");
    }
    const auto d1 = detail::get<Index>(j, "dim1");
    const auto d2 = detail::get<Index>(j, "dim2");
    if (j.contains("perm")) return UnitaryGate::from_permutation(d1, d2, detail::get<std::vector<Index>>(j, "perm"));
    if (j.contains("matrix")) return UnitaryGate::from_matrix(d1, d2, matrix_from_json(j.at("matrix")));
    throw ParseError("gate needs either 'perm' or 'matrix'");
}

// ---------------------------------------------------------------------------
// Fixed-point sets and selection

inline json to_json(const FixedPointOptions& o) {
    return {{"sv_tol", o.sv_tol},
            {"residual_tol", o.residual_tol},
            {"cesaro_max_iters", o.cesaro_max_iters},
            {"cesaro_tol", o.cesaro_tol},
            {"near_threshold_factor", o.near_threshold_factor}};
}

inline FixedPointOptions fixed_point_options_from_json(const json& j, FixedPointOptions o = {}) {
    o.sv_tol = detail::get_or(j, "sv_tol", o.sv_tol);
    o.residual_tol = detail::get_or(j, "residual_tol", o.residual_tol);
    o.cesaro_max_iters = detail::get_or(j, "cesaro_max_iters", o.cesaro_max_iters);
    o.cesaro_tol = detail::get_or(j, "cesaro_tol", o.cesaro_tol);
    o.near_threshold_factor = detail::get_or(j, "near_threshold_factor", o.near_threshold_factor);
    return o;
}

inline json to_json(const AffineMapReal& m) { return {{"linear", to_json(m.linear)}, {"offset", to_json(m.offset)}}; }

inline AffineMapReal affine_map_from_json(const json& j) {
    AffineMapReal m{real_matrix_from_json(detail::field(j, "linear")), real_vector_from_json(detail::field(j, "offset"))};
    if (m.linear.rows() != m.offset.size()) throw ParseError("affine map: offset length differs from row count");
    return m;
}

inline json to_json(const FixedPointSet& f) {
    json basis = json::array();
    for (const auto& b : f.basis) basis.push_back(to_json(b));
    return {{"gate", to_json(f.gate)},
            {"rho", to_json(f.rho)},
            {"dim2", f.dim2()},
            {"k", f.k()},
            {"particular", to_json(f.particular)},
            {"particular_coordinates", to_json(f.particular_coordinates)},
            {"basis", basis},
            {"basis_coordinates", to_json(RealMatrix(f.basis_coordinates.transpose()))},
            {"singular_values", to_json(f.singular_values)},
            {"map", to_json(f.map)},
            {"map_residual", f.map_residual},
            {"cesaro_residual", f.cesaro_residual},
            {"cesaro_iterations", f.cesaro_iterations},
            {"warnings", f.warnings},
            {"options", to_json(f.options)}};
}

inline FixedPointSet fixed_point_set_from_json(const json& j) {
    std::vector<ComplexMatrix> basis;
    for (const auto& b : detail::field(j, "basis")) basis.push_back(matrix_from_json(b));
    const RealVector x0 = real_vector_from_json(detail::field(j, "particular_coordinates"));
    const RealMatrix bc = real_matrix_from_json(detail::field(j, "basis_coordinates"), x0.size()).transpose();
    if (static_cast<std::size_t>(bc.cols()) != basis.size() || detail::get<Index>(j, "k") != bc.cols())
        throw ParseError("fixed point set: basis and k disagree");
    return FixedPointSet{gate_from_json(detail::field(j, "gate")),
                         density_from_json(detail::field(j, "rho")),
                         affine_map_from_json(detail::field(j, "map")),
                         density_from_json(detail::field(j, "particular")),
                         x0,
                         bc,
                         std::move(basis),
                         real_vector_from_json(detail::field(j, "singular_values")),
                         detail::get<double>(j, "map_residual"),
                         detail::get<double>(j, "cesaro_residual"),
                         detail::get<Index>(j, "cesaro_iterations"),
                         detail::get<std::vector<std::string>>(j, "warnings"),
                         fixed_point_options_from_json(detail::field(j, "options"))};
}

inline json to_json(const SelectionRule& r) {
    return {{"name", to_string(r.kind)},
            {"coordinates", to_json(r.coordinates)},
            {"step_init", r.step_init},
            {"backtrack_factor", r.backtrack_factor},
            {"grad_tol", r.grad_tol},
            {"max_iters", r.max_iters}};
}

// Accepts a bare name ("max-entropy") or an object with optimizer overrides.
inline SelectionRule selection_rule_from_json(const json& j, SelectionRule r = {}) {
    if (j.is_string()) {
        r.kind = parse_selection_kind(j.get<std::string>());
        return r;
    }
    if (j.contains("name")) r.kind = parse_selection_kind(detail::get<std::string>(j, "name"));
    if (j.contains("coordinates")) r.coordinates = real_vector_from_json(j.at("coordinates"));
    r.step_init = detail::get_or(j, "step_init", r.step_init);
    r.backtrack_factor = detail::get_or(j, "backtrack_factor", r.backtrack_factor);
    r.grad_tol = detail::get_or(j, "grad_tol", r.grad_tol);
    r.max_iters = detail::get_or(j, "max_iters", r.max_iters);
    r.validate();
    return r;
}

inline json to_json(const SelectionResult& s) {
    return {{"sigma", to_json(s.sigma)},
            {"coordinates", to_json(s.coordinates)},
            {"entropy", s.entropy},
            {"iterations", s.iterations},
            {"converged", s.converged},
            {"gradient_norm", s.gradient_norm}};
}

inline SelectionResult selection_result_from_json(const json& j) {
    return SelectionResult{density_from_json(detail::field(j, "sigma")),
                           real_vector_from_json(detail::field(j, "coordinates")),
                           detail::get<double>(j, "entropy"),
                           detail::get<Index>(j, "iterations"),
                           detail::get<bool>(j, "converged"),
                           detail::get<double>(j, "gradient_norm")};
}

// ---------------------------------------------------------------------------
// Probes and classification

inline json to_json(const StateFamily& f) {
    json j{{"label", f.label()}};
    if (f.kind() == StateFamily::Kind::PureRotation) {
        j["kind"] = "pure_rotation";
        const ComplexMatrix c = f.centre_vector();
        const ComplexMatrix t = f.target_vector();
        j["centre_vector"] = to_json(c);
        j["target_vector"] = to_json(t);
    } else {
        j["kind"] = "convex_mix";
        j["centre"] = to_json(f.centre());
        j["target"] = to_json(f.target());
    }
    return j;
}

inline StateFamily state_family_from_json(const json& j) {
    const auto kind = detail::get<std::string>(j, "kind");
    const auto label = detail::get_or<std::string>(j, "label", "");
    if (kind == "pure_rotation") {
        const ComplexMatrix c = matrix_from_json(detail::field(j, "centre_vector"));
        const ComplexMatrix t = matrix_from_json(detail::field(j, "target_vector"));
        if (c.cols() != 1 || t.cols() != 1) throw ParseError("pure_rotation vectors must be single columns");
        return StateFamily::pure_rotation(c.col(0), t.col(0), label);
    }
    if (kind == "convex_mix")
        return StateFamily::convex_mix(density_from_json(detail::field(j, "centre")),
                                       density_from_json(detail::field(j, "target")), label);
    throw ParseError("unknown state family kind '" + kind + "'");
}

inline json to_json(const ProbePath& p) {
    return {{"label", p.label},
            {"centre", to_json(p.centre)},
            {"direction_a", to_json(p.direction_a)},
            {"direction_b", to_json(p.direction_b)},
            {"epsilons", p.epsilons}};
}

inline ProbePath probe_path_from_json(const json& j) {
    ProbePath p{detail::get_or<std::string>(j, "label", ""), density_from_json(detail::field(j, "centre")),
                state_family_from_json(detail::field(j, "direction_a")),
                state_family_from_json(detail::field(j, "direction_b")),
                detail::get<std::vector<double>>(j, "epsilons")};
    p.validate();
    return p;
}

inline json to_json(const PointRecord& r) {
    json j{{"epsilon", r.epsilon}, {"distance_to_centre", r.distance_to_centre}, {"k", r.k}};
    j["particular"] = r.particular ? to_json(*r.particular) : json(nullptr);
    j["sigma"] = r.sigma ? to_json(*r.sigma) : json(nullptr);
    j["rho_hat"] = r.rho_hat ? to_json(*r.rho_hat) : json(nullptr);
    j["entropy"] = std::isfinite(r.entropy) ? json(r.entropy) : json(nullptr);
    j["converged"] = r.converged;
    j["warnings"] = r.warnings;
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

inline json to_json(const ProbeTrace& t) {
    json a = json::array(), b = json::array();
    for (const auto& p : t.a.points) a.push_back(to_json(p));
    for (const auto& p : t.b.points) b.push_back(to_json(p));
    return {{"path", to_json(t.path)},
            {"centre", to_json(t.centre)},
            {"direction_a", {{"label", t.a.label}, {"points", a}}},
            {"direction_b", {{"label", t.b.label}, {"points", b}}}};
}

inline json to_json(const PathStrategy& s) {
    return {{"kind", to_string(s.kind)}, {"seed", s.seed}, {"random_directions", s.random_directions}, {"epsilons", s.epsilons}};
}

inline PathStrategy path_strategy_from_json(const json& j, PathStrategy s = {}) {
    if (j.is_string()) {
        s.kind = parse_path_strategy(j.get<std::string>());
        return s;
    }
    if (j.contains("kind")) s.kind = parse_path_strategy(detail::get<std::string>(j, "kind"));
    s.seed = detail::get_or(j, "seed", s.seed);
    s.random_directions = detail::get_or(j, "random_directions", s.random_directions);
    s.epsilons = detail::get_or(j, "epsilons", s.epsilons);
    return s;
}

inline json to_json(const PathEvidence& e) {
    json j{{"label", e.label},
           {"level", to_string(e.level)},
           {"singleton_a", e.singleton_a},
           {"singleton_b", e.singleton_b},
           {"limits_in_centre", e.limits_in_centre},
           {"sigma_jump", e.sigma_jump},
           {"rho_hat_jump", e.rho_hat_jump},
           {"refinements", e.refinements},
           {"epsilons", e.epsilons}};
    if (!e.note.empty()) j["note"] = e.note;
    return j;
}

inline json to_json(const GateClassification& g, bool include_evidence = true) {
    json j{{"verdict", to_string(g.verdict)},
           {"sigma_jump", g.sigma_jump},
           {"rho_hat_jump", g.rho_hat_jump},
           {"paths_examined", g.paths_examined}};
    j["witness"] = g.witness ? to_json(*g.witness) : json(nullptr);
    if (include_evidence) {
        json ev = json::array();
        for (const auto& e : g.evidence) ev.push_back(to_json(e));
        j["evidence"] = ev;
    }
    return j;
}

}  // namespace ctckit::io
