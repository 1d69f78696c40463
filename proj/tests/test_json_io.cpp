#include <gtest/gtest.h>

#include "support.hpp"

using namespace ctckit;
using namespace ctckit::testing;
using io::json;

TEST(Json, MatrixRoundTripIsRowMajor) {
    ComplexMatrix m(2, 3);
    m << Complex(1, 2), 3, 4, 5, Complex(6, -1), 7;
    const json j = io::to_json(m);
    EXPECT_EQ(j["re"], json({1, 3, 4, 5, 6, 7}));
    EXPECT_EQ(j["im"], json({2, 0, 0, 0, -1, 0}));
    EXPECT_EQ(io::matrix_from_json(j), m);
    EXPECT_THROW(io::matrix_from_json(json{{"rows", 2}, {"cols", 2}, {"re", {1, 2, 3}}}), ParseError);
    EXPECT_THROW(io::matrix_from_json(json{{"rows", 2}}), ParseError);
}

TEST(Json, StateEncodings) {
    EXPECT_LT(trace_distance(io::density_from_json(json::parse(R"({"bloch": [0, 0, 1]})")), DensityOperator::basis_state(2, 0)),
              1e-15);
    EXPECT_LT(trace_distance(io::density_from_json(json::parse(R"({"diag": [0.25, 0.75]})")),
                             DensityOperator::diagonal({0.25, 0.75})),
              1e-15);
    const DensityOperator prod = io::density_from_json(json::parse(R"({"product": [{"diag": [1, 0]}, {"diag": [0.9, 0.1]}]})"));
    EXPECT_LT(trace_distance(prod, example_rho_a(0.1)), 1e-15);
    const DensityOperator plus = io::density_from_json(json::parse(R"({"ket": [1, 1]})"));
    EXPECT_NEAR(plus(0, 1).real(), 0.5, 1e-15);
    const DensityOperator b = io::density_from_json(json::parse(R"({"basis": {"dim": 4, "index": 2}})"));
    EXPECT_EQ(b(2, 2), Complex(1.0));
    EXPECT_THROW(io::density_from_json(json::parse(R"({"diag": [0.5, 0.6]})")), InvalidStateError);
    EXPECT_THROW(io::density_from_json(json::parse(R"({"what": 1})")), ParseError);
}

TEST(Json, GateRoundTrip) {
    const UnitaryGate p = example_discontinuous_gate();
    const json jp = io::to_json(p);
    EXPECT_EQ(jp["perm"], json(example_discontinuous_permutation()));
    EXPECT_EQ(io::gate_from_json(jp).matrix(), p.matrix());
    SeededRng rng(60);
    const UnitaryGate u = random_unitary(rng, 2, 2);
    const UnitaryGate back = io::gate_from_json(io::to_json(u));
    EXPECT_EQ(back.matrix(), u.matrix());
    EXPECT_FALSE(back.is_permutation());
    EXPECT_THROW(io::gate_from_json(json{{"dim1", 2}, {"dim2", 2}}), ParseError);
}

TEST(Json, FixedPointSetRoundTrip) {
    const FixedPointSet f = fixed_point_set(example_discontinuous_gate(), example_rho_b());
    const json j = io::to_json(f);
    EXPECT_EQ(j["k"], 1);
    EXPECT_EQ(io::to_json(io::fixed_point_set_from_json(j)), j);
}

TEST(Json, SelectionRoundTrip) {
    const SelectionRule r = SelectionRule::constant(RealVector::Constant(1, 0.25));
    const SelectionRule back = io::selection_rule_from_json(io::to_json(r));
    EXPECT_EQ(back.kind, SelectionKind::ConstantIndex);
    EXPECT_EQ(back.coordinates, r.coordinates);
    EXPECT_EQ(io::selection_rule_from_json(json("min-entropy")).kind, SelectionKind::MinEntropy);
    const SelectionResult s = max_entropy_state(fixed_point_set(example_discontinuous_gate(), example_rho_b()));
    EXPECT_EQ(io::to_json(io::selection_result_from_json(io::to_json(s))), io::to_json(s));
}

TEST(Json, ProbePathRoundTrip) {
    const ProbePath p = generate_probe_paths(example_discontinuous_gate())[7];
    const json j = io::to_json(p);
    EXPECT_EQ(io::to_json(io::probe_path_from_json(j)), j);
    const ProbePath q = example_gate_path();
    EXPECT_EQ(io::to_json(io::probe_path_from_json(io::to_json(q))), io::to_json(q));
}

TEST(Json, CensusConfigAndRecordRoundTrip) {
    CensusConfig c;
    c.mode = CensusMode::explicit_list({{1, 0, 2, 3, 4, 5, 6, 7}});
    c.jump_tol = 0.2;
    const CensusConfig back = io::census_config_from_json(io::to_json(c));
    EXPECT_EQ(config_hash(back), config_hash(c));
    const CensusRecord r{{1, 0}, Verdict::Ephemeral, 0.3, 0.01, 0.5, "abc"};
    EXPECT_EQ(io::to_json(io::census_record_from_json(io::to_json(r))), io::to_json(r));
    CensusSummary s = summarize(std::vector<CensusRecord>{r});
    EXPECT_EQ(io::census_summary_from_json(io::to_json(s)), s);
}

TEST(Json, ScenarioProductForm) {
    const json j = json::parse(R"({
        "gate": {"dim1": 4, "dim2": 2, "perm": [4, 1, 3, 2, 0, 6, 5, 7]},
        "rho": [{"diag": [1, 0]}, {"diag": [0.9, 0.1]}],
        "rule": {"name": "min-entropy", "grad_tol": 1e-9}
    })");
    const Scenario s = io::scenario_from_json(j);
    EXPECT_LT(trace_distance(s.rho, example_rho_a(0.1)), 1e-15);
    EXPECT_EQ(s.rule.kind, SelectionKind::MinEntropy);
    EXPECT_EQ(s.rule.grad_tol, 1e-9);
    json bad = j;
    bad["rho"] = json::parse(R"([{"diag": [1, 0]}])");
    EXPECT_THROW(io::scenario_from_json(bad), DimensionError);
}

TEST(Json, Fnv1a) {
    EXPECT_EQ(io::fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(io::fnv1a_hex("a"), "af63dc4c8601ec8c");
}
