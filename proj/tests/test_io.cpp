#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "riskscope/instance.hpp"
#include "riskscope/io.hpp"
#include "riskscope/rng.hpp"
#include "support/util.hpp"

using namespace riskscope;
using Catch::Matchers::WithinAbs;

TEST_CASE("csv round trip preserves doubles exactly") {
    Rng rng(5);
    Matrix a(3, 4);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) a(i, j) = 1e3 * rng.gaussian();
    a(0, 0) = 0.1;  // classic non-representable decimal
    a(1, 2) = -1e-300;
    const Matrix b = parse_csv_matrix(matrix_to_csv(a));
    REQUIRE(b.rows() == a.rows());
    REQUIRE(b.cols() == a.cols());
    CHECK(b == a);
}

TEST_CASE("csv parser reports malformed input with location") {
    CHECK_THROWS_AS(parse_csv_matrix("1,2\n3\n"), ParseError);
    CHECK_THROWS_AS(parse_csv_matrix("1,2\n3,x\n"), ParseError);
    CHECK_THROWS_AS(parse_csv_matrix(""), ParseError);
    try {
        parse_csv_matrix("1,2\n3,4\n5,oops\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
        CHECK(e.col == 2);
    }
    // Whitespace around fields and trailing CR are tolerated.
    const Matrix m = parse_csv_matrix(" 1 ,\t2\r\n3, 4\r\n");
    CHECK(m(0, 1) == 2.0);
    CHECK(m(1, 0) == 3.0);
}

TEST_CASE("extended json encodes infinities as strings") {
    const Json j = extended_to_json(kInf);
    CHECK(j.is_string());
    CHECK(json_to_extended(j) == kInf);
    CHECK(json_to_extended(extended_to_json(-kInf)) == -kInf);
    CHECK(json_to_extended(extended_to_json(1.25)) == 1.25);
}

TEST_CASE("penalty json round trips every variant") {
    const std::vector<PenaltySpec> pens = {
        ZeroPenalty{},
        ScaledL1{0.5, 16},
        ScaledLqNorm{0.7, 3, NamedNorm::linf},
        SquaredL2{1.25},
        IndicatorPenalty{BoxSet{Vector{{-1.0, 0.0}}, Vector{{1.0, 2.0}}}},
        IndicatorPenalty{BallSet{Vector{{0.5, -0.5}}, 2.0}},
        IndicatorPenalty{SingletonSet{Vector{{3.0, 4.0}}}},
        SumPenalty{ScaledL1{0.5, 16},
                   IndicatorPenalty{BoxSet{Vector{{-1.0, -1.0}}, Vector{{1.0, 1.0}}}}},
    };
    Rng rng(7);
    for (const auto& pen : pens) {
        const PenaltySpec back = penalty_from_json(penalty_to_json(pen));
        REQUIRE(back.index() == pen.index());
        for (int k = 0; k < 50; ++k) {
            Vector b(2);
            b[0] = 3.0 * rng.gaussian();
            b[1] = 3.0 * rng.gaussian();
            CHECK(eval_penalty(back, b) == eval_penalty(pen, b));
        }
    }
}

TEST_CASE("penalty json rejects missing and mistyped fields") {
    CHECK_THROWS_AS(penalty_from_json(Json{{"type", "scaled_l1"}, {"lam", 0.5}}), SchemaError);
    CHECK_THROWS_AS(penalty_from_json(Json{{"type", "scaled_l1"}, {"lam", "x"}, {"n", 4}}),
                    SchemaError);
    CHECK_THROWS_AS(penalty_from_json(Json{{"type", "mystery"}}), SchemaError);
    CHECK_THROWS_AS(penalty_from_json(Json::array()), SchemaError);
}

TEST_CASE("instance save and load round trip") {
    Rng rng(11);
    ProblemInstance inst;
    inst.X = testing::random_matrix(rng, 5, 3);
    inst.beta_star = testing::random_vector(rng, 3);
    inst.noise = GaussianNoise{0.5, 42};
    inst.penalty = ScaledL1{0.3, 5};

    const auto dir = testing::scratch_dir();
    const auto path = dir / "inst.json";
    save_instance(inst, path.string());
    REQUIRE(std::filesystem::exists(dir / "inst.X.csv"));

    const ProblemInstance back = load_instance(path.string());
    CHECK(back.X == inst.X);
    CHECK(back.beta_star == inst.beta_star);
    const auto* g = std::get_if<GaussianNoise>(&back.noise);
    REQUIRE(g != nullptr);
    CHECK(g->sigma == 0.5);
    CHECK(g->seed == 42);
    CHECK(eval_penalty(back.penalty, inst.beta_star) == eval_penalty(inst.penalty, inst.beta_star));

    // Same noise spec materializes identically after a round trip.
    CHECK(materialize_noise(back) == materialize_noise(inst));
    std::filesystem::remove_all(dir);
}

TEST_CASE("load_instance rejects inconsistent dimension metadata") {
    Rng rng(13);
    ProblemInstance inst;
    inst.X = testing::random_matrix(rng, 4, 2);
    inst.beta_star = testing::random_vector(rng, 2);
    inst.noise = FixedNoise{testing::random_vector(rng, 4)};
    inst.penalty = ZeroPenalty{};

    const auto dir = testing::scratch_dir();
    const auto path = dir / "inst.json";
    save_instance(inst, path.string());
    Json doc = Json::parse(read_text_file(path.string()));
    doc["p"] = 3;
    write_text_file(path.string(), doc.dump(2));
    CHECK_THROWS_AS(load_instance(path.string()), SchemaError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("fixed noise round trips bit for bit") {
    ProblemInstance inst;
    inst.X = Matrix::Identity(3, 3);
    inst.beta_star = Vector::Zero(3);
    inst.noise = FixedNoise{Vector{{0.1, -2.5, 1e-12}}};
    inst.penalty = ZeroPenalty{};
    const auto dir = testing::scratch_dir();
    const auto path = dir / "fixed.json";
    save_instance(inst, path.string());
    const ProblemInstance back = load_instance(path.string());
    CHECK(materialize_noise(back) == materialize_noise(inst));
    std::filesystem::remove_all(dir);
}

TEST_CASE("format_double emits shortest round trip forms") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5) == "-2.5");
    const double v = 1.0 / 3.0;
    CHECK(std::stod(format_double(v)) == v);
}
