#include "oracles.hpp"

#include "mcreg/core_types.hpp"
#include "mcreg/io.hpp"
#include "mcreg/rng.hpp"

#include <doctest.h>

using namespace mcreg;

TEST_CASE("schema parsing rejects malformed documents") {
    CHECK_THROWS_AS(parse_schema("not json"), SchemaError);
    CHECK_THROWS_AS(parse_schema(R"({"variables":[{"name":"a"}]})"), SchemaError);
    CHECK_THROWS_AS(parse_schema(R"({"variables":[{"name":"a","kind":"weird"}]})"), SchemaError);
    CHECK_THROWS_AS(parse_schema(R"({"variables":[{"name":"y","kind":"continuous"}]})"), SchemaError);
    const auto s = parse_schema(R"({"variables":[{"name":"a","kind":"nominal","levels":["p","q"]},
                                                 {"name":"b","kind":"continuous","range":[2,3]}]})");
    CHECK(s.size() == 2);
    CHECK(s[1].lower == 2.0);
    CHECK(parse_schema(schema_to_json(s)).size() == 2);
}

TEST_CASE("design encoding round-trips through decode") {
    const auto schema = oracle::mixed_schema();
    Rng rng = make_rng(3, "t");
    const RawTable t = simulate_covariates(schema, 50, rng);
    const DesignMatrix d = encode_design(schema, t);
    CHECK(d.D() == 6);
    CHECK((d.X.col(0).array() == 1.0).all());
    const RawTable back = decode_design(d, schema);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        CHECK(back.rows[i][0] == t.rows[i][0]);
        CHECK(back.rows[i][1] == t.rows[i][1]);
        CHECK(std::stod(back.rows[i][2]) == std::stod(t.rows[i][2]));
    }
}

TEST_CASE("unknown levels are ingestion errors") {
    const auto schema = oracle::mixed_schema();
    const RawTable t = parse_csv("region,age,power,y\nmars,young,0.1,1\n");
    CHECK_THROWS(encode_design(schema, t));
}

TEST_CASE("csv parsing handles quotes and rejects ragged rows") {
    const RawTable t = parse_csv("a,b\n\"x,1\",\"say \"\"hi\"\"\"\n");
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][0] == "x,1");
    CHECK(t.rows[0][1] == "say \"hi\"");
    CHECK(parse_csv(format_csv(t)).rows[0][1] == "say \"hi\"");
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), IngestError);
    CHECK_THROWS_AS(parse_csv(""), IngestError);
}

TEST_CASE("ties at the threshold belong to the body") {
    const std::vector<double> y{0.5, 1.0, 1.0, 2.0};
    const auto c = split_body_tail(y, 1.0);
    CHECK(c.n_b == 3);
    CHECK(c.n_t == 1);
    Eigen::VectorXd v(4);
    v << 0.5, 1.0, 1.0, 2.0;
    const Dataset d(v, intercept_design(4), 1.0);
    CHECK(d.in_body(1));
    CHECK_FALSE(d.in_body(3));
}

TEST_CASE("dataset validation") {
    Eigen::VectorXd v(2);
    v << 1.0, -1.0;
    CHECK_THROWS(Dataset(v, intercept_design(2), 1.0));
    v << 1.0, 2.0;
    CHECK_THROWS(Dataset(v, intercept_design(3), 1.0));
    CHECK_THROWS(Dataset(v, intercept_design(2), 0.0));
    const Dataset d(v, intercept_design(2), 1.5);
    const std::vector<Eigen::Index> rows{1};
    CHECK(d.subset(rows).n() == 1);
    CHECK(d.subset(rows).n_t() == 1);
}

TEST_CASE("param set invariants") {
    ParamSet p(2, 3, 3, 3, 5.0);
    CHECK(p.alpha().cols() == 3);
    CHECK(p.alpha_free().cols() == 2);
    CHECK_NOTHROW(p.validate());
    p.phi()(0) = -1.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    CHECK_THROWS(p.set_theta(0.0));
    CHECK_THROWS(ParamSet(0, 1, 1, 1, 1.0));

    ParamSet q(3, 1, 1, 1, 1.0);
    q.beta() << 1, 2, 3;
    q.phi() << 0.1, 0.2, 0.3;
    q.alpha_free() << 7, 8, 9;
    const std::vector<int> order{2, 0, 1};
    q.permute_components(order);
    CHECK(q.beta()(0, 0) == 3);
    CHECK(q.phi()(1) == 0.1);
    CHECK(q.alpha()(0, 2) == 8);
    CHECK(q.alpha()(0, 3) == 0);
}

TEST_CASE("level counts include the reference level") {
    const auto schema = oracle::mixed_schema();
    const DesignMatrix d = oracle::random_design(schema, 300, 4);
    const auto counts = level_counts(d, schema);
    REQUIRE(counts.size() == 3);
    Eigen::Index total = 0;
    for (auto c : counts[0]) total += c;
    CHECK(total == 300);
}

TEST_CASE("named substreams are deterministic and distinct") {
    CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
    CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
    CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
    CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
    Rng r1 = make_rng(9, "s"), r2 = make_rng(9, "s");
    for (int i = 0; i < 10; ++i) CHECK(uniform01(r1) == uniform01(r2));
    Rng r = make_rng(1, "u");
    for (int i = 0; i < 10000; ++i) {
        const double u = uniform01(r);
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        REQUIRE(uniform_index(r, 7) < 7);
    }
}

TEST_CASE("csv file io surfaces paths in errors") {
    try {
        read_text("/nonexistent/dir/file.csv");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/dir/file.csv") != std::string::npos);
    }
}
