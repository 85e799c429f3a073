#include <catch2/catch_amalgamated.hpp>

#include "balmet/io.hpp"
#include "balmet/random.hpp"

using namespace balmet;

namespace {
fs::path temp_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("balmet_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}
}  // namespace

TEST_CASE("sha256 known vector") {
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("matrix text round trip is exact") {
    Rng rng(5);
    Matrix M = random_complex_matrix(rng, 7, 3);
    Matrix back = matrix_from_text(matrix_to_text(M));
    REQUIRE(back.rows() == 7);
    REQUIRE(back.cols() == 3);
    CHECK((M - back).cwiseAbs().maxCoeff() == 0.0);  // 17 digits round-trips doubles

    CHECK_THROWS_AS(matrix_from_text("2 2\n1 0 1 0\n1 0"), std::runtime_error);
}

TEST_CASE("quadrature rule serialization round trip") {
    auto rule = fs_quadrature(3, 4);
    auto back = rule_from_text(rule_to_text(rule));
    CHECK(back.r == 3);
    CHECK(back.level == 4);
    CHECK(back.targetDegree == rule.targetDegree);
    CHECK((back.points - rule.points).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.weights - rule.weights).cwiseAbs().maxCoeff() == 0.0);

    // deterministic serialization: two constructions give identical bytes
    CHECK(rule_to_text(fs_quadrature(3, 4)) == rule_to_text(fs_quadrature(3, 4)));
}

TEST_CASE("model directory round trip feeds the engine identically") {
    ModelSpec s;
    s.kind = ModelKind::P1Split;
    s.degrees = {1, 1};
    s.k = 2;
    Model model = gen_p1_bundle(s);
    auto dir = temp_dir("model");
    save_model_dir(dir, model);
    Model loaded = load_model_dir(dir);

    REQUIRE(loaded.sample.N == model.sample.N);
    REQUIRE(loaded.mesh.size() == model.mesh.size());
    CHECK(loaded.slope == model.slope);
    CHECK(loaded.hermitianEinstein == model.hermitianEinstein);
    CHECK((loaded.mesh.weights - model.mesh.weights).cwiseAbs().maxCoeff() == 0.0);
    for (int p = 0; p < model.mesh.size(); p += 113) {
        CHECK((loaded.sample.values[p] - model.sample.values[p]).cwiseAbs().maxCoeff() == 0.0);
        CHECK((loaded.referenceField[p] - model.referenceField[p]).cwiseAbs().maxCoeff() ==
              0.0);
    }

    auto a = balance_model(model, {});
    auto b = balance_model(loaded, {});
    REQUIRE(a.report.converged);
    REQUIRE(b.report.converged);
    CHECK((a.gram.entries() - b.gram.entries()).cwiseAbs().maxCoeff() < 1e-12);
    fs::remove_all(dir);
}

TEST_CASE("config parsing: values, comments, and diagnostics") {
    auto cfg = parse_config("a.b = 3\n# comment\n  model.kind = torus-line  # inline\n\nx=1.5\n");
    CHECK(cfg.get_int("a.b", 0) == 3);
    CHECK(cfg.get("model.kind", "") == "torus-line");
    CHECK(cfg.get_double("x", 0.0) == 1.5);
    CHECK(cfg.get("missing", "fallback") == "fallback");
    CHECK_THROWS_WITH(cfg.require("absent"),
                      Catch::Matchers::ContainsSubstring("missing required key"));
    CHECK_THROWS_WITH(parse_config("key value\n"),
                      Catch::Matchers::ContainsSubstring("line 1"));
    CHECK_THROWS_WITH(parse_config("ok = 1\n= broken\n"),
                      Catch::Matchers::ContainsSubstring("line 2"));
    auto bad = parse_config("n = 1.5\n");
    CHECK_THROWS_WITH(bad.get_int("n", 0),
                      Catch::Matchers::ContainsSubstring("not an integer"));
}

TEST_CASE("k-range parsing") {
    CHECK(parse_k_range("4..7") == std::vector<int>{4, 5, 6, 7});
    CHECK(parse_k_range("3,9,12") == std::vector<int>{3, 9, 12});
    CHECK(parse_k_range("5") == std::vector<int>{5});
    CHECK_THROWS_WITH(parse_k_range("9..4"),
                      Catch::Matchers::ContainsSubstring("malformed kRange"));
    CHECK_THROWS_WITH(parse_k_range("a..b"),
                      Catch::Matchers::ContainsSubstring("malformed kRange"));
}

TEST_CASE("decay CSV header matches the interface contract") {
    DecayProbeReport rep;
    DecayProbeRow row;
    row.k = 4;
    row.N = 12;
    row.D = 7.853981633974483;
    row.Dnorm = 1.5707963267948966;
    row.opNormM = 1e-13;
    rep.rows.push_back(row);
    const std::string csv = decay_csv(rep);
    CHECK(csv.substr(0, csv.find('\n')) == "k,N,D,Dnorm,opNormM,slope");
    CHECK(csv.find("nan") != std::string::npos);  // no slope with one row
}

TEST_CASE("run manifests: emit, verify, merge, idempotence") {
    auto root = temp_dir("runs");
    {
        RunManifest m(root / "runA");
        Config cfg;
        cfg.values["model.kind"] = "p1-split";
        m.set_config(cfg);
        m.emit("table.csv", "k,N\n1,2\n3,4\n");
        m.add_stage("balance", "pass", 0.5);
        m.finalize();
    }
    {
        RunManifest m(root / "runB");
        m.emit("other.csv", "k,N\n5,6\n");
        m.finalize();
    }

    json sum1 = merge_run_manifests(root);
    CHECK(sum1["runs"].size() == 2);
    CHECK(sum1["totalCsvRows"] == 3);
    json sum2 = merge_run_manifests(root);  // idempotent
    CHECK(sum1 == sum2);

    // every referenced artifact must exist and hash-match
    atomic_write(root / "runA" / "table.csv", "tampered\n");
    CHECK_THROWS_WITH(merge_run_manifests(root),
                      Catch::Matchers::ContainsSubstring("hash mismatch"));

    // corrupt manifest: error, no partial output
    atomic_write(root / "runA" / "manifest.json", "{not json");
    CHECK_THROWS_WITH(merge_run_manifests(root),
                      Catch::Matchers::ContainsSubstring("corrupt manifest"));

    // empty run list: empty summary
    auto empty = temp_dir("runs_empty");
    json sume = merge_run_manifests(empty);
    CHECK(sume["runs"].empty());
    CHECK(sume["totalCsvRows"] == 0);
    fs::remove_all(root);
    fs::remove_all(empty);
}

TEST_CASE("warm start from a persisted Gram reproduces the cold-start limit") {
    ModelSpec s;
    s.kind = ModelKind::P1Split;
    s.degrees = {0};
    s.k = 3;
    Model model = gen_p1_bundle(s);

    BalanceOptions cold;
    cold.tol = 1e-11;
    cold.maxIter = 1000;
    Matrix skew = Matrix::Zero(4, 4);
    skew.diagonal() << 1.0, 6.0, 0.5, 2.0;
    cold.start = skew;
    auto coldRes = balance_iterate(model.sample, model.mesh, cold);
    REQUIRE(coldRes.report.converged);

    auto dir = temp_dir("warm");
    write_matrix(dir / "gram.txt", coldRes.gram.entries());

    BalanceOptions warm = cold;
    warm.start = read_matrix(dir / "gram.txt");  // the CLI's balance.warmStart path
    auto warmRes = balance_iterate(model.sample, model.mesh, warm);
    REQUIRE(warmRes.report.converged);
    CHECK(warmRes.report.iterations <= 1);
    CHECK((warmRes.gram.entries() - coldRes.gram.entries()).cwiseAbs().maxCoeff() < 1e-8);
    fs::remove_all(dir);
}

TEST_CASE("balance report JSON carries the run record") {
    BalanceReport rep;
    rep.iterations = 12;
    rep.converged = true;
    rep.residualHistory = {1.0, 0.1, 1e-11};
    rep.gramConditionNumber = 42.0;
    rep.balancedConstant = 3.0;
    json j = balance_report_json(rep);
    CHECK(j["iterations"] == 12);
    CHECK(j["converged"] == true);
    CHECK(j["residualHistory"].size() == 3);
    CHECK(j["gramConditionNumber"] == 42.0);
}
