#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "copreg/io.hpp"

using namespace copreg;

namespace {

const char* kCsv =
    "y1,y2,age_diff,rank_diff,venue,odds_win,odds_draw,odds_loss\n"
    "2,1,0.5,-3,home,1.8,3.4,4.2\n"
    "0,0,-1.25,10,away,3.1,3.2,2.3\n"
    "1,3,2,0,neutral,2.2,3.1,3.4\n"
    "4,2,-0.5,7,home,1.5,4.0,6.5\n";

std::string temp_path(const char* name) {
  return std::string("/tmp/copreg_io_") + name;
}

}  // namespace

TEST_CASE("csv loading and typing") {
  Dataset d = load_matches_text(kCsv);
  REQUIRE(d.n() == 4);
  CHECK(d.y1(0) == 2);
  CHECK(d.y2(2) == 3);
  CHECK(d.numeric.count("age_diff") == 1);
  CHECK(d.numeric.at("rank_diff")[1] == doctest::Approx(10.0));
  CHECK(d.has_categorical("venue"));
  // alphabetically first level is the reference
  CHECK(d.reference_level.at("venue") == "away");
  auto names = d.dummy_names("venue");
  REQUIRE(names.size() == 2);
  CHECK(names[0] == "venue=home");
  CHECK(names[1] == "venue=neutral");
  const std::vector<double>* home = d.find_column("venue=home");
  REQUIRE(home != nullptr);
  CHECK((*home)[0] == 1.0);
  CHECK((*home)[1] == 0.0);
  CHECK(d.find_column("nope") == nullptr);
  // odds columns become the odds matrix
  CHECK(d.has_odds);
  CHECK(d.odds(1, 2) == doctest::Approx(2.3));
}

TEST_CASE("load save round trip") {
  Dataset d = load_matches_text(kCsv);
  std::string p1 = temp_path("rt1.csv");
  save_matches(d, p1);
  std::ifstream in(p1);
  std::stringstream buf;
  buf << in.rdbuf();
  Dataset d2 = load_matches_text(buf.str());
  CHECK(d2.n() == d.n());
  CHECK((d2.y1 - d.y1).norm() == 0);
  CHECK((d2.y2 - d.y2).norm() == 0);
  for (const auto& [name, col] : d.numeric) {
    const std::vector<double>* back = d2.find_column(name);
    REQUIRE(back != nullptr);
    for (std::size_t i = 0; i < col.size(); ++i) {
      CHECK((*back)[i] == col[i]);
    }
  }
  CHECK(d2.categorical.at("venue") == d.categorical.at("venue"));
  // saving the reloaded data reproduces the file byte for byte
  std::string p2 = temp_path("rt2.csv");
  save_matches(d2, p2);
  std::ifstream in2(p2);
  std::stringstream buf2;
  buf2 << in2.rdbuf();
  CHECK(buf2.str() == buf.str());
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("loading errors name the offending cell") {
  try {
    load_matches_text("y1,y2,x\n1,2,0.5\n-1,0,0.3\n");
    CHECK(false);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    CHECK(msg.find("y1") != std::string::npos);
    CHECK(msg.find("row 2") != std::string::npos);  // 1-based data row
  }
  CHECK_THROWS_AS(load_matches_text("y1,y2\n1,2.5\n"), std::runtime_error);
  CHECK_THROWS_AS(load_matches_text("y1,y2,x\n1,2\n"), std::runtime_error);
  try {
    load_matches_text("y1,y2,x\n1,2,\n");
    CHECK(false);
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("x") != std::string::npos);
  }
  // missing response column
  CHECK_THROWS_AS(load_matches_text("a,b\n1,2\n"), std::runtime_error);
}

TEST_CASE("model spec parsing") {
  ModelSpec spec = parse_model_spec_text(
      "# comment\n"
      "response1 = y1\n"
      "response2 = y2\n"
      "margin1_covariates = age_diff, rank_diff\n"
      "margin2_covariates = age_diff, rank_diff\n"
      "copula = F\n"
      "linear_equal = true\n"
      "gradient_tol = 1e-6\n");
  CHECK(spec.family == Family::F);
  CHECK(spec.linear_equal);
  // penalty strength defaults on when shared coefficients are requested
  CHECK(spec.xi == doctest::Approx(1e9));
  CHECK(spec.solver.xi == doctest::Approx(1e9));
  CHECK(spec.solver.gradient_tol == doctest::Approx(1e-6));
  REQUIRE(spec.margin1_covariates.size() == 2);
  CHECK(spec.margin1_covariates[1] == "rank_diff");

  ModelSpec plain = parse_model_spec_text(
      "copula = N\nmargin1_covariates = a\nmargin2_covariates = a\nxi = 0\n"
      "linear_equal = true\n");
  CHECK(plain.xi == 0.0);

  try {
    parse_model_spec_text("copula = ZZ\n");
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("C90") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_model_spec_text("unknown_key = 1\n"),
                  std::runtime_error);
  // shared coefficients need matching covariate counts
  CHECK_THROWS_AS(parse_model_spec_text(
                      "copula = F\nlinear_equal = true\n"
                      "margin1_covariates = a, b\nmargin2_covariates = a\n"),
                  std::runtime_error);
}

TEST_CASE("problem assembly expands categoricals") {
  Dataset d = load_matches_text(kCsv);
  ModelSpec spec;
  spec.family = Family::F;
  spec.margin1_covariates = {"age_diff", "venue"};
  spec.margin2_covariates = {"rank_diff"};
  FitProblem prob = build_problem(d, spec);
  CHECK(prob.n() == 4);
  REQUIRE(prob.q1() == 4);  // intercept + age_diff + two venue dummies
  CHECK(prob.q2() == 2);
  CHECK(prob.names1[0] == "(Intercept)");
  CHECK(prob.names1[2] == "venue=home");
  CHECK(prob.X1(0, 0) == 1.0);
  CHECK(prob.X1(2, 3) == 1.0);  // neutral row, venue=neutral dummy
  CHECK(prob.X2(1, 1) == doctest::Approx(10.0));

  ModelSpec bad = spec;
  bad.margin2_covariates = {"not_there"};
  try {
    build_problem(d, bad);
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("not_there") != std::string::npos);
  }
}

TEST_CASE("subset and fold labels") {
  Dataset d = load_matches_text(kCsv);
  auto labels = d.fold_labels("venue");
  REQUIRE(labels.size() == 4);
  CHECK(labels[0] == "home");
  CHECK(labels[2] == "neutral");
  Dataset sub = d.subset({1, 3});
  REQUIRE(sub.n() == 2);
  CHECK(sub.y1(0) == 0);
  CHECK(sub.y1(1) == 4);
  CHECK(sub.categorical.at("venue")[1] == "home");
  CHECK(sub.odds(0, 0) == doctest::Approx(3.1));
  // dummy columns follow the subset even when a level drops out
  const std::vector<double>* home = sub.find_column("venue=home");
  REQUIRE(home != nullptr);
  CHECK((*home)[0] == 0.0);
  CHECK((*home)[1] == 1.0);
}

TEST_CASE("row order does not change the dummy set") {
  const char* shuffled =
      "y1,y2,venue\n"
      "1,3,neutral\n"
      "4,2,home\n"
      "2,1,home\n"
      "0,0,away\n";
  const char* original =
      "y1,y2,venue\n"
      "2,1,home\n"
      "0,0,away\n"
      "1,3,neutral\n"
      "4,2,home\n";
  Dataset a = load_matches_text(original);
  Dataset b = load_matches_text(shuffled);
  CHECK(a.dummy_names("venue") == b.dummy_names("venue"));
  CHECK(a.reference_level.at("venue") == b.reference_level.at("venue"));
}

TEST_CASE("odds file loading") {
  std::string path = temp_path("odds.csv");
  {
    std::ofstream out(path);
    out << "match_id,odds_win,odds_draw,odds_loss\n"
        << "0,1.9,3.3,4.1\n"
        << "2,2.5,3.0,2.9\n";
  }
  auto rows = load_odds(path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].match_id == 0);
  CHECK(rows[1].odds[1] == doctest::Approx(3.0));
  std::remove(path.c_str());
}
