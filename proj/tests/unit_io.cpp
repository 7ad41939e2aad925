#include "doctest.h"

#include "ncg/io.hpp"
#include "ncg/moyal.hpp"

#include <cstdio>
#include <string>

using namespace ncg;

namespace {

Mat sample_matrix() {
  Mat m(2, 3);
  m << Complex(1.0, -2.0), Complex(0.0, 0.5), Complex(3.0, 0.0), Complex(-1.5, 0.0),
      Complex(0.0, 0.0), Complex(2.0, 2.0);
  return m;
}

}  // namespace

TEST_CASE("matrices round-trip and accept omitted imaginary parts") {
  const Mat m = sample_matrix();
  const Json j = matrix_to_json(m);
  CHECK(j["rows"] == 2);
  CHECK(j["cols"] == 3);
  const Mat back = json_to_matrix(j);
  CHECK((back - m).norm() == 0.0);

  // Entrywise-real input may omit "im" entirely.
  Json real = {{"rows", 2}, {"cols", 2}, {"re", {1.0, 2.0, 3.0, 4.0}}};
  const Mat r = json_to_matrix(real);
  CHECK(r(1, 0) == Complex(3.0, 0.0));
  CHECK(is_exactly_real(r));
}

TEST_CASE("explicit and structured algebras both survive the round trip") {
  const MatrixAlgebra diag = diagonal_algebra(3);
  const MatrixAlgebra diag2 = json_to_algebra(algebra_to_json(diag));
  CHECK(diag2.hilbert_dim == 3);
  CHECK(diag2.dim() == 3);
  CHECK(algebra_contains(diag2, diag.basis[1]).contained);

  const MatrixAlgebra lifted = lifted_matrix_algebra(2, 3, 1);
  const Json j = algebra_to_json(lifted);
  CHECK(j.contains("structured"));
  const MatrixAlgebra lifted2 = json_to_algebra(j);
  REQUIRE(lifted2.structured.has_value());
  CHECK(lifted2.structured->left == 2);
  CHECK(lifted2.structured->factor == 3);
  CHECK(lifted2.structured->right == 1);
}

TEST_CASE("states validate on the way in") {
  const auto m = moyal::truncation(3, 1.0);
  const State s = moyal::eigenstate(m, 1);
  const State back = json_to_state(state_to_json(s));
  CHECK((back.rho - s.rho).norm() <= 1e-14);

  Json bad = state_to_json(s);
  bad["rho"]["re"][0] = 5.0;  // trace != 1
  CHECK_THROWS_AS(json_to_state(bad), std::invalid_argument);
}

TEST_CASE("triples round-trip with grading and structured algebra intact") {
  const auto m = moyal::truncation(3, 2.0);
  const Json j = triple_to_json(m.triple);
  const SpectralTriple back = json_to_triple(j);
  CHECK((back.dirac - m.triple.dirac).norm() == 0.0);
  REQUIRE(back.grading.has_value());
  CHECK((*back.grading - *m.triple.grading).norm() == 0.0);
  REQUIRE(back.algebra.structured.has_value());
  CHECK(check_axioms(back).all_pass());
}

TEST_CASE("validation reports serialize each check with its residual") {
  ValidationReport r;
  r.checks.push_back({"first", true, 1e-12});
  r.checks.push_back({"second", false, 0.25});
  const Json j = validation_to_json(r);
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 2);
  CHECK(j[0]["check"] == "first");
  CHECK(j[0]["pass"] == true);
  CHECK(j[1]["pass"] == false);
  CHECK(double(j[1]["residual"]) == doctest::Approx(0.25));
}

TEST_CASE("correspondence snapshots rebuild the realized operator") {
  const auto big = moyal::truncation(6, 1.0);
  const auto pair = moyal::correspondence_pair(2, big);
  const Json j = correspondence_to_json(pair.forward);
  const Correspondence back = json_to_correspondence(j);

  CHECK((back.op - pair.forward.op).norm() <= 1e-12);
  CHECK((back.u - pair.forward.u).norm() == 0.0);
  CHECK(back.module.coord_dim == pair.forward.module.coord_dim);
  CHECK(intertwining_residual(back) <= 1e-10);

  // The rebuilt closure reproduces the stored operator at the source Dirac
  // and hands back the original well-definedness witness there.
  CHECK(back.assembly_residual == doctest::Approx(pair.forward.assembly_residual));
  double res = 0.0;
  const Mat rebuilt = back.op_with(back.source.dirac, &res);
  CHECK((rebuilt - back.op).norm() <= 1e-12);
  CHECK(res <= 1e-12);
}

TEST_CASE("file reading reports parse errors with their position") {
  const std::string path = "/tmp/ncg_io_test_malformed.json";
  write_text_file(path, "{ \"rows\": 2, ");
  CHECK_THROWS_AS(read_json_file(path), Json::parse_error);

  write_text_file(path, "{ \"rows\": 2 }");
  const Json j = read_json_file(path);
  CHECK(j["rows"] == 2);
  std::remove(path.c_str());
}
