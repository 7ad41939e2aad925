// Command-line front end: loads JSON-described triples and states, runs
// validation / distance / gauge-category / oscillator-truncation operations,
// and emits JSON or CSV reports.
//
// Exit codes: 0 success; 1 parse or usage error (malformed JSON is reported
// with its byte position); 2 validation failure (the validation report is
// still written); 3 solver budget exhaustion (bounds are still written).
#include "CLI11.hpp"

#include "ncg/connections.hpp"
#include "ncg/distance.hpp"
#include "ncg/gauge.hpp"
#include "ncg/io.hpp"
#include "ncg/moyal.hpp"
#include "ncg/triple.hpp"

#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using ncg::Json;
using ncg::Mat;

constexpr int kOk = 0;
constexpr int kParseError = 1;
constexpr int kValidationFailure = 2;
constexpr int kBudgetExhausted = 3;

struct Output {
  std::string format = "json";  // "json" or "csv"
  bool format_explicit = false;
  std::string path;  // empty = stdout
};

void emit_text(const Output& out, const std::string& text) {
  if (out.path.empty()) {
    std::cout << text;
  } else {
    ncg::write_text_file(out.path, text);
  }
}

void emit_json(const Output& out, Json report) {
  emit_text(out, report.dump(2) + "\n");
}

std::string status_name(ncg::DistanceStatus s) {
  switch (s) {
    case ncg::DistanceStatus::certified: return "certified";
    case ncg::DistanceStatus::infinite: return "infinite";
    case ncg::DistanceStatus::budget_exhausted: return "budget_exhausted";
  }
  return "unknown";
}

// Fixed-notation CSV cell with enough digits to round-trip a double.
std::string csv_num(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

// One certified-solve row of a sweep table.
struct SweepRow {
  std::string parameter;
  double lower = 0.0;
  double upper = 0.0;
  double formula = 0.0;
  double residual = 0.0;
  std::string status = "certified";
  int iterations = 0;
};

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream ss;
  ss << "parameter,lower,upper,formula,residual\n";
  for (const SweepRow& r : rows) {
    ss << r.parameter << ',' << csv_num(r.lower) << ',' << csv_num(r.upper) << ','
       << csv_num(r.formula) << ',' << csv_num(r.residual) << '\n';
  }
  return ss.str();
}

Json sweep_json(const std::string& command, const std::vector<SweepRow>& rows) {
  Json j;
  j["schema"] = ncg::kSchemaVersion;
  j["command"] = command;
  Json arr = Json::array();
  for (const SweepRow& r : rows) {
    arr.push_back(Json{{"parameter", r.parameter},
                       {"lower", r.lower},
                       {"upper", r.upper},
                       {"formula", r.formula},
                       {"residual", r.residual},
                       {"status", r.status},
                       {"iterations", r.iterations}});
  }
  j["rows"] = std::move(arr);
  return j;
}

// Sweeps default to CSV (diff-friendly tables); single reports to JSON.
int emit_sweep(const Output& out, const std::string& command, const std::vector<SweepRow>& rows,
               bool default_csv) {
  const bool csv = out.format_explicit ? (out.format == "csv") : default_csv;
  if (csv) {
    emit_text(out, sweep_csv(rows));
  } else {
    emit_json(out, sweep_json(command, rows));
  }
  for (const SweepRow& r : rows) {
    if (r.status == "budget_exhausted") return kBudgetExhausted;
  }
  return kOk;
}

// Distance of the enclosure [lower, upper] from the reference value.
double bracket_residual(double lower, double upper, double reference) {
  return std::max(0.0, std::max(lower - reference, reference - upper));
}

double env_default_tol() {
  if (const char* s = std::getenv("NCG_DEFAULT_TOL")) {
    try {
      const double v = std::stod(s);
      if (v > 0.0) return v;
    } catch (...) {
      // fall through to the built-in default
    }
  }
  return 1e-7;
}

std::string basename_of(const std::string& path) {
  const auto pos = path.find_last_of('/');
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

// ---------------------------------------------------------------------------
// check

int run_check(const Output& out, const std::string& triple_path) {
  const ncg::SpectralTriple t = ncg::json_to_triple(ncg::read_json_file(triple_path));
  const ncg::ValidationReport report = ncg::check_axioms(t);
  Json j;
  j["schema"] = ncg::kSchemaVersion;
  j["command"] = "check";
  j["checks"] = ncg::validation_to_json(report);
  j["all_pass"] = report.all_pass();
  emit_json(out, std::move(j));
  return report.all_pass() ? kOk : kValidationFailure;
}

// ---------------------------------------------------------------------------
// distance

int run_distance(const Output& out, const std::string& triple_path,
                 const std::vector<std::string>& state_paths, double tol, int max_iter) {
  const ncg::SpectralTriple t = ncg::json_to_triple(ncg::read_json_file(triple_path));
  std::vector<ncg::State> states;
  states.reserve(state_paths.size());
  for (const std::string& p : state_paths) {
    states.push_back(ncg::json_to_state(ncg::read_json_file(p)));
  }
  ncg::DistanceOptions opts;
  opts.tol = tol;
  opts.max_iterations = max_iter;

  if (states.size() == 2) {
    const ncg::DistanceResult r = ncg::spectral_distance(t, states[0], states[1], opts);
    Json j;
    j["schema"] = ncg::kSchemaVersion;
    j["command"] = "distance";
    j["lower"] = r.lower;
    j["upper"] = r.upper;
    j["status"] = status_name(r.status);
    j["iterations"] = r.iterations;
    if (r.witness) j["separating_direction"] = ncg::matrix_to_json(*r.witness);
    emit_json(out, std::move(j));
    return r.status == ncg::DistanceStatus::budget_exhausted ? kBudgetExhausted : kOk;
  }

  // Three or more states: emit the full pairwise matrix, as CSV by default.
  std::vector<ncg::DistanceResult> details;
  const Eigen::MatrixXd dm = ncg::distance_matrix(t, states, opts, &details);
  std::vector<std::string> labels;
  labels.reserve(state_paths.size());
  for (const std::string& p : state_paths) labels.push_back(basename_of(p));

  int code = kOk;
  for (const ncg::DistanceResult& r : details) {
    if (r.status == ncg::DistanceStatus::budget_exhausted) code = kBudgetExhausted;
  }
  const bool csv = out.format_explicit ? (out.format == "csv") : true;
  if (csv) {
    std::ostringstream ss;
    ss << "state";
    for (const std::string& l : labels) ss << ',' << l;
    ss << '\n';
    for (Eigen::Index i = 0; i < dm.rows(); ++i) {
      ss << labels[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < dm.cols(); ++j) ss << ',' << csv_num(dm(i, j));
      ss << '\n';
    }
    emit_text(out, ss.str());
  } else {
    Json j;
    j["schema"] = ncg::kSchemaVersion;
    j["command"] = "distance";
    j["labels"] = labels;
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < dm.rows(); ++i) {
      Json row = Json::array();
      for (Eigen::Index jj = 0; jj < dm.cols(); ++jj) row.push_back(dm(i, jj));
      rows.push_back(std::move(row));
    }
    j["matrix"] = std::move(rows);
    emit_json(out, std::move(j));
  }
  return code;
}

// ---------------------------------------------------------------------------
// gauge

int run_gauge_mor(const Output& out, const std::string& d_path, const std::string& dprime_path,
                  const std::string& algebra_path, double tol) {
  ncg::GaugeCategory cat{ncg::json_to_algebra(ncg::read_json_file(algebra_path)), tol};
  const Mat d = ncg::json_to_matrix(ncg::read_json_file(d_path));
  const Mat dp = ncg::json_to_matrix(ncg::read_json_file(dprime_path));
  const auto m = cat.mor(d, dp);
  Json j;
  j["schema"] = ncg::kSchemaVersion;
  j["command"] = "gauge mor";
  j["exists"] = m.has_value();
  if (m) j["omega"] = ncg::matrix_to_json(m->omega);
  emit_json(out, std::move(j));
  return kOk;
}

int run_gauge_initial(const Output& out, const std::string& d_path,
                      const std::string& algebra_path, const std::string& grading_path,
                      double tol) {
  ncg::GaugeCategory cat{ncg::json_to_algebra(ncg::read_json_file(algebra_path)), tol};
  const Mat d = ncg::json_to_matrix(ncg::read_json_file(d_path));
  std::optional<Mat> grading;
  if (!grading_path.empty()) grading = ncg::json_to_matrix(ncg::read_json_file(grading_path));
  Json j;
  j["schema"] = ncg::kSchemaVersion;
  j["command"] = "gauge initial";
  j["initial"] = cat.is_initial(d, grading);
  emit_json(out, std::move(j));
  return kOk;
}

int run_gauge_iso(const Output& out, const std::string& d_path, const std::string& dprime_path,
                  const std::string& algebra_path, double tol) {
  ncg::GaugeCategory cat{ncg::json_to_algebra(ncg::read_json_file(algebra_path)), tol};
  const Mat d = ncg::json_to_matrix(ncg::read_json_file(d_path));
  const Mat dp = ncg::json_to_matrix(ncg::read_json_file(dprime_path));
  const auto m = cat.mor(d, dp);
  Json j;
  j["schema"] = ncg::kSchemaVersion;
  j["command"] = "gauge iso";
  j["exists"] = m.has_value();
  j["isomorphism"] = m.has_value() && cat.is_isomorphism(*m);
  if (m) j["omega"] = ncg::matrix_to_json(m->omega);
  emit_json(out, std::move(j));
  return kOk;
}

// ---------------------------------------------------------------------------
// moyal

int run_moyal_spectrum(const Output& out, Eigen::Index levels, double theta) {
  const auto m = ncg::moyal::truncation(levels, theta);
  const ncg::EigResult eig = ncg::herm_eig(m.triple.dirac);
  Json j;
  j["schema"] = ncg::kSchemaVersion;
  j["command"] = "moyal spectrum";
  j["theta"] = theta;
  j["levels"] = levels;
  Json vals = Json::array();
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) vals.push_back(eig.values(i));
  j["eigenvalues"] = std::move(vals);
  emit_json(out, std::move(j));
  return kOk;
}

SweepRow eigenstate_distance_row(const ncg::DistanceEngine& engine,
                                 const ncg::moyal::MoyalTruncation& m, Eigen::Index a,
                                 Eigen::Index b) {
  const ncg::DistanceResult r = engine.distance(ncg::moyal::eigenstate(m, a),
                                                ncg::moyal::eigenstate(m, b));
  SweepRow row;
  row.parameter = std::to_string(a) + "-" + std::to_string(b);
  row.lower = r.lower;
  row.upper = r.upper;
  row.formula = ncg::moyal::eigenstate_distance_formula(a, b, m.theta);
  row.residual = bracket_residual(r.lower, r.upper, row.formula);
  row.status = status_name(r.status);
  row.iterations = r.iterations;
  return row;
}

int run_moyal_eigdist(const Output& out, Eigen::Index a, Eigen::Index b, double theta,
                      Eigen::Index levels, double tol) {
  const auto m = ncg::moyal::truncation(levels, theta);
  ncg::DistanceOptions opts;
  opts.tol = tol;
  const auto engine = ncg::DistanceEngine::even_reduced(m.triple, opts);
  const SweepRow row = eigenstate_distance_row(engine, m, a, b);
  Json j;
  j["schema"] = ncg::kSchemaVersion;
  j["command"] = "moyal eig-dist";
  j["m"] = a;
  j["n"] = b;
  j["theta"] = theta;
  j["levels"] = levels;
  j["lower"] = row.lower;
  j["upper"] = row.upper;
  j["formula"] = row.formula;
  j["residual"] = row.residual;
  j["status"] = row.status;
  j["iterations"] = row.iterations;
  emit_json(out, std::move(j));
  return row.status == "budget_exhausted" ? kBudgetExhausted : kOk;
}

int run_moyal_coherent(const Output& out, double z_re, double z_im, double theta,
                       Eigen::Index levels, double tol) {
  const auto m = ncg::moyal::truncation(levels, theta);
  const ncg::Complex z(z_re, z_im);
  ncg::DistanceOptions opts;
  opts.tol = tol;
  const auto engine = ncg::DistanceEngine::even_reduced(m.triple, opts);
  const ncg::DistanceResult r =
      engine.distance(ncg::moyal::coherent_state(m, z), ncg::moyal::coherent_state(m, 0.0));
  Json j;
  j["schema"] = ncg::kSchemaVersion;
  j["command"] = "moyal coherent";
  j["z"] = Json{{"re", z_re}, {"im", z_im}};
  j["theta"] = theta;
  j["levels"] = levels;
  j["displacement"] = std::abs(z);
  j["lower"] = r.lower;
  j["upper"] = r.upper;
  j["status"] = status_name(r.status);
  j["iterations"] = r.iterations;
  emit_json(out, std::move(j));
  return r.status == ncg::DistanceStatus::budget_exhausted ? kBudgetExhausted : kOk;
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) vals.push_back(std::stod(item));
  }
  ncg::require(!vals.empty(), "empty parameter list");
  return vals;
}

int run_moyal_gh(const Output& out, const std::string& theta_list, Eigen::Index points) {
  std::vector<SweepRow> rows;
  for (double theta : parse_list(theta_list)) {
    const ncg::moyal::LineEmbedding e = ncg::moyal::gh_experiment(theta, points);
    SweepRow row;
    row.parameter = csv_num(theta);
    row.lower = e.hausdorff_distance;
    row.upper = e.hausdorff_distance;
    row.formula = 0.5 * std::sqrt(theta / 2.0);
    row.residual = std::abs(e.hausdorff_distance - row.formula);
    rows.push_back(std::move(row));
  }
  return emit_sweep(out, "moyal gh", rows, /*default_csv=*/true);
}

int run_moyal_zeta(const Output& out, double theta, Eigen::Index levels) {
  const ncg::moyal::SpectralEstimates est = ncg::moyal::zeta_estimates(theta, levels);
  Json j;
  j["schema"] = ncg::kSchemaVersion;
  j["command"] = "moyal zeta";
  j["theta"] = theta;
  j["levels"] = levels;
  j["volume"] = est.volume;
  j["volume_error"] = est.volume_error;
  j["volume_reference"] = 2.0 * theta;
  j["dimension"] = est.dimension;
  j["dimension_error"] = est.dimension_error;
  j["dimension_reference"] = 2.0;
  emit_json(out, std::move(j));
  return kOk;
}

int run_moyal_correspondence(const Output& out, Eigen::Index small_levels, Eigen::Index levels,
                             double theta) {
  const auto m = ncg::moyal::truncation(levels, theta);
  const auto pair = ncg::moyal::correspondence_pair(small_levels, m);
  const auto composite = ncg::compose_correspondences(pair.forward, pair.reverse);
  const Mat v = ncg::moyal::round_trip_multiplication_map(pair);
  const ncg::ValidationReport similar = ncg::similarity_check(
      composite, ncg::identity_correspondence(pair.small.triple), v);

  Json j;
  j["schema"] = ncg::kSchemaVersion;
  j["command"] = "moyal correspondence";
  j["small_levels"] = small_levels;
  j["levels"] = levels;
  j["theta"] = theta;
  j["forward_intertwining"] = ncg::intertwining_residual(pair.forward);
  j["reverse_intertwining"] = ncg::intertwining_residual(pair.reverse);
  j["forward_assembly"] = pair.forward.assembly_residual;
  j["reverse_assembly"] = pair.reverse.assembly_residual;
  j["round_trip_checks"] = ncg::validation_to_json(similar);
  j["round_trip_pass"] = similar.all_pass();
  emit_json(out, std::move(j));
  return similar.all_pass() ? kOk : kValidationFailure;
}

// ---------------------------------------------------------------------------
// experiment suites

int run_experiment_eigdist(const Output& out, double theta, Eigen::Index levels, double tol) {
  const auto m = ncg::moyal::truncation(levels, theta);
  ncg::DistanceOptions opts;
  opts.tol = tol;
  const auto engine = ncg::DistanceEngine::even_reduced(m.triple, opts);
  std::vector<SweepRow> rows;
  for (Eigen::Index a = 0; a <= 6; ++a) {
    for (Eigen::Index b = a + 1; b <= 6; ++b) {
      rows.push_back(eigenstate_distance_row(engine, m, a, b));
    }
  }
  return emit_sweep(out, "experiment eigdist", rows, /*default_csv=*/true);
}

int run_experiment_coherent(const Output& out, double theta, double tol) {
  std::vector<SweepRow> rows;
  for (double r : {0.25, 0.5}) {
    for (Eigen::Index levels : {16, 32, 64}) {
      const auto m = ncg::moyal::truncation(levels, theta);
      ncg::DistanceOptions opts;
      opts.tol = tol;
      const auto engine = ncg::DistanceEngine::even_reduced(m.triple, opts);
      const ncg::DistanceResult res =
          engine.distance(ncg::moyal::coherent_state(m, ncg::Complex(r, 0.0)),
                          ncg::moyal::coherent_state(m, 0.0));
      SweepRow row;
      row.parameter = "r=" + csv_num(r) + ";N=" + std::to_string(levels);
      row.lower = res.lower;
      row.upper = res.upper;
      row.formula = r;
      row.residual = bracket_residual(res.lower, res.upper, r);
      row.status = status_name(res.status);
      row.iterations = res.iterations;
      rows.push_back(std::move(row));
    }
  }
  return emit_sweep(out, "experiment coherent", rows, /*default_csv=*/true);
}

int run_experiment_gh(const Output& out) {
  return run_moyal_gh(out, "1,0.5,0.25,0.125", 64);
}

int run_experiment_zeta(const Output& out, double theta) {
  const ncg::moyal::SpectralEstimates est = ncg::moyal::zeta_estimates(theta, 256);
  std::vector<SweepRow> rows;
  SweepRow vol;
  vol.parameter = "volume";
  vol.lower = est.volume - est.volume_error;
  vol.upper = est.volume + est.volume_error;
  vol.formula = 2.0 * theta;
  vol.residual = std::abs(est.volume - vol.formula);
  rows.push_back(vol);
  SweepRow dim;
  dim.parameter = "dimension";
  dim.lower = est.dimension - est.dimension_error;
  dim.upper = est.dimension + est.dimension_error;
  dim.formula = 2.0;
  dim.residual = std::abs(est.dimension - 2.0);
  rows.push_back(dim);
  return emit_sweep(out, "experiment zeta", rows, /*default_csv=*/true);
}

// Random composition exercises for the category operations: two-step versus
// composed fluctuations, associativity of correspondence composition, and
// the identity-correspondence diagram up to the multiplication-map
// similarity.
int run_experiment_category(const Output& out, unsigned seed) {
  std::mt19937_64 rng(seed);
  auto random_herm = [&](Eigen::Index n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = ncg::Complex(g(rng), g(rng));
    return Mat(((a + a.adjoint()) / 2.0).eval());
  };
  // A rank-1 projection q on the coordinate factor; q (x) I commutes with
  // 1_k (x) M_n, so it cuts a valid projective module out of the free one.
  auto random_projection = [&](Eigen::Index k, Eigen::Index n) {
    std::normal_distribution<double> g(0.0, 1.0);
    ncg::Vec u(k);
    for (Eigen::Index i = 0; i < k; ++i) u(i) = ncg::Complex(g(rng), g(rng));
    u.normalize();
    const Mat q = u * u.adjoint();
    return ncg::kron(q, Mat::Identity(n, n));
  };
  // i [X, b] is Hermitian whenever X and b are, so it yields a Hermitian
  // inner fluctuation with the single term (i 1, b).
  auto hermitian_form = [&](Eigen::Index n) {
    ncg::OneForm form;
    form.terms.push_back({ncg::Complex(0.0, 1.0) * Mat::Identity(n, n), random_herm(n)});
    return form;
  };

  std::vector<SweepRow> rows;

  // Two-step versus composed projective fluctuations.
  double fluct_max = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::Index n = 3;
    ncg::SpectralTriple t;
    t.algebra = ncg::full_matrix_algebra(n);
    t.dirac = random_herm(n);
    const auto pm1 = ncg::make_projective_module(2, random_projection(2, n), t.algebra);
    auto c1 = ncg::grassmannian_connection(pm1, t);
    const ncg::SpectralTriple t1 = ncg::fluctuate(c1);
    const auto pm2 = ncg::make_projective_module(2, random_projection(2, t1.algebra.hilbert_dim),
                                                 t1.algebra);
    auto c2 = ncg::grassmannian_connection(pm2, t1);
    const auto composite = ncg::compose_fluctuations(c1, c2);
    fluct_max = std::max(fluct_max, composite.two_step_residual);
  }
  SweepRow fr;
  fr.parameter = "fluctuation-compose";
  fr.lower = fluct_max;
  fr.upper = fluct_max;
  fr.formula = 0.0;
  fr.residual = fluct_max;
  rows.push_back(fr);

  // Associativity of correspondence composition on a random composable chain.
  double assoc_max = 0.0;
  double identity_max = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::Index n = 3;
    ncg::SpectralTriple t0;
    t0.algebra = ncg::full_matrix_algebra(n);
    t0.dirac = random_herm(n);

    const auto c1 = ncg::inner_fluctuation_correspondence(t0, hermitian_form(n));
    const auto c2 = ncg::inner_fluctuation_correspondence(c1.target, hermitian_form(n));
    const auto c3 = ncg::inner_fluctuation_correspondence(c2.target, hermitian_form(n));

    const auto left = ncg::compose_correspondences(ncg::compose_correspondences(c1, c2), c3);
    const auto right = ncg::compose_correspondences(c1, ncg::compose_correspondences(c2, c3));
    const double scale = std::max(1.0, left.op.norm());
    assoc_max = std::max(assoc_max, (left.op - right.op).norm() / scale);
    assoc_max = std::max(assoc_max, (left.u - right.u).norm());
    assoc_max =
        std::max(assoc_max, (left.module.realize - right.module.realize).norm() /
                                std::max(1.0, right.module.realize.norm()));

    // Identity diagram: compose(identity, c1) is similar to c1 via the
    // multiplication map.
    const auto idc = ncg::identity_correspondence(t0);
    const auto withid = ncg::compose_correspondences(idc, c1);
    const Mat v = ncg::identity_compose_similarity(c1);
    const ncg::ValidationReport sim = ncg::similarity_check(withid, c1, v);
    identity_max = std::max(identity_max, sim.max_residual());
  }
  SweepRow ar;
  ar.parameter = "correspondence-associativity";
  ar.lower = assoc_max;
  ar.upper = assoc_max;
  ar.formula = 0.0;
  ar.residual = assoc_max;
  rows.push_back(ar);
  SweepRow ir;
  ir.parameter = "identity-diagram";
  ir.lower = identity_max;
  ir.upper = identity_max;
  ir.formula = 0.0;
  ir.residual = identity_max;
  rows.push_back(ir);

  return emit_sweep(out, "experiment category", rows, /*default_csv=*/true);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite noncommutative geometry: triples, distances, fluctuations"};
  app.require_subcommand(1);

  Output out;
  app.add_option("--format", out.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--output", out.path, "Write the report to this path instead of stdout");

  const double default_tol = env_default_tol();
  std::function<int()> action;

  // check ------------------------------------------------------------------
  auto* check = app.add_subcommand("check", "Validate a triple's axioms");
  auto check_triple = std::make_shared<std::string>();
  check->add_option("--triple", *check_triple, "Triple JSON file")->required();
  check->callback([&, check_triple] { action = [&, check_triple] {
    return run_check(out, *check_triple); }; });

  // distance ----------------------------------------------------------------
  auto* dist = app.add_subcommand("distance", "Certified spectral distance between states");
  auto dist_triple = std::make_shared<std::string>();
  auto dist_states = std::make_shared<std::vector<std::string>>();
  auto dist_tol = std::make_shared<double>(default_tol);
  auto dist_iter = std::make_shared<int>(500);
  dist->add_option("--triple", *dist_triple, "Triple JSON file")->required();
  dist->add_option("--state", *dist_states, "State JSON file (repeat; two or more)")
      ->required()
      ->expected(-2);
  dist->add_option("--tol", *dist_tol, "Enclosure gap target");
  dist->add_option("--max-iter", *dist_iter, "Interior-point iteration budget");
  dist->callback([&, dist_triple, dist_states, dist_tol, dist_iter] { action = [&, dist_triple,
                                                                       dist_states, dist_tol,
                                                                       dist_iter] {
    return run_distance(out, *dist_triple, *dist_states, *dist_tol, *dist_iter); }; });

  // gauge --------------------------------------------------------------------
  auto* gauge = app.add_subcommand("gauge", "Dirac-operator category over a fixed algebra");
  gauge->require_subcommand(1);
  auto g_d = std::make_shared<std::string>();
  auto g_dp = std::make_shared<std::string>();
  auto g_alg = std::make_shared<std::string>();
  auto g_grading = std::make_shared<std::string>();
  auto g_tol = std::make_shared<double>(1e-9);

  auto* gmor = gauge->add_subcommand("mor", "Morphism D -> D' as a Hermitian one-form");
  gmor->add_option("--D", *g_d, "Source Dirac JSON")->required();
  gmor->add_option("--Dprime", *g_dp, "Target Dirac JSON")->required();
  gmor->add_option("--algebra", *g_alg, "Algebra JSON")->required();
  gmor->add_option("--tol", *g_tol, "Membership tolerance");
  gmor->callback([&, g_d, g_dp, g_alg, g_tol] { action = [&, g_d, g_dp, g_alg, g_tol] {
    return run_gauge_mor(out, *g_d, *g_dp, *g_alg, *g_tol); }; });

  auto* ginit = gauge->add_subcommand("initial", "Initial-object test for a Dirac operator");
  ginit->add_option("--D", *g_d, "Dirac JSON")->required();
  ginit->add_option("--algebra", *g_alg, "Algebra JSON")->required();
  ginit->add_option("--grading", *g_grading, "Optional grading JSON");
  ginit->add_option("--tol", *g_tol, "Membership tolerance");
  ginit->callback([&, g_d, g_alg, g_grading, g_tol] { action = [&, g_d, g_alg, g_grading,
                                                                g_tol] {
    return run_gauge_initial(out, *g_d, *g_alg, *g_grading, *g_tol); }; });

  auto* giso = gauge->add_subcommand("iso", "Isomorphism test between two Dirac operators");
  giso->add_option("--D", *g_d, "Source Dirac JSON")->required();
  giso->add_option("--Dprime", *g_dp, "Target Dirac JSON")->required();
  giso->add_option("--algebra", *g_alg, "Algebra JSON")->required();
  giso->add_option("--tol", *g_tol, "Membership tolerance");
  giso->callback([&, g_d, g_dp, g_alg, g_tol] { action = [&, g_d, g_dp, g_alg, g_tol] {
    return run_gauge_iso(out, *g_d, *g_dp, *g_alg, *g_tol); }; });

  // moyal ---------------------------------------------------------------------
  auto* moyal = app.add_subcommand("moyal", "Truncated oscillator-plane geometry");
  moyal->require_subcommand(1);
  auto mo_levels = std::make_shared<Eigen::Index>(16);
  auto mo_theta = std::make_shared<double>(1.0);
  auto mo_tol = std::make_shared<double>(default_tol);

  auto* mspec = moyal->add_subcommand("spectrum", "Dirac eigenvalues of a truncation");
  mspec->add_option("--N", *mo_levels, "Oscillator levels");
  mspec->add_option("--theta", *mo_theta, "Deformation scale");
  mspec->callback([&, mo_levels, mo_theta] { action = [&, mo_levels, mo_theta] {
    return run_moyal_spectrum(out, *mo_levels, *mo_theta); }; });

  auto* meig = moyal->add_subcommand("eig-dist", "Certified distance between level states");
  auto meig_m = std::make_shared<Eigen::Index>(0);
  auto meig_n = std::make_shared<Eigen::Index>(1);
  meig->add_option("--m", *meig_m, "First level")->required();
  meig->add_option("--n", *meig_n, "Second level")->required();
  meig->add_option("--theta", *mo_theta, "Deformation scale");
  meig->add_option("--N", *mo_levels, "Oscillator levels");
  meig->add_option("--tol", *mo_tol, "Enclosure gap target");
  meig->callback([&, meig_m, meig_n, mo_theta, mo_levels, mo_tol] { action = [&, meig_m, meig_n,
                                                                     mo_theta, mo_levels,
                                                                     mo_tol] {
    return run_moyal_eigdist(out, *meig_m, *meig_n, *mo_theta, *mo_levels, *mo_tol); }; });

  auto* mcoh = moyal->add_subcommand("coherent", "Certified distance vacuum -> coherent state");
  auto mcoh_re = std::make_shared<double>(0.25);
  auto mcoh_im = std::make_shared<double>(0.0);
  mcoh->add_option("--z-re", *mcoh_re, "Displacement, real part");
  mcoh->add_option("--z-im", *mcoh_im, "Displacement, imaginary part");
  mcoh->add_option("--theta", *mo_theta, "Deformation scale");
  mcoh->add_option("--N", *mo_levels, "Oscillator levels");
  mcoh->add_option("--tol", *mo_tol, "Enclosure gap target");
  mcoh->callback([&, mcoh_re, mcoh_im, mo_theta, mo_levels, mo_tol] { action = [&, mcoh_re,
                                                                       mcoh_im, mo_theta,
                                                                       mo_levels, mo_tol] {
    return run_moyal_coherent(out, *mcoh_re, *mcoh_im, *mo_theta, *mo_levels, *mo_tol); }; });

  auto* mgh = moyal->add_subcommand("gh", "Line embeddings of the level ladder");
  auto mgh_list = std::make_shared<std::string>("1,0.5,0.25,0.125");
  auto mgh_points = std::make_shared<Eigen::Index>(64);
  mgh->add_option("--theta-list", *mgh_list, "Comma-separated theta values");
  mgh->add_option("--M", *mgh_points, "Number of ladder steps");
  mgh->callback([&, mgh_list, mgh_points] { action = [&, mgh_list, mgh_points] {
    return run_moyal_gh(out, *mgh_list, *mgh_points); }; });

  auto* mzeta = moyal->add_subcommand("zeta", "Spectral dimension and volume estimates");
  auto mzeta_levels = std::make_shared<Eigen::Index>(256);
  mzeta->add_option("--theta", *mo_theta, "Deformation scale");
  mzeta->add_option("--N", *mzeta_levels, "Oscillator levels");
  mzeta->callback([&, mo_theta, mzeta_levels] { action = [&, mo_theta, mzeta_levels] {
    return run_moyal_zeta(out, *mo_theta, *mzeta_levels); }; });

  auto* mcorr = moyal->add_subcommand("correspondence",
                                      "Rectangular correspondences between truncations");
  auto mcorr_n = std::make_shared<Eigen::Index>(3);
  auto mcorr_levels = std::make_shared<Eigen::Index>(24);
  mcorr->add_option("--n", *mcorr_n, "Small truncation levels");
  mcorr->add_option("--N", *mcorr_levels, "Large truncation levels");
  mcorr->add_option("--theta", *mo_theta, "Deformation scale");
  mcorr->callback([&, mcorr_n, mcorr_levels, mo_theta] { action = [&, mcorr_n, mcorr_levels,
                                                                   mo_theta] {
    return run_moyal_correspondence(out, *mcorr_n, *mcorr_levels, *mo_theta); }; });

  // experiment ------------------------------------------------------------------
  auto* exp = app.add_subcommand("experiment", "Reproduction sweeps with formula columns");
  auto exp_name = std::make_shared<std::string>();
  auto exp_theta = std::make_shared<double>(1.0);
  auto exp_levels = std::make_shared<Eigen::Index>(12);
  auto exp_tol = std::make_shared<double>(default_tol);
  auto exp_seed = std::make_shared<unsigned>(7u);
  exp->add_option("name", *exp_name, "Suite name")
      ->required()
      ->check(CLI::IsMember({"eigdist", "coherent", "gh", "zeta", "category"}));
  exp->add_option("--theta", *exp_theta, "Deformation scale");
  exp->add_option("--N", *exp_levels, "Oscillator levels (eigdist)");
  exp->add_option("--tol", *exp_tol, "Enclosure gap target");
  exp->add_option("--seed", *exp_seed, "Random seed (category)");
  exp->callback([&, exp_name, exp_theta, exp_levels, exp_tol, exp_seed] { action = [&, exp_name,
                                                                            exp_theta, exp_levels,
                                                                            exp_tol, exp_seed] {
    if (*exp_name == "eigdist") return run_experiment_eigdist(out, *exp_theta, *exp_levels, *exp_tol);
    if (*exp_name == "coherent") return run_experiment_coherent(out, *exp_theta, *exp_tol);
    if (*exp_name == "gh") return run_experiment_gh(out);
    if (*exp_name == "zeta") return run_experiment_zeta(out, *exp_theta);
    return run_experiment_category(out, *exp_seed);
  }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints usage/message
    return e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ? kOk : kParseError;
  }
  out.format_explicit = app.count("--format") > 0;

  try {
    return action ? action() : kParseError;
  } catch (const Json::parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";  // carries the byte position
    return kParseError;
  } catch (const std::invalid_argument& e) {
    Json j;
    j["schema"] = ncg::kSchemaVersion;
    j["error"] = e.what();
    emit_json(out, std::move(j));
    std::cerr << "validation failure: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationFailure;
  }
}
