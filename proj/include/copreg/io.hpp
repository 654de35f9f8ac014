#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "copreg/model.hpp"
#include "copreg/solver.hpp"

// Match-data ingestion (CSV with categorical dummy expansion), the flat
// key/value model-spec format, and CSV writing helpers.

namespace copreg {

struct Dataset {
  std::vector<std::string> header;  // original column order
  Eigen::VectorXi y1, y2;
  std::string response1 = "y1", response2 = "y2";
  // original columns by name
  std::map<std::string, std::vector<double>> numeric;
  std::map<std::string, std::vector<std::string>> categorical;
  // derived dummy columns, named "col=level"; the alphabetically first
  // level of each categorical column is the reference
  std::map<std::string, std::vector<double>> dummies;
  std::map<std::string, std::string> reference_level;
  std::vector<std::string> notes;
  bool has_odds = false;
  Eigen::MatrixXd odds;  // n x 3: win, draw, loss (decimal)

  std::size_t n() const { return static_cast<std::size_t>(y1.size()); }
  // numeric or dummy column by name; nullptr when absent
  const std::vector<double>* find_column(const std::string& name) const;
  bool has_categorical(const std::string& name) const;
  // dummy column names derived from a categorical column, sorted
  std::vector<std::string> dummy_names(const std::string& base) const;
  // fold labels from any column (categorical as-is, numeric stringified)
  std::vector<std::string> fold_labels(const std::string& column) const;
  Dataset subset(const std::vector<int>& rows) const;
};

struct ModelSpec {
  std::string response1 = "y1";
  std::string response2 = "y2";
  std::vector<std::string> margin1_covariates;
  std::vector<std::string> margin2_covariates;
  Family family = Family::Indep;
  bool linear_equal = false;
  double xi = 0.0;
  SolverOptions solver;
};

Dataset load_matches(const std::string& path, const std::string& response1 = "y1",
                     const std::string& response2 = "y2");
// Same typing rules applied to in-memory CSV text.
Dataset load_matches_text(const std::string& csv_text,
                          const std::string& response1 = "y1",
                          const std::string& response2 = "y2");
void save_matches(const Dataset& data, const std::string& path);

ModelSpec parse_model_spec(const std::string& path);
ModelSpec parse_model_spec_text(const std::string& text);

// Resolve the spec's covariate names (expanding categoricals to their
// dummy columns) and assemble the design matrices with intercepts.
FitProblem build_problem(const Dataset& data, const ModelSpec& spec);

struct OddsRow {
  int match_id;
  std::array<double, 3> odds;  // win, draw, loss
};
std::vector<OddsRow> load_odds(const std::string& path);

// Minimal CSV cell/row helpers shared by the writers (17-significant-digit
// float formatting keeps round trips bit-stable).
std::string format_double(double x);

}  // namespace copreg
