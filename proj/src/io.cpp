#include "copreg/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace copreg {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

bool parse_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

bool parse_int(const std::string& s, int* out) {
  double v;
  if (!parse_double(s, &v)) return false;
  if (v != std::floor(v)) return false;
  *out = static_cast<int>(v);
  return true;
}

std::vector<std::vector<std::string>> read_csv_stream(
    std::istream& in, const std::string& label,
    std::vector<std::string>* header) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty CSV input: " + label);
  }
  *header = split_csv_line(line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header->size()) {
      std::ostringstream oss;
      oss << label << ": row " << rows.size() + 1 << " has " << cells.size()
          << " cells, expected " << header->size();
      throw std::runtime_error(oss.str());
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

std::string format_double(double x) {
  // shortest representation that parses back to the same bits
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

const std::vector<double>* Dataset::find_column(const std::string& name) const {
  auto it = numeric.find(name);
  if (it != numeric.end()) return &it->second;
  auto jt = dummies.find(name);
  if (jt != dummies.end()) return &jt->second;
  return nullptr;
}

bool Dataset::has_categorical(const std::string& name) const {
  return categorical.count(name) > 0;
}

std::vector<std::string> Dataset::dummy_names(const std::string& base) const {
  std::vector<std::string> out;
  std::string prefix = base + "=";
  for (const auto& [name, col] : dummies) {
    if (name.rfind(prefix, 0) == 0) out.push_back(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> Dataset::fold_labels(const std::string& column) const {
  auto it = categorical.find(column);
  if (it != categorical.end()) return it->second;
  const std::vector<double>* col = find_column(column);
  if (!col) throw std::invalid_argument("fold column not found: " + column);
  std::vector<std::string> out;
  out.reserve(col->size());
  for (double v : *col) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    out.emplace_back(buf);
  }
  return out;
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
  Dataset out;
  out.header = header;
  out.response1 = response1;
  out.response2 = response2;
  out.reference_level = reference_level;
  out.y1.resize(rows.size());
  out.y2.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.y1(i) = y1(rows[i]);
    out.y2(i) = y2(rows[i]);
  }
  auto take_d = [&](const std::vector<double>& src) {
    std::vector<double> dst(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) dst[i] = src[rows[i]];
    return dst;
  };
  for (const auto& [k, v] : numeric) out.numeric[k] = take_d(v);
  for (const auto& [k, v] : dummies) out.dummies[k] = take_d(v);
  for (const auto& [k, v] : categorical) {
    std::vector<std::string> dst(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) dst[i] = v[rows[i]];
    out.categorical[k] = dst;
  }
  out.has_odds = has_odds;
  if (has_odds) {
    out.odds.resize(rows.size(), 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.odds.row(i) = odds.row(rows[i]);
    }
  }
  return out;
}

namespace {

Dataset build_dataset(const std::string& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows,
                      const std::string& response1,
                      const std::string& response2) {
  Dataset data;
  data.header = header;
  data.response1 = response1;
  data.response2 = response2;

  auto col_index = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  int i1 = col_index(response1);
  int i2 = col_index(response2);
  if (i1 < 0 || i2 < 0) {
    throw std::runtime_error(path + ": missing required response column '" +
                             (i1 < 0 ? response1 : response2) + "'");
  }
  const int n = static_cast<int>(rows.size());
  data.y1.resize(n);
  data.y2.resize(n);
  for (int r = 0; r < n; ++r) {
    for (int which = 0; which < 2; ++which) {
      int ci = which == 0 ? i1 : i2;
      int v;
      if (!parse_int(rows[r][ci], &v) || v < 0) {
        std::ostringstream oss;
        oss << path << ": row " << r + 1 << ", column '" << header[ci]
            << "': response must be a nonnegative integer (got '"
            << rows[r][ci] << "')";
        throw std::runtime_error(oss.str());
      }
      (which == 0 ? data.y1 : data.y2)(r) = v;
    }
  }

  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    if (c == i1 || c == i2) continue;
    const std::string& name = header[c];
    std::vector<double> vals(n);
    bool all_numeric = true;
    for (int r = 0; r < n; ++r) {
      if (rows[r][c].empty()) {
        std::ostringstream oss;
        oss << path << ": row " << r + 1 << ", column '" << name
            << "': missing value";
        throw std::runtime_error(oss.str());
      }
      if (!parse_double(rows[r][c], &vals[r])) {
        all_numeric = false;
        break;
      }
    }
    if (all_numeric) {
      data.numeric[name] = std::move(vals);
    } else {
      std::vector<std::string> svals(n);
      for (int r = 0; r < n; ++r) svals[r] = rows[r][c];
      data.categorical[name] = std::move(svals);
    }
  }

  // dummy expansion: alphabetically first level is the reference
  for (const auto& [name, svals] : data.categorical) {
    std::set<std::string> levels(svals.begin(), svals.end());
    data.reference_level[name] = *levels.begin();
    bool first = true;
    for (const auto& level : levels) {
      if (first) {
        first = false;
        continue;
      }
      std::vector<double> dummy(n);
      for (int r = 0; r < n; ++r) dummy[r] = (svals[r] == level) ? 1.0 : 0.0;
      data.dummies[name + "=" + level] = std::move(dummy);
    }
  }

  auto odds_col = [&](const char* nm) -> const std::vector<double>* {
    auto it = data.numeric.find(nm);
    return it == data.numeric.end() ? nullptr : &it->second;
  };
  const auto* ow = odds_col("odds_win");
  const auto* od = odds_col("odds_draw");
  const auto* ol = odds_col("odds_loss");
  if (ow && od && ol) {
    data.has_odds = true;
    data.odds.resize(n, 3);
    for (int r = 0; r < n; ++r) {
      data.odds(r, 0) = (*ow)[r];
      data.odds(r, 1) = (*od)[r];
      data.odds(r, 2) = (*ol)[r];
    }
  }
  return data;
}

}  // namespace

Dataset load_matches(const std::string& path, const std::string& response1,
                     const std::string& response2) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::string> header;
  auto rows = read_csv_stream(in, path, &header);
  return build_dataset(path, header, rows, response1, response2);
}

Dataset load_matches_text(const std::string& csv_text,
                          const std::string& response1,
                          const std::string& response2) {
  std::istringstream in(csv_text);
  std::vector<std::string> header;
  auto rows = read_csv_stream(in, "<memory>", &header);
  return build_dataset("<memory>", header, rows, response1, response2);
}

void save_matches(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (std::size_t c = 0; c < data.header.size(); ++c) {
    out << (c ? "," : "") << data.header[c];
  }
  out << "\n";
  for (std::size_t r = 0; r < data.n(); ++r) {
    for (std::size_t c = 0; c < data.header.size(); ++c) {
      const std::string& name = data.header[c];
      if (c) out << ",";
      if (name == data.response1) {
        out << data.y1(r);
      } else if (name == data.response2) {
        out << data.y2(r);
      } else if (auto it = data.numeric.find(name); it != data.numeric.end()) {
        out << format_double(it->second[r]);
      } else if (auto jt = data.categorical.find(name);
                 jt != data.categorical.end()) {
        out << jt->second[r];
      } else {
        throw std::runtime_error("save_matches: unknown column " + name);
      }
    }
    out << "\n";
  }
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("model spec: bad boolean value '" + v + "'");
}

}  // namespace

ModelSpec parse_model_spec_text(const std::string& text) {
  ModelSpec spec;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  bool xi_set = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("model spec line " + std::to_string(lineno) +
                               ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "response1") {
      spec.response1 = value;
    } else if (key == "response2") {
      spec.response2 = value;
    } else if (key == "margin1_covariates") {
      spec.margin1_covariates = split_list(value);
    } else if (key == "margin2_covariates") {
      spec.margin2_covariates = split_list(value);
    } else if (key == "copula") {
      spec.family = family_from_code(value);
    } else if (key == "linear_equal") {
      spec.linear_equal = parse_bool(value);
    } else if (key == "xi") {
      spec.xi = std::stod(value);
      xi_set = true;
    } else if (key == "initial_radius") {
      spec.solver.initial_radius = std::stod(value);
    } else if (key == "max_radius") {
      spec.solver.max_radius = std::stod(value);
    } else if (key == "accept_ratio") {
      spec.solver.accept_ratio = std::stod(value);
    } else if (key == "shrink") {
      spec.solver.shrink = std::stod(value);
    } else if (key == "grow") {
      spec.solver.grow = std::stod(value);
    } else if (key == "gradient_tol") {
      spec.solver.gradient_tol = std::stod(value);
    } else if (key == "max_inner_iter") {
      spec.solver.max_inner_iter = std::stoi(value);
    } else if (key == "max_outer_iter") {
      spec.solver.max_outer_iter = std::stoi(value);
    } else if (key == "weight_tol") {
      spec.solver.weight_tol = std::stod(value);
    } else if (key == "weight_floor") {
      spec.solver.weight_floor = std::stod(value);
    } else {
      throw std::runtime_error("model spec: unknown key '" + key + "'");
    }
  }
  if (spec.linear_equal &&
      spec.margin1_covariates.size() != spec.margin2_covariates.size()) {
    std::ostringstream oss;
    oss << "model spec: linear_equal requires equally many covariates per "
           "margin (got "
        << spec.margin1_covariates.size() << " and "
        << spec.margin2_covariates.size() << ")";
    throw std::runtime_error(oss.str());
  }
  if (spec.linear_equal && !xi_set) spec.xi = 1e9;
  spec.solver.xi = spec.xi;
  return spec;
}

ModelSpec parse_model_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model spec: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model_spec_text(buf.str());
}

FitProblem build_problem(const Dataset& data, const ModelSpec& spec) {
  auto resolve = [&](const std::vector<std::string>& wanted,
                     std::vector<const std::vector<double>*>* cols,
                     std::vector<std::string>* names) {
    for (const auto& w : wanted) {
      if (const auto* col = data.find_column(w)) {
        cols->push_back(col);
        names->push_back(w);
      } else if (data.has_categorical(w)) {
        for (const auto& dn : data.dummy_names(w)) {
          cols->push_back(data.find_column(dn));
          names->push_back(dn);
        }
      } else {
        throw std::invalid_argument("model column not found in dataset: " + w);
      }
    }
  };
  std::vector<const std::vector<double>*> c1, c2;
  std::vector<std::string> n1{"(Intercept)"}, n2{"(Intercept)"};
  resolve(spec.margin1_covariates, &c1, &n1);
  resolve(spec.margin2_covariates, &c2, &n2);
  if (spec.linear_equal && c1.size() != c2.size()) {
    throw std::invalid_argument(
        "linear_equal: margins expand to different covariate counts");
  }
  const int n = static_cast<int>(data.n());
  FitProblem prob;
  prob.copula = CopulaSpec{spec.family};
  prob.y1 = data.y1;
  prob.y2 = data.y2;
  prob.names1 = n1;
  prob.names2 = n2;
  prob.X1.resize(n, 1 + c1.size());
  prob.X2.resize(n, 1 + c2.size());
  prob.X1.col(0).setOnes();
  prob.X2.col(0).setOnes();
  for (std::size_t j = 0; j < c1.size(); ++j) {
    for (int i = 0; i < n; ++i) prob.X1(i, j + 1) = (*c1[j])[i];
  }
  for (std::size_t j = 0; j < c2.size(); ++j) {
    for (int i = 0; i < n; ++i) prob.X2(i, j + 1) = (*c2[j])[i];
  }
  return prob;
}

std::vector<OddsRow> load_odds(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::string> header;
  auto rows = read_csv_stream(in, path, &header);
  auto idx = [&](const char* nm) {
    auto it = std::find(header.begin(), header.end(), nm);
    if (it == header.end()) {
      throw std::runtime_error(path + ": missing odds column '" +
                               std::string(nm) + "'");
    }
    return static_cast<int>(it - header.begin());
  };
  int im = idx("match_id"), iw = idx("odds_win"), id = idx("odds_draw"),
      il = idx("odds_loss");
  std::vector<OddsRow> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    OddsRow row;
    double w, d, l;
    if (!parse_int(rows[r][im], &row.match_id) ||
        !parse_double(rows[r][iw], &w) || !parse_double(rows[r][id], &d) ||
        !parse_double(rows[r][il], &l)) {
      throw std::runtime_error(path + ": bad odds row " + std::to_string(r + 1));
    }
    row.odds = {w, d, l};
    out.push_back(row);
  }
  return out;
}

}  // namespace copreg
