#pragma once

// Sparse-format dataset loading and the box/equality-constrained dual of a
// linear soft-margin SVM:
//
//   min 1/2 a' (Y X X' Y) a - 1' a   s.t.  y' a = 0,  0 <= a <= C.
//
// The Gram Hessian is never formed: one apply runs v = Y a, w = sum v_i x_i,
// z_i = x_i' w, out = Y z, which is O(nnz) and counts as one matvec.

#include <fstream>
#include <sstream>

#include "problem.hpp"

namespace slbqp {

struct Dataset {
  int n_samples = 0;
  int n_features = 0;
  // Per-sample sparse features: (0-based feature index, value), strictly
  // increasing indices within a row.
  std::vector<std::vector<std::pair<int, double>>> rows;
  Vec y;  // labels mapped to {-1,+1}
};

namespace detail {

inline std::runtime_error parse_error(int line_no, const std::string& what) {
  return std::runtime_error("libsvm parse error at line " + std::to_string(line_no) + ": " + what);
}

}  // namespace detail

// Each line: <label> <idx>:<value> ... with 1-based, strictly increasing
// indices. '#' starts a comment; blank lines are skipped. Label mapping over
// the distinct labels of the whole file: a subset of {-1,+1} is kept, a
// subset of {0,1} maps 0 -> -1 and 1 -> +1, any other pair maps the label
// seen first to +1; more than two distinct labels is an error.
inline Dataset parse_libsvm(std::istream& in) {
  Dataset ds;
  std::vector<double> raw_labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank

    double label;
    try {
      std::size_t pos = 0;
      label = std::stod(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw detail::parse_error(line_no, "bad label '" + tok + "'");
    }

    std::vector<std::pair<int, double>> row;
    int prev_idx = 0;
    int tok_no = 1;
    while (ls >> tok) {
      ++tok_no;
      const auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw detail::parse_error(line_no, "token " + std::to_string(tok_no) + " ('" + tok +
                                               "') is not index:value");
      int idx;
      double val;
      try {
        std::size_t p1 = 0, p2 = 0;
        idx = std::stoi(tok.substr(0, colon), &p1);
        val = std::stod(tok.substr(colon + 1), &p2);
        if (p1 != colon || p2 != tok.size() - colon - 1) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw detail::parse_error(line_no, "token " + std::to_string(tok_no) + " ('" + tok +
                                               "') is not index:value");
      }
      if (idx < 1)
        throw detail::parse_error(line_no, "feature index " + std::to_string(idx) + " is not >= 1");
      if (idx <= prev_idx)
        throw detail::parse_error(line_no, "feature indices not strictly increasing (" +
                                               std::to_string(prev_idx) + " then " +
                                               std::to_string(idx) + ")");
      prev_idx = idx;
      row.emplace_back(idx - 1, val);
      ds.n_features = std::max(ds.n_features, idx);
    }
    raw_labels.push_back(label);
    ds.rows.push_back(std::move(row));
  }
  ds.n_samples = static_cast<int>(ds.rows.size());

  std::vector<double> distinct;
  for (double lb : raw_labels)
    if (std::find(distinct.begin(), distinct.end(), lb) == distinct.end()) distinct.push_back(lb);
  if (distinct.size() > 2)
    throw std::runtime_error("libsvm parse error: more than two distinct labels (" +
                             std::to_string(distinct.size()) + ")");
  auto subset_of = [&](std::initializer_list<double> s) {
    for (double lb : distinct)
      if (std::find(s.begin(), s.end(), lb) == s.end()) return false;
    return true;
  };
  ds.y.resize(raw_labels.size());
  if (subset_of({-1.0, 1.0})) {
    ds.y = raw_labels;
  } else if (subset_of({0.0, 1.0})) {
    for (std::size_t i = 0; i < raw_labels.size(); ++i) ds.y[i] = raw_labels[i] == 0.0 ? -1.0 : 1.0;
  } else {
    const double pos = distinct.front();
    for (std::size_t i = 0; i < raw_labels.size(); ++i) ds.y[i] = raw_labels[i] == pos ? 1.0 : -1.0;
  }
  return ds;
}

inline Dataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return parse_libsvm(in);
}

class GramHessian final : public HessianOp {
 public:
  explicit GramHessian(Dataset ds) : ds_(std::move(ds)) {}

  int size() const override { return ds_.n_samples; }

  void apply(const Vec& a, Vec& out) const override {
    Vec w(ds_.n_features, 0.0);
    for (int i = 0; i < ds_.n_samples; ++i) {
      const double vi = ds_.y[i] * a[i];
      if (vi == 0.0) continue;
      for (const auto& [j, xij] : ds_.rows[i]) w[j] += vi * xij;
    }
    out.assign(ds_.n_samples, 0.0);
    for (int i = 0; i < ds_.n_samples; ++i) {
      double zi = 0.0;
      for (const auto& [j, xij] : ds_.rows[i]) zi += xij * w[j];
      out[i] = ds_.y[i] * zi;
    }
  }

  const Dataset& dataset() const { return ds_; }

 private:
  Dataset ds_;
};

inline Problem build_svm_dual(Dataset ds, double C = 10.0) {
  if (ds.n_samples == 0) throw std::invalid_argument("build_svm_dual: empty dataset");
  if (!(C > 0.0)) throw std::invalid_argument("build_svm_dual: C must be positive");
  bool has_pos = false, has_neg = false;
  for (double yi : ds.y) (yi > 0.0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw std::invalid_argument("build_svm_dual: dataset has a single class");
  Problem p;
  p.n = ds.n_samples;
  p.c.assign(p.n, 1.0);
  p.l.assign(p.n, 0.0);
  p.u.assign(p.n, C);
  p.eq = LinearConstraint{ds.y, 0.0};
  p.H = std::make_shared<GramHessian>(std::move(ds));
  validate(p);
  return p;
}

// Primal weight vector w = sum_i alpha_i y_i x_i (for checking the trained
// separator in tests and reports).
inline Vec svm_primal_weights(const Dataset& ds, const Vec& alpha) {
  Vec w(ds.n_features, 0.0);
  for (int i = 0; i < ds.n_samples; ++i) {
    const double vi = ds.y[i] * alpha[i];
    for (const auto& [j, xij] : ds.rows[i]) w[j] += vi * xij;
  }
  return w;
}

inline double svm_decision(const Dataset& ds, const Vec& w, int i) {
  double z = 0.0;
  for (const auto& [j, xij] : ds.rows[i]) z += xij * w[j];
  return z;
}

}  // namespace slbqp
