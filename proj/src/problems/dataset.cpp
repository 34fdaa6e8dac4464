#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "apam/problems.hpp"
#include "apam/rng.hpp"

namespace apam {

bool Dataset::is_binary() const {
  return n_classes == 2 && std::all_of(labels.begin(), labels.end(),
                                       [](int y) { return y == 1 || y == -1; });
}

void Dataset::validate() const {
  if (rows.empty()) throw std::invalid_argument("Dataset: needs at least one row");
  require_same_size(rows.size(), labels.size(), "Dataset: labels");
  for (const auto& r : rows) {
    if (r.indices.size() != r.values.size()) throw std::invalid_argument("Dataset: ragged row");
    for (std::size_t j = 0; j < r.indices.size(); ++j) {
      if (r.indices[j] >= n_features) throw std::invalid_argument("Dataset: index >= n_features");
      if (j > 0 && r.indices[j] <= r.indices[j - 1]) {
        throw std::invalid_argument("Dataset: row indices not increasing");
      }
    }
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view tok, std::size_t line, const char* what) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ParseError("line " + std::to_string(line) + ": bad " + what + " '" +
                         std::string(tok) + "'",
                     line);
  }
  return v;
}

}  // namespace

Dataset parse_libsvm(std::string_view text, const WarningSink& warn) {
  Dataset d;
  std::vector<double> raw_labels;
  std::size_t max_index = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      if (nl < text.size() && warn) warn("line " + std::to_string(line_no) + ": empty line skipped");
      if (nl >= text.size()) break;
      continue;
    }

    std::vector<std::uint32_t> idx;
    std::vector<double> val;
    std::size_t tpos = 0;
    bool first = true;
    while (tpos < line.size()) {
      auto sp = line.find_first_of(" \t", tpos);
      if (sp == std::string_view::npos) sp = line.size();
      const std::string_view tok = line.substr(tpos, sp - tpos);
      tpos = line.find_first_not_of(" \t", sp);
      if (tpos == std::string_view::npos) tpos = line.size();
      if (tok.empty()) continue;
      if (first) {
        raw_labels.push_back(parse_double(tok, line_no, "label"));
        first = false;
        continue;
      }
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError("line " + std::to_string(line_no) + ": expected idx:val, got '" +
                             std::string(tok) + "'",
                         line_no);
      }
      const std::string_view is = tok.substr(0, colon);
      unsigned long long i1 = 0;
      const auto [p, ec] = std::from_chars(is.data(), is.data() + is.size(), i1);
      if (ec != std::errc() || p != is.data() + is.size() || i1 == 0 || i1 > UINT32_MAX) {
        throw ParseError("line " + std::to_string(line_no) + ": bad index '" + std::string(is) + "'",
                         line_no);
      }
      const double v = parse_double(tok.substr(colon + 1), line_no, "value");
      const auto i0 = static_cast<std::uint32_t>(i1 - 1);
      if (!idx.empty() && i0 <= idx.back()) {
        throw ParseError("line " + std::to_string(line_no) + ": indices must be increasing", line_no);
      }
      idx.push_back(i0);
      val.push_back(v);
      max_index = std::max<std::size_t>(max_index, i1);
    }
    d.rows.push_back(SparseVec::from_pairs(std::move(idx), std::move(val)));
    if (nl >= text.size()) break;
  }
  if (d.rows.empty()) throw ParseError("libsvm: no data rows", line_no);

  const bool binary = std::all_of(raw_labels.begin(), raw_labels.end(),
                                  [](double y) { return y == 1.0 || y == -1.0; });
  d.labels.reserve(raw_labels.size());
  if (binary) {
    for (double y : raw_labels) d.labels.push_back(static_cast<int>(y));
    d.n_classes = 2;
  } else {
    int max_label = 0;
    for (std::size_t j = 0; j < raw_labels.size(); ++j) {
      const double y = raw_labels[j];
      if (y < 0 || y != std::floor(y) || y > 1e6) {
        throw ParseError("libsvm: multiclass labels must be integers >= 0", 0);
      }
      d.labels.push_back(static_cast<int>(y));
      max_label = std::max(max_label, d.labels.back());
    }
    d.n_classes = static_cast<std::size_t>(max_label) + 1;
  }
  d.n_features = max_index;
  return d;
}

Dataset load_libsvm(const std::string& path, const WarningSink& warn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (trim(text).empty()) throw ParseError(path + ": empty file", 0);
  return parse_libsvm(text, warn);
}

std::string format_libsvm(const Dataset& data) {
  std::string out;
  char buf[64];
  for (std::size_t j = 0; j < data.size(); ++j) {
    out += std::to_string(data.labels[j]);
    const auto& r = data.rows[j];
    for (std::size_t t = 0; t < r.nnz(); ++t) {
      out += ' ';
      out += std::to_string(r.indices[t] + 1);
      out += ':';
      const auto res = std::to_chars(buf, buf + sizeof buf, r.values[t]);
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

void write_libsvm(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << format_libsvm(data);
}

Dataset synth_classification(std::size_t samples, std::size_t features, bool separable,
                             std::uint64_t seed, std::size_t n_classes) {
  if (samples == 0 || features == 0) throw std::invalid_argument("synth: N and n must be >= 1");
  if (n_classes < 2) throw std::invalid_argument("synth: need at least two classes");
  Rng rng(seed);
  Dataset d;
  d.n_features = features;
  d.n_classes = n_classes;
  d.rows.reserve(samples);
  d.labels.reserve(samples);

  if (n_classes == 2) {
    DenseVec u(features);
    for (double& ui : u) ui = rng.normal();
    const double un = norm2(u);
    for (double& ui : u) ui /= un;
    for (std::size_t j = 0; j < samples; ++j) {
      DenseVec x(features);
      for (double& xi : x) xi = rng.normal();
      int y;
      if (separable) {
        const double proj = dot(x, u);
        y = proj >= 0.0 ? 1 : -1;
        // Push the point out to signed distance |proj| + 1 along u.
        for (std::size_t i = 0; i < features; ++i) x[i] += y * u[i];
      } else {
        y = rng.uniform() < 0.5 ? 1 : -1;
        for (std::size_t i = 0; i < features; ++i) x[i] += 0.5 * y * u[i];
      }
      d.rows.push_back(SparseVec::from_dense(x));
      d.labels.push_back(y);
    }
  } else {
    std::vector<DenseVec> centers(n_classes, DenseVec(features));
    for (auto& c : centers) {
      for (double& ci : c) ci = 1.5 * rng.normal();
    }
    for (std::size_t j = 0; j < samples; ++j) {
      const auto y = static_cast<int>(rng.below(n_classes));
      DenseVec x(features);
      for (std::size_t i = 0; i < features; ++i) {
        x[i] = centers[static_cast<std::size_t>(y)][i] + rng.normal();
      }
      if (separable) {
        // Scale the cloud down so classes do not overlap in practice.
        for (std::size_t i = 0; i < features; ++i) {
          x[i] = centers[static_cast<std::size_t>(y)][i] +
                 0.1 * (x[i] - centers[static_cast<std::size_t>(y)][i]);
        }
      }
      d.rows.push_back(SparseVec::from_dense(x));
      d.labels.push_back(y);
    }
  }
  return d;
}

}  // namespace apam
