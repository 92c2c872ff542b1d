#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace slc::plot {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw CsvError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
  double number(std::size_t row, std::size_t col) const {
    const auto& s = rows[row][col];
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size())
      throw CsvError("line " + std::to_string(line_numbers[row]) + ": '" + s + "' is not a number");
    return v;
  }
};

/// Comma-separated values; '#' lines are comments. No quoting.
inline Table read_csv(std::istream& is) {
  Table t;
  std::string line;
  std::size_t lineno = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(f);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw CsvError("line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                     " fields, found " + std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(lineno);
  }
  if (t.header.empty()) throw CsvError("no header row");
  if (t.rows.empty()) throw CsvError("no data rows");
  return t;
}

namespace detail {

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline const char* colour(std::size_t i) {
  static const char* palette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3"};
  return palette[i % 7];
}

inline double nice_ceiling(double v) {
  if (!(v > 0)) return 1.0;
  const double p = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (m * p >= v) return m * p;
  return 10.0 * p;
}

struct Frame {
  double width = 720, height = 440, left = 60, right = 170, top = 30, bottom = 50;
  double plot_w() const { return width - left - right; }
  double plot_h() const { return height - top - bottom; }
};

inline void axes(std::ostream& os, const Frame& f, const std::string& title, const std::string& xlabel,
                 const std::string& ylabel) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << f.left + f.plot_w() / 2 << "\" y=\"18\" text-anchor=\"middle\">" << title << "</text>\n";
  os << "<line x1=\"" << f.left << "\" y1=\"" << f.top + f.plot_h() << "\" x2=\"" << f.left + f.plot_w()
     << "\" y2=\"" << f.top + f.plot_h() << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << f.left << "\" y1=\"" << f.top << "\" x2=\"" << f.left << "\" y2=\"" << f.top + f.plot_h()
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << f.left + f.plot_w() / 2 << "\" y=\"" << f.height - 12 << "\" text-anchor=\"middle\">"
     << xlabel << "</text>\n";
  os << "<text transform=\"translate(16," << f.top + f.plot_h() / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << ylabel << "</text>\n";
}

inline void y_ticks(std::ostream& os, const Frame& f, double ymax) {
  for (int i = 0; i <= 4; ++i) {
    const double v = ymax * i / 4.0;
    const double y = f.top + f.plot_h() * (1.0 - i / 4.0);
    os << "<line x1=\"" << f.left - 4 << "\" y1=\"" << y << "\" x2=\"" << f.left << "\" y2=\"" << y
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << f.left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
}

}  // namespace detail

/// Grouped bar chart of mean spectra: one group per k, one bar per mechanism.
inline void spectrum_svg(std::ostream& os, const Table& t, const std::string& title = "Mean frequency spectrum") {
  const auto cm = t.column("mechanism"), ck = t.column("k"), cv = t.column("mean_a_k");
  std::vector<std::string> mechs;
  std::map<std::pair<std::string, int>, double> value;
  int kmax = 0;
  double vmax = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& m = t.rows[r][cm];
    if (std::find(mechs.begin(), mechs.end(), m) == mechs.end()) mechs.push_back(m);
    const int k = static_cast<int>(t.number(r, ck));
    const double v = t.number(r, cv);
    value[{m, k}] = v;
    kmax = std::max(kmax, k);
    vmax = std::max(vmax, v);
  }
  if (kmax < 1) throw CsvError("spectrum has no k >= 1");
  detail::Frame f;
  const double ymax = detail::nice_ceiling(vmax);
  detail::axes(os, f, title, "k", "mean a_k");
  detail::y_ticks(os, f, ymax);
  const double group = f.plot_w() / kmax;
  const double bar = group * 0.8 / static_cast<double>(mechs.size());
  for (int k = 1; k <= kmax; ++k) {
    const double gx = f.left + group * (k - 1) + group * 0.1;
    os << "<text x=\"" << gx + group * 0.4 << "\" y=\"" << f.top + f.plot_h() + 16 << "\" text-anchor=\"middle\">" << k
       << "</text>\n";
    for (std::size_t i = 0; i < mechs.size(); ++i) {
      const auto it = value.find({mechs[i], k});
      if (it == value.end()) continue;
      const double h = f.plot_h() * it->second / ymax;
      os << "<rect x=\"" << detail::num(gx + bar * i) << "\" y=\"" << detail::num(f.top + f.plot_h() - h)
         << "\" width=\"" << detail::num(bar) << "\" height=\"" << detail::num(h) << "\" fill=\""
         << detail::colour(i) << "\"/>\n";
    }
  }
  for (std::size_t i = 0; i < mechs.size(); ++i) {
    const double y = f.top + 10 + 18.0 * i;
    const double x = f.left + f.plot_w() + 14;
    os << "<rect x=\"" << x << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\"" << detail::colour(i)
       << "\"/>\n";
    os << "<text x=\"" << x + 14 << "\" y=\"" << y << "\">" << mechs[i] << "</text>\n";
  }
  os << "</svg>\n";
}

/// Scatter of paired quantiles with the y = x reference line.
inline void qq_svg(std::ostream& os, const Table& t, const std::string& title = "q-q plot of total tree length") {
  const auto ca = t.column("sample_a"), cb = t.column("sample_b");
  std::vector<std::pair<double, double>> pts;
  double hi = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double a = t.number(r, ca), b = t.number(r, cb);
    pts.push_back({b, a});
    hi = std::max({hi, a, b});
  }
  detail::Frame f;
  f.right = 40;
  f.width = 520;
  f.height = 520;
  const double m = detail::nice_ceiling(hi);
  detail::axes(os, f, title, "sample_b quantiles", "sample_a quantiles");
  detail::y_ticks(os, f, m);
  auto X = [&](double v) { return f.left + f.plot_w() * v / m; };
  auto Y = [&](double v) { return f.top + f.plot_h() * (1.0 - v / m); };
  os << "<line x1=\"" << X(0) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(m) << "\" y2=\"" << Y(m)
     << "\" stroke=\"grey\" stroke-dasharray=\"4 3\"/>\n";
  for (const auto& [x, y] : pts)
    os << "<circle cx=\"" << detail::num(X(x)) << "\" cy=\"" << detail::num(Y(y)) << "\" r=\"2.5\" fill=\""
       << detail::colour(0) << "\"/>\n";
  os << "</svg>\n";
}

}  // namespace slc::plot
