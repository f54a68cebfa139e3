#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "elshear/faults.hpp"
#include "elshear/stationary.hpp"

namespace elshear {

/// Full double precision (17 significant digits), locale-independent.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline void write_csv(const std::string& path, const CsvTable& t) {
  std::ofstream os(path);
  if (!os) throw Fault("cannot open " + path + " for writing");
  for (size_t c = 0; c < t.columns.size(); ++c)
    os << (c ? "," : "") << t.columns[c];
  os << "\n";
  for (const auto& row : t.rows) {
    for (size_t c = 0; c < row.size(); ++c)
      os << (c ? "," : "") << fmt17(row[c]);
    os << "\n";
  }
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Fault("cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw Fault(path + ": empty csv");
  size_t pos = 0;
  while (pos <= line.size()) {
    const size_t comma = line.find(',', pos);
    t.columns.push_back(line.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    size_t p = 0;
    while (p <= line.size()) {
      const size_t comma = line.find(',', p);
      const std::string cell = line.substr(
          p, comma == std::string::npos ? std::string::npos : comma - p);
      row.push_back(std::stod(cell));
      if (comma == std::string::npos) break;
      p = comma + 1;
    }
    if (row.size() != t.columns.size())
      throw Fault(path + ": ragged csv row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_text(const std::string& path, const std::string& body) {
  std::ofstream os(path);
  if (!os) throw Fault("cannot open " + path + " for writing");
  os << body;
}

/// Profile CSV (x,u,theta,eta) plus a JSON sidecar with the invariants.
inline void write_profile(const std::string& base,
                          const StationaryProfile& p) {
  CsvTable t;
  t.columns = {"x", "u", "theta", "eta"};
  for (Eigen::Index i = 0; i < p.x.size(); ++i)
    t.rows.push_back({p.x[i], p.u[i], p.theta[i], p.eta[i]});
  write_csv(base + ".csv", t);
  nlohmann::json j;
  j["beta"] = p.beta;
  j["theta_tilde"] = p.theta_tilde;
  j["p0"] = p.p0;
  j["ubar"] = p.ubar;
  j["N"] = p.x.size();
  write_text(base + ".json", j.dump(2) + "\n");
}

inline StationaryProfile read_profile(const std::string& base) {
  const CsvTable t = read_csv(base + ".csv");
  if (t.columns != std::vector<std::string>{"x", "u", "theta", "eta"})
    throw Fault(base + ".csv: unexpected schema");
  StationaryProfile p;
  const Eigen::Index n = static_cast<Eigen::Index>(t.rows.size());
  p.x.resize(n);
  p.u.resize(n);
  p.theta.resize(n);
  p.eta.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.x[i] = t.rows[i][0];
    p.u[i] = t.rows[i][1];
    p.theta[i] = t.rows[i][2];
    p.eta[i] = t.rows[i][3];
  }
  std::ifstream is(base + ".json");
  if (!is) throw Fault("cannot open " + base + ".json");
  nlohmann::json j = nlohmann::json::parse(is);
  p.beta = j.at("beta").get<double>();
  p.theta_tilde = j.at("theta_tilde").get<double>();
  p.p0 = j.at("p0").get<double>();
  p.ubar = j.at("ubar").get<double>();
  return p;
}

/// Minimal self-contained SVG: one polyline (split at NaN gaps) plus
/// dashed vertical asymptote markers.
inline void write_svg_curve(const std::string& path,
                            const std::vector<double>& xs,
                            const std::vector<double>& ys,
                            const std::vector<double>& vlines,
                            const std::string& title) {
  const int W = 860, H = 560, ml = 70, mr = 20, mt = 40, mb = 50;
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(ys[i])) continue;
    xlo = std::min(xlo, xs[i]);
    xhi = std::max(xhi, xs[i]);
    ylo = std::min(ylo, ys[i]);
    yhi = std::max(yhi, ys[i]);
  }
  if (!(xhi > xlo)) { xlo = 0; xhi = 1; }
  if (!(yhi > ylo)) { ylo = 0; yhi = 1; }
  auto px = [&](double x) {
    return ml + (x - xlo) / (xhi - xlo) * (W - ml - mr);
  };
  auto py = [&](double y) {
    return H - mb - (y - ylo) / (yhi - ylo) * (H - mt - mb);
  };
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
       std::to_string(W) + "\" height=\"" + std::to_string(H) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + std::to_string(W / 2) +
       "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"16\">" + title + "</text>\n";
  // axes
  s += "<line x1=\"" + std::to_string(ml) + "\" y1=\"" +
       std::to_string(H - mb) + "\" x2=\"" + std::to_string(W - mr) +
       "\" y2=\"" + std::to_string(H - mb) +
       "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  s += "<line x1=\"" + std::to_string(ml) + "\" y1=\"" + std::to_string(mt) +
       "\" x2=\"" + std::to_string(ml) + "\" y2=\"" + std::to_string(H - mb) +
       "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = xlo + (xhi - xlo) * k / 5;
    const double yv = ylo + (yhi - ylo) * k / 5;
    s += "<text x=\"" + fmt17(px(xv)) + "\" y=\"" + std::to_string(H - mb + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">" + fmt17(xv).substr(0, 8) + "</text>\n";
    s += "<text x=\"" + std::to_string(ml - 8) + "\" y=\"" + fmt17(py(yv) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"11\">" + fmt17(yv).substr(0, 8) + "</text>\n";
  }
  for (double v : vlines) {
    if (v < xlo || v > xhi) continue;
    s += "<line x1=\"" + fmt17(px(v)) + "\" y1=\"" + std::to_string(mt) +
         "\" x2=\"" + fmt17(px(v)) + "\" y2=\"" + std::to_string(H - mb) +
         "\" stroke=\"red\" stroke-width=\"1\" stroke-dasharray=\"5,4\"/>\n";
  }
  std::string poly;
  bool open = false;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(ys[i])) {
      if (open) {
        s += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" "
             "points=\"" + poly + "\"/>\n";
        poly.clear();
        open = false;
      }
      continue;
    }
    poly += fmt17(px(xs[i])) + "," + fmt17(py(ys[i])) + " ";
    open = true;
  }
  if (open)
    s += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" "
         "points=\"" + poly + "\"/>\n";
  s += "</svg>\n";
  write_text(path, s);
}

}  // namespace elshear
