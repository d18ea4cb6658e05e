#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "paircorr/arrays.hpp"
#include "paircorr/geometry.hpp"
#include "paircorr/paircorr.hpp"
#include "paircorr/scaling.hpp"

namespace paircorr {

using json = nlohmann::json;

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Points CSV: one point per row, d columns, 17 significant digits.

inline void write_points_csv(const std::string& path, const PointSet& pts) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t j = 0; j < pts.size(); ++j) {
    for (int k = 0; k < pts.dim; ++k) {
      if (k) out << ',';
      out << format_g17(pts[j][k]);
    }
    out << '\n';
  }
}

inline PointSet read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  PointSet pts;
  std::string line;
  bool first = true;
  std::vector<double> row;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    row.clear();
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (first) {
      pts = PointSet(static_cast<int>(row.size()));
      first = false;
    } else if (static_cast<int>(row.size()) != pts.dim) {
      throw std::runtime_error("ragged CSV in " + path);
    }
    pts.push_back(row.data());
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Curve CSV: r, rho, pair_count, omega_ref, N, M.

inline void write_curve_csv(const std::string& path,
                            const PairCorrelationCurve& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "r,rho,pair_count,omega_ref,N,M\n";
  for (std::size_t k = 0; k < curve.radii.size(); ++k) {
    out << format_g17(curve.radii[k]) << ',' << format_g17(curve.values[k])
        << ',' << curve.pair_counts[k] << ','
        << format_g17(curve.poisson_ref[k]) << ',' << curve.meta.n_points
        << ',' << format_g17(curve.meta.scale) << '\n';
  }
}

/// Two-column gnuplot-ready files: (r, rho) and (r, omega_ref).
inline void write_curve_gnuplot(const std::string& rho_path,
                                const std::string& ref_path,
                                const PairCorrelationCurve& curve) {
  std::ofstream rho(rho_path), ref(ref_path);
  if (!rho || !ref) throw std::runtime_error("cannot write gnuplot files");
  for (std::size_t k = 0; k < curve.radii.size(); ++k) {
    rho << format_g17(curve.radii[k]) << ' ' << format_g17(curve.values[k])
        << '\n';
    ref << format_g17(curve.radii[k]) << ' '
        << format_g17(curve.poisson_ref[k]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Space JSON

inline json space_to_json(const Space& space) {
  if (const auto* e = std::get_if<EuclideanDomain>(&space)) {
    if (e->shape() == EuclideanDomain::Shape::box) {
      json bounds = json::array();
      for (int k = 0; k < e->dim(); ++k)
        bounds.push_back({e->lo()[k], e->hi()[k]});
      return {{"kind", "box"}, {"bounds", bounds}};
    }
    return {{"kind", "ball"}, {"center", e->center()}, {"radius", e->radius()}};
  }
  if (const auto* t = std::get_if<FlatTorus>(&space)) {
    json basis = json::array();
    for (int r = 0; r < t->dim(); ++r) {
      json row = json::array();
      for (int c = 0; c < t->dim(); ++c)
        row.push_back(t->basis()[r * t->dim() + c]);
      basis.push_back(row);
    }
    return {{"kind", "torus"}, {"basis", basis}};
  }
  const auto& s = std::get<UnitAreaSphere>(space);
  return {{"kind", "sphere"}, {"dim", s.intrinsic_dim()}};
}

inline Space space_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "box") {
    std::vector<double> lo, hi;
    for (const auto& b : j.at("bounds")) {
      lo.push_back(b.at(0).get<double>());
      hi.push_back(b.at(1).get<double>());
    }
    return EuclideanDomain::box(std::move(lo), std::move(hi));
  }
  if (kind == "ball")
    return EuclideanDomain::ball(j.at("center").get<std::vector<double>>(),
                                 j.at("radius").get<double>());
  if (kind == "torus") {
    const auto& rows = j.at("basis");
    const int d = static_cast<int>(rows.size());
    std::vector<double> basis;
    for (const auto& row : rows)
      for (const auto& v : row) basis.push_back(v.get<double>());
    return FlatTorus(d, std::move(basis));
  }
  if (kind == "sphere") return UnitAreaSphere(j.at("dim").get<int>());
  throw std::invalid_argument("space_from_json: unknown kind " + kind);
}

// ---------------------------------------------------------------------------
// Frame / scale JSON

inline json frame_to_json(const FrameField& frame) {
  if (frame.kind() == FrameField::Kind::conformal)
    return {{"kind", "conformal"},
            {"density", frame.density_expression().source()},
            {"scalar", frame.scalar()}};
  json j = {{"kind", "constant"}, {"scalar", frame.scalar()}};
  json m = json::array();
  for (int r = 0; r < frame.dim(); ++r) {
    json row = json::array();
    for (int c = 0; c < frame.dim(); ++c)
      row.push_back(frame.matrix()[r * frame.dim() + c]);
    m.push_back(row);
  }
  j["matrix"] = m;
  return j;
}

inline FrameField frame_from_json(const json& j, int dim) {
  const std::string kind = j.value("kind", "identity");
  FrameField f = FrameField::identity(dim);
  if (kind == "conformal") {
    f = FrameField::conformal(dim, j.at("density").get<std::string>());
  } else if (kind == "constant") {
    std::vector<double> m;
    for (const auto& row : j.at("matrix"))
      for (const auto& v : row) m.push_back(v.get<double>());
    f = FrameField::constant(dim, std::move(m));
  } else if (kind != "identity") {
    throw std::invalid_argument("frame_from_json: unknown kind " + kind);
  }
  if (j.contains("scalar")) f = f.scaled(j.at("scalar").get<double>());
  return f;
}

inline json scale_to_json(const ScaleSequence& s) {
  return {{"c", s.c()}, {"theta", s.theta()}, {"clamp", s.clamped()}};
}

inline ScaleSequence scale_from_json(const json& j) {
  return ScaleSequence(j.value("c", 1.0), j.value("theta", 1.0),
                       j.value("clamp", true));
}

// ---------------------------------------------------------------------------
// Curve JSON envelope with provenance.

inline json curve_to_json(const PairCorrelationCurve& curve,
                          const json& provenance) {
  json j;
  j["provenance"] = provenance;
  j["N"] = curve.meta.n_points;
  j["M"] = curve.meta.scale;
  j["radii"] = curve.radii;
  j["pair_counts"] = curve.pair_counts;
  j["rho"] = curve.values;
  j["omega_ref"] = curve.poisson_ref;
  return j;
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return json::parse(in);
}

}  // namespace paircorr
