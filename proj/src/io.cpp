#include "relay/io.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace relay {

using nlohmann::json;

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

namespace {

void dump_into(std::string& out, const json& j) {
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        dump_into(out, it.value());
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        dump_into(out, j[i]);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_real(v) : "null";
      break;
    }
    default:
      out += j.dump();
  }
}

json complex_list(const std::vector<std::complex<double>>& roots) {
  json arr = json::array();
  for (auto l : roots) arr.push_back({l.real(), l.imag()});
  return arr;
}

}  // namespace

std::string dump_json(const json& j) {
  std::string out;
  dump_into(out, j);
  return out;
}

json fixed_point_json(const FixedPoint& fp, const Spectrum* spectrum) {
  json j = {{"schema_version", kSchemaVersion},
            {"record", "fixed_point"},
            {"nu", fp.nu},
            {"Q", fp.params.Q()},
            {"Omega", fp.params.Omega()},
            {"sigma", fp.params.sigma()},
            {"Tstar", fp.Tstar},
            {"yZstar", fp.yZstar},
            {"zstar", fp.zstar},
            {"deltastar", fp.deltastar},
            {"period", fp.period()},
            {"valid",
             {{"z_window", fp.valid.z_window}, {"delta_window", fp.valid.delta_window}, {"parity", fp.valid.parity}}}};
  if (fp.valid.ok()) j["xH"] = x_H(fp);
  if (spectrum) {
    j["roots"] = complex_list(spectrum->roots);
    j["unstable_count"] = spectrum->unstable_count;
  }
  return j;
}

json bifurcation_json(const BifurcationPoint& pt) {
  json j = {{"kind", to_string(pt.kind)}, {"Q", pt.Q},         {"Omega", pt.Omega},
            {"nu", pt.nu},                {"sigma", pt.sigma}, {"Tstar", pt.Tstar},
            {"residual", pt.residual}};
  j["phi"] = pt.phi ? json(*pt.phi) : json(nullptr);
  return j;
}

json orbit_json(const OrbitRecord& rec, const OrbitClass& cls) {
  json events = json::array();
  json intervals = json::array();
  for (std::size_t i = 0; i < rec.events.size(); ++i) {
    events.push_back({{"kind", symbol(rec.events[i].kind)}, {"t", rec.events[i].time}});
    if (i > 0) intervals.push_back(rec.events[i].time - rec.events[i - 1].time);
  }
  json section = json::array();
  for (const auto& h : rec.h_section) section.push_back({h.x, h.y});
  json j = {{"schema_version", kSchemaVersion},
            {"record", "orbit"},
            {"Q", rec.params.Q()},
            {"Omega", rec.params.Omega()},
            {"sigma", rec.params.sigma()},
            {"termination", rec.termination == Termination::Budget ? "budget" : "nonoscillatory"},
            {"class", to_string(cls.tag)},
            {"label", cls.label ? json(cls.label->str()) : json(nullptr)},
            {"nu", cls.label ? json(cls.label->nu) : json(nullptr)},
            {"period", cls.period ? json(*cls.period) : json(nullptr)},
            {"events", std::move(events)},
            {"intervals", std::move(intervals)},
            {"h_section", std::move(section)}};
  return j;
}

json torus_json(const TorusSection& sec) {
  json pts = json::array();
  for (const auto& h : sec.points) pts.push_back({h.x, h.y});
  return {{"schema_version", kSchemaVersion},
          {"record", "torus_section"},
          {"Omega", sec.Omega},
          {"class", to_string(sec.cls.tag)},
          {"label", sec.cls.label ? json(sec.cls.label->str()) : json(nullptr)},
          {"period", sec.cls.period ? json(*sec.cls.period) : json(nullptr)},
          {"points", std::move(pts)}};
}

json error_json(std::string_view kind, std::string_view message) {
  return {{"schema_version", kSchemaVersion}, {"record", "error"}, {"error", kind}, {"message", message}};
}

namespace {

// RFC 4180 quoting for text fields.
std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

void write_atlas_csv(std::ostream& os, const std::vector<AtlasRow>& rows) {
  os << kAtlasHeader << '\n';
  for (const auto& r : rows) {
    os << csv_text(r.kind) << ',' << r.nu << ',' << format_real(r.Q) << ',' << format_real(r.Omega) << ','
       << format_real(r.Tstar) << ',' << format_real(r.invP) << ',' << format_real(r.xH) << ',' << r.unstable_count
       << ',' << csv_text(r.marker) << '\n';
  }
}

AtlasRow atlas_row(const FixedPoint& fp, const Spectrum& spectrum, std::string kind, std::string marker) {
  return {std::move(kind), fp.nu,   fp.params.Q(),          fp.params.Omega(), fp.Tstar,
          1.0 / fp.period(), x_H(fp), spectrum.unstable_count, std::move(marker)};
}

AtlasRow atlas_row(const BifurcationPoint& pt) {
  AtlasRow r;
  r.kind = "locus";
  r.nu = pt.nu;
  r.Q = pt.Q;
  r.Omega = pt.Omega;
  r.Tstar = pt.Tstar;
  r.invP = pt.Tstar > 0.0 ? 1.0 / (2.0 * pt.Tstar) : 0.0;
  r.xH = 0.0;
  if (pt.kind == BifKind::NS || pt.kind == BifKind::PF) {
    const FixedPoint fp = make_fixed_point(pt.nu, Parameters(pt.Q, pt.Omega, pt.sigma), pt.Tstar);
    r.xH = x_H(fp);
  }
  r.unstable_count = -1;
  r.marker = std::string(to_string(pt.kind));
  return r;
}

std::vector<AtlasRow> atlas_rows(const RegionGrid& g) {
  std::vector<AtlasRow> rows;
  for (std::size_t iq = 0; iq < g.Qs.size(); ++iq) {
    for (std::size_t io = 0; io < g.Omegas.size(); ++io) {
      for (std::size_t k = 0; k < g.nus.size(); ++k) {
        const RegionCell& c = g.at(iq, io, k);
        AtlasRow r;
        r.kind = "cell";
        r.nu = g.nus[k];
        r.Q = g.Qs[iq];
        r.Omega = g.Omegas[io];
        r.Tstar = c.exists ? c.Tstar : 0.0;
        r.invP = c.exists ? 1.0 / (2.0 * c.Tstar) : 0.0;
        r.xH = c.xH;
        r.unstable_count = c.unstable_count;
        r.marker = !c.exists ? "absent" : (c.stable ? "stable" : "unstable");
        rows.push_back(std::move(r));
      }
    }
  }
  return rows;
}

std::vector<AtlasRow> atlas_rows(const PeriodDiagram& pd) {
  std::vector<AtlasRow> rows;
  rows.push_back({"passband", -1, pd.Q, 0.0, 0.0, pd.passband.first, 0.0, -1, "lo"});
  rows.push_back({"passband", -1, pd.Q, 0.0, 0.0, pd.passband.second, 0.0, -1, "hi"});
  for (const auto& r : pd.rows) {
    rows.push_back({"branch", r.nu, pd.Q, r.Omega, r.Tstar, r.invP, r.xH, r.unstable_count,
                    r.unstable_count == 0 ? "stable" : "unstable"});
  }
  for (const auto& m : pd.markers) {
    rows.push_back({"marker", m.nu, pd.Q, m.Omega, m.invP > 0.0 ? 1.0 / (2.0 * m.invP) : 0.0, m.invP, m.xH, -1,
                    std::string(to_string(m.kind))});
  }
  return rows;
}

std::vector<AtlasRow> atlas_rows(const ModeBranch& mb) {
  std::vector<AtlasRow> rows;
  for (const auto& s : mb.samples) rows.push_back(atlas_row(s.fp, s.spectrum, "mode"));
  for (const auto& pt : mb.relabels) rows.push_back(atlas_row(pt));
  if (mb.termination) rows.push_back(atlas_row(*mb.termination));
  return rows;
}

void write_samples_csv(std::ostream& os, const OrbitRecord& rec) {
  os << "t,x,y\n";
  for (const auto& s : rec.samples) os << format_real(s.t) << ',' << format_real(s.x) << ',' << format_real(s.y) << '\n';
}

void write_torus_csv(std::ostream& os, const std::vector<TorusSection>& sections) {
  os << "Omega,class,x,y\n";
  for (const auto& sec : sections) {
    const std::string tag(to_string(sec.cls.tag));
    for (const auto& h : sec.points) {
      os << format_real(sec.Omega) << ',' << tag << ',' << format_real(h.x) << ',' << format_real(h.y) << '\n';
    }
  }
}

}  // namespace relay
