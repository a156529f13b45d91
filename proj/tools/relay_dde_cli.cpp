// relay-dde: command-line front end for the relay DDE toolkit.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "relay/atlas.hpp"
#include "relay/error.hpp"
#include "relay/event_sim.hpp"
#include "relay/io.hpp"
#include "relay/parallel.hpp"
#include "relay/sym4_map.hpp"
#include "relay/torus.hpp"

namespace {

using namespace relay;

struct Common {
  std::string format = "json";
  std::string out;
  int threads = 0;
};

struct Model {
  double Q = 1.5;
  double Omega = 14.0;
  int sigma = -1;
};

struct Range {
  double min = 2.0;
  double max = 20.0;
  int samples = 2000;
};

void add_model(CLI::App* cmd, Model& m, bool with_omega = true) {
  cmd->add_option("--Q", m.Q, "filter quality factor")->check(CLI::PositiveNumber);
  if (with_omega) cmd->add_option("--Omega", m.Omega, "center frequency times delay")->check(CLI::PositiveNumber);
  cmd->add_option("--sigma", m.sigma, "feedback sign")->check(CLI::IsMember({-1, 1}));
}

void add_range(CLI::App* cmd, Range& r) {
  cmd->add_option("--omega-min", r.min)->check(CLI::PositiveNumber);
  cmd->add_option("--omega-max", r.max)->check(CLI::PositiveNumber);
  cmd->add_option("--samples", r.samples, "Omega samples")->check(CLI::Range(2, 10000000));
}

// Output goes to --out when given, else stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw CLI::ValidationError("--out", "cannot open " + path);
    }
  }
  std::ostream& os() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void write_lines(std::ostream& os, const std::vector<nlohmann::json>& records) {
  for (const auto& r : records) os << dump_json(r) << '\n';
}

nlohmann::json loci_json(const std::string& kind, const Model& m, const std::vector<BifurcationPoint>& pts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : pts) arr.push_back(bifurcation_json(p));
  return {{"schema_version", kSchemaVersion}, {"record", "locus"}, {"kind", kind},
          {"Q", m.Q},                          {"sigma", m.sigma},  {"points", std::move(arr)}};
}

bool is_csv(const Common& c) { return c.format == "csv"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-driven simulation and bifurcation analysis of a delayed relay loop"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value file; flags override it");

  Common common;
  app.add_option("--format", common.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", common.out, "output path (default stdout)");
  app.add_option("--threads", common.threads, "worker threads (default RELAY_DDE_THREADS or all cores)");

  // simulate
  Model sim_m;
  std::size_t sim_events = 400;
  double sim_x0 = 1.0, sim_y0 = 0.0, sim_dt = 0.01, sim_kick = 1e-3;
  std::optional<int> sim_seed_nu;
  auto* sim = app.add_subcommand("simulate", "event-driven simulation and orbit classification");
  add_model(sim, sim_m);
  sim->add_option("--events", sim_events, "event budget")->check(CLI::PositiveNumber);
  sim->add_option("--x0", sim_x0, "constant history value");
  sim->add_option("--y0", sim_y0, "y at t = 0");
  sim->add_option("--seed-nu", sim_seed_nu, "start from the perturbed fixed point of this map instead");
  sim->add_option("--perturbation", sim_kick, "relative kick used with --seed-nu");
  sim->add_option("--sample-dt", sim_dt, "dense output spacing for csv");

  // fixedpoint / spectrum
  Model fp_m;
  int fp_nu = 3;
  auto* fpc = app.add_subcommand("fixedpoint", "fixed point of the four-symbol map");
  add_model(fpc, fp_m);
  fpc->add_option("--nu", fp_nu)->check(CLI::NonNegativeNumber);
  auto* spc = app.add_subcommand("spectrum", "characteristic roots at the fixed point");
  add_model(spc, fp_m);
  spc->add_option("--nu", fp_nu)->check(CLI::NonNegativeNumber);

  // locus
  Model lc_m;
  Range lc_r;
  std::string lc_kind = "ns";
  int lc_nu = 3;
  bool lc_map_only = false;
  bool lc_criticality = false;
  auto* lc = app.add_subcommand("locus", "NS, pitchfork or corner points along Omega");
  add_model(lc, lc_m, false);
  add_range(lc, lc_r);
  lc->add_option("--kind", lc_kind)->check(CLI::IsMember({"ns", "pf", "corner"}));
  lc->add_option("--nu", lc_nu)->check(CLI::NonNegativeNumber);
  lc->add_flag("--map-only", lc_map_only, "skip the map sharing the mode across a relabel corner");
  lc->add_flag("--criticality", lc_criticality, "label NS points by a short run on their unstable side");

  // region
  int rg_sigma = -1;
  std::vector<int> rg_nus{0, 1, 2, 3, 4, 5, 6, 7, 8};
  double rg_qmin = 0.1, rg_qmax = 3.0, rg_omin = 1.0, rg_omax = 40.0;
  int rg_qn = 400, rg_on = 400;
  auto* rg = app.add_subcommand("region", "existence and stability over a Q-Omega grid");
  rg->add_option("--nus", rg_nus)->delimiter(',');
  rg->add_option("--q-min", rg_qmin)->check(CLI::PositiveNumber);
  rg->add_option("--q-max", rg_qmax)->check(CLI::PositiveNumber);
  rg->add_option("--q-steps", rg_qn)->check(CLI::Range(2, 100000));
  rg->add_option("--omega-min", rg_omin)->check(CLI::PositiveNumber);
  rg->add_option("--omega-max", rg_omax)->check(CLI::PositiveNumber);
  rg->add_option("--omega-steps", rg_on)->check(CLI::Range(2, 100000));
  rg->add_option("--sigma", rg_sigma)->check(CLI::IsMember({-1, 1}));

  // period-diagram
  Model pd_m;
  Range pd_r;
  std::vector<int> pd_nus{0, 1, 2, 3, 4, 5, 6};
  auto* pd = app.add_subcommand("period-diagram", "inverse period against Omega with markers");
  add_model(pd, pd_m, false);
  add_range(pd, pd_r);
  pd->add_option("--nus", pd_nus)->delimiter(',');

  // mode-trace
  Model mt_m;
  Range mt_r;
  int mt_nu = 2;
  bool mt_back = false;
  auto* mt = app.add_subcommand("mode-trace", "follow a mode across relabel corners");
  add_model(mt, mt_m, false);
  add_range(mt, mt_r);
  mt->add_option("--nu", mt_nu)->check(CLI::NonNegativeNumber);
  mt->add_flag("--backward", mt_back, "trace from omega-max down to omega-min");

  // torus-scan
  Model ts_m;
  double ts_min = 14.78, ts_max = 14.90, ts_kick = 1e-2, ts_transient = 0.2;
  int ts_steps = 12, ts_nu = 3;
  std::size_t ts_iter = 100000;
  bool ts_cold = false;
  auto* ts = app.add_subcommand("torus-scan", "long runs and H-event sections across Omega");
  add_model(ts, ts_m, false);
  ts->add_option("--omega-min", ts_min)->check(CLI::PositiveNumber);
  ts->add_option("--omega-max", ts_max)->check(CLI::PositiveNumber);
  ts->add_option("--steps", ts_steps, "number of Omega intervals")->check(CLI::NonNegativeNumber);
  ts->add_option("--iterates", ts_iter, "section points per Omega")->check(CLI::PositiveNumber);
  ts->add_option("--transient", ts_transient, "discarded leading fraction")->check(CLI::Range(0.0, 0.95));
  ts->add_option("--nu", ts_nu, "map whose fixed point seeds the first run");
  ts->add_option("--perturbation", ts_kick, "relative kick of the seed");
  ts->add_flag("--no-warm-start", ts_cold, "reseed at every Omega");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Sink sink(common.out);
    std::ostream& os = sink.os();
    const int threads = resolve_threads(common.threads);

    if (*sim) {
      const Parameters p(sim_m.Q, sim_m.Omega, sim_m.sigma);
      SystemState st0 = constant_history(sim_x0, sim_y0);
      if (sim_seed_nu) {
        const FixedPoint fp = fixed_point(*sim_seed_nu, p);
        StateVector s = fp.state();
        s.yZ *= 1.0 + sim_kick;
        st0 = to_system_state(s, p);
      }
      SimBudget budget;
      budget.max_events = sim_events;
      budget.sample_dt = is_csv(common) ? sim_dt : 0.0;
      const OrbitRecord rec = simulate(st0, p, budget);
      ClassifyOptions copts;
      copts.min_events = std::min<std::size_t>(copts.min_events, sim_events);
      const OrbitClass cls = classify(rec, copts);
      nlohmann::json summary = {{"schema_version", kSchemaVersion},
                                {"record", "summary"},
                                {"Q", p.Q()},
                                {"Omega", p.Omega()},
                                {"sigma", p.sigma()},
                                {"events", rec.events.size()},
                                {"class", to_string(cls.tag)},
                                {"label", cls.label ? nlohmann::json(cls.label->str()) : nlohmann::json(nullptr)},
                                {"period", cls.period ? nlohmann::json(*cls.period) : nlohmann::json(nullptr)}};
      if (is_csv(common)) {
        write_samples_csv(os, rec);
        if (!common.out.empty()) std::cout << dump_json(summary) << '\n';
      } else {
        os << dump_json(orbit_json(rec, cls)) << '\n';
      }
    } else if (*fpc || *spc) {
      const Parameters p(fp_m.Q, fp_m.Omega, fp_m.sigma);
      const FixedPoint fp = fixed_point(fp_nu, p);
      std::optional<Spectrum> sp;
      if (fp.valid.ok()) sp = spectrum_of(fp);
      if (is_csv(common) && *spc) {
        if (!sp) throw Error(ErrorKind::InvalidState, "no valid fixed point for nu = " + std::to_string(fp_nu));
        os << "re,im,modulus\n";
        for (auto l : sp->roots) {
          os << format_real(l.real()) << ',' << format_real(l.imag()) << ',' << format_real(std::abs(l)) << '\n';
        }
      } else if (is_csv(common)) {
        if (!sp) throw Error(ErrorKind::InvalidState, "no valid fixed point for nu = " + std::to_string(fp_nu));
        write_atlas_csv(os, {atlas_row(fp, *sp, "fixedpoint", sp->unstable_count == 0 ? "stable" : "unstable")});
      } else {
        os << dump_json(fixed_point_json(fp, sp ? &*sp : nullptr)) << '\n';
      }
    } else if (*lc) {
      if (lc_r.max < lc_r.min) throw CLI::ValidationError("--omega-max", "must not be below --omega-min");
      const OmegaRange range{lc_r.min, lc_r.max};
      ScanOptions so;
      so.samples = lc_r.samples;
      std::vector<int> maps{lc_nu};
      if (!lc_map_only && lc_kind != "corner") {
        if (auto partner = mode_partner(lc_nu, lc_m.Q, lc_m.sigma)) maps.push_back(*partner);
        std::sort(maps.begin(), maps.end());
      }
      std::vector<BifurcationPoint> pts;
      for (int nu : maps) {
        std::vector<BifurcationPoint> got;
        if (lc_kind == "ns") {
          if (nu >= 1) got = ns_locus(nu, lc_m.Q, range, lc_m.sigma, so);
        } else if (lc_kind == "pf") {
          if (lc_m.sigma == -1 && nu % 2 == 1) got = pitchfork_locus(nu, lc_m.Q, range, so);
        } else {
          for (auto type : {CornerType::Relabel, CornerType::Terminal}) {
            const auto om = corner_omega(nu, lc_m.Q, type);
            if (!om || *om < range.min || *om > range.max) continue;
            BifurcationPoint pt;
            pt.kind = type == CornerType::Relabel ? BifKind::Corner1 : BifKind::Corner2;
            pt.Q = lc_m.Q;
            pt.Omega = *om;
            pt.nu = nu;
            pt.sigma = lc_m.sigma;
            pt.Tstar = type == CornerType::Relabel ? 1.0 / (nu + 1) : 2.0 / (2 * nu + 1);
            got.push_back(pt);
          }
        }
        pts.insert(pts.end(), got.begin(), got.end());
      }
      std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.Omega < b.Omega; });
      if (is_csv(common)) {
        std::vector<AtlasRow> rows;
        for (const auto& pt : pts) rows.push_back(atlas_row(pt));
        write_atlas_csv(os, rows);
      } else {
        nlohmann::json j = loci_json(lc_kind, lc_m, pts);
        if (lc_criticality && lc_kind == "ns")
          for (std::size_t i = 0; i < pts.size(); ++i) j["points"][i]["criticality"] = to_string(ns_criticality(pts[i]));
        os << dump_json(j) << '\n';
      }
    } else if (*rg) {
      const auto Qs = linspace(rg_qmin, rg_qmax, rg_qn);
      const auto Oms = linspace(rg_omin, rg_omax, rg_on);
      const RegionGrid g = region_scan(rg_nus, Qs, Oms, rg_sigma, threads);
      if (is_csv(common)) {
        write_atlas_csv(os, atlas_rows(g));
      } else {
        std::vector<nlohmann::json> lines;
        for (const auto& r : atlas_rows(g)) {
          lines.push_back({{"schema_version", kSchemaVersion}, {"record", "cell"}, {"nu", r.nu},
                           {"Q", r.Q}, {"Omega", r.Omega}, {"sigma", rg_sigma}, {"exists", r.marker != "absent"},
                           {"stable", r.marker == "stable"}, {"unstable_count", r.unstable_count},
                           {"Tstar", r.Tstar}, {"xH", r.xH}});
        }
        write_lines(os, lines);
      }
    } else if (*pd) {
      ScanOptions so;
      so.samples = pd_r.samples;
      const PeriodDiagram d = period_diagram(pd_nus, pd_m.Q, {pd_r.min, pd_r.max}, pd_m.sigma, so, threads);
      if (is_csv(common)) {
        write_atlas_csv(os, atlas_rows(d));
      } else {
        std::vector<nlohmann::json> lines;
        lines.push_back({{"schema_version", kSchemaVersion}, {"record", "passband"}, {"Q", d.Q},
                         {"w_lo", d.passband.first}, {"w_hi", d.passband.second}});
        for (const auto& r : d.rows) {
          lines.push_back({{"schema_version", kSchemaVersion}, {"record", "branch"}, {"nu", r.nu},
                           {"Omega", r.Omega}, {"Tstar", r.Tstar}, {"invP", r.invP}, {"xH", r.xH},
                           {"unstable_count", r.unstable_count}, {"stable", r.unstable_count == 0}});
        }
        for (const auto& mk : d.markers) {
          lines.push_back({{"schema_version", kSchemaVersion}, {"record", "marker"}, {"kind", to_string(mk.kind)},
                           {"nu", mk.nu}, {"Omega", mk.Omega}, {"invP", mk.invP}, {"xH", mk.xH}});
        }
        write_lines(os, lines);
      }
    } else if (*mt) {
      ScanOptions so;
      so.samples = mt_r.samples;
      const ModeBranch mb = mode_trace(mt_nu, mt_m.Q, {mt_r.min, mt_r.max}, mt_m.sigma, so, mt_back);
      if (is_csv(common)) {
        write_atlas_csv(os, atlas_rows(mb));
      } else {
        std::vector<nlohmann::json> lines;
        for (const auto& s : mb.samples) lines.push_back(fixed_point_json(s.fp, &s.spectrum));
        nlohmann::json ends = nlohmann::json::array();
        for (const auto& pt : mb.relabels) ends.push_back(bifurcation_json(pt));
        lines.push_back({{"schema_version", kSchemaVersion}, {"record", "mode_events"}, {"relabels", ends},
                         {"termination", mb.termination ? bifurcation_json(*mb.termination) : nlohmann::json(nullptr)}});
        write_lines(os, lines);
      }
    } else if (*ts) {
      TorusOptions to;
      to.h_iterates = ts_iter;
      to.transient_fraction = ts_transient;
      to.warm_start = !ts_cold;
      to.nu = ts_nu;
      to.perturbation = ts_kick;
      const auto Oms = linspace(ts_min, ts_max, ts_steps + 1);
      const auto sections = torus_scan(ts_m.Q, Oms, ts_m.sigma, to);
      if (is_csv(common)) {
        write_torus_csv(os, sections);
      } else {
        std::vector<nlohmann::json> lines;
        for (const auto& s : sections) lines.push_back(torus_json(s));
        write_lines(os, lines);
      }
    }
    return 0;
  } catch (const CLI::Error& e) {
    std::cerr << dump_json(error_json("usage", e.what())) << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << dump_json(error_json(to_string(e.kind()), e.what())) << '\n';
    return e.kind() == ErrorKind::InvalidArgument ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << dump_json(error_json("internal", e.what())) << '\n';
    return 1;
  }
}
