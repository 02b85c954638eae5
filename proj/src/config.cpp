#include "vtfem/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vtfem {

using json = nlohmann::ordered_json;

namespace {

void check_keys(const json &obj, const std::set<std::string> &allowed, const char *ctx) {
  if (!obj.is_object()) throw std::invalid_argument(std::string("config: ") + ctx + " must be an object");
  for (const auto &item : obj.items())
    if (!allowed.count(item.key()))
      throw std::invalid_argument(std::string("config: unknown key '") + item.key() + "' in " + ctx);
}

std::vector<double> number_list(const json &j, const char *ctx) {
  if (!j.is_array()) throw std::invalid_argument(std::string("config: ") + ctx + " must be an array");
  std::vector<double> out;
  for (const auto &v : j) {
    if (!v.is_number()) throw std::invalid_argument(std::string("config: ") + ctx + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

ForcingVariant parse_variant(const std::string &s) {
  if (s == "S") return ForcingVariant::S;
  if (s == "RS") return ForcingVariant::RS;
  if (s == "RHs") return ForcingVariant::RHs;
  if (s == "Homogenized") return ForcingVariant::Homogenized;
  throw std::invalid_argument("config: forcing.variant must be S | RS | RHs | Homogenized");
}

std::string variant_name(ForcingVariant v) {
  switch (v) {
    case ForcingVariant::S: return "S";
    case ForcingVariant::RS: return "RS";
    case ForcingVariant::RHs: return "RHs";
    case ForcingVariant::Homogenized: return "Homogenized";
  }
  return "RHs";
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
  }
  check_keys(j, {"experiment", "dim", "domain", "mesh", "material", "forcing", "vessels",
                 "bcs", "run", "output", "levels", "analytic", "mask_radius", "pressure",
                 "beta", "beta_tensor"},
             "top level");

  ExperimentConfig c;
  c.experiment = j.at("experiment").get<std::string>();
  c.dim = j.at("dim").get<int>();
  if (c.dim != 2 && c.dim != 3) throw std::invalid_argument("config: dim must be 2 or 3");

  {
    const json &d = j.at("domain");
    check_keys(d, {"origin", "extent"}, "domain");
    c.origin = number_list(d.at("origin"), "domain.origin");
    c.extent = number_list(d.at("extent"), "domain.extent");
    if (int(c.origin.size()) != c.dim || int(c.extent.size()) != c.dim)
      throw std::invalid_argument("config: domain origin/extent must have dim entries");
  }
  if (j.contains("mesh")) {
    const json &m = j.at("mesh");
    check_keys(m, {"base_level", "local_levels", "attractor_radius"}, "mesh");
    if (m.contains("base_level")) c.base_level = m.at("base_level").get<int>();
    if (m.contains("local_levels")) c.local_levels = m.at("local_levels").get<int>();
    if (m.contains("attractor_radius")) c.attractor_radius = m.at("attractor_radius").get<double>();
  }
  {
    const json &m = j.at("material");
    check_keys(m, {"mu", "lambda"}, "material");
    c.material.mu = m.at("mu").get<double>();
    c.material.lambda = m.at("lambda").get<double>();
  }
  if (j.contains("forcing")) {
    const json &f = j.at("forcing");
    check_keys(f, {"variant", "epsilon"}, "forcing");
    if (f.contains("variant")) c.forcing_variant = parse_variant(f.at("variant").get<std::string>());
    if (f.contains("epsilon")) {
      const json &e = f.at("epsilon");
      if (e.is_string()) {
        if (e.get<std::string>() != "2h")
          throw std::invalid_argument("config: forcing.epsilon must be a number or \"2h\"");
        c.forcing_epsilon = 0.0;
      } else if (e.is_number()) {
        c.forcing_epsilon = e.get<double>();
        if (!(c.forcing_epsilon > 0))
          throw std::invalid_argument("config: explicit forcing.epsilon must be > 0");
      } else {
        throw std::invalid_argument("config: forcing.epsilon must be a number or \"2h\"");
      }
    }
  }
  if (j.contains("vessels")) {
    const json &v = j.at("vessels");
    check_keys(v, {"inline", "generator"}, "vessels");
    if (v.contains("inline")) {
      for (const json &e : v.at("inline")) {
        if (c.dim == 2) {
          check_keys(e, {"center", "radius", "pressure"}, "vessels.inline[]");
          auto ctr = number_list(e.at("center"), "vessel center");
          if (ctr.size() != 2) throw std::invalid_argument("config: 2D vessel center needs 2 entries");
          c.vessels.inline2d.push_back(
              {{ctr[0], ctr[1]}, e.at("radius").get<double>(), e.at("pressure").get<double>()});
        } else {
          check_keys(e, {"points", "radius", "radii", "pressure", "pressures"},
                     "vessels.inline[]");
          VesselSegment3D seg;
          for (const json &pt : e.at("points")) {
            auto p = number_list(pt, "segment point");
            if (p.size() != 3) throw std::invalid_argument("config: 3D points need 3 entries");
            seg.points.push_back({p[0], p[1], p[2]});
          }
          const std::size_t n = seg.points.size();
          if (e.contains("radii"))
            seg.radii = number_list(e.at("radii"), "segment radii");
          else
            seg.radii.assign(n, e.at("radius").get<double>());
          if (e.contains("pressures"))
            seg.pressures = number_list(e.at("pressures"), "segment pressures");
          else
            seg.pressures.assign(n, e.at("pressure").get<double>());
          seg.validate();
          c.vessels.inline3d.push_back(std::move(seg));
        }
      }
    }
    if (v.contains("generator")) {
      const json &g = v.at("generator");
      check_keys(g, {"kind", "n", "radius", "target_beta", "balancing_factor", "root",
                     "margin", "seed"},
                 "vessels.generator");
      c.vessels.has_generator = true;
      c.vessels.generator.kind = g.at("kind").get<std::string>();
      if (c.vessels.generator.kind != "random" && c.vessels.generator.kind != "tree")
        throw std::invalid_argument("config: generator.kind must be random | tree");
      c.vessels.generator.n = g.at("n").get<int>();
      if (g.contains("radius")) c.vessels.generator.radius = g.at("radius").get<double>();
      if (g.contains("target_beta"))
        c.vessels.generator.target_beta = g.at("target_beta").get<double>();
      if (g.contains("balancing_factor"))
        c.vessels.generator.balancing_factor = g.at("balancing_factor").get<double>();
      if (g.contains("root")) c.vessels.generator.root = number_list(g.at("root"), "generator.root");
      if (g.contains("margin")) c.vessels.generator.margin = g.at("margin").get<double>();
      if (g.contains("seed")) c.vessels.generator.seed = g.at("seed").get<std::uint64_t>();
    }
  }
  if (j.contains("bcs")) {
    const json &b = j.at("bcs");
    if (!b.is_array()) throw std::invalid_argument("config: bcs must be an array of per-face strings");
    for (const json &e : b) c.bcs.push_back(e.get<std::string>());
    if (int(c.bcs.size()) != 2 * c.dim)
      throw std::invalid_argument("config: bcs must list 2*dim faces");
    for (const auto &s : c.bcs)
      if (s != "clamped" && s != "free" && s != "exact")
        throw std::invalid_argument("config: bc must be clamped | free | exact");
  }
  if (j.contains("run")) {
    const json &r = j.at("run");
    check_keys(r, {"realizations", "master_seed", "threads"}, "run");
    if (r.contains("realizations")) c.realizations = r.at("realizations").get<int>();
    if (r.contains("master_seed")) c.master_seed = r.at("master_seed").get<std::uint64_t>();
    if (r.contains("threads")) c.threads = r.at("threads").get<int>();
  }
  if (j.contains("output")) {
    const json &o = j.at("output");
    check_keys(o, {"dir", "vtk"}, "output");
    if (o.contains("dir")) c.output_dir = o.at("dir").get<std::string>();
    if (o.contains("vtk")) c.write_vtk_output = o.at("vtk").get<bool>();
  }
  if (j.contains("levels")) {
    for (const json &e : j.at("levels")) c.levels.push_back(e.get<int>());
  }
  if (j.contains("analytic")) {
    const json &a = j.at("analytic");
    check_keys(a, {"R", "a", "p"}, "analytic");
    if (a.contains("R")) c.analytic_R = a.at("R").get<double>();
    if (a.contains("a")) c.analytic_a = a.at("a").get<double>();
    if (a.contains("p")) c.analytic_p = a.at("p").get<double>();
  }
  if (j.contains("mask_radius")) c.mask_radius = j.at("mask_radius").get<double>();
  if (j.contains("pressure")) c.pressure = j.at("pressure").get<double>();
  if (j.contains("beta")) c.beta = j.at("beta").get<double>();
  if (j.contains("beta_tensor")) {
    c.beta_tensor = number_list(j.at("beta_tensor"), "beta_tensor");
    if (c.beta_tensor.size() != 9)
      throw std::invalid_argument("config: beta_tensor needs 9 row-major entries");
  }

  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return from_json_text(buf.str());
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["experiment"] = experiment;
  j["dim"] = dim;
  j["domain"] = {{"origin", origin}, {"extent", extent}};
  j["mesh"] = {{"base_level", base_level},
               {"local_levels", local_levels},
               {"attractor_radius", attractor_radius}};
  j["material"] = {{"mu", material.mu}, {"lambda", material.lambda}};
  if (forcing_epsilon > 0)
    j["forcing"] = {{"variant", variant_name(forcing_variant)}, {"epsilon", forcing_epsilon}};
  else
    j["forcing"] = {{"variant", variant_name(forcing_variant)}, {"epsilon", "2h"}};
  json v = json::object();
  if (!vessels.inline2d.empty() || !vessels.inline3d.empty()) {
    json list = json::array();
    for (const auto &e : vessels.inline2d)
      list.push_back({{"center", {e.center[0], e.center[1]}},
                      {"radius", e.radius},
                      {"pressure", e.pressure}});
    for (const auto &e : vessels.inline3d) {
      json pts = json::array();
      for (const auto &p : e.points) pts.push_back({p[0], p[1], p[2]});
      list.push_back({{"points", pts}, {"radii", e.radii}, {"pressures", e.pressures}});
    }
    v["inline"] = list;
  }
  if (vessels.has_generator) {
    json g;
    g["kind"] = vessels.generator.kind;
    g["n"] = vessels.generator.n;
    if (vessels.generator.radius > 0) g["radius"] = vessels.generator.radius;
    if (vessels.generator.target_beta > 0) g["target_beta"] = vessels.generator.target_beta;
    g["balancing_factor"] = vessels.generator.balancing_factor;
    if (!vessels.generator.root.empty()) g["root"] = vessels.generator.root;
    g["margin"] = vessels.generator.margin;
    g["seed"] = vessels.generator.seed;
    v["generator"] = g;
  }
  if (!v.empty()) j["vessels"] = v;
  if (!bcs.empty()) j["bcs"] = bcs;
  j["run"] = {{"realizations", realizations}, {"master_seed", master_seed}, {"threads", threads}};
  j["output"] = {{"dir", output_dir}, {"vtk", write_vtk_output}};
  if (!levels.empty()) j["levels"] = levels;
  if (experiment == "converge")
    j["analytic"] = {{"R", analytic_R}, {"a", analytic_a}, {"p", analytic_p}};
  if (experiment == "converge") j["mask_radius"] = mask_radius;
  if (experiment == "stats" || experiment == "tree" || experiment == "homog")
    j["pressure"] = pressure;
  if (beta > 0) j["beta"] = beta;
  if (!beta_tensor.empty()) j["beta_tensor"] = beta_tensor;
  return j.dump(2) + "\n";
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> kinds = {"converge", "solve", "stats", "tree", "homog"};
  if (!kinds.count(experiment))
    throw std::invalid_argument("config: experiment must be converge | solve | stats | tree | homog");
  material.validate();
  for (double e : extent)
    if (!(e > 0)) throw std::invalid_argument("config: extent must be positive");
  if (base_level < 1) throw std::invalid_argument("config: mesh.base_level must be >= 1");
  if (local_levels < 0) throw std::invalid_argument("config: mesh.local_levels must be >= 0");
  if (base_level + local_levels > 14)
    throw std::invalid_argument("config: base_level + local_levels must not exceed 14");
  if (realizations < 1) throw std::invalid_argument("config: run.realizations must be >= 1");
  if (threads < 1) throw std::invalid_argument("config: run.threads must be >= 1");
  if (experiment == "converge") {
    if (levels.empty()) throw std::invalid_argument("config: converge requires levels");
    for (int l : levels)
      if (l < 1 || l > 14) throw std::invalid_argument("config: levels must lie in 1..14");
    if (!(analytic_a > 0 && analytic_a < analytic_R))
      throw std::invalid_argument("config: analytic requires 0 < a < R");
  }
  if (experiment == "tree") {
    if (dim != 3) throw std::invalid_argument("config: tree experiment requires dim = 3");
    if (!vessels.has_generator || vessels.generator.kind != "tree")
      throw std::invalid_argument("config: tree experiment requires a tree generator");
  }
  if (experiment == "stats" && !vessels.has_generator)
    throw std::invalid_argument("config: stats experiment requires a vessel generator");
  if (vessels.has_generator) {
    if (vessels.generator.n < 1)
      throw std::invalid_argument("config: generator.n must be >= 1");
    if (vessels.generator.radius <= 0 && vessels.generator.target_beta <= 0)
      throw std::invalid_argument("config: generator needs radius or target_beta");
    if (!vessels.generator.root.empty() && int(vessels.generator.root.size()) != dim)
      throw std::invalid_argument("config: generator.root must have dim entries");
  }
}

}  // namespace vtfem
