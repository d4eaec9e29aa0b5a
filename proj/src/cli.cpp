#include "dupinlab/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dupinlab/classifier.hpp"
#include "dupinlab/error.hpp"
#include "dupinlab/exprdsl.hpp"
#include "dupinlab/families.hpp"
#include "dupinlab/isotensor.hpp"
#include "dupinlab/laguerre.hpp"
#include "dupinlab/moebius.hpp"

namespace dupinlab::cli {
namespace {

using json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::string command;
  std::string family;
  std::string dsl;
  std::string mode = "moebius";
  int n = 0;
  int k = 0;
  int p = 0;
  int q = 0;
  double theta = M_PI / 4;
  std::string m = "1,1,1";
  std::string kappa = "1,2,3";
  std::string axes = "1,1.3,1.7,2.1";
  int grid = 4;
  double margin = 0.05;
  double tol = 1e-6;
  double eps_group = 1e-8;
  double eps_umb = 1e-10;
  double eps_rad = 1e-8;
  unsigned long long seed = 1;
  int threads = 0;
  std::string cloud;
  std::string from_family;
  std::string out;
  std::string config;
};

Error config_error(const std::string& what) { return Error(ErrorCode::ConfigError, what); }

std::vector<double> parse_list(const std::string& s, const char* name) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw config_error(std::string("bad number in --") + name + ": '" + tok + "'");
    }
  }
  if (v.empty()) throw config_error(std::string("--") + name + " needs at least one value");
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct FamilyInfo {
  std::string tag;
  std::string description;
  std::string parameters;
};

const std::vector<FamilyInfo>& family_table() {
  static const std::vector<FamilyInfo> t{
      {"cone-clifford", "cone over the minimal Clifford torus S^1 x S^1 in S^3", "--n (default 3)"},
      {"cone", "cone over the Clifford torus S^p(cos theta) x S^q(sin theta)", "--p --q --theta --n"},
      {"cone-perturbed", "cone over a non-isoparametric torus in S^3", "--n (default 3)"},
      {"clifford-torus", "S^p(cos theta) x S^q(sin theta) in the unit sphere", "--p --q --theta"},
      {"perturbed-torus", "torus in S^3 with a varying radius angle", "--theta"},
      {"stereographic-clifford", "stereographic image of a Clifford torus", "--p (default 1) --q (default 2) --theta"},
      {"cyclide", "cyclide of Dupin on S^k x H^{n-k}", "--k (default 1) --n (default 3)"},
      {"flat-laguerre", "flat Laguerre isoparametric hypersurface", "--m (default 1,1,1) --kappa (default 1,2,3)"},
      {"ellipsoid", "ellipsoid with the given semi-axes", "--axes (default 1,1.3,1.7,2.1)"},
      {"sphere", "round unit sphere (totally umbilic)", "--n (default 2)"},
      {"cylinder", "round cylinder S^1 x R^{n-1}", "--n (default 2)"},
  };
  return t;
}

families::Family make_family(const std::string& tag, const RunConfig& c) {
  auto or_default = [](int v, int d) { return v > 0 ? v : d; };
  if (tag == "cone-clifford") return families::make_clifford_cone(or_default(c.n, 3));
  if (tag == "cone") {
    const int p = or_default(c.p, 1), q = or_default(c.q, 1);
    return families::make_cone(families::make_clifford_torus(p, q, c.theta), or_default(c.n, p + q + 1));
  }
  if (tag == "cone-perturbed") {
    families::Family f = families::make_cone(families::make_perturbed_torus(), or_default(c.n, 3));
    f.tag = "cone-perturbed";
    return f;
  }
  if (tag == "clifford-torus") return families::make_clifford_torus(or_default(c.p, 1), or_default(c.q, 1), c.theta);
  if (tag == "perturbed-torus") return families::make_perturbed_torus(c.theta);
  if (tag == "stereographic-clifford")
    return families::make_stereographic_clifford(or_default(c.p, 1), or_default(c.q, 2), c.theta);
  if (tag == "cyclide") return families::make_cyclide(or_default(c.k, 1), or_default(c.n, 3));
  if (tag == "flat-laguerre") {
    std::vector<int> m;
    for (double x : parse_list(c.m, "m")) {
      if (x != std::floor(x)) throw config_error("--m needs integers");
      m.push_back(static_cast<int>(x));
    }
    return families::make_flat_laguerre(m, parse_list(c.kappa, "kappa"));
  }
  if (tag == "ellipsoid") return families::make_ellipsoid(parse_list(c.axes, "axes"));
  if (tag == "sphere") return families::make_sphere(or_default(c.n, 2));
  if (tag == "cylinder") return families::make_cylinder(or_default(c.n, 2));
  throw config_error("unknown family '" + tag + "' (see example-list)");
}

families::Family select_immersion(const RunConfig& c) {
  if (!c.family.empty() && !c.dsl.empty()) throw config_error("give either --family or --dsl, not both");
  if (!c.dsl.empty()) return families::from_dsl(read_file(c.dsl), "dsl");
  if (!c.family.empty()) return make_family(c.family, c);
  throw config_error("missing --family or --dsl");
}

Tolerances tolerances(const RunConfig& c) { return Tolerances{c.eps_group, c.eps_umb, c.eps_rad}; }

int threads(const RunConfig& c) { return c.threads > 0 ? c.threads : default_threads(); }

Grid make_grid(const Immersion& imm, const RunConfig& c) {
  Grid g = Grid::make(imm, c.grid, c.margin);
  if (g.points.empty()) throw config_error("grid has no points outside the excluded zones");
  return g;
}

void validate(const RunConfig& c) {
  if (c.grid < 2) throw config_error("--grid needs at least 2 points per axis");
  if (!(c.margin >= 0 && c.margin < 0.5)) throw config_error("--margin must lie in [0, 0.5)");
  for (double t : {c.tol, c.eps_group, c.eps_umb, c.eps_rad})
    if (!(t > 0)) throw config_error("tolerances must be positive");
  if (c.mode != "moebius" && c.mode != "laguerre" && c.mode != "isotensor")
    throw config_error("--mode must be moebius, laguerre or isotensor");
  if (c.threads < 0) throw config_error("--threads must be non-negative");
}

// Apply keys of a JSON config to fields not given on the command line.
void apply_config(RunConfig& c, const json& j, const std::function<bool(const std::string&)>& given) {
  if (!j.is_object()) throw config_error("config must be an object");
  auto str = [](const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw config_error("list entries must be numbers");
        std::ostringstream os;
        os.precision(17);
        os << v[i].get<double>();
        s += (i ? "," : "") + os.str();
      }
      return s;
    }
    throw config_error("expected a string or a list");
  };
  auto num = [](const json& v, const std::string& key) {
    if (!v.is_number()) throw config_error("config key '" + key + "' must be a number");
    return v.get<double>();
  };
  auto integer = [&](const json& v, const std::string& key) {
    const double x = num(v, key);
    if (x != std::floor(x)) throw config_error("config key '" + key + "' must be an integer");
    return static_cast<long long>(x);
  };
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    if (given(key)) continue;
    if (key == "family") c.family = str(v);
    else if (key == "dsl") c.dsl = str(v);
    else if (key == "mode") c.mode = str(v);
    else if (key == "n") c.n = static_cast<int>(integer(v, key));
    else if (key == "k") c.k = static_cast<int>(integer(v, key));
    else if (key == "p") c.p = static_cast<int>(integer(v, key));
    else if (key == "q") c.q = static_cast<int>(integer(v, key));
    else if (key == "theta") c.theta = num(v, key);
    else if (key == "m") c.m = str(v);
    else if (key == "kappa") c.kappa = str(v);
    else if (key == "axes") c.axes = str(v);
    else if (key == "grid") c.grid = static_cast<int>(integer(v, key));
    else if (key == "margin") c.margin = num(v, key);
    else if (key == "tol") c.tol = num(v, key);
    else if (key == "eps_group") c.eps_group = num(v, key);
    else if (key == "eps_umb") c.eps_umb = num(v, key);
    else if (key == "eps_rad") c.eps_rad = num(v, key);
    else if (key == "seed") c.seed = static_cast<unsigned long long>(integer(v, key));
    else if (key == "threads") c.threads = static_cast<int>(integer(v, key));
    else if (key == "cloud") c.cloud = str(v);
    else if (key == "from_family") c.from_family = str(v);
    else if (key == "out") c.out = str(v);
    else throw config_error("unknown config key '" + key + "'");
  }
}

json echo(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  if (!c.family.empty()) j["family"] = c.family;
  if (!c.dsl.empty()) j["dsl"] = c.dsl;
  if (c.command == "verify" || c.command == "invariants") j["mode"] = c.mode;
  if (c.n) j["n"] = c.n;
  if (c.k) j["k"] = c.k;
  if (c.p) j["p"] = c.p;
  if (c.q) j["q"] = c.q;
  j["theta"] = c.theta;
  if (c.family == "flat-laguerre" || c.from_family == "flat-laguerre") {
    j["m"] = c.m;
    j["kappa"] = c.kappa;
  }
  if (c.family == "ellipsoid" || c.from_family == "ellipsoid") j["axes"] = c.axes;
  j["grid"] = c.grid;
  j["margin"] = c.margin;
  j["tol"] = c.tol;
  j["eps_group"] = c.eps_group;
  j["eps_umb"] = c.eps_umb;
  j["eps_rad"] = c.eps_rad;
  j["seed"] = c.seed;
  if (!c.cloud.empty()) j["cloud"] = c.cloud;
  if (!c.from_family.empty()) j["from_family"] = c.from_family;
  return j;
}

struct Report {
  json doc;
  json checks = json::array();
  json summary = json::object();

  void check(const std::string& name, const std::string& tag, double residual, double tolerance, bool pass) {
    json c;
    c["name"] = name;
    c["tag"] = tag;
    c["residual"] = residual;
    c["tolerance"] = tolerance;
    c["pass"] = pass;
    checks.push_back(c);
  }
  void check(const std::string& name, const std::string& tag, double residual, double tolerance) {
    check(name, tag, residual, tolerance, residual < tolerance);
  }
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c["pass"].get<bool>()) return false;
    return true;
  }
  json failing_tags() const {
    json t = json::array();
    for (const auto& c : checks)
      if (!c["pass"].get<bool>()) t.push_back(c["tag"]);
    return t;
  }
};

json vec(const std::vector<double>& v) { return json(v); }
json vec(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json ranges(const std::vector<std::vector<double>>& vals) {
  json r = json::array();
  if (vals.empty()) return r;
  for (std::size_t i = 0; i < vals[0].size(); ++i) {
    double lo = vals[0][i], hi = vals[0][i];
    for (const auto& v : vals) {
      lo = std::min(lo, v[i]);
      hi = std::max(hi, v[i]);
    }
    r.push_back({{"min", lo}, {"max", hi}});
  }
  return r;
}

json pair_json(const classify::Pair& p) { return {{"a", p.a}, {"b", p.b}, {"multiplicity", p.multiplicity}}; }

json cloud_json(const classify::PairCloud& c) {
  json j = json::array();
  for (const auto& p : c.pairs) j.push_back(pair_json(p));
  return j;
}

json outcome_json(const classify::Outcome& o) {
  json j;
  j["kind"] = classify::outcome_name(o);
  if (auto* l = std::get_if<classify::LinearlyDependent>(&o)) {
    j["lambda"] = l->lambda;
    j["mu"] = l->mu;
    if (l->gated) j["slope_intercept"] = l->gate;
  } else if (auto* r = std::get_if<classify::Reducible>(&o)) {
    j["b_split"] = r->b_split;
    j["a_split"] = r->a_split;
    j["neg"] = r->gate;
    j["rule"] = r->rule;
    json line = json::array();
    for (const auto& p : r->line) line.push_back(pair_json(p));
    j["line"] = line;
  } else if (auto* w = std::get_if<classify::Inconsistent>(&o)) {
    j["witness"] = w->witness;
    j["value"] = w->value;
    json ps = json::array();
    for (const auto& p : w->pairs) ps.push_back(pair_json(p));
    j["pairs"] = ps;
  }
  return j;
}

json necessary_json(const classify::NecessaryReport& rep) {
  json j;
  j["all_pass"] = rep.all_pass();
  j["failed_tags"] = rep.failed_tags();
  json e = json::array();
  for (const auto& c : rep.entries) {
    json x;
    x["tag"] = c.tag;
    x["value"] = c.value;
    x["pass"] = c.pass;
    json ps = json::array();
    for (const auto& p : c.pairs) ps.push_back(pair_json(p));
    x["pairs"] = ps;
    e.push_back(x);
  }
  j["entries"] = e;
  return j;
}

void moebius_summary(Report& rep, const std::vector<MoebiusData>& data) {
  const MoebiusData& d0 = data.front();
  std::vector<std::vector<double>> bs, as, ls;
  double rho_lo = d0.rho, rho_hi = d0.rho, kap_lo = d0.riemann.kappa, kap_hi = d0.riemann.kappa;
  for (const auto& d : data) {
    bs.push_back(d.b);
    as.push_back(d.a);
    ls.push_back(d.lambda);
    rho_lo = std::min(rho_lo, d.rho);
    rho_hi = std::max(rho_hi, d.rho);
    kap_lo = std::min(kap_lo, d.riemann.kappa);
    kap_hi = std::max(kap_hi, d.riemann.kappa);
  }
  auto& s = rep.summary;
  s["grid_points"] = data.size();
  s["r"] = d0.b_groups.size();
  s["b_spectrum"] = vec(d0.b);
  s["a_diagonal"] = vec(d0.a);
  s["b_range"] = ranges(bs);
  s["a_range"] = ranges(as);
  s["b_drift"] = eigen_drift(bs);
  s["lambda_drift"] = eigen_drift(ls);
  s["rho"] = {{"min", rho_lo}, {"max", rho_hi}};
  s["scalar_curvature_mean"] = {{"min", kap_lo}, {"max", kap_hi}};
  s["trace_A"] = d0.A.trace();
  try {
    s["cloud"] = cloud_json(classify::cloud_from_moebius(d0));
  } catch (const Error& e) {
    s["cloud"] = nullptr;
    s["cloud_error"] = e.name();
  }
}

void laguerre_summary(Report& rep, const std::vector<LaguerreData>& data) {
  const LaguerreData& d0 = data.front();
  std::vector<std::vector<double>> bs;
  for (const auto& d : data) bs.push_back(d.b);
  auto& s = rep.summary;
  s["grid_points"] = data.size();
  s["r"] = d0.b_groups.size();
  s["b_spectrum"] = vec(d0.b);
  s["b_range"] = ranges(bs);
  s["b_drift"] = eigen_drift(bs);
  if (d0.has_L) s["l_spectrum"] = vec(sorted_eigenvalues(d0.L));
  s["radii"] = vec(d0.radii);
  s["rho"] = d0.rho;
}

// ---------------------------------------------------------------------------

void run_invariants(Report& rep, const RunConfig& c) {
  families::Family fam = select_immersion(c);
  const Grid grid = make_grid(fam.imm, c);
  rep.summary["family"] = fam.tag;
  if (c.mode == "laguerre") {
    laguerre_summary(rep, laguerre_on_grid(fam.imm, grid, tolerances(c), threads(c)));
  } else {
    moebius_summary(rep, moebius_on_grid(fam.imm, grid, tolerances(c), threads(c)));
  }
}

void verify_moebius(Report& rep, const RunConfig& c, const families::Family& fam, const Grid& grid) {
  const auto data = moebius_on_grid(fam.imm, grid, tolerances(c), threads(c));
  const auto ir = integrability_report(data, c.tol);
  const auto& tags = integrability_tags();
  for (int i = 0; i < 6; ++i) rep.check("moebius-integrability", tags[i], ir.residual[i], c.tol);
  rep.check("riemann-symmetry", "plumbing", std::max(ir.riemann_symmetry, ir.riemann_bianchi), c.tol);
  const auto v = moebius_isoparametric(data, c.tol);
  rep.check("moebius-isoparametric", "is1", std::max(v.max_C, v.max_drift), c.tol);
  moebius_summary(rep, data);
  if (fam.tag == "cone-clifford") {
    std::vector<std::vector<double>> samples;
    for (std::size_t i = 0; i < grid.points.size(); i += std::max<std::size_t>(1, grid.points.size() / 3))
      samples.push_back(grid.points[i]);
    const auto cert = cone_split_certificate(fam.imm, samples, tolerances(c));
    rep.check("cone-split-PP", "frame", cert.max_PP, 1e-8);
    rep.check("cone-split-TT", "frame", cert.max_TT, 1e-8);
    rep.check("cone-split-pattern", "cone-inv", std::max(cert.max_pattern, cert.constancy), c.tol);
    rep.check("cone-split-curvature", "metric", cert.K, 0.0, cert.K < 0);
    rep.summary["cone_split"] = {{"lambda", cert.lambda}, {"mu", cert.mu}, {"K", cert.K}};
  }
}

void verify_laguerre(Report& rep, const RunConfig& c, const families::Family& fam, const Grid& grid) {
  const auto data = laguerre_on_grid(fam.imm, grid, tolerances(c), threads(c));
  const auto lr = laguerre_report(data, c.tol);
  const auto& tags = laguerre_tags();
  for (int i = 0; i < 5; ++i) rep.check("laguerre-integrability", tags[i], lr.residual[i], c.tol);
  rep.check("laguerre-metric", "lac", lr.metric_consistency, 1e-8);
  const auto v = laguerre_isoparametric(data, c.tol);
  const double iso = std::max(v.max_C, v.max_drift);
  rep.check("laguerre-isoparametric", "pro1", iso, c.tol);
  if (iso < c.tol) rep.check("parallel-B", "pro3", lr.max_dB, c.tol);
  if (fam.tag == "flat-laguerre") rep.check("flatness", "flat-laguerre", lr.max_R, c.tol);
  laguerre_summary(rep, data);
  rep.summary["max_C"] = lr.max_C;
  rep.summary["max_grad_B"] = lr.max_dB;
  rep.summary["flatness"] = lr.max_R;
  rep.summary["metric_printed_variant"] = lr.metric_printed;
}

void verify_isotensor(Report& rep, const RunConfig& c, const families::Family& fam, const Grid& grid) {
  const auto data = moebius_on_grid(fam.imm, grid, tolerances(c), threads(c));
  std::vector<iso::TensorFieldSample> fields;
  double gauss = 0.0, codazzi = 0.0, cartan = 0.0, tensor2 = 0.0, t3 = 0.0, ble = 0.0;
  int ble_distinct = 0;
  for (const auto& d : data) {
    const auto f = iso::field_moebius_B(d, c.eps_group);
    const auto p = iso::paired_moebius(d, c.eps_group);
    fields.push_back(f);
    codazzi = std::max(codazzi, iso::codazzi_residual(f));
    gauss = std::max(gauss, iso::gauss_relation_residual(p.t1.R, p.t1.T, p.t2.T,
                                                         Eigen::MatrixXd::Identity(d.n, d.n)));
    for (double x : iso::cartan_residual(f, c.eps_group)) cartan = std::max(cartan, std::abs(x));
    for (const auto& e : iso::sectional_from_gradients(f))
      tensor2 = std::max(tensor2, std::abs(e.value - f.sectional(e.i, e.j)));
    const auto sc = iso::tensor3_check(f, 0.0);
    t3 = std::max({t3, -sc.min_adjacent, sc.max_extreme});
    const auto bc = iso::ble2_check(p, c.tol);
    ble = std::max(ble, bc.residual);
    ble_distinct = std::max(ble_distinct, bc.max_distinct);
  }
  const auto ic = iso::isoparametric_check(fields, c.tol);
  rep.check("codazzi-B", "codazzi", codazzi, c.tol);
  rep.check("isoparametric-B", "iso-t", std::max(ic.max_codazzi, ic.max_drift), c.tol);
  rep.check("gauss-relation", "gauss1", gauss, c.tol);
  rep.check("curvature-from-gradients", "tensor2", tensor2, 1e-5);
  rep.check("generalized-cartan", "tensor4", cartan, 1e-5);
  rep.check("sign-pattern", "tensor3", std::max(t3, 0.0), 1e-8, t3 <= 1e-8);
  rep.check("eigenspace-split", "ble2", ble, c.tol, ble < c.tol && ble_distinct <= 2);
  moebius_summary(rep, data);
}

void run_verify(Report& rep, const RunConfig& c) {
  families::Family fam = select_immersion(c);
  const Grid grid = make_grid(fam.imm, c);
  rep.summary["family"] = fam.tag;
  if (c.mode == "laguerre")
    verify_laguerre(rep, c, fam, grid);
  else if (c.mode == "isotensor")
    verify_isotensor(rep, c, fam, grid);
  else
    verify_moebius(rep, c, fam, grid);
}

classify::PairCloud parse_cloud(const std::string& text) {
  classify::PairCloud cloud;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() < 2 || tok.size() > 3)
      throw config_error("cloud line " + std::to_string(lineno) + ": expected 'a b [multiplicity]'");
    classify::Pair p;
    try {
      std::size_t used = 0;
      p.a = std::stod(tok[0], &used);
      if (used != tok[0].size()) throw std::invalid_argument(tok[0]);
      p.b = std::stod(tok[1], &used);
      if (used != tok[1].size()) throw std::invalid_argument(tok[1]);
      if (tok.size() == 3) {
        p.multiplicity = std::stoi(tok[2], &used);
        if (used != tok[2].size()) throw std::invalid_argument(tok[2]);
      }
    } catch (const std::exception&) {
      throw config_error("cloud line " + std::to_string(lineno) + ": not a number");
    }
    cloud.pairs.push_back(p);
  }
  return cloud;
}

int run_classify(Report& rep, const RunConfig& c) {
  if (c.cloud.empty() == c.from_family.empty()) throw config_error("classify needs exactly one of --cloud or --from-family");
  classify::PairCloud cloud;
  if (!c.cloud.empty()) {
    cloud = parse_cloud(read_file(c.cloud));
    if (cloud.pairs.empty()) throw config_error("cloud file has no pairs");
  } else {
    families::Family fam = make_family(c.from_family, c);
    const Grid grid = make_grid(fam.imm, c);
    const auto data = moebius_on_grid(fam.imm, grid, tolerances(c), threads(c));
    const auto v = moebius_isoparametric(data, c.tol);
    rep.check("moebius-isoparametric", "is1", std::max(v.max_C, v.max_drift), c.tol);
    // the pair cloud uses the raw sample at the first grid point
    cloud = classify::cloud_from_moebius(data.front(), std::max(c.eps_group, 10 * c.tol));
    rep.summary["family"] = fam.tag;
  }
  cloud.tol_group = std::max(cloud.tol_group, c.eps_group);
  const auto outcome = classify::classify(cloud, c.tol);
  const auto nec = classify::necessary_conditions(cloud, c.tol);
  rep.summary["cloud"] = cloud_json(classify::normalize(cloud));
  rep.summary["outcome"] = outcome_json(outcome);
  rep.summary["necessary_conditions"] = necessary_json(nec);
  const bool consistent = !std::holds_alternative<classify::Inconsistent>(outcome);
  std::string tag = "redu3";
  if (auto* w = std::get_if<classify::Inconsistent>(&outcome)) tag = w->witness;
  rep.check("classification", tag, consistent ? 0.0 : 1.0, 0.5, consistent);
  return 0;
}

void run_example_list(Report& rep) {
  json list = json::array();
  for (const auto& f : family_table())
    list.push_back({{"tag", f.tag}, {"description", f.description}, {"parameters", f.parameters}});
  rep.summary["families"] = list;
}

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--family", c.family, "example family tag");
  sub->add_option("--dsl", c.dsl, "immersion file in the expression language");
  sub->add_option("--n", c.n, "dimension of the hypersurface");
  sub->add_option("--k", c.k, "cyclide sphere dimension");
  sub->add_option("--p", c.p, "first Clifford torus factor dimension");
  sub->add_option("--q", c.q, "second Clifford torus factor dimension");
  sub->add_option("--theta", c.theta, "Clifford torus radius angle");
  sub->add_option("--m", c.m, "flat family block sizes, comma separated");
  sub->add_option("--kappa", c.kappa, "flat family constants, comma separated");
  sub->add_option("--axes", c.axes, "ellipsoid semi-axes, comma separated");
  sub->add_option("--grid", c.grid, "grid points per axis");
  sub->add_option("--margin", c.margin, "relative grid margin inside the box");
  sub->add_option("--tol", c.tol, "check tolerance");
  sub->add_option("--eps-group", c.eps_group, "eigenvalue grouping tolerance");
  sub->add_option("--eps-umb", c.eps_umb, "umbilic tolerance");
  sub->add_option("--eps-rad", c.eps_rad, "vanishing principal curvature tolerance");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--threads", c.threads, "worker threads (default: DUPINLAB_THREADS or 1)");
  sub->add_option("--out", c.out, "write the report to this file");
  sub->add_option("--config", c.config, "JSON config file; command-line flags take precedence");
}

std::string flag_for_key(const std::string& key) {
  std::string f = "--" + key;
  for (char& ch : f)
    if (ch == '_') ch = '-';
  return f;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"dupinlab: Moebius and Laguerre invariants of Dupin hypersurfaces"};
  app.require_subcommand(1);
  auto* inv = app.add_subcommand("invariants", "sample invariants over a grid");
  auto* ver = app.add_subcommand("verify", "run a verification suite");
  auto* cls = app.add_subcommand("classify", "classify a cloud of eigenvalue pairs");
  auto* lst = app.add_subcommand("example-list", "list the example families");
  for (auto* s : {inv, ver, cls}) add_common(s, c);
  for (auto* s : {inv, ver}) s->add_option("--mode", c.mode, "moebius | laguerre | isotensor");
  cls->add_option("--cloud", c.cloud, "cloud file: lines 'a b multiplicity'");
  cls->add_option("--from-family", c.from_family, "compute the cloud from an example family");
  lst->add_option("--out", c.out, "write the report to this file");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }
  CLI::App* sub = app.get_subcommands().front();
  c.command = sub->get_name();

  const auto t0 = std::chrono::steady_clock::now();
  Report rep;
  int code = kPass;
  try {
    if (!c.config.empty()) {
      json j;
      try {
        j = json::parse(read_file(c.config));
      } catch (const json::parse_error& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
      }
      apply_config(c, j, [&](const std::string& key) {
        auto* opt = sub->get_option_no_throw(flag_for_key(key));
        return opt && opt->count() > 0;
      });
    }
    validate(c);
    if (c.command == "invariants")
      run_invariants(rep, c);
    else if (c.command == "verify")
      run_verify(rep, c);
    else if (c.command == "classify")
      run_classify(rep, c);
    else
      run_example_list(rep);
    code = rep.all_pass() ? kPass : kCheckFailure;
  } catch (const Error& e) {
    const bool geometric = is_geometric(e.code());
    err << "error: " << e.what() << "\n";
    rep.summary["error"] = {{"name", e.name()}, {"message", e.what()}};
    code = geometric ? kGeometric : kUsage;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json doc;
  doc["tool"] = "dupinlab";
  doc["version"] = kVersion;
  doc["config"] = echo(c);
  doc["checks"] = rep.checks;
  doc["failing_tags"] = rep.failing_tags();
  doc["pass"] = code == kPass;
  doc["exit_code"] = code;
  doc["summary"] = rep.summary;
  doc["timings"] = {{"wall_seconds", seconds}};
  const std::string text = doc.dump(2) + "\n";
  if (!c.out.empty()) {
    std::ofstream f(c.out);
    if (!f) {
      err << "error: cannot write " << c.out << "\n";
      return kUsage;
    }
    f << text;
  } else {
    out << text;
  }
  return code;
}

}  // namespace dupinlab::cli
