// command-line front end: apportion, check, criteria, exact-prob, pdf-prob,
// sample, region, table
//
// exit codes: 0 ok, 1 computation error, 2 usage/domain error; errors are
// reported as one JSON object on stderr

#include <hillquota/hillquota.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using nlohmann::json;
using namespace hillquota;

namespace {

enum class pop_path { exact_int, exact_rational, float64 };

struct parsed_pops {
  pop_path path;
  std::vector<bigint> ints;
  std::vector<bigrat> rats;
  std::vector<double> doubles;
  std::vector<std::string> tokens;
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    std::string tok = s.substr(start, comma - start);
    // trim spaces
    while (!tok.empty() && tok.front() == ' ') tok.erase(tok.begin());
    while (!tok.empty() && tok.back() == ' ') tok.pop_back();
    if (!tok.empty()) out.push_back(tok);
    start = comma + 1;
  }
  return out;
}

// integers -> exact path; fractions -> exact rational; decimals -> float path
parsed_pops parse_pops(const std::string& csv) {
  parsed_pops out;
  out.tokens = split_csv(csv);
  if (out.tokens.empty()) throw domain_error("no populations given");
  bool any_decimal = false, any_fraction = false;
  for (const std::string& t : out.tokens) {
    if (t.find_first_of(".eE") != std::string::npos) any_decimal = true;
    if (t.find('/') != std::string::npos) any_fraction = true;
  }
  if (any_decimal) {
    out.path = pop_path::float64;
    for (const std::string& t : out.tokens) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(t, &used);
      } catch (const std::logic_error&) {
        throw domain_error("not a number: '" + t + "'");
      }
      if (used != t.size()) throw domain_error("not a number: '" + t + "'");
      out.doubles.push_back(v);
    }
  } else if (any_fraction) {
    out.path = pop_path::exact_rational;
    for (const std::string& t : out.tokens) out.rats.push_back(parse_rational(t));
  } else {
    out.path = pop_path::exact_int;
    for (const std::string& t : out.tokens) {
      bigrat r = parse_rational(t);
      out.ints.push_back(numerator(r));
    }
  }
  return out;
}

const char* path_name(pop_path p) {
  return p == pop_path::float64 ? "float" : "exact";
}

const char* class_name(quota_class c) {
  switch (c) {
    case quota_class::lower: return "lower";
    case quota_class::upper: return "upper";
    default: return "none";
  }
}

std::uint64_t mix_row_seed(std::uint64_t seed, int M) {
  std::uint64_t st = seed + static_cast<std::uint64_t>(M) * 0x9E3779B97F4A7C15ull;
  return hillquota::detail::splitmix64_next(st);
}

void write_out(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream f(path);
  if (!f) throw domain_error("cannot open output file '" + path + "'");
  f << content;
}

// ---- apportion / check ----------------------------------------------------

struct apportion_args {
  std::string pops, method = "priority", format = "json";
  int seats = 0;
  bool trace = false;
};

template <class T>
json run_apportion_typed(const std::vector<T>& vals, const apportion_args& a) {
  population_vector<T> pv(vals);
  apportionment app;
  if (a.method == "divisor") {
    if (a.trace) throw domain_error("--trace requires --method priority");
    app = hill_divisor(pv, a.seats);
  } else {
    app = huntington_hill(pv, a.seats, a.trace);
  }
  json out{{"command", "apportion"}, {"seats", a.seats}, {"method", a.method},
           {"apportionment", app.seats}};
  if (a.trace) {
    json tr = json::array();
    for (const grant_step& g : app.trace)
      tr.push_back({{"seat", g.seat}, {"state", g.state}, {"priority", g.priority}});
    out["trace"] = tr;
  }
  return out;
}

json run_apportion(const apportion_args& a) {
  parsed_pops p = parse_pops(a.pops);
  json out;
  switch (p.path) {
    case pop_path::exact_int: out = run_apportion_typed(p.ints, a); break;
    case pop_path::exact_rational: out = run_apportion_typed(p.rats, a); break;
    case pop_path::float64: out = run_apportion_typed(p.doubles, a); break;
  }
  out["pops"] = p.tokens;
  out["path"] = path_name(p.path);
  return out;
}

template <class T>
json run_check_typed(const std::vector<T>& vals, int seats) {
  population_vector<T> pv(vals);
  auto rep = detect_violations(pv, seats);
  json states = json::array();
  for (std::size_t i = 0; i < rep.per_state.size(); ++i) {
    const auto& r = rep.per_state[i];
    json s{{"state", i},
           {"quota", static_cast<double>(r.quota)},
           {"lower", r.lower_bound},
           {"upper", r.upper_bound},
           {"seats", r.seats},
           {"class", class_name(r.cls)}};
    if constexpr (std::is_same_v<typename decltype(rep.per_state)::value_type,
                                 typename violation_report<bigrat>::record>) {
      std::ostringstream q;
      q << r.quota;
      s["quota_exact"] = q.str();
    }
    states.push_back(s);
  }
  return json{{"command", "check"},
              {"seats", seats},
              {"per_state", states},
              {"has_lower", rep.has_lower},
              {"has_upper", rep.has_upper}};
}

json run_check(const std::string& pops_csv, int seats) {
  parsed_pops p = parse_pops(pops_csv);
  json out;
  switch (p.path) {
    case pop_path::exact_int: out = run_check_typed(p.ints, seats); break;
    case pop_path::exact_rational: out = run_check_typed(p.rats, seats); break;
    case pop_path::float64: out = run_check_typed(p.doubles, seats); break;
  }
  out["pops"] = p.tokens;
  out["path"] = path_name(p.path);
  return out;
}

// ---- text renderers --------------------------------------------------------

std::string text_apportion(const json& j) {
  std::ostringstream os;
  os << "method: " << j["method"].get<std::string>() << " (" << j["path"].get<std::string>()
     << " arithmetic)\n";
  const auto& seats = j["apportionment"];
  for (std::size_t i = 0; i < seats.size(); ++i)
    os << "state " << i + 1 << " (pop " << j["pops"][i].get<std::string>()
       << "): " << seats[i].get<int>() << " seats\n";
  if (j.contains("trace"))
    for (const auto& g : j["trace"])
      os << "seat " << g["seat"].get<int>() << " -> state " << g["state"].get<int>() + 1
         << " (priority " << g["priority"].get<double>() << ")\n";
  return os.str();
}

std::string text_check(const json& j) {
  std::ostringstream os;
  for (const auto& s : j["per_state"])
    os << "state " << s["state"].get<int>() + 1 << ": quota " << s["quota"].get<double>()
       << " in [" << s["lower"].get<long long>() << ", " << s["upper"].get<long long>()
       << "], seats " << s["seats"].get<int>() << " -> " << s["class"].get<std::string>()
       << "\n";
  os << (j["has_lower"].get<bool>() ? "lower quota violation\n" : "no violation\n");
  return os.str();
}

// ---- region rendering -------------------------------------------------------

std::string region_csv(const region_data<double>& rd) {
  std::ostringstream os;
  os << "line_id,x,y\n";
  os.precision(17);
  for (const auto& pl : rd.lines)
    for (const auto& p : pl.points) os << pl.line_id << "," << p[0] << "," << p[1] << "\n";
  if (!rd.tri.empty)
    for (const auto& v : rd.tri.vertices) os << "4," << v[0] << "," << v[1] << "\n";
  return os.str();
}

json region_json(const floor_pair& fp, const region_data<double>& rd,
                 const std::optional<std::array<boundary_line<double>, 3>>& lines) {
  json out{{"command", "region"},
           {"floor_pair", {{"j", fp.j}, {"k", fp.k}, {"M", fp.M}}},
           {"degenerate", rd.degenerate},
           {"empty", rd.tri.empty},
           {"area", rd.tri.area}};
  json verts = json::array();
  if (!rd.tri.empty)
    for (const auto& v : rd.tri.vertices) verts.push_back({v[0], v[1]});
  out["vertices"] = verts;
  json jl = json::array();
  for (int i = 0; i < 3; ++i) {
    json one{{"id", i + 1}};
    if (lines) {
      const auto& bl = (*lines)[i];
      const char* kind = bl.kind == line_kind::axis_x0        ? "axis_x0"
                         : bl.kind == line_kind::axis_y0      ? "axis_y0"
                         : bl.kind == line_kind::antidiagonal ? "antidiagonal"
                                                              : "slope_intercept";
      one["kind"] = kind;
      one["slope"] = bl.slope;
      one["intercept"] = bl.intercept;
      one["x_of_y"] = bl.x_of_y;
    }
    json pts = json::array();
    for (const auto& p : rd.lines[i].points) pts.push_back({p[0], p[1]});
    one["points"] = pts;
    jl.push_back(one);
  }
  out["lines"] = jl;
  return out;
}

std::string region_svg(const region_data<double>& rd) {
  // fixed 480x480 canvas; the unit cell maps to [40,440] with y up
  auto X = [](double x) { return 40 + 400 * x; };
  auto Y = [](double y) { return 440 - 400 * y; };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" "
        "viewBox=\"0 0 480 480\">\n";
  os << "  <rect x=\"40\" y=\"40\" width=\"400\" height=\"400\" fill=\"none\" "
        "stroke=\"#000\" stroke-width=\"1\"/>\n";
  if (!rd.tri.empty) {
    os << "  <polygon points=\"";
    for (const auto& v : rd.tri.vertices) os << X(v[0]) << "," << Y(v[1]) << " ";
    os << "\" fill=\"rgba(214,39,40,0.35)\" stroke=\"#d62728\" stroke-width=\"1\"/>\n";
  }
  const char* colors[3] = {"#1f77b4", "#2ca02c", "#7f7f7f"};
  for (int i = 0; i < 3; ++i) {
    const auto& pts = rd.lines[i].points;
    if (pts.empty()) continue;
    os << "  <polyline fill=\"none\" stroke=\"" << colors[i]
       << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : pts) os << X(p[0]) << "," << Y(p[1]) << " ";
    os << "\"/>\n";
  }
  if (!rd.tri.empty)
    for (const auto& v : rd.tri.vertices)
      os << "  <circle cx=\"" << X(v[0]) << "\" cy=\"" << Y(v[1])
         << "\" r=\"3\" fill=\"#d62728\"/>\n";
  os << "</svg>\n";
  return os.str();
}

// ---- table ------------------------------------------------------------------

struct table_args {
  std::string which = "uniform", seats = "3,5,10,16,20,100";
  std::string dist = "uniform:0:1000", format = "csv", output;
  long long samples = 100000;
  std::uint64_t seed = 42;
  int workers = 0;
};

json run_table(const table_args& a) {
  if (a.which != "uniform" && a.which != "iid")
    throw domain_error("--which must be uniform or iid");
  std::vector<int> Ms;
  for (const std::string& t : split_csv(a.seats)) Ms.push_back(std::stoi(t));
  if (Ms.empty()) throw domain_error("no seat counts given");

  std::optional<density_model> pop;
  if (a.which == "iid") pop = parse_density(a.dist);

  json rows = json::array();
  for (int M : Ms) {
    double theoretical;
    sampling_scheme scheme{sampling_kind::uniform_quotas, M, std::nullopt};
    if (a.which == "uniform") {
      theoretical =
          static_cast<double>(exact_uniform_probability<long double>(M));
    } else {
      theoretical = general_pdf_probability(M, iid_quota_density(*pop, M));
      scheme = sampling_scheme{sampling_kind::iid_populations, M, pop};
    }
    sample_estimate est =
        sample_violation_rate(scheme, a.samples, mix_row_seed(a.seed, M), a.workers);
    rows.push_back({{"M", M},
                    {"theoretical", theoretical},
                    {"sampled", est.p_hat},
                    {"ci_low", est.ci_low},
                    {"ci_high", est.ci_high},
                    {"redraws", est.redraws},
                    {"row_seed", est.seed}});
  }
  return json{{"command", "table"}, {"which", a.which},    {"samples", a.samples},
              {"seed", a.seed},     {"workers", a.workers}, {"rows", rows}};
}

std::string table_csv(const json& t) {
  std::ostringstream os;
  os << "M,theoretical,sampled,ci_low,ci_high\n";
  os << std::fixed;
  os.precision(5);
  for (const auto& r : t["rows"])
    os << r["M"].get<int>() << "," << r["theoretical"].get<double>() << ","
       << r["sampled"].get<double>() << "," << r["ci_low"].get<double>() << ","
       << r["ci_high"].get<double>() << "\n";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Huntington-Hill apportionment and quota-violation analysis"};
  app.require_subcommand(1);

  // apportion
  apportion_args ap;
  CLI::App* apportion = app.add_subcommand("apportion", "apportion seats to states");
  apportion->add_option("--pops", ap.pops, "comma-separated populations")->required();
  apportion->add_option("--seats", ap.seats, "house size M")->required();
  apportion->add_option("--method", ap.method, "priority|divisor (default priority)")
      ->check(CLI::IsMember({"priority", "divisor"}));
  apportion->add_flag("--trace", ap.trace, "record the seat-grant sequence");
  apportion->add_option("--format", ap.format)->check(CLI::IsMember({"json", "text"}));

  // check
  std::string ck_pops, ck_format = "json";
  int ck_seats = 0;
  CLI::App* check = app.add_subcommand("check", "detect quota violations");
  check->add_option("--pops", ck_pops)->required();
  check->add_option("--seats", ck_seats)->required();
  check->add_option("--format", ck_format)->check(CLI::IsMember({"json", "text"}));

  // criteria
  std::string cr_quotas, cr_format = "json";
  int cr_seats = 0;
  CLI::App* criteria =
      app.add_subcommand("criteria", "three-state analytic violation criteria");
  criteria->add_option("--quotas", cr_quotas, "three quotas (parsed exactly)")->required();
  criteria->add_option("--seats", cr_seats)->required();
  criteria->add_option("--format", cr_format)->check(CLI::IsMember({"json", "text"}));

  // exact-prob
  int ep_seats = 0;
  bool ep_cells = false, ep_high = false;
  CLI::App* exact_prob =
      app.add_subcommand("exact-prob", "violation probability for uniform quotas");
  exact_prob->add_option("--seats", ep_seats)->required();
  exact_prob->add_flag("--list-cells", ep_cells, "include per-cell areas");
  exact_prob->add_flag("--high-precision", ep_high, "sum in long double");

  // pdf-prob
  int pp_seats = 0, pp_degree = 10, pp_depth = 12, pp_znodes = 64;
  double pp_tol = 1e-8;
  bool pp_norm = false;
  std::string pp_dist;
  CLI::App* pdf_prob = app.add_subcommand(
      "pdf-prob", "violation probability for IID populations from a density");
  pdf_prob->add_option("--seats", pp_seats)->required();
  pdf_prob->add_option("--dist", pp_dist, "uniform:lo:hi or piecewise:file.csv")
      ->required();
  pdf_prob->add_option("--tol", pp_tol, "quadrature relative tolerance");
  pdf_prob->add_option("--degree", pp_degree, "triangle rule degree");
  pdf_prob->add_option("--depth", pp_depth, "max subdivision depth");
  pdf_prob->add_option("--znodes", pp_znodes, "Gauss-Legendre nodes for the z integral");
  pdf_prob->add_flag("--check-normalization", pp_norm,
                     "also integrate the density over the whole simplex");

  // sample
  std::string sm_mode = "quotas", sm_dist = "uniform:0:1000";
  int sm_seats = 0, sm_workers = 0;
  long long sm_samples = 100000;
  std::uint64_t sm_seed = 42;
  bool sm_check_both = false;
  CLI::App* sample = app.add_subcommand("sample", "Monte Carlo violation rate");
  sample->add_option("--mode", sm_mode)->check(CLI::IsMember({"quotas", "populations"}));
  sample->add_option("--seats", sm_seats)->required();
  sample->add_option("--samples", sm_samples);
  sample->add_option("--seed", sm_seed);
  sample->add_option("--dist", sm_dist, "population density (populations mode)");
  sample->add_option("--workers", sm_workers,
                     "worker threads (default HILLQUOTA_WORKERS or 1)");
  sample->add_flag("--check-both", sm_check_both,
                   "run both detection paths and require agreement");

  // region
  int rg_seats = 0, rg_j = 0, rg_k = 0, rg_res = 128;
  std::string rg_format = "csv", rg_output;
  CLI::App* region = app.add_subcommand("region", "feasible-region boundary data");
  region->add_option("--seats", rg_seats)->required();
  region->add_option("--floor1", rg_j)->required();
  region->add_option("--floor2", rg_k)->required();
  region->add_option("--resolution", rg_res, "points per boundary line");
  region->add_option("--format", rg_format)->check(CLI::IsMember({"csv", "svg", "json"}));
  region->add_option("--output", rg_output, "write to file instead of stdout");

  // table
  table_args tb;
  CLI::App* table = app.add_subcommand("table", "theoretical vs sampled table");
  table->add_option("--which", tb.which)->check(CLI::IsMember({"uniform", "iid"}));
  table->add_option("--seats", tb.seats, "comma-separated house sizes");
  table->add_option("--samples", tb.samples);
  table->add_option("--seed", tb.seed);
  table->add_option("--dist", tb.dist, "population density for --which iid");
  table->add_option("--workers", tb.workers);
  table->add_option("--format", tb.format)->check(CLI::IsMember({"csv", "json"}));
  table->add_option("--output", tb.output, "write to file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << json{{"error", {{"type", "usage"}, {"message", e.what()}}}}.dump()
              << "\n";
    return 2;
  }

  try {
    if (apportion->parsed()) {
      json out = run_apportion(ap);
      if (ap.format == "text")
        std::cout << text_apportion(out);
      else
        std::cout << out.dump(2) << "\n";
    } else if (check->parsed()) {
      json out = run_check(ck_pops, ck_seats);
      if (ck_format == "text")
        std::cout << text_check(out);
      else
        std::cout << out.dump(2) << "\n";
    } else if (criteria->parsed()) {
      std::vector<std::string> toks = split_csv(cr_quotas);
      quota_vector<bigrat> qv;
      for (const std::string& t : toks) qv.quotas.push_back(parse_rational(t));
      qv.standard_divisor = 1;
      criteria_result res = violation_criteria_test(qv, cr_seats);
      if (cr_format == "text") {
        std::ostringstream os;
        os << "criterion 1 margin: " << res.margins[0] << "\n"
           << "criterion 2 margin: " << res.margins[1] << "\n"
           << "floor sum: " << res.floor_sum << " (need " << cr_seats - 1 << ")\n"
           << (res.satisfied ? "lower quota violation predicted"
                             : "no violation predicted")
           << "\n";
        std::cout << os.str();
      } else {
        std::cout << json{{"command", "criteria"},
                          {"seats", cr_seats},
                          {"quotas", toks},
                          {"satisfied", res.satisfied},
                          {"margins", res.margins},
                          {"floor_sum", res.floor_sum},
                          {"near_boundary", res.near_boundary},
                          {"path", "exact"}}
                         .dump(2)
                  << "\n";
      }
    } else if (exact_prob->parsed()) {
      double p = ep_high
                     ? static_cast<double>(exact_uniform_probability<long double>(ep_seats))
                     : exact_uniform_probability<double>(ep_seats);
      json out{{"command", "exact-prob"},
               {"seats", ep_seats},
               {"probability", p},
               {"precision", ep_high ? "long-double" : "double"}};
      if (ep_cells) {
        json cells = json::array();
        for (int j = 0; 2 * j < ep_seats; ++j)
          for (int k = 0; 2 * (j + k) < ep_seats; ++k) {
            floor_pair fp(j, k, ep_seats);
            auto tri = triangle<double>(fp);
            cells.push_back({{"j", j},
                             {"k", k},
                             {"area", tri.area},
                             {"overlap", cell_overlap_area<double>(fp)}});
          }
        out["cells"] = cells;
      }
      std::cout << out.dump(2) << "\n";
    } else if (pdf_prob->parsed()) {
      quadrature_spec quad{pp_degree, pp_depth, pp_tol, pp_znodes};
      density_model pop = parse_density(pp_dist);
      density_model joint = iid_quota_density(pop, pp_seats, pp_znodes);
      json out{{"command", "pdf-prob"},
               {"seats", pp_seats},
               {"dist", pp_dist},
               {"probability", general_pdf_probability(pp_seats, joint, quad)},
               {"relative_tolerance", pp_tol}};
      if (pp_norm) out["normalization"] = density_normalization(pp_seats, joint, quad);
      std::cout << out.dump(2) << "\n";
    } else if (sample->parsed()) {
      sampling_scheme scheme{sampling_kind::uniform_quotas, sm_seats, std::nullopt};
      if (sm_mode == "populations")
        scheme = {sampling_kind::iid_populations, sm_seats, parse_density(sm_dist)};
      sample_estimate est =
          sample_violation_rate(scheme, sm_samples, sm_seed, sm_workers, sm_check_both);
      json out{{"command", "sample"},
               {"scheme", sm_mode},
               {"M", est.M},
               {"n", est.n_samples},
               {"seed", est.seed},
               {"p_hat", est.p_hat},
               {"ci_low", est.ci_low},
               {"ci_high", est.ci_high},
               {"redraws", est.redraws},
               {"workers", est.workers}};
      if (sm_mode == "populations") out["dist"] = sm_dist;
      std::cout << out.dump(2) << "\n";
    } else if (region->parsed()) {
      floor_pair fp(rg_j, rg_k, rg_seats);
      region_data<double> rd = region_points<double>(fp, rg_res);
      if (rg_format == "csv")
        write_out(rg_output, region_csv(rd));
      else if (rg_format == "svg")
        write_out(rg_output, region_svg(rd));
      else
        write_out(rg_output,
                  region_json(fp, rd, boundary_lines<double>(fp)).dump(2) + "\n");
    } else if (table->parsed()) {
      json out = run_table(tb);
      if (tb.format == "csv")
        write_out(tb.output, table_csv(out));
      else
        write_out(tb.output, out.dump(2) + "\n");
    }
    return 0;
  } catch (const domain_error& e) {
    std::cerr << json{{"error", {{"type", "usage"}, {"message", e.what()}}}}.dump()
              << "\n";
    return 2;
  } catch (const tie_error& e) {
    std::cerr << json{{"error",
                       {{"type", "computation"},
                        {"message", e.what()},
                        {"tied_states", e.states}}}}
                     .dump()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"type", "computation"}, {"message", e.what()}}}}.dump()
              << "\n";
    return 1;
  }
}
