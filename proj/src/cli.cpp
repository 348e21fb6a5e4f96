#include "phlqg/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "phlqg/analysis.hpp"
#include "phlqg/benchmarks.hpp"
#include "phlqg/riccati.hpp"

namespace phlqg {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* const kCsvHeader =
    "ell,bound_canonical,bound_optimized,err_structured_canonical,err_structured_optimized,err_classical";

std::string csv_value(double v) { return std::isnan(v) ? "nan" : format_double(v); }

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// Runs f on the error code of a failed call and returns NaN.
template <class F>
double guarded(F&& f, std::string& failure) {
  try {
    return f();
  } catch (const Error& e) {
    failure = to_string(e.code());
    return kNaN;
  }
}

const PortHamiltonianDAE& require_ph(const LoadedModel& m) {
  if (!std::holds_alternative<PortHamiltonianDAE>(m.sys))
    fail(ErrorCode::InvalidArgument, "this command needs a port-Hamiltonian model");
  return std::get<PortHamiltonianDAE>(m.sys);
}

DescriptorSystem as_descriptor(const AnySystem& s) {
  if (const auto* ph = std::get_if<PortHamiltonianDAE>(&s)) return ph->descriptor();
  return std::get<DescriptorSystem>(s);
}

// "3", "1..10" or "1,4,7".
std::vector<int> parse_ells(const std::string& text) {
  std::vector<int> out;
  auto to_int = [&](const std::string& s) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(s, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != s.size()) fail(ErrorCode::InvalidArgument, "bad ell value '" + s + "'");
    return v;
  };
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = to_int(text.substr(0, dots)), hi = to_int(text.substr(dots + 2));
    if (lo < 1 || hi < lo) fail(ErrorCode::InvalidArgument, "bad ell range '" + text + "'");
    for (int l = lo; l <= hi; ++l) out.push_back(l);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const int l = to_int(item);
    if (l < 1) fail(ErrorCode::InvalidArgument, "ell must be positive");
    out.push_back(l);
  }
  if (out.empty()) fail(ErrorCode::InvalidArgument, "empty ell list");
  return out;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream os(path);
  if (!os) fail(ErrorCode::InvalidArgument, "cannot open '" + path + "' for writing");
  os << text;
  if (!os) fail(ErrorCode::InvalidArgument, "write to '" + path + "' failed");
}

std::string system_text(const AnySystem& s) {
  std::ostringstream os;
  std::visit([&](const auto& sys) { write_system(os, sys); }, s);
  return os.str();
}

struct Check {
  std::string name;
  bool ok = false;
  std::string detail;
};

}  // namespace

OptimizedModel optimize_model(const PortHamiltonianDAE& ph, int order, const Matrix& P_c,
                              const Matrix& P_f, const HamiltonianOptions& hopt,
                              const BalanceOptions& bopt) {
  if (order < 0) fail(ErrorCode::InvalidArgument, "pre-reduction order must be non-negative");
  OptimizedModel om;
  om.order = order;
  if (order == 0) {
    om.base = ph;
  } else {
    const BalancedTruncationResult pre = balance_truncate(ph, order, P_c, P_f, bopt);
    if (!pre.rom_regular) fail(ErrorCode::SingularReducedPencil, "pre-reduced model is singular");
    om.base = pre.rom;
    om.tail_bound = error_bound(pre.sigma, order);
  }
  om.hamiltonian = optimize_hamiltonian(om.base, hopt);
  return om;
}

SweepResult sweep(const PortHamiltonianDAE& ph, const SweepOptions& opt) {
  if (opt.ell_lo < 1 || opt.ell_hi < opt.ell_lo) fail(ErrorCode::InvalidArgument, "bad ell range");
  const DescriptorSystem d = ph.descriptor();
  const Matrix Pc = solve_control_gare(d);
  const Matrix Pf = solve_filter_gare(ph);
  const GareSolutionPair orig = solve_original_gares(d);

  SweepResult res;
  res.sigma = characteristic_values(d, Pc, Pf);
  const int k = static_cast<int>(res.sigma.size());
  res.pre_order = opt.pre_reduce < 0 ? std::min(opt.ell_hi + 2, k) : opt.pre_reduce;

  std::optional<OptimizedModel> om;
  Matrix Pc_base, Pf_opt;
  double tail = 0;
  try {
    om = optimize_model(ph, res.pre_order, Pc, Pf, opt.hamiltonian, opt.balance);
    // same sigma as the canonical column, so both bounds coincide at ell = pre_order
    tail = error_bound(res.sigma, res.pre_order);
    Pc_base = solve_control_gare(om->base.descriptor());
    Pf_opt = solve_filter_gare(om->hamiltonian.ph);
    res.sigma_hat = characteristic_values(om->hamiltonian.ph.descriptor(), Pc_base, Pf_opt);
  } catch (const Error& e) {
    om.reset();
    res.optimize_failure = e.what();
  }

  const int count = opt.ell_hi - opt.ell_lo + 1;
  res.records.resize(static_cast<std::size_t>(count));
  auto one = [&](int ell) {
    SweepRecord rec;
    rec.ell = ell;
    rec.bound_canonical = error_bound(res.sigma, ell);
    rec.err_structured_canonical = guarded(
        [&] {
          const auto r = balance_truncate(ph, ell, Pc, Pf, opt.balance);
          rec.regular_canonical = r.rom_regular;
          return coprime_error(d, r.rom_sys, Pc, r.P_c_trunc, opt.hinf_tol);
        },
        rec.failure_canonical);
    if (om) {
      rec.bound_optimized = ell <= res.sigma_hat.size() ? error_bound(res.sigma_hat, ell) + tail : kNaN;
      rec.err_structured_optimized = guarded(
          [&] {
            const auto r = balance_truncate(om->hamiltonian.ph, ell, Pc_base, Pf_opt, opt.balance);
            rec.regular_optimized = r.rom_regular;
            return coprime_error(d, r.rom_sys, Pc, r.P_c_trunc, opt.hinf_tol);
          },
          rec.failure_optimized);
      if (std::isnan(rec.err_structured_optimized)) rec.bound_optimized = kNaN;
    } else {
      rec.bound_optimized = rec.err_structured_optimized = kNaN;
      rec.failure_optimized = "NoOptimizedModel";
    }
    rec.err_classical = guarded(
        [&] {
          const auto r = classical_lqg_bt(d, ell, orig.P_c, orig.P_f, opt.balance);
          rec.regular_classical = r.rom_regular;
          return coprime_error(d, r.rom_sys, Pc, r.P_c_trunc, opt.hinf_tol);
        },
        rec.failure_classical);
    res.records[static_cast<std::size_t>(ell - opt.ell_lo)] = rec;
  };

  const int jobs = std::clamp(opt.jobs, 1, count);
  if (jobs == 1) {
    for (int ell = opt.ell_lo; ell <= opt.ell_hi; ++ell) one(ell);
  } else {
    std::atomic<int> next{opt.ell_lo};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (int ell = next++; ell <= opt.ell_hi; ell = next++) one(ell);
      });
    for (auto& th : pool) th.join();
  }
  return res;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  os << kCsvHeader << '\n';
  for (const SweepRecord& r : records)
    os << r.ell << ',' << csv_value(r.bound_canonical) << ',' << csv_value(r.bound_optimized) << ','
       << csv_value(r.err_structured_canonical) << ',' << csv_value(r.err_structured_optimized) << ','
       << csv_value(r.err_classical) << '\n';
}

std::vector<SweepRecord> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) fail(ErrorCode::ParseError, "unexpected CSV header");
  std::vector<SweepRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 6) fail(ErrorCode::ParseError, "CSV row needs 6 fields: " + line);
    auto num = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end != s.c_str() + s.size() || s.empty()) fail(ErrorCode::ParseError, "bad CSV number '" + s + "'");
      return v;
    };
    SweepRecord r;
    r.ell = static_cast<int>(num(f[0]));
    r.bound_canonical = num(f[1]);
    r.bound_optimized = num(f[2]);
    r.err_structured_canonical = num(f[3]);
    r.err_structured_optimized = num(f[4]);
    r.err_classical = num(f[5]);
    out.push_back(r);
  }
  return out;
}

std::string sweep_plot_script(const std::string& csv_path, const std::string& title) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set logscale y\n"
     << "set key top right\n"
     << "set xlabel 'reduced order'\n"
     << "set ylabel 'coprime factor error'\n"
     << "set title '" << title << "'\n"
     << "plot '" << csv_path << "' using 1:2 with lines title 'bound (canonical Q)', \\\n"
     << "     '' using 1:3 with lines title 'bound (optimized Q)', \\\n"
     << "     '' using 1:4 with linespoints title 'structured (canonical Q)', \\\n"
     << "     '' using 1:5 with linespoints title 'structured (optimized Q)', \\\n"
     << "     '' using 1:6 with linespoints title 'classical'\n";
  return os.str();
}

LoadedModel load_model(const std::string& spec) {
  const std::string prefix = "counterexample:";
  LoadedModel m;
  if (spec.rfind(prefix, 0) == 0) {
    const Counterexample ce = counterexample(spec.substr(prefix.size()));
    if (ce.is_ph)
      m.sys = ce.ph;
    else
      m.sys = ce.sys;
    m.P_c = ce.P_c;
    m.P_f = ce.P_f;
    return m;
  }
  m.sys = load_system(spec);
  return m;
}

namespace {

int cmd_generate(const std::string& family, const std::string& form, const std::string& id,
                 const MsdConfig& msd, const NetworkConfig& net, const std::string& out_path,
                 std::ostream& out) {
  AnySystem sys;
  if (family == "msd") {
    const MsdModels mm = msd_chain(msd);
    if (form == "first-order")
      sys = mm.first_order;
    else if (form == "semi-explicit" || form.empty())
      sys = mm.semi_explicit;
    else if (form == "decoupled")
      sys = mm.decoupled;
    else if (form == "minimal")
      sys = minimal_ph_realization(mm.semi_explicit);
    else
      fail(ErrorCode::InvalidArgument, "unknown msd form '" + form + "'");
  } else if (family == "network") {
    const NetworkModels nm = transport_network(net);
    if (form == "index2")
      sys = nm.index2;
    else if (form == "index1")
      sys = nm.index1;
    else if (form == "semi-explicit" || form.empty())
      sys = nm.semi_explicit;
    else
      fail(ErrorCode::InvalidArgument, "unknown network form '" + form + "'");
  } else if (family == "counterexample") {
    sys = load_model("counterexample:" + id).sys;
  } else {
    fail(ErrorCode::InvalidArgument, "unknown family '" + family + "'");
  }
  write_text(out_path, system_text(sys), out);
  return 0;
}

int cmd_reduce(const std::string& model, int ell, bool classical, const BalanceOptions& bopt,
               const std::string& out_path, const std::string& report_path, std::ostream& out) {
  const LoadedModel m = load_model(model);
  json rep;
  BalancedTruncationResult r;
  const bool is_ph = std::holds_alternative<PortHamiltonianDAE>(m.sys);
  if (classical || !is_ph) {
    const DescriptorSystem d = as_descriptor(m.sys);
    r = m.P_c && !is_ph ? classical_lqg_bt(d, ell, *m.P_c, *m.P_f, bopt) : classical_lqg_bt(d, ell, bopt);
    rep["method"] = "classical";
  } else {
    const auto& ph = std::get<PortHamiltonianDAE>(m.sys);
    r = m.P_c ? balance_truncate(ph, ell, *m.P_c, *m.P_f, bopt) : balance_truncate(ph, ell, bopt);
    rep["method"] = "structured";
    const RomStructureReport s = check_rom_structure(r);
    rep["structure"] = {{"skew", s.skew},       {"r_min", s.r_min},   {"etq_sym", s.etq_sym},
                        {"etq_min", s.etq_min}, {"output", s.output}, {"a_residual", s.a_residual},
                        {"pass", s.pass}};
  }
  rep["ell"] = ell;
  rep["n_rom"] = r.rom_sys.n();
  rep["rom_regular"] = r.rom_regular;
  rep["sigma"] = vector_json(r.sigma);
  rep["error_bound"] = error_bound(r.sigma, ell);
  if (!out_path.empty()) {
    if (r.structured)
      save_system(out_path, r.rom);
    else
      save_system(out_path, r.rom_sys);
  }
  write_text(report_path, rep.dump(2) + "\n", out);
  return 0;
}

int cmd_sweep(const std::string& model, const std::string& ells, SweepOptions opt,
              const std::string& out_path, const std::string& plot_path, std::ostream& out,
              std::ostream& err) {
  const std::vector<int> list = parse_ells(ells);
  for (std::size_t i = 1; i < list.size(); ++i)
    if (list[i] != list[i - 1] + 1) fail(ErrorCode::InvalidArgument, "sweep needs a contiguous ell range");
  opt.ell_lo = list.front();
  opt.ell_hi = list.back();
  const LoadedModel m = load_model(model);
  const SweepResult res = sweep(require_ph(m), opt);
  if (!res.optimize_failure.empty()) err << res.optimize_failure << '\n';
  for (const SweepRecord& r : res.records) {
    const std::pair<const char*, const std::string*> cols[] = {
        {"canonical", &r.failure_canonical}, {"optimized", &r.failure_optimized}, {"classical", &r.failure_classical}};
    for (const auto& [name, why] : cols)
      if (!why->empty() && *why != "NoOptimizedModel") err << "ell=" << r.ell << ' ' << name << ": " << *why << '\n';
  }
  std::ostringstream csv;
  write_sweep_csv(csv, res.records);
  write_text(out_path, csv.str(), out);
  if (!plot_path.empty())
    write_text(plot_path, sweep_plot_script(out_path.empty() ? "-" : out_path, model), out);
  return 0;
}

int cmd_optimize(const std::string& model, int pre, const HamiltonianOptions& hopt,
                 const BalanceOptions& bopt, const std::string& out_path, const std::string& report_path,
                 std::ostream& out) {
  const LoadedModel m = load_model(model);
  const PortHamiltonianDAE& ph = require_ph(m);
  const DescriptorSystem d = ph.descriptor();
  const Matrix Pc = m.P_c ? *m.P_c : solve_control_gare(d);
  const Matrix Pf = m.P_f ? *m.P_f : solve_filter_gare(ph);
  const OptimizedModel om = optimize_model(ph, pre, Pc, Pf, hopt, bopt);
  const OptimizedHamiltonian& oh = om.hamiltonian;
  json rep = {{"pre_reduce", om.order},
              {"n", om.base.n()},
              {"factor_residual", oh.factor_residual},
              {"output_residual", oh.output_residual},
              {"skew_residual", oh.skew_residual},
              {"r_hat_min", oh.r_hat_min},
              {"etq_gain_min", oh.etq_gain_min},
              {"controllable", oh.controllable},
              {"sigma_hat", vector_json(oh.sigma_hat)},
              {"tail_bound", om.tail_bound}};
  if (!out_path.empty()) save_system(out_path, oh.ph);
  write_text(report_path, rep.dump(2) + "\n", out);
  return 0;
}

int cmd_controller(const std::string& model, const std::string& out_path, const std::string& report_path,
                   std::ostream& out, std::ostream& err) {
  const LoadedModel m = load_model(model);
  const PortHamiltonianDAE& ph = require_ph(m);
  const Matrix Pc = m.P_c ? *m.P_c : solve_control_gare(ph.descriptor());
  const ControllerReport cr = lqg_controller(ph, Pc);
  json rep = {{"regular", cr.regular},   {"impulse_free", cr.impulse_free}, {"stable", cr.stable},
              {"kyp_min", cr.kyp_min},   {"etp_min", cr.etp_min},           {"passive", cr.passive},
              {"pass", cr.pass()}};
  if (!out_path.empty()) save_system(out_path, cr.controller);
  write_text(report_path, rep.dump(2) + "\n", out);
  if (!cr.pass()) {
    err << to_string(ErrorCode::CertificateFailure) << ": controller certificates failed\n";
    return 2;
  }
  return 0;
}

int cmd_verify(const std::string& model, const std::string& ells, double tol, std::ostream& out,
               std::ostream& err) {
  const LoadedModel m = load_model(model);
  const bool is_ph = std::holds_alternative<PortHamiltonianDAE>(m.sys);
  const DescriptorSystem d = as_descriptor(m.sys);
  std::vector<Check> checks;
  int status = 0;
  auto record = [&](const std::string& name, bool ok, const std::string& detail) {
    checks.push_back({name, ok, detail});
    if (!ok) status = 2;
  };
  auto attempt = [&](const std::string& name, auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      err << e.what() << '\n';
      record(name, false, to_string(e.code()));
    }
  };

  Matrix Pc, Pf, R = is_ph ? std::get<PortHamiltonianDAE>(m.sys).R : Matrix();
  bool have_gares = false;
  attempt("gares", [&] {
    if (m.P_c) {
      Pc = *m.P_c;
      Pf = *m.P_f;
    } else if (is_ph) {
      Pc = solve_control_gare(d);
      Pf = solve_filter_gare(std::get<PortHamiltonianDAE>(m.sys));
    } else {
      const GareSolutionPair g = solve_original_gares(d);
      Pc = g.P_c;
      Pf = g.P_f;
    }
    const GareResiduals gr = gare_residuals(d, R, Pc, Pf, is_ph ? GareVariant::Modified : GareVariant::Original);
    const double rc = gr.residual_c / std::max(gr.scale_c, 1e-300);
    const double rf = gr.residual_f / std::max(gr.scale_f, 1e-300);
    record("gares", rc <= tol && rf <= tol, "residual_c=" + format_double(rc) + " residual_f=" + format_double(rf));
    have_gares = true;
  });

  if (have_gares) {
    attempt("coprime", [&] {
      const CoprimeLyapReport ly = verify_coprime_lyap(d, Pc, Pf, tol);
      record("coprime_lyap", ly.pass, "lyap=" + format_double(ly.lyap_max / std::max(ly.lyap_scale, 1e-300)));
      const double ne = normalization_error(coprime_realization(d, Pc), log_frequencies(1e-3, 1e3, 100));
      record("normalized_coprime", ne <= 1e-6, "max=" + format_double(ne));
    });
    if (is_ph) {
      attempt("controller", [&] {
        const ControllerReport cr = lqg_controller(std::get<PortHamiltonianDAE>(m.sys), Pc, tol);
        record("controller", cr.pass(),
               "kyp_min=" + format_double(cr.kyp_min) + " stable=" + (cr.stable ? "1" : "0"));
      });
    }
    std::vector<int> list;
    if (ells.empty()) {
      const Vector sig = characteristic_values(d, Pc, Pf);
      for (int l = 1; l <= sig.size(); ++l) list.push_back(l);
    } else {
      list = parse_ells(ells);
    }
    for (int ell : list) {
      const std::string tag = "ell=" + std::to_string(ell);
      attempt("reduce " + tag, [&] {
        const BalancedTruncationResult r = is_ph ? balance_truncate(std::get<PortHamiltonianDAE>(m.sys), ell, Pc, Pf)
                                                 : classical_lqg_bt(d, ell, Pc, Pf);
        if (is_ph) {
          const RomStructureReport s = check_rom_structure(r);
          record("rom_structure " + tag, s.pass, "skew=" + format_double(s.skew) + " r_min=" + format_double(s.r_min));
        }
        const double bound = error_bound(r.sigma, ell);
        const double e = coprime_error(d, r.rom_sys, Pc, r.P_c_trunc);
        record("error_bound " + tag, e <= bound * (1 + 1e-6),
               "error=" + format_double(e) + " bound=" + format_double(bound));
      });
    }
  }
  for (const Check& c : checks) out << c.name << ": " << (c.ok ? "ok" : "FAIL") << " " << c.detail << '\n';
  return status;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structure-preserving LQG balanced truncation for port-Hamiltonian descriptor systems", "phlqg"};
  app.require_subcommand(1);

  std::string model, out_path, report_path, plot_path, ells, family, form, id = "phdae_mor";
  int ell = 0, pre = -1, opt_pre = 0, jobs = 1;
  bool classical = false;
  double tol = 1e-8;
  MsdConfig msd;
  NetworkConfig net;
  SweepOptions sopt;
  HamiltonianOptions& hopt = sopt.hamiltonian;
  BalanceOptions& bopt = sopt.balance;

  auto* gen = app.add_subcommand("generate", "Write a benchmark model file");
  gen->set_config("--config");
  gen->add_option("--family", family, "msd, network or counterexample")->required();
  gen->add_option("--form", form, "msd: first-order|semi-explicit|decoupled|minimal; network: index2|index1|semi-explicit");
  gen->add_option("--id", id, "counterexample id (phdae_mor, classical)");
  gen->add_option("--masses", msd.masses);
  gen->add_option("--mass", msd.mass);
  gen->add_option("--spring-bulk", msd.spring_bulk);
  gen->add_option("--spring-boundary", msd.spring_boundary);
  gen->add_option("--damping-bulk", msd.damping_bulk);
  gen->add_option("--damping-boundary", msd.damping_boundary);
  gen->add_option("--inner-nodes", net.inner_nodes);
  gen->add_option("--d0", net.d0);
  gen->add_option("--density", net.density);
  gen->add_option("--out", out_path, "output file, '-' for stdout")->required();

  auto* red = app.add_subcommand("reduce", "Balanced truncation at one order");
  red->set_config("--config");
  red->add_option("--model", model)->required();
  red->add_option("--ell", ell)->required();
  red->add_flag("--classical", classical, "unstructured LQG balanced truncation");
  red->add_option("--gap-tol", bopt.gap_tol);
  red->add_option("--rank-tol", bopt.rank_tol);
  red->add_option("--out", out_path, "ROM file");
  red->add_option("--report", report_path, "JSON report (default stdout)");

  auto* swp = app.add_subcommand("sweep", "Error curves over a range of orders");
  swp->set_config("--config");
  swp->add_option("--model", model)->required();
  swp->add_option("--ell", ells, "range a..b")->required();
  swp->add_option("--pre-reduce", pre, "order of the canonical pre-reduction (-1: ell_max + 2, 0: none)");
  swp->add_option("--eps", hopt.eps, "KYP regularization");
  swp->add_option("--gap-tol", bopt.gap_tol);
  swp->add_option("--hinf-tol", sopt.hinf_tol);
  swp->add_option("--jobs", jobs);
  swp->add_option("--out", out_path, "CSV file (default stdout)");
  swp->add_option("--plot", plot_path, "gnuplot script file");

  auto* opq = app.add_subcommand("optimize-q", "Replace Q by the maximal KYP solution");
  opq->set_config("--config");
  opq->add_option("--model", model)->required();
  opq->add_option("--pre-reduce", opt_pre, "order of a canonical pre-reduction (0: none)");
  opq->add_option("--eps", hopt.eps);
  opq->add_option("--cert-tol", hopt.cert_tol);
  opq->add_flag("!--no-extrapolate", hopt.extrapolate);
  opq->add_option("--out", out_path, "optimized model file");
  opq->add_option("--report", report_path, "JSON report (default stdout)");

  auto* ctl = app.add_subcommand("controller", "Passive LQG controller and closed-loop certificates");
  ctl->set_config("--config");
  ctl->add_option("--model", model)->required();
  ctl->add_option("--out", out_path, "controller model file");
  ctl->add_option("--report", report_path, "JSON report (default stdout)");

  auto* ver = app.add_subcommand("verify", "Run the invariant checks on a model");
  ver->set_config("--config");
  ver->add_option("--model", model)->required();
  ver->add_option("--ell", ells, "orders to reduce (default all)");
  ver->add_option("--tol", tol);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "ParseError: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*gen) return cmd_generate(family, form, id, msd, net, out_path, out);
    if (*red) return cmd_reduce(model, ell, classical, bopt, out_path, report_path, out);
    if (*swp) {
      sopt.pre_reduce = pre;
      sopt.jobs = jobs;
      return cmd_sweep(model, ells, sopt, out_path, plot_path, out, err);
    }
    if (*opq) return cmd_optimize(model, opt_pre, hopt, bopt, out_path, report_path, out);
    if (*ctl) return cmd_controller(model, out_path, report_path, out, err);
    if (*ver) return cmd_verify(model, ells, tol, out, err);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::ParseError ? 1 : 2;
  } catch (const std::exception& e) {
    err << "InternalError: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace phlqg
