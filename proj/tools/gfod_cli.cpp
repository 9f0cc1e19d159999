// Command-line front end: parse problem files, run the solve / synthesize /
// verify / check workflows, and emit machine-readable JSON reports.
//
// Exit codes: 0 success, 2 input validation failure, 3 numeric failure.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gfod/gfod.hpp"

namespace {

using json = nlohmann::ordered_json;

// Numbers are rendered with 17 significant digits so identical inputs and
// seeds produce byte-identical output.
void dump_json(const json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in + json(it.key()).dump() + ": ";
        dump_json(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& el : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        dump_json(el, out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float: {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", j.get<double>());
      out += buf;
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

void write_output(const json& j, const std::string& out_path) {
  std::string text;
  dump_json(j, text, 0);
  text += "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out_path);
    if (!f) throw std::invalid_argument("cannot open output path " + out_path);
    f << text;
  }
}

struct Problem {
  bool has_matrix = false;
  gfod::HermitianMatrix S;   // set when the file carries a dense matrix
  gfod::RealVec lambda_raw;  // set when the file carries a spectrum
  gfod::RealVec a_raw;
};

gfod::RealVec parse_real_list(const json& j, const std::string& name) {
  if (!j.is_array()) throw std::invalid_argument(name + " must be an array of numbers");
  gfod::RealVec v;
  for (const auto& el : j) {
    if (!el.is_number()) throw std::invalid_argument(name + " must contain only numbers");
    v.push_back(el.get<double>());
  }
  return v;
}

Problem parse_problem(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("problem file must be a JSON object");
  const bool has_lambda = j.contains("lambda");
  const bool has_s = j.contains("S");
  if (has_lambda == has_s)
    throw std::invalid_argument("problem file must contain exactly one of \"lambda\" or \"S\"");
  if (!j.contains("a")) throw std::invalid_argument("problem file must contain \"a\"");

  Problem p;
  p.a_raw = parse_real_list(j["a"], "a");
  if (has_lambda) {
    p.lambda_raw = parse_real_list(j["lambda"], "lambda");
    return p;
  }

  const json& rows = j["S"];
  if (!rows.is_array() || rows.empty())
    throw std::invalid_argument("S must be a non-empty array of rows");
  const std::size_t d = rows.size();
  std::vector<gfod::Complex> raw(d * d);
  for (std::size_t r = 0; r < d; ++r) {
    const json& row = rows[r];
    if (!row.is_array() || row.size() != d)
      throw std::invalid_argument("S must be a square nested array");
    for (std::size_t c = 0; c < d; ++c) {
      const json& el = row[c];
      if (el.is_number()) {
        raw[r * d + c] = gfod::Complex(el.get<double>(), 0.0);
      } else if (el.is_array() && el.size() == 2 && el[0].is_number() && el[1].is_number()) {
        raw[r * d + c] = gfod::Complex(el[0].get<double>(), el[1].get<double>());
      } else {
        throw std::invalid_argument("S entries must be numbers or [re, im] pairs");
      }
    }
  }
  p.S = gfod::HermitianMatrix::from_entries(d, raw, 1e-9);
  p.has_matrix = true;
  return p;
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot read input file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<gfod::UINormSpec> parse_norm_list(const std::string& list) {
  std::vector<gfod::UINormSpec> norms;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) norms.push_back(gfod::parse_norm(item));
  }
  if (norms.empty()) throw std::invalid_argument("empty norm list");
  return norms;
}

json to_json(const gfod::RealVec& v) { return json(v); }

json perm_json(const std::vector<std::size_t>& perm) {
  json arr = json::array();
  for (std::size_t p : perm) arr.push_back(p);
  return arr;
}

// Spectrum of an input matrix, validated positive semidefinite and clamped.
gfod::RealVec psd_spectrum(const gfod::HermitianMatrix& S) {
  gfod::RealVec lambda = gfod::herm_eig(S).eigenvalues;
  const double scale = 1.0 + S.frob_norm();
  for (double& x : lambda) {
    if (x < -1e-10 * scale)
      throw std::invalid_argument("S is not positive semidefinite (eigenvalue " +
                                  std::to_string(x) + ")");
    x = std::max(x, 0.0);
  }
  return lambda;
}

struct SortedProblem {
  gfod::GfodInstance inst;
  json lambda_perm;  // null when lambda came from a matrix
  json a_perm;
};

SortedProblem sorted_instance(const Problem& p) {
  SortedProblem sp;
  if (p.has_matrix) {
    gfod::SortedInstance si = gfod::make_instance_sorted(psd_spectrum(p.S), p.a_raw);
    sp.inst = si.inst;
    sp.lambda_perm = nullptr;
    sp.a_perm = perm_json(si.a_perm);
  } else {
    gfod::SortedInstance si = gfod::make_instance_sorted(p.lambda_raw, p.a_raw);
    sp.inst = si.inst;
    sp.lambda_perm = perm_json(si.lambda_perm);
    sp.a_perm = perm_json(si.a_perm);
  }
  return sp;
}

json solution_json(const gfod::GfodInstance& inst, const gfod::DeltaSolution& sol,
                   const std::vector<gfod::UINormSpec>& norms) {
  json out;
  out["d"] = inst.d();
  out["k"] = inst.k();
  out["kd_mode"] = sol.kd_mode;
  out["r_star"] = sol.r_star;
  out["q"] = sol.q;
  json s_arr = json::array();
  for (std::size_t s : sol.s) s_arr.push_back(s);
  out["s"] = s_arr;
  out["c"] = to_json(sol.c);
  out["delta"] = to_json(sol.delta);
  out["delta_sorted"] = to_json(gfod::sort_down(sol.delta));
  out["mu"] = to_json(sol.mu);
  json gm;
  for (const auto& n : norms) {
    gfod::RealVec s_abs(sol.delta.size());
    for (std::size_t i = 0; i < s_abs.size(); ++i) s_abs[i] = std::abs(sol.delta[i]);
    gm[n.to_string()] = gfod::evaluate_from_singulars(n, std::move(s_abs));
  }
  out["global_min"] = gm;

  const double tr_lambda = std::accumulate(inst.lambda.begin(), inst.lambda.end(), 0.0);
  const double tr_a = std::accumulate(inst.a.begin(), inst.a.end(), 0.0);
  const double tr_delta = std::accumulate(sol.delta.begin(), sol.delta.end(), 0.0);
  const double trace_residual = tr_delta - (tr_lambda - tr_a);

  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < sol.c.size(); ++j) min_gap = std::min(min_gap, sol.c[j + 1] - sol.c[j]);
  const std::size_t head = sol.kd_mode ? inst.k() : inst.d();
  double bound_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < head; ++i)
    bound_excess = std::max(bound_excess, sol.delta[i] - std::min(sol.c.back(), inst.lambda[i]));
  const double mu_min = *std::min_element(sol.mu.begin(), sol.mu.end());

  json inv;
  inv["trace_identity"] = {{"ok", std::abs(trace_residual) <= 1e-9 * (1.0 + std::abs(tr_lambda) + std::abs(tr_a))},
                           {"residual", trace_residual}};
  inv["block_constants_increasing"] = {{"ok", sol.c.size() < 2 || min_gap > 0.0},
                                       {"min_gap", sol.c.size() < 2 ? 0.0 : min_gap}};
  inv["delta_bound"] = {{"ok", bound_excess <= 1e-9}, {"max_excess", bound_excess}};
  inv["norms_majorized_by_mu"] = {{"ok", gfod::majorizes(inst.a, sol.mu)}};
  inv["mu_nonnegative"] = {{"ok", mu_min >= -1e-9}, {"min", mu_min}};
  inv["degenerate"] = sol.degenerate;
  out["invariants"] = inv;
  return out;
}

json vector_json(const gfod::CVector& g) {
  json arr = json::array();
  for (const gfod::Complex& z : g) arr.push_back(json::array({z.real(), z.imag()}));
  return arr;
}

int cmd_solve(const std::string& input, const std::string& out_path, const std::string& norms_csv,
              bool exhaustive) {
  const Problem p = parse_problem(read_input(input));
  const SortedProblem sp = sorted_instance(p);
  const std::vector<gfod::UINormSpec> norms = parse_norm_list(norms_csv);
  const gfod::DeltaSolution sol = gfod::delta(sp.inst, exhaustive);

  json out = solution_json(sp.inst, sol, norms);
  out["lambda_sorted"] = to_json(sp.inst.lambda);
  out["a_sorted"] = to_json(sp.inst.a);
  out["lambda_permutation"] = sp.lambda_perm;
  out["a_permutation"] = sp.a_perm;
  write_output(out, out_path);
  return 0;
}

int cmd_check(const std::string& input, const std::string& out_path, long index) {
  const Problem p = parse_problem(read_input(input));
  const SortedProblem sp = sorted_instance(p);

  gfod::GfodInstance work = sp.inst;
  bool reduced = false;
  if (work.k() < work.d()) {
    work = gfod::reduce_to_k(work).reduced;
    reduced = true;
  }
  if (index < 0 || static_cast<std::size_t>(index) >= work.d())
    throw std::invalid_argument("--index must lie in [0, " + std::to_string(work.d() - 1) + "]");
  const std::size_t r = static_cast<std::size_t>(index);
  const gfod::CoFeasibility cof = gfod::check_cofeasible(work, r);

  json out;
  out["r"] = r;
  out["reduced"] = reduced;
  out["cofeasible"] = cof.cofeasible;
  out["admissible"] = cof.cofeasible ? gfod::is_admissible(work, r) : false;
  out["c"] = cof.c;
  out["truncated_mu"] = to_json(cof.truncated_mu);
  out["a_permutation"] = sp.a_perm;
  out["lambda_permutation"] = sp.lambda_perm;
  write_output(out, out_path);
  return 0;
}

int cmd_synthesize(const std::string& input, const std::string& out_path,
                   const std::string& norms_csv) {
  const Problem p = parse_problem(read_input(input));
  const SortedProblem sp = sorted_instance(p);
  const std::vector<gfod::UINormSpec> norms = parse_norm_list(norms_csv);

  const gfod::HermitianMatrix S =
      p.has_matrix ? p.S : gfod::HermitianMatrix::diagonal(sp.inst.lambda);
  const gfod::DeltaSolution sol = gfod::delta(sp.inst);
  const gfod::SynthesisResult res = gfod::construct_minimizer(S, sp.inst.a);

  const gfod::HermitianMatrix residual = S - res.frame_operator;
  const gfod::RealVec residual_spectrum = gfod::herm_eig(residual).eigenvalues;
  const gfod::RealVec target = gfod::sort_down(sol.delta);
  double spectrum_error = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i)
    spectrum_error = std::max(spectrum_error, std::abs(residual_spectrum[i] - target[i]));

  const gfod::LocalMinStructure st = gfod::structure_report(res.family, S);

  json out;
  out["d"] = sp.inst.d();
  out["k"] = sp.inst.k();
  json vecs = json::array();
  for (const gfod::CVector& g : res.family.vectors) vecs.push_back(vector_json(g));
  out["vectors"] = vecs;
  out["norms_sq"] = to_json(sp.inst.a);
  json norm_err = json::array();
  for (std::size_t i = 0; i < res.family.vectors.size(); ++i)
    norm_err.push_back(gfod::norm_sq(res.family.vectors[i]) - sp.inst.a[i]);
  out["norm_errors"] = norm_err;
  out["residual_spectrum"] = to_json(residual_spectrum);
  out["delta_sorted"] = to_json(target);
  out["spectrum_error"] = spectrum_error;
  out["eigenvector_residuals"] = to_json(st.residuals);
  out["block_constants"] = to_json(st.eigenconstants);
  json obj;
  for (const auto& n : norms) obj[n.to_string()] = gfod::evaluate(n, residual);
  out["objective"] = obj;
  json gm;
  for (const auto& n : norms) gm[n.to_string()] = gfod::global_min_value(sp.inst, n);
  out["global_min"] = gm;
  out["a_permutation"] = sp.a_perm;
  out["lambda_permutation"] = sp.lambda_perm;
  write_output(out, out_path);
  return 0;
}

int cmd_verify(const std::string& input, const std::string& out_path,
               const std::string& norms_csv, long trials, std::uint64_t seed, long jobs,
               double grad_tol, long max_iters) {
  const Problem p = parse_problem(read_input(input));
  const SortedProblem sp = sorted_instance(p);
  const std::vector<gfod::UINormSpec> norms = parse_norm_list(norms_csv);
  for (const auto& n : norms) {
    if (n.kind != gfod::NormKind::SchattenP && n.kind != gfod::NormKind::Frobenius)
      throw std::invalid_argument("verify: norms are restricted to SchattenP/Frobenius");
  }
  if (trials < 0) throw std::invalid_argument("--trials must be >= 0");

  const gfod::HermitianMatrix S =
      p.has_matrix ? p.S : gfod::HermitianMatrix::diagonal(sp.inst.lambda);
  const gfod::RealVec closed_form = gfod::sort_down(gfod::delta(sp.inst).delta);

  struct Trial {
    std::size_t norm_idx;
    std::uint64_t seed;
    gfod::DescentReport report;
  };
  std::vector<Trial> all;
  for (std::size_t n = 0; n < norms.size(); ++n)
    for (long t = 0; t < trials; ++t)
      all.push_back({n, seed + static_cast<std::uint64_t>(t), {}});

  std::size_t n_jobs = jobs > 0 ? static_cast<std::size_t>(jobs)
                                : std::max(1u, std::thread::hardware_concurrency());
  n_jobs = std::min<std::size_t>(std::max<std::size_t>(n_jobs, 1), std::max<std::size_t>(all.size(), 1));
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= all.size()) return;
      gfod::DescentConfig cfg;
      cfg.norm = norms[all[idx].norm_idx];
      cfg.seed = all[idx].seed;
      cfg.grad_tol = grad_tol;
      cfg.max_iters = static_cast<int>(max_iters);
      all[idx].report = gfod::descend(S, sp.inst.a, cfg);
    }
  };
  for (std::size_t t = 0; t < n_jobs; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  // Aggregate: deviation from the closed form over converged trials, and the
  // largest cross-norm disagreement between best converged spectra.
  double max_dev = 0.0;
  std::size_t converged = 0;
  std::vector<gfod::RealVec> best_spec(norms.size());
  std::vector<double> best_obj(norms.size(), std::numeric_limits<double>::infinity());
  for (const Trial& t : all) {
    if (!t.report.converged) continue;
    ++converged;
    for (std::size_t i = 0; i < closed_form.size(); ++i)
      max_dev = std::max(max_dev, std::abs(t.report.final_spectrum[i] - closed_form[i]));
    if (t.report.final_objective < best_obj[t.norm_idx]) {
      best_obj[t.norm_idx] = t.report.final_objective;
      best_spec[t.norm_idx] = t.report.final_spectrum;
    }
  }
  double cross_dev = 0.0;
  for (std::size_t n1 = 0; n1 < norms.size(); ++n1) {
    for (std::size_t n2 = n1 + 1; n2 < norms.size(); ++n2) {
      if (best_spec[n1].empty() || best_spec[n2].empty()) continue;
      for (std::size_t i = 0; i < best_spec[n1].size(); ++i)
        cross_dev = std::max(cross_dev, std::abs(best_spec[n1][i] - best_spec[n2][i]));
    }
  }

  json out;
  out["trials"] = trials;
  out["seed"] = seed;
  json norm_names = json::array();
  for (const auto& n : norms) norm_names.push_back(n.to_string());
  out["norms"] = norm_names;
  out["closed_form_spectrum"] = to_json(closed_form);
  json reports = json::array();
  for (const Trial& t : all) {
    json r;
    r["norm"] = norms[t.norm_idx].to_string();
    r["seed"] = t.seed;
    r["converged"] = t.report.converged;
    r["iterations"] = t.report.iterations;
    r["grad_norm"] = t.report.grad_norm;
    r["final_objective"] = t.report.final_objective;
    r["final_spectrum"] = to_json(t.report.final_spectrum);
    reports.push_back(r);
  }
  out["reports"] = reports;
  json agg;
  agg["total_trials"] = all.size();
  agg["converged_trials"] = converged;
  agg["max_spectrum_deviation"] = max_dev;
  agg["max_cross_norm_deviation"] = cross_dev;
  out["aggregate"] = agg;
  out["a_permutation"] = sp.a_perm;
  out["lambda_permutation"] = sp.lambda_perm;
  write_output(out, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frame operator distance solver"};
  app.require_subcommand(1);

  std::string input = "-";
  std::string out_path;
  std::string norms_csv = "fro";
  bool exhaustive = false;
  long index = 0;
  long trials = 10;
  std::uint64_t seed = 0;
  long jobs = 0;
  double grad_tol = 3e-7;
  long max_iters = 200000;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("input", input, "problem file path, or - for stdin");
    cmd->add_option("--out", out_path, "write the JSON report to this path instead of stdout");
  };

  CLI::App* solve = app.add_subcommand("solve", "compute the optimal spectrum delta(lambda, a)");
  add_common(solve);
  solve->add_option("--norms", norms_csv, "comma-separated norm list (fro, p1.5, kyfan2+fro0.01, ...)");
  solve->add_flag("--debug-exhaustive", exhaustive,
                  "scan all truncation indexes and assert the admissible one is unique");

  CLI::App* synth = app.add_subcommand("synthesize", "construct an explicit optimal family");
  add_common(synth);
  synth->add_option("--norms", norms_csv, "norms reported in the certificate");

  CLI::App* verify = app.add_subcommand("verify", "multi-start descent against the closed form");
  add_common(verify);
  verify->add_option("--norms", norms_csv, "descent norms (SchattenP/Frobenius only)");
  verify->add_option("--trials", trials, "random starts per norm");
  verify->add_option("--seed", seed, "base RNG seed");
  verify->add_option("--jobs", jobs, "concurrent trials (default: available parallelism)");
  verify->add_option("--grad-tol", grad_tol, "stationarity threshold for each trial");
  verify->add_option("--max-iters", max_iters, "iteration budget per trial");

  CLI::App* check = app.add_subcommand("check", "co-feasibility report for one truncation index");
  add_common(check);
  check->add_option("--index", index, "truncation index r")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(input, out_path, norms_csv, exhaustive);
    if (synth->parsed()) return cmd_synthesize(input, out_path, norms_csv);
    if (verify->parsed())
      return cmd_verify(input, out_path, norms_csv, trials, seed, jobs, grad_tol, max_iters);
    if (check->parsed()) return cmd_check(input, out_path, index);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
