#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "nttnn/io.hpp"
#include "nttnn/kernels.hpp"
#include "nttnn/linalg.hpp"
#include "nttnn/metrics.hpp"
#include "nttnn/solver.hpp"

namespace nttnn::cli {

namespace {

using json = nlohmann::json;

const std::vector<std::string> kPhiNames{"identity", "tanh", "sigmoid", "softplus"};

/// Thrown for bad flag values that CLI11 cannot validate on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string fnv1a_hex(const Tensor3& t) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : t.data()) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const std::string t = trim(s);
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) throw UsageError("invalid " + what + ": '" + s + "'");
  return v;
}

// "--config <path>" is expanded into flags placed before the command line,
// so explicit flags override file values (options keep the last value).
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::vector<std::string> rest;
  std::vector<std::string> from_file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
      continue;
    }
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw UsageError("config line without '=': " + line);
      from_file.push_back("--" + trim(line.substr(0, eq)));
      from_file.push_back(trim(line.substr(eq + 1)));
    }
  }
  // Program name and subcommand stay in front.
  std::size_t head = std::min<std::size_t>(rest.size(), 2);
  out.insert(out.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(head));
  out.insert(out.end(), from_file.begin(), from_file.end());
  out.insert(out.end(), rest.begin() + static_cast<std::ptrdiff_t>(head), rest.end());
  return out;
}

struct SolverFlags {
  std::size_t r = 5;
  double alpha = 10.0;
  double beta = 10.0;
  std::string rho = "0.001";
  std::string phi = "tanh";
  std::string t_mode = "learned";
  std::string init = "interpolation";
  double tol = 1e-4;
  int max_iters = 500;
  std::uint64_t seed = 0;
  int threads = 0;

  void add_to(CLI::App* app) {
    app->add_option("--r", r, "Rows of the transform T")->check(CLI::PositiveNumber);
    app->add_option("--alpha", alpha, "Penalty on X = Z x3 T^T")->check(CLI::PositiveNumber);
    app->add_option("--beta", beta, "Penalty on Y = phi(Z)")->check(CLI::PositiveNumber);
    app->add_option("--rho", rho, "Proximal weights: one value or four comma-separated");
    app->add_option("--phi", phi, "Nonlinearity")->check(CLI::IsMember(kPhiNames));
    app->add_option("--t-mode", t_mode, "learned | identity | fixed:<path>");
    app->add_option("--init", init, "interpolation | observed | warmstart:<path>");
    app->add_option("--tol", tol, "Relative-change stopping tolerance")->check(CLI::PositiveNumber);
    app->add_option("--max-iters", max_iters, "Iteration cap")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Seed recorded in the manifest");
    app->add_option("--threads", threads, "OpenMP threads (0 = default)")->check(CLI::NonNegativeNumber);
  }

  /// Builds the solver config; file-backed modes are loaded here.
  SolverConfig to_config(std::size_t n3) const {
    SolverConfig cfg;
    cfg.alpha = alpha;
    cfg.beta = beta;
    auto parts = split(rho, ',');
    if (parts.size() == 1) {
      cfg.rho.fill(parse_double(parts[0], "--rho"));
    } else if (parts.size() == 4) {
      for (std::size_t i = 0; i < 4; ++i) cfg.rho[i] = parse_double(parts[i], "--rho");
    } else {
      throw UsageError("--rho takes one value or four comma-separated values");
    }
    cfg.phi = NonlinearFn::FromName(phi);
    cfg.r = r;
    if (t_mode == "learned") {
      cfg.t_mode = TransformMode::Learned;
    } else if (t_mode == "identity") {
      cfg.t_mode = TransformMode::Fixed;
      cfg.fixed_t = Matrix::Identity(static_cast<Eigen::Index>(n3), static_cast<Eigen::Index>(n3));
      cfg.r = n3;
    } else if (t_mode.rfind("fixed:", 0) == 0) {
      cfg.t_mode = TransformMode::Fixed;
      cfg.fixed_t = io::read_matrix(t_mode.substr(6));
      cfg.r = static_cast<std::size_t>(cfg.fixed_t->rows());
    } else {
      throw UsageError("--t-mode must be learned, identity or fixed:<path>");
    }
    if (init == "interpolation") {
      cfg.init = InitStrategy::Interpolation;
    } else if (init == "observed") {
      cfg.init = InitStrategy::Observed;
    } else if (init.rfind("warmstart:", 0) == 0) {
      cfg.init = InitStrategy::WarmStart;
      cfg.warm_start = io::read_tensor(init.substr(10));
    } else {
      throw UsageError("--init must be interpolation, observed or warmstart:<path>");
    }
    cfg.rel_tol = tol;
    cfg.max_iters = max_iters;
    cfg.seed = seed;
    cfg.threads = threads;
    return cfg;
  }

  json to_json() const {
    return {{"r", r},     {"alpha", alpha}, {"beta", beta},       {"rho", rho},   {"phi", phi},
            {"t_mode", t_mode}, {"init", init}, {"tol", tol}, {"max_iters", max_iters}, {"seed", seed},
            {"threads", threads}};
  }

  static SolverFlags from_json(const json& j) {
    SolverFlags f;
    f.r = j.at("r").get<std::size_t>();
    f.alpha = j.at("alpha").get<double>();
    f.beta = j.at("beta").get<double>();
    f.rho = j.at("rho").get<std::string>();
    f.phi = j.at("phi").get<std::string>();
    f.t_mode = j.at("t_mode").get<std::string>();
    f.init = j.at("init").get<std::string>();
    f.tol = j.at("tol").get<double>();
    f.max_iters = j.at("max_iters").get<int>();
    f.seed = j.at("seed").get<std::uint64_t>();
    f.threads = j.at("threads").get<int>();
    return f;
  }
};

json resolved_config_json(const SolverConfig& cfg) {
  return {{"alpha", cfg.alpha},
          {"beta", cfg.beta},
          {"rho", cfg.rho},
          {"r", cfg.r},
          {"phi", cfg.phi.name()},
          {"t_mode", to_string(cfg.t_mode)},
          {"init", to_string(cfg.init)},
          {"rel_tol", cfg.rel_tol},
          {"max_iters", cfg.max_iters},
          {"newton", {{"max_steps", cfg.newton.max_steps},
                      {"grad_tol", cfg.newton.grad_tol},
                      {"max_backtracks", cfg.newton.max_backtracks}}},
          {"seed", cfg.seed},
          {"threads", cfg.threads}};
}

void write_history(const std::string& path, const std::vector<IterationRecord>& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write history to " + path);
  out << "iter,objective,rel_change,wall_seconds,newton_failures\n";
  for (const auto& h : history) {
    out << h.iter << ',' << num(h.objective) << ',' << num(h.rel_change) << ',' << num(h.wall_seconds) << ','
        << h.newton_failures << '\n';
  }
}

json metrics_json(const metrics::QualityReport& q) {
  return {{"psnr", q.psnr.infinite ? json("inf") : json(q.psnr.mean)},
          {"ssim", q.ssim.mean},
          {"sam", q.sam.mean}};
}

// ---------------------------------------------------------------- complete

struct CompleteArgs {
  std::string observed;
  std::string mask;
  std::string out;
  std::string history;
  std::string truth;
  SolverFlags solver;
};

int do_complete(const CompleteArgs& a) {
  const std::string started = utc_now();
  CompletionProblem problem{io::read_tensor(a.observed), io::read_mask(a.mask)};
  SolverConfig cfg = a.solver.to_config(problem.observed.dims().n3);

  json manifest;
  manifest["tool"] = "nttnn";
  manifest["manifest_version"] = 1;
  manifest["command"] = "complete";
  manifest["inputs"] = {{"observed", a.observed}, {"mask", a.mask}, {"truth", a.truth}};
  manifest["outputs"] = {{"x_hat", a.out}, {"history", a.history}, {"manifest", a.out + ".manifest"}};
  manifest["flags"] = a.solver.to_json();
  manifest["config"] = resolved_config_json(cfg);
  manifest["started_at"] = started;

  CompletionResult result;
  try {
    result = run(problem, cfg);
  } catch (const SolverError& e) {
    if (!a.history.empty()) write_history(a.history, e.history());
    throw;
  }

  io::write_tensor(a.out, result.x_hat);
  if (!a.history.empty()) write_history(a.history, result.state.history);

  const auto& last = result.state.history.back();
  manifest["finished_at"] = utc_now();
  manifest["result"] = {{"converged", result.converged},
                        {"iterations", result.iterations},
                        {"final_rel_change", last.rel_change},
                        {"final_objective", last.objective},
                        {"x_hat_fnv1a64", fnv1a_hex(result.x_hat)}};
  if (!a.truth.empty()) {
    manifest["metrics"] = metrics_json(metrics::evaluate(result.x_hat, io::read_tensor(a.truth)));
  } else {
    manifest["metrics"] = nullptr;
  }
  std::ofstream(a.out + ".manifest") << manifest.dump(2) << '\n';

  std::cout << "iterations=" << result.iterations << " converged=" << (result.converged ? "true" : "false")
            << " rel_change=" << num(last.rel_change) << '\n';
  return kExitOk;
}

int do_replay(const std::string& manifest_path, const std::string& out) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot read manifest " + manifest_path);
  const json m = json::parse(in);
  const SolverFlags flags = SolverFlags::from_json(m.at("flags"));
  CompletionProblem problem{io::read_tensor(m.at("inputs").at("observed").get<std::string>()),
                            io::read_mask(m.at("inputs").at("mask").get<std::string>())};
  SolverConfig cfg = flags.to_config(problem.observed.dims().n3);
  CompletionResult result = run(problem, cfg);
  if (!out.empty()) io::write_tensor(out, result.x_hat);
  const std::string expected = m.at("result").at("x_hat_fnv1a64").get<std::string>();
  const std::string actual = fnv1a_hex(result.x_hat);
  const bool same = expected == actual;
  std::cout << "replay " << (same ? "identical" : "MISMATCH") << " x_hat_fnv1a64=" << actual << '\n';
  return same ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- synth / mask / metrics / accegy

int do_synth(const io::SynthSpec& spec, const std::string& out, std::string transform_out) {
  io::SynthData d = io::synth_ground_truth(spec);
  if (transform_out.empty()) transform_out = out + ".transform";
  io::write_tensor(out, d.x);
  io::write_matrix(transform_out, d.transform.t);
  std::cout << "wrote " << out << " (" << spec.dims.n1 << "x" << spec.dims.n2 << "x" << spec.dims.n3
            << ") and transform " << transform_out << " (" << spec.r << "x" << spec.dims.n3 << ")\n";
  return kExitOk;
}

int do_mask(Dims dims, const std::string& like, double sr, std::uint64_t seed, const std::string& out) {
  if (!like.empty()) dims = io::read_tensor(like).dims();
  if (dims.numel() == 0) throw UsageError("mask needs --like or --n1/--n2/--n3");
  ObservationMask mask = io::gen_mask(dims, sr, seed);
  io::write_mask(out, mask);
  std::cout << "dims=" << dims.n1 << "x" << dims.n2 << "x" << dims.n3 << " sr=" << num(sr)
            << " observed=" << mask.count() << '\n';
  return kExitOk;
}

int do_metrics(const std::string& x_path, const std::string& truth_path, const std::string& csv) {
  const Tensor3 x = io::read_tensor(x_path);
  const Tensor3 truth = io::read_tensor(truth_path);
  const auto q = metrics::evaluate(x, truth);
  std::cout << metrics::format_line(q) << '\n';
  if (q.psnr.excluded > 0 && !q.psnr.infinite) {
    std::cerr << "warning: " << q.psnr.excluded << " identical band(s) excluded from PSNR\n";
  }
  if (q.sam.excluded > 0) std::cerr << "warning: " << q.sam.excluded << " zero band(s) excluded from SAM\n";
  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) throw std::runtime_error("cannot write " + csv);
    out << "band,psnr,ssim,sam\n";
    for (std::size_t k = 0; k < q.psnr.per_band.size(); ++k) {
      auto cell = [](const metrics::BandValue& v) { return v.valid ? num(v.value) : std::string("nan"); };
      const auto& p = q.psnr.per_band[k];
      out << k + 1 << ',' << (p.valid ? num(p.value) : std::string("inf")) << ',' << cell(q.ssim.per_band[k])
          << ',' << cell(q.sam.per_band[k]) << '\n';
    }
  }
  return kExitOk;
}

int do_accegy(const std::string& input, const std::string& transform, std::size_t r, const std::string& phi,
              const std::string& out) {
  const Tensor3 x = io::read_tensor(input);
  TransformSpec spec;
  spec.phi = NonlinearFn::FromName(phi);
  if (!transform.empty()) {
    spec.t = io::read_matrix(transform);
    spec.mode = TransformMode::Fixed;
  } else {
    if (r == 0 || r > x.dims().n3) throw UsageError("--r must be in [1, n3] when no --transform is given");
    // Leading left singular vectors of the mode-3 unfolding, as in solver initialization.
    spec.t = svd(unfold(x, 3)).u.leftCols(static_cast<Eigen::Index>(r)).transpose();
  }
  const Tensor3 transformed = psi(x, spec);
  std::ofstream csv(out);
  if (!csv) throw std::runtime_error("cannot write " + out);
  csv << "slice,k,percent,accegy\n";
  for (std::size_t i = 0; i < transformed.dims().n3; ++i) {
    const Vector s = svd(transformed.slice(i)).s;
    const std::span<const double> values(s.data(), static_cast<std::size_t>(s.size()));
    for (std::size_t k = 0; k <= values.size(); ++k) {
      const double percent = 100.0 * static_cast<double>(k) / static_cast<double>(values.size());
      csv << i + 1 << ',' << k << ',' << num(percent) << ',' << num(acc_egy(values, k)) << '\n';
    }
  }
  std::cout << "wrote " << out << " (" << transformed.dims().n3 << " slices)\n";
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string truth;
  std::string mask;
  std::string axis_spec;
  double sr = 0.0;
  std::uint64_t mask_seed = 0;
  std::string out;
  SolverFlags solver;
};

std::vector<std::string> sweep_values(const std::string& axis, const std::string& values) {
  if (axis == "r") {
    const auto dots = values.find("..");
    if (dots != std::string::npos) {
      const int lo = std::stoi(values.substr(0, dots));
      const int hi = std::stoi(values.substr(dots + 2));
      if (lo < 1 || hi < lo) throw UsageError("bad r range '" + values + "'");
      std::vector<std::string> out;
      for (int v = lo; v <= hi; ++v) out.push_back(std::to_string(v));
      return out;
    }
  }
  auto out = split(values, ',');
  for (auto& v : out) v = trim(v);
  if (out.empty()) throw UsageError("empty sweep value list");
  return out;
}

int do_sweep(const SweepArgs& a) {
  const auto eq = a.axis_spec.find('=');
  if (eq == std::string::npos) throw UsageError("--sweep expects axis=values");
  const std::string axis = a.axis_spec.substr(0, eq);
  if (axis != "r" && axis != "phi" && axis != "init" && axis != "sr") {
    throw UsageError("unknown sweep axis '" + axis + "' (expected r, phi, init or sr)");
  }
  const auto values = sweep_values(axis, a.axis_spec.substr(eq + 1));
  const Tensor3 truth = io::read_tensor(a.truth);

  std::optional<ObservationMask> fixed_mask;
  if (axis != "sr") {
    if (!a.mask.empty()) {
      fixed_mask = io::read_mask(a.mask);
    } else if (a.sr > 0.0) {
      fixed_mask = io::gen_mask(truth.dims(), a.sr, a.mask_seed);
    } else {
      throw UsageError("sweep needs --mask or --sr unless sweeping sr");
    }
  }

  std::ofstream csv(a.out);
  if (!csv) throw std::runtime_error("cannot write " + a.out);
  csv << "axis,value,psnr,ssim,sam,iterations,converged,wall_seconds,status\n";
  for (const auto& value : values) {
    SolverFlags flags = a.solver;
    std::string status = "ok";
    std::string row;
    try {
      ObservationMask mask;
      if (axis == "sr") {
        mask = io::gen_mask(truth.dims(), parse_double(value, "sr"), a.mask_seed);
      } else {
        mask = *fixed_mask;
        if (axis == "r") flags.r = static_cast<std::size_t>(std::stoul(value));
        if (axis == "phi") {
          if (std::find(kPhiNames.begin(), kPhiNames.end(), value) == kPhiNames.end())
            throw UsageError("unknown phi '" + value + "'");
          flags.phi = value;
        }
        if (axis == "init") flags.init = value;
      }
      CompletionProblem problem{masked_observation(truth, mask), mask};
      const SolverConfig cfg = flags.to_config(truth.dims().n3);
      const auto start = std::chrono::steady_clock::now();
      const CompletionResult res = run(problem, cfg);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const auto q = metrics::evaluate(res.x_hat, truth);
      row = (q.psnr.infinite ? std::string("inf") : num(q.psnr.mean)) + ',' + num(q.ssim.mean) + ',' +
            num(q.sam.mean) + ',' + std::to_string(res.iterations) + ',' + (res.converged ? "true" : "false") +
            ',' + num(secs);
    } catch (const std::exception& e) {
      status = std::string("error: ") + e.what();
      for (char& c : status)
        if (c == ',' || c == '\n') c = ';';
      row = "nan,nan,nan,0,false,0";
    }
    csv << axis << ',' << value << ',' << row << ',' << status << '\n';
    std::cout << axis << '=' << value << ' ' << status << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& raw_args) {
  CLI::App app{"Low-rank tensor completion with a nonlinear-transform tensor nuclear norm"};
  app.name(raw_args.empty() ? "nttnn" : raw_args[0]);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--config", "key = value file; flags override its values");

  CompleteArgs complete;
  auto* c = app.add_subcommand("complete", "Complete a partially observed tensor");
  c->add_option("--observed", complete.observed, "Observed tensor (NTT3)")->required()->check(CLI::ExistingFile);
  c->add_option("--mask", complete.mask, "Mask tensor (NTT3, 0/1)")->required()->check(CLI::ExistingFile);
  c->add_option("--out", complete.out, "Output tensor (NTT3); manifest goes to <out>.manifest")->required();
  c->add_option("--history", complete.history, "Per-iteration CSV");
  c->add_option("--truth", complete.truth, "Ground truth for manifest metrics")->check(CLI::ExistingFile);
  complete.solver.add_to(c);

  std::string manifest_path;
  std::string replay_out;
  auto* rp = app.add_subcommand("replay", "Re-run a completion from its manifest and compare x_hat");
  rp->add_option("--manifest", manifest_path, "Manifest written by complete")->required()->check(CLI::ExistingFile);
  rp->add_option("--out", replay_out, "Where to write the replayed tensor");

  io::SynthSpec synth;
  std::string synth_out;
  std::string synth_transform;
  std::string synth_phi = "tanh";
  auto* sy = app.add_subcommand("synth", "Generate an exactly low-rank synthetic ground truth");
  sy->add_option("--n1", synth.dims.n1)->check(CLI::PositiveNumber);
  sy->add_option("--n2", synth.dims.n2)->check(CLI::PositiveNumber);
  sy->add_option("--n3", synth.dims.n3)->check(CLI::PositiveNumber);
  sy->add_option("--r", synth.r, "Rows of the generating transform")->check(CLI::PositiveNumber);
  sy->add_option("--rank", synth.slice_rank, "Rank of each transformed slice")->check(CLI::PositiveNumber);
  sy->add_option("--phi", synth_phi)->check(CLI::IsMember(kPhiNames));
  sy->add_option("--margin", synth.margin, "Range margin in (0,1)");
  sy->add_option("--seed", synth.seed);
  sy->add_option("--out", synth_out)->required();
  sy->add_option("--transform", synth_transform, "Transform sidecar (default <out>.transform)");

  Dims mask_dims{0, 0, 0};
  std::string mask_like;
  double mask_sr = 0.0;
  std::uint64_t mask_seed = 0;
  std::string mask_out;
  auto* mk = app.add_subcommand("mask", "Generate a uniform random observation mask");
  mk->add_option("--n1", mask_dims.n1);
  mk->add_option("--n2", mask_dims.n2);
  mk->add_option("--n3", mask_dims.n3);
  mk->add_option("--like", mask_like, "Take dims from this tensor")->check(CLI::ExistingFile);
  mk->add_option("--sr", mask_sr, "Sampling rate in (0,1]")->required();
  mk->add_option("--seed", mask_seed);
  mk->add_option("--out", mask_out)->required();

  std::string met_x;
  std::string met_truth;
  std::string met_csv;
  auto* me = app.add_subcommand("metrics", "PSNR / SSIM / SAM of a recovery against ground truth");
  me->add_option("--x", met_x, "Recovered tensor")->required()->check(CLI::ExistingFile);
  me->add_option("--truth", met_truth, "Ground truth")->required()->check(CLI::ExistingFile);
  me->add_option("--csv", met_csv, "Per-band CSV");

  std::string acc_input;
  std::string acc_transform;
  std::size_t acc_r = 0;
  std::string acc_phi = "tanh";
  std::string acc_out;
  auto* ac = app.add_subcommand("accegy", "Accumulated singular-value energy of the transformed slices");
  ac->add_option("--input", acc_input)->required()->check(CLI::ExistingFile);
  ac->add_option("--transform", acc_transform, "Transform matrix file")->check(CLI::ExistingFile);
  ac->add_option("--r", acc_r, "Rows of a data-derived transform when --transform is absent");
  ac->add_option("--phi", acc_phi)->check(CLI::IsMember(kPhiNames));
  ac->add_option("--out", acc_out, "CSV output")->required();

  SweepArgs sweep;
  auto* sw = app.add_subcommand("sweep", "One completion per grid point, aggregated into a CSV");
  sw->add_option("--truth", sweep.truth, "Ground truth tensor")->required()->check(CLI::ExistingFile);
  sw->add_option("--sweep", sweep.axis_spec, "r=3..10 | phi=a,b | init=a,b | sr=0.05,0.1")->required();
  sw->add_option("--mask", sweep.mask, "Fixed mask for non-sr sweeps")->check(CLI::ExistingFile);
  sw->add_option("--sr", sweep.sr, "Sampling rate of a generated mask for non-sr sweeps");
  sw->add_option("--mask-seed", sweep.mask_seed, "Seed of generated masks");
  sw->add_option("--out", sweep.out, "CSV output")->required();
  sweep.solver.add_to(sw);

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (c->parsed()) return do_complete(complete);
    if (rp->parsed()) return do_replay(manifest_path, replay_out);
    if (sy->parsed()) {
      synth.phi = NonlinearFn::FromName(synth_phi);
      return do_synth(synth, synth_out, synth_transform);
    }
    if (mk->parsed()) return do_mask(mask_dims, mask_like, mask_sr, mask_seed, mask_out);
    if (me->parsed()) return do_metrics(met_x, met_truth, met_csv);
    if (ac->parsed()) return do_accegy(acc_input, acc_transform, acc_r, acc_phi, acc_out);
    if (sw->parsed()) return do_sweep(sweep);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace nttnn::cli
