// Command-line pipeline: generate benchmark datasets, run discovery on a
// dataset, or compare both selection methods side by side.
//
// Exit codes: 0 success, 2 bad arguments or unusable input, 3 simulation
// failure, 4 discovery failure (including no finite validation loss).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "parapde/parapde.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitSimulation = 3;
constexpr int kExitDiscovery = 4;

void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

long parse_long(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer for key '" + key + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer for key '" + key + "'");
  }
}

double parse_real(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for key '" + key + "'");
  }
}

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("config: bad boolean for key '" + key + "'");
}

// One resolvable config entry: a meta key, the CLI option that can override
// it, and string get/set used for config files and run.meta.
struct Binding {
  std::string key;
  CLI::Option* opt = nullptr;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

class ConfigSet {
 public:
  void add(std::string key, CLI::Option* opt, std::function<void(const std::string&)> set,
           std::function<std::string()> get) {
    bindings_.push_back({std::move(key), opt, std::move(set), std::move(get)});
  }

  // Config file fills in everything not set explicitly on the command line.
  void apply_file(const std::string& path, const std::string& command) const {
    for (const auto& [key, value] : parse_config_file(path)) {
      if (key == "command") {
        if (value != command)
          throw std::invalid_argument("config: command '" + value + "' does not match '" +
                                      command + "'");
        continue;
      }
      const Binding* binding = nullptr;
      for (const Binding& b : bindings_)
        if (b.key == key) binding = &b;
      if (binding == nullptr) throw std::invalid_argument("config: unknown key '" + key + "'");
      if (binding->opt != nullptr && binding->opt->count() > 0) continue;
      binding->set(value);
    }
  }

  std::string run_meta(const std::string& command) const {
    std::ostringstream out;
    out << "command=" << command << "\n";
    for (const Binding& b : bindings_) out << b.key << "=" << b.get() << "\n";
    return out.str();
  }

 private:
  std::vector<Binding> bindings_;
};

int sweep_threads() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  int cap = static_cast<int>(hw);
  if (const char* env = std::getenv("PARAPDE_THREADS")) {
    const long v = parse_long(env, "PARAPDE_THREADS");
    if (v < 1) throw std::invalid_argument("PARAPDE_THREADS must be positive");
    cap = static_cast<int>(std::min<long>(cap, v));
  }
  return cap;
}

struct GenerateOptions {
  std::string model;
  std::string out;
  double noise = 0.0;
  std::uint64_t seed = 0;
  // Empty string = keep the model's default.
  std::string init;
  std::string init_center;
  std::string init_width;
  std::string t_end;
};

struct DiscoverOptions {
  std::string data;
  std::string axis = "time";
  std::string method = "sgtr";  // unused by compare
  std::string out = ".";
  std::uint64_t seed = 0;
  long count = 50;
  double fraction = 0.2;
  long max_power = 3;
  long max_derivative = 4;
  bool include_constant = true;
  std::string space_diff = "spectral";
  std::string time_diff = "central_fd";
  long poly_degree = 4;
  long poly_half_window = 5;
  long samples = 1000;
  long every = 10;
  std::uint64_t sample_seed = 0;
  bool sample_seed_given = false;
  double ridge = 1e-5;
  long coarsen_x = 1;
  long coarsen_t = 1;
  long lowpass = 0;  // 0 = no filtering
  long row_stride = 1;
};

parapde::DiffSpec make_diff_spec(const std::string& name, long degree, long half_window) {
  parapde::DiffSpec spec;
  if (name == "spectral")
    spec.method = parapde::DiffMethod::spectral;
  else if (name == "central_fd")
    spec.method = parapde::DiffMethod::central_fd;
  else if (name == "poly_smooth")
    spec.method = parapde::DiffMethod::poly_smooth;
  else
    throw std::invalid_argument("unknown differentiation method '" + name + "'");
  spec.poly_degree = static_cast<int>(degree);
  spec.poly_half_window = static_cast<int>(half_window);
  return spec;
}

void ensure_parent_dir(const fs::path& p) {
  const fs::path dir = p.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
}

parapde::InitKind parse_init_kind(const std::string& name) {
  if (name == "gaussian_pulse") return parapde::InitKind::gaussian_pulse;
  if (name == "gaussian_train") return parapde::InitKind::gaussian_train;
  if (name == "multi_mode") return parapde::InitKind::multi_mode;
  if (name == "sine_wave") return parapde::InitKind::sine_wave;
  if (name == "cosine_mix") return parapde::InitKind::cosine_mix;
  if (name == "vortices") return parapde::InitKind::vortices;
  if (name == "single_vortex") return parapde::InitKind::single_vortex;
  throw std::invalid_argument("unknown initial condition '" + name + "'");
}

int run_generate(const GenerateOptions& opt, const ConfigSet& config) {
  parapde::SimConfig cfg;
  if (opt.model == "burgers")
    cfg = parapde::burgers_config();
  else if (opt.model == "advection_diffusion")
    cfg = parapde::advection_config();
  else if (opt.model == "ks")
    cfg = parapde::ks_config();
  else if (opt.model == "ns2d")
    cfg = parapde::ns2d_config();
  else
    throw std::invalid_argument("unknown model '" + opt.model + "'");
  if (opt.noise < 0.0) throw std::invalid_argument("noise level must be non-negative");
  if (opt.out.empty()) throw std::invalid_argument("missing --out path");
  if (!opt.init.empty()) cfg.init.kind = parse_init_kind(opt.init);
  if (!opt.init_center.empty()) cfg.init.center = parse_real(opt.init_center, "init_center");
  if (!opt.init_width.empty()) cfg.init.width = parse_real(opt.init_width, "init_width");
  if (!opt.t_end.empty()) cfg.t1 = parse_real(opt.t_end, "t_end");

  try {
    ensure_parent_dir(fs::path(opt.out + ".meta"));
    const parapde::NoiseSpec noise{opt.noise, opt.seed};
    if (cfg.model == parapde::Model::ns2d) {
      parapde::Field2D field = parapde::solve_ns2d(cfg);
      if (opt.noise > 0.0) field = parapde::add_noise(field, noise);
      parapde::save_dataset(field, opt.out);
    } else {
      parapde::Field1D field;
      if (cfg.model == parapde::Model::burgers)
        field = parapde::solve_burgers(cfg);
      else if (cfg.model == parapde::Model::advection_diffusion)
        field = parapde::solve_advection_diffusion(cfg);
      else
        field = parapde::solve_ks(cfg);
      if (opt.noise > 0.0) field = parapde::add_noise(field, noise);
      parapde::save_dataset(field, opt.out);
    }
    atomic_write(opt.out + ".run.meta", config.run_meta("generate"));
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSimulation;
  }
  return 0;
}

std::string csv_double(double v) { return parapde::detail::format_double(v); }

std::string coeffs_csv(const parapde::BlockSystem& sys, const parapde::ParametricModel& model) {
  std::ostringstream out;
  out << "coord";
  for (Eigen::Index g : model.active) out << "," << sys.terms[static_cast<std::size_t>(g)].display();
  out << "\n";
  for (Eigen::Index j = 0; j < sys.num_blocks(); ++j) {
    out << csv_double(sys.coords[static_cast<std::size_t>(j)]);
    for (Eigen::Index g : model.active) out << "," << csv_double(model.coeffs(g, j));
    out << "\n";
  }
  return out.str();
}

std::string sweep_csv(const parapde::SweepResult& result) {
  std::ostringstream out;
  out << "hyperparameter,loss,k\n";
  for (const parapde::SweepEntry& entry : result.entries)
    out << csv_double(entry.hyperparameter) << "," << csv_double(entry.loss) << "," << entry.k
        << "\n";
  return out.str();
}

std::string model_json_with_terms(const parapde::SweepResult& result,
                                  const parapde::BlockSystem& sys, const std::string& axis,
                                  std::uint64_t seed) {
  const parapde::SweepEntry& chosen =
      result.entries[static_cast<std::size_t>(result.selected)];
  ordered_json doc;
  doc["method"] = parapde::method_name(result.method);
  doc["axis"] = axis;
  std::vector<std::string> names;
  for (Eigen::Index g : result.final_model.active)
    names.push_back(sys.terms[static_cast<std::size_t>(g)].display());
  doc["terms"] = names;
  doc["hyperparameter"] = chosen.hyperparameter;
  doc["loss"] = chosen.loss;
  doc["k"] = result.final_model.k;
  doc["seed"] = seed;
  return doc.dump(2) + "\n";
}

// Shared by discover and compare: load the dataset and assemble the block
// system according to the resolved options.
parapde::BlockSystem build_system(const DiscoverOptions& opt) {
  parapde::Dataset dataset = [&] {
    try {
      return parapde::load_dataset(opt.data);
    } catch (const std::runtime_error& e) {
      throw std::invalid_argument(e.what());
    }
  }();

  parapde::LibrarySpec spec;
  if (opt.axis == "time")
    spec.axis = parapde::BlockAxis::time;
  else if (opt.axis == "space")
    spec.axis = parapde::BlockAxis::space;
  else
    throw std::invalid_argument("axis must be 'time' or 'space'");
  spec.max_power = static_cast<int>(opt.max_power);
  spec.max_derivative = static_cast<int>(opt.max_derivative);
  spec.include_constant = opt.include_constant;
  spec.space_diff = make_diff_spec(opt.space_diff, opt.poly_degree, opt.poly_half_window);
  spec.time_diff = make_diff_spec(opt.time_diff, opt.poly_degree, opt.poly_half_window);

  if (opt.coarsen_x < 1 || opt.coarsen_t < 1)
    throw std::invalid_argument("coarsen strides must be positive");
  if (opt.lowpass < 0) throw std::invalid_argument("lowpass mode count must be non-negative");
  if (opt.row_stride < 1) throw std::invalid_argument("row stride must be positive");
  spec.row_stride = opt.row_stride;

  if (std::holds_alternative<parapde::Field1D>(dataset)) {
    parapde::Field1D field = std::move(std::get<parapde::Field1D>(dataset));
    if (opt.lowpass > 0) field = parapde::lowpass_modes(field, opt.lowpass);
    if (opt.coarsen_x > 1 || opt.coarsen_t > 1)
      field = parapde::coarsen(field, opt.coarsen_x, opt.coarsen_t);
    return parapde::build_blocks(field, spec);
  }

  if (opt.lowpass > 0 || opt.coarsen_x > 1 || opt.coarsen_t > 1 || opt.row_stride > 1)
    throw std::invalid_argument("lowpass/coarsen/row-stride apply only to 1d datasets");
  const parapde::Field2D& field = std::get<parapde::Field2D>(dataset);
  if (spec.axis != parapde::BlockAxis::time)
    throw std::invalid_argument("axis=space is not supported for 2d datasets");
  const std::uint64_t sample_seed = opt.sample_seed_given ? opt.sample_seed : opt.seed;
  const parapde::SampledSet sample =
      parapde::subsample_points(field, opt.samples, opt.every,
                                parapde::full_region(field.grid), sample_seed);
  return parapde::build_blocks_2d(field, sample, spec);
}

parapde::SweepParams sweep_params(const DiscoverOptions& opt) {
  parapde::SweepParams params;
  params.count = static_cast<int>(opt.count);
  params.fraction = opt.fraction;
  params.seed = opt.seed;
  params.sgtr_ridge = opt.ridge;
  params.threads = sweep_threads();
  return params;
}

int run_discover(const DiscoverOptions& opt, const ConfigSet& config) {
  parapde::MethodKind method;
  if (opt.method == "sgtr")
    method = parapde::MethodKind::sgtr;
  else if (opt.method == "glasso")
    method = parapde::MethodKind::glasso;
  else
    throw std::invalid_argument("method must be 'sgtr' or 'glasso'");

  const parapde::BlockSystem sys = build_system(opt);
  try {
    const parapde::SweepResult result = parapde::sweep(sys, method, sweep_params(opt));
    const parapde::SweepEntry& chosen =
        result.entries[static_cast<std::size_t>(result.selected)];
    if (!std::isfinite(chosen.loss)) {
      std::cerr << "error: no model attains a finite validation loss\n";
      return kExitDiscovery;
    }
    const fs::path dir(opt.out);
    fs::create_directories(dir);
    atomic_write(dir / "model.json", model_json_with_terms(result, sys, opt.axis, opt.seed));
    atomic_write(dir / "coeffs.csv", coeffs_csv(sys, result.final_model));
    atomic_write(dir / "sweep.csv", sweep_csv(result));
    atomic_write(dir / "run.meta", config.run_meta("discover"));
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiscovery;
  }
  return 0;
}

int run_compare(const DiscoverOptions& opt, const ConfigSet& config) {
  const parapde::BlockSystem sys = build_system(opt);
  try {
    const parapde::SweepParams params = sweep_params(opt);
    const parapde::SweepResult by_sgtr = parapde::sweep(sys, parapde::MethodKind::sgtr, params);
    const parapde::SweepResult by_glasso =
        parapde::sweep(sys, parapde::MethodKind::glasso, params);

    bool any_finite = false;
    for (const parapde::SweepResult* result : {&by_sgtr, &by_glasso}) {
      const parapde::SweepEntry& chosen =
          result->entries[static_cast<std::size_t>(result->selected)];
      any_finite = any_finite || std::isfinite(chosen.loss);
    }
    if (!any_finite) {
      std::cerr << "error: no model attains a finite validation loss\n";
      return kExitDiscovery;
    }

    const fs::path dir(opt.out);
    fs::create_directories(dir);
    std::ostringstream summary;
    summary << "method,k,loss,hyperparameter,terms\n";
    for (const parapde::SweepResult* result : {&by_sgtr, &by_glasso}) {
      const std::string name = parapde::method_name(result->method);
      const parapde::SweepEntry& chosen =
          result->entries[static_cast<std::size_t>(result->selected)];
      atomic_write(dir / ("model_" + name + ".json"),
                   model_json_with_terms(*result, sys, opt.axis, opt.seed));
      atomic_write(dir / ("coeffs_" + name + ".csv"), coeffs_csv(sys, result->final_model));
      atomic_write(dir / ("sweep_" + name + ".csv"), sweep_csv(*result));
      summary << name << "," << result->final_model.k << "," << csv_double(chosen.loss) << ","
              << csv_double(chosen.hyperparameter) << ",";
      for (std::size_t i = 0; i < result->final_model.active.size(); ++i) {
        if (i > 0) summary << ";";
        summary << sys.terms[static_cast<std::size_t>(result->final_model.active[i])].display();
      }
      summary << "\n";
    }
    atomic_write(dir / "compare.csv", summary.str());
    atomic_write(dir / "run.meta", config.run_meta("compare"));
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiscovery;
  }
  return 0;
}

void bind_discover_options(CLI::App* cmd, DiscoverOptions& opt, ConfigSet& config,
                           bool with_method) {
  auto add_str = [&](const std::string& flag, const std::string& key, std::string& field,
                     const std::string& help) {
    CLI::Option* o = cmd->add_option(flag, field, help);
    config.add(key, o, [&field](const std::string& v) { field = v; },
               [&field] { return field; });
  };
  auto add_long = [&](const std::string& flag, const std::string& key, long& field,
                      const std::string& help) {
    CLI::Option* o = cmd->add_option(flag, field, help);
    config.add(key, o, [&field, key](const std::string& v) { field = parse_long(v, key); },
               [&field] { return std::to_string(field); });
  };
  auto add_real = [&](const std::string& flag, const std::string& key, double& field,
                      const std::string& help) {
    CLI::Option* o = cmd->add_option(flag, field, help);
    config.add(key, o, [&field, key](const std::string& v) { field = parse_real(v, key); },
               [&field] { return parapde::detail::format_double(field); });
  };

  add_str("--data", "data", opt.data, "dataset base path (expects .meta and .f64)");
  add_str("--axis", "axis", opt.axis, "block axis: time or space");
  if (with_method) add_str("--method", "method", opt.method, "selection method: sgtr or glasso");
  add_str("--out", "out", opt.out, "output directory");

  CLI::Option* seed_opt = cmd->add_option("--seed", opt.seed, "validation split seed");
  config.add("seed", seed_opt,
             [&opt](const std::string& v) { opt.seed = parse_u64(v, "seed"); },
             [&opt] { return std::to_string(opt.seed); });

  add_long("--count", "count", opt.count, "hyperparameter grid size");
  add_real("--fraction", "fraction", opt.fraction, "validation fraction");
  add_long("--max-power", "max_power", opt.max_power, "largest monomial power in the library");
  add_long("--max-derivative", "max_derivative", opt.max_derivative,
           "highest spatial derivative in the library");

  CLI::Option* const_opt = cmd->add_flag_function(
      "--no-constant", [&opt](std::int64_t) { opt.include_constant = false; },
      "drop the constant column from the library");
  config.add("include_constant", const_opt,
             [&opt](const std::string& v) { opt.include_constant = parse_bool(v, "include_constant"); },
             [&opt] { return opt.include_constant ? std::string("true") : std::string("false"); });

  add_str("--space-diff", "space_diff", opt.space_diff,
          "spatial derivative method: spectral, central_fd, poly_smooth");
  add_str("--time-diff", "time_diff", opt.time_diff,
          "time derivative method: central_fd or poly_smooth");
  add_long("--poly-degree", "poly_degree", opt.poly_degree, "poly_smooth fit degree");
  add_long("--poly-half-window", "poly_half_window", opt.poly_half_window,
           "poly_smooth half window");
  add_real("--ridge", "ridge", opt.ridge, "sgtr ridge regularization");
  add_long("--coarsen-x", "coarsen_x", opt.coarsen_x,
           "1d datasets: keep every k-th spatial sample before differentiation");
  add_long("--coarsen-t", "coarsen_t", opt.coarsen_t,
           "1d datasets: keep every k-th snapshot before differentiation");
  add_long("--lowpass", "lowpass", opt.lowpass,
           "1d datasets: zero spatial Fourier modes above this index (0 = off)");
  add_long("--row-stride", "row_stride", opt.row_stride,
           "keep every k-th regression row of each block");
  add_long("--samples", "samples", opt.samples, "2d datasets: number of sampled grid points");
  add_long("--every", "every", opt.every, "2d datasets: keep every k-th snapshot");

  CLI::Option* sseed_opt = cmd->add_option(
      "--sample-seed",
      [&opt](const CLI::results_t& vals) {
        opt.sample_seed = parse_u64(vals.at(0), "--sample-seed");
        opt.sample_seed_given = true;
        return true;
      },
      "2d datasets: sampling seed (defaults to --seed)");
  config.add("sample_seed", sseed_opt,
             [&opt](const std::string& v) {
               opt.sample_seed = parse_u64(v, "sample_seed");
               opt.sample_seed_given = true;
             },
             [&opt] {
               return std::to_string(opt.sample_seed_given ? opt.sample_seed : opt.seed);
             });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parametric PDE discovery from gridded data"};
  app.require_subcommand(1);

  GenerateOptions gen_opt;
  DiscoverOptions disc_opt;
  DiscoverOptions comp_opt;
  ConfigSet gen_config, disc_config, comp_config;
  std::string gen_config_path, disc_config_path, comp_config_path;

  CLI::App* gen = app.add_subcommand("generate", "simulate a benchmark dataset");
  {
    CLI::Option* model_opt = gen->add_option(
        "--model", gen_opt.model, "burgers, advection_diffusion, ks, or ns2d");
    gen_config.add("model", model_opt,
                   [&](const std::string& v) { gen_opt.model = v; },
                   [&] { return gen_opt.model; });
    CLI::Option* out_opt = gen->add_option("--out", gen_opt.out, "dataset base path");
    gen_config.add("out", out_opt, [&](const std::string& v) { gen_opt.out = v; },
                   [&] { return gen_opt.out; });
    CLI::Option* noise_opt =
        gen->add_option("--noise", gen_opt.noise, "noise level relative to field RMS");
    gen_config.add("noise", noise_opt,
                   [&](const std::string& v) { gen_opt.noise = parse_real(v, "noise"); },
                   [&] { return parapde::detail::format_double(gen_opt.noise); });
    CLI::Option* seed_opt = gen->add_option("--seed", gen_opt.seed, "noise seed");
    gen_config.add("seed", seed_opt,
                   [&](const std::string& v) { gen_opt.seed = parse_u64(v, "seed"); },
                   [&] { return std::to_string(gen_opt.seed); });
    auto add_override = [&](const std::string& flag, const std::string& key, std::string& field,
                            const std::string& help) {
      CLI::Option* o = gen->add_option(flag, field, help);
      gen_config.add(key, o, [&field](const std::string& v) { field = v; },
                     [&field] { return field; });
    };
    add_override("--init", "init", gen_opt.init,
                 "initial condition override (e.g. gaussian_pulse, gaussian_train, multi_mode)");
    add_override("--init-center", "init_center", gen_opt.init_center,
                 "initial condition center override");
    add_override("--init-width", "init_width", gen_opt.init_width,
                 "initial condition width override");
    add_override("--t-end", "t_end", gen_opt.t_end, "simulation end time override");
    gen->add_option("--config", gen_config_path, "key=value config file");
  }

  CLI::App* disc = app.add_subcommand("discover", "identify the PDE behind a dataset");
  bind_discover_options(disc, disc_opt, disc_config, true);
  disc->add_option("--config", disc_config_path, "key=value config file");

  CLI::App* comp = app.add_subcommand("compare", "run sgtr and glasso side by side");
  bind_discover_options(comp, comp_opt, comp_config, false);
  comp->add_option("--config", comp_config_path, "key=value config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      if (!gen_config_path.empty()) gen_config.apply_file(gen_config_path, "generate");
      return run_generate(gen_opt, gen_config);
    }
    if (disc->parsed()) {
      if (!disc_config_path.empty()) disc_config.apply_file(disc_config_path, "discover");
      return run_discover(disc_opt, disc_config);
    }
    if (!comp_config_path.empty()) comp_config.apply_file(comp_config_path, "compare");
    return run_compare(comp_opt, comp_config);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
