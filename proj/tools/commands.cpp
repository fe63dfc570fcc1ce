#include "commands.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <tuple>

#include "bspade/bspade.h"

namespace bspade::cli {

namespace {

// Experimental grid: 0.0465 steps from 0 up to 1.35.
constexpr double kGridStep = 0.0465;
constexpr double kGridStop = 1.35;
constexpr double kMatricesStop = 0.93;
constexpr double kDefaultGamma = 0.15;
constexpr double kDiagonalFloor = 0.82;

struct ModelDeleter
{
  void operator()(bspade_model* m) const { bspade_model_destroy(m); }
};
struct CalibrationDeleter
{
  void operator()(bspade_calibration* c) const { bspade_calibration_destroy(c); }
};
using ModelPtr = std::unique_ptr<bspade_model, ModelDeleter>;
using CalibrationPtr = std::unique_ptr<bspade_calibration, CalibrationDeleter>;

ExitCode exit_code_for(bspade_status s)
{
  switch (s) {
  case BSPADE_OK:
    return kOk;
  case BSPADE_ERR_INVALID_ARGUMENT:
    return kUsage;
  case BSPADE_ERR_DATA:
    return kData;
  default:
    return kNumerical;
  }
}

void check(bspade_status s, const std::string& context)
{
  if (s != BSPADE_OK)
    throw CliError(exit_code_for(s), context + ": " + bspade_last_error());
}

// Shortest representation that round-trips.
std::string num(double v)
{
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep))
    out.push_back(trim(item));
  if (!s.empty() && s.back() == sep)
    out.emplace_back();
  return out;
}

double parse_double(const std::string& key, const std::string& value)
{
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size() || !std::isfinite(v))
      throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw CliError(kUsage, "config key '" + key + "': '" + value + "' is not a number");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& value)
{
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size())
      throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw CliError(kUsage, "config key '" + key + "': '" + value + "' is not an integer");
  }
}

bool parse_bool(const std::string& key, const std::string& value)
{
  std::string v = value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on")
    return true;
  if (v == "0" || v == "false" || v == "no" || v == "off")
    return false;
  throw CliError(kUsage, "config key '" + key + "': '" + value + "' is not a boolean");
}

std::vector<double> parse_list(const std::string& key, const std::string& value)
{
  std::vector<double> out;
  for (const auto& item : split(value, ','))
    if (!item.empty())
      out.push_back(parse_double(key, item));
  return out;
}

ModelPtr make_model(double gamma, int max_k, int max_l, bool renormalize)
{
  bspade_model* raw = nullptr;
  check(bspade_model_create(gamma, max_k, max_l, renormalize ? 1 : 0, &raw), "model");
  return ModelPtr(raw);
}

std::vector<bspade_outcome> outcomes_of(const bspade_model* model)
{
  std::vector<bspade_outcome> out(bspade_model_outcomes(model));
  for (std::size_t i = 0; i < out.size(); ++i)
    check(bspade_model_outcome(model, i, &out[i]), "outcome");
  return out;
}

std::ofstream open_output(const RunConfig& config, const std::string& name)
{
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec)
    throw CliError(kUsage, "cannot create output directory " + config.out_dir.string() + ": " + ec.message());
  std::ofstream os(config.out_dir / name, std::ios::binary | std::ios::trunc);
  if (!os)
    throw CliError(kUsage, "cannot open " + (config.out_dir / name).string() + " for writing");
  return os;
}

void write_header(std::ostream& os, const RunConfig& config, const char* command, std::optional<double> gamma,
                  const std::vector<std::pair<std::string, std::string>>& extra = {})
{
  os << "# bspade " << bspade_version() << '\n';
  os << "# command = " << command << '\n';
  if (gamma) {
    double k = 0.0;
    check(bspade_schmidt_number(*gamma, &k), "schmidt number");
    os << "# gamma = " << num(*gamma) << '\n';
    os << "# schmidt_number = " << num(k) << '\n';
  }
  if (config.schmidt_waist_um)
    os << "# schmidt_waist_um = " << num(*config.schmidt_waist_um) << '\n';
  os << "# convention = d is the per-arm adimensional shift (x_o = sqrt(2) x / sigma_s); delta = 2 d; "
        "FI and CRLB refer to delta\n";
  os << "# input_convention = " << to_string(config.sep_convention) << '\n';
  os << "# photons = " << config.photons << '\n';
  os << "# seed = " << config.seed << '\n';
  for (const auto& [k, v] : extra)
    os << "# " << k << " = " << v << '\n';
}

std::string sanitize(std::string s)
{
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

} // namespace

// ---------------------------------------------------------------------------
// Config

const char* to_string(SepConvention c)
{
  switch (c) {
  case SepConvention::D:
    return "d";
  case SepConvention::Delta:
    return "delta";
  case SepConvention::Micrometre:
    return "um";
  }
  return "d";
}

SepConvention parse_convention(const std::string& s)
{
  if (s == "d")
    return SepConvention::D;
  if (s == "delta")
    return SepConvention::Delta;
  if (s == "um")
    return SepConvention::Micrometre;
  throw CliError(kUsage, "unknown separation convention '" + s + "' (expected d, delta or um)");
}

void RunConfig::set(const std::string& raw_key, const std::string& raw_value)
{
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string value = trim(raw_value);
  if (key == "gamma")
    gamma = parse_double(key, value);
  else if (key == "pump_waist_um")
    pump_waist_um = parse_double(key, value);
  else if (key == "crystal_length_mm")
    crystal_length_mm = parse_double(key, value);
  else if (key == "pump_wavelength_nm")
    pump_wavelength_nm = parse_double(key, value);
  else if (key == "schmidt_waist_um")
    schmidt_waist_um = parse_double(key, value);
  else if (key == "modes_k")
    modes_k = static_cast<int>(parse_int(key, value));
  else if (key == "modes_l")
    modes_l = static_cast<int>(parse_int(key, value));
  else if (key == "sep_start")
    sep_start = parse_double(key, value);
  else if (key == "sep_stop")
    sep_stop = parse_double(key, value);
  else if (key == "sep_step")
    sep_step = parse_double(key, value);
  else if (key == "sep_convention")
    sep_convention = parse_convention(value);
  else if (key == "photons")
    photons = parse_int(key, value);
  else if (key == "trials")
    trials = static_cast<int>(parse_int(key, value));
  else if (key == "seed") {
    const auto v = parse_int(key, value);
    if (v < 0)
      throw CliError(kUsage, "seed must be non-negative");
    seed = static_cast<std::uint64_t>(v);
  } else if (key == "out_dir")
    out_dir = value;
  else if (key == "threads")
    threads = static_cast<unsigned>(std::max<std::int64_t>(0, parse_int(key, value)));
  else if (key == "k_values")
    k_values = parse_list(key, value);
  else if (key == "gamma_values")
    gamma_values = parse_list(key, value);
  else if (key == "calibrate")
    calibrate = parse_bool(key, value);
  else if (key == "alpha")
    alpha = parse_double(key, value);
  else if (key == "beta")
    beta = parse_double(key, value);
  else
    throw CliError(kUsage, "unknown config key '" + key + "'");
}

double RunConfig::resolved_gamma() const
{
  const bool any_physical = pump_waist_um || crystal_length_mm || pump_wavelength_nm;
  if (gamma && any_physical)
    throw CliError(kUsage, "give either gamma or the physical source parameters, not both");
  if (gamma) {
    if (!(*gamma > 0.0))
      throw CliError(kUsage, "gamma must be positive");
    return *gamma;
  }
  if (any_physical) {
    if (!(pump_waist_um && crystal_length_mm && pump_wavelength_nm))
      throw CliError(kUsage, "physical source parameters need pump_waist_um, crystal_length_mm and pump_wavelength_nm");
    double g = 0.0;
    check(bspade_gamma_from_physical(*pump_waist_um * 1e-6, *crystal_length_mm * 1e-3, *pump_wavelength_nm * 1e-9, &g),
          "source parameters");
    return g;
  }
  return kDefaultGamma;
}

void RunConfig::validate() const
{
  resolved_gamma();
  if (modes_k < 0 || modes_l < 0)
    throw CliError(kUsage, "modes_k and modes_l must be non-negative");
  if (sep_step && !(*sep_step > 0.0))
    throw CliError(kUsage, "sep_step must be positive");
  if (photons < 1)
    throw CliError(kUsage, "photons must be at least 1");
  if (trials < 2)
    throw CliError(kUsage, "trials must be at least 2");
  if (sep_convention == SepConvention::Micrometre && !schmidt_waist_um)
    throw CliError(kUsage, "sep_convention = um needs schmidt_waist_um");
  if (!(alpha >= 0.0) || !(beta >= 0.0 && beta <= 1.0))
    throw CliError(kUsage, "alpha must be >= 0 and beta in [0, 1]");
}

double RunConfig::to_d(double value) const
{
  switch (sep_convention) {
  case SepConvention::D:
    return value;
  case SepConvention::Delta:
    return 0.5 * value;
  case SepConvention::Micrometre: {
    double d = 0.0;
    check(bspade_adimensional_shift(value * 1e-6, schmidt_waist_um.value_or(0.0) * 1e-6, &d), "separation");
    return d;
  }
  }
  return value;
}

void load_config_file(RunConfig& config, const std::filesystem::path& path)
{
  std::ifstream is(path);
  if (!is)
    throw CliError(kUsage, "cannot read config file " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CliError(kUsage, path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    config.set(line.substr(0, eq), line.substr(eq + 1));
  }
}

std::vector<double> separation_grid(const RunConfig& config, double default_start, double default_stop,
                                    double default_step)
{
  const double start = config.sep_start ? config.to_d(*config.sep_start) : default_start;
  const double stop = config.sep_stop ? config.to_d(*config.sep_stop) : default_stop;
  const double step = config.sep_step ? config.to_d(*config.sep_step) : default_step;
  if (!(step > 0.0))
    throw CliError(kUsage, "separation step must be positive");
  if (start < 0.0 || stop < start)
    throw CliError(kUsage, "separation grid needs 0 <= start <= stop");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i)
    grid[i] = start + step * double(i);
  return grid;
}

// ---------------------------------------------------------------------------
// Counts files

CountsFile read_counts_file(const std::filesystem::path& path)
{
  std::ifstream is(path);
  if (!is)
    throw CliError(kData, path.string() + ": cannot open counts file");
  CountsFile file;
  file.path = path;
  std::set<std::tuple<int, int, int, int>> seen;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw CliError(kData, path.string() + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty())
      continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        continue;
      const std::string key = trim(line.substr(1, eq - 1));
      const std::string value = trim(line.substr(eq + 1));
      try {
        if (key == "separation")
          file.separation = parse_double(key, value);
        else if (key == "duration")
          file.duration = parse_double(key, value);
        else if (key == "convention")
          file.convention = parse_convention(value);
      } catch (const CliError& e) {
        fail(e.what());
      }
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() == 5 && fields[0] == "k_idler")
      continue;
    if (fields.size() != 5)
      fail("expected 5 columns k_idler,l_idler,k_signal,l_signal,count");
    CountsFile::Row row{};
    try {
      std::size_t pos = 0;
      auto as_int = [&](const std::string& f) {
        const long long v = std::stoll(f, &pos);
        if (pos != f.size())
          throw std::invalid_argument(f);
        return v;
      };
      row.k_idler = static_cast<int>(as_int(fields[0]));
      row.l_idler = static_cast<int>(as_int(fields[1]));
      row.k_signal = static_cast<int>(as_int(fields[2]));
      row.l_signal = static_cast<int>(as_int(fields[3]));
      row.count = as_int(fields[4]);
    } catch (const std::exception&) {
      fail("non-integer field");
    }
    if (row.k_idler < 0 || row.l_idler < 0 || row.k_signal < 0 || row.l_signal < 0)
      fail("negative mode index");
    if (row.count < 0)
      fail("negative count");
    if (!seen.emplace(row.k_idler, row.l_idler, row.k_signal, row.l_signal).second)
      fail("duplicate mode tuple");
    file.rows.push_back(row);
  }
  if (file.rows.empty())
    throw CliError(kData, path.string() + ": counts file has no count rows");
  return file;
}

void write_counts_file(const std::filesystem::path& path, const CountsFile& file)
{
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw CliError(kUsage, "cannot open " + path.string() + " for writing");
  os << "# bspade counts\n";
  if (file.separation)
    os << "# separation = " << num(*file.separation) << '\n';
  if (file.convention)
    os << "# convention = " << to_string(*file.convention) << '\n';
  if (file.duration)
    os << "# duration = " << num(*file.duration) << '\n';
  os << "k_idler,l_idler,k_signal,l_signal,count\n";
  for (const auto& r : file.rows)
    os << r.k_idler << ',' << r.l_idler << ',' << r.k_signal << ',' << r.l_signal << ',' << r.count << '\n';
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_crlb_curves(const RunConfig& config, std::ostream& log)
{
  std::vector<double> ks = config.k_values;
  for (double g : config.gamma_values) {
    double k = 0.0;
    check(bspade_schmidt_number(g, &k), "gamma_values");
    ks.push_back(k);
  }
  if (ks.empty())
    ks = {1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 11.6, 15.0, 20.0, 30.0, 50.0};
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  auto os = open_output(config, "crlb_curves.csv");
  write_header(os, config, "crlb-curves", std::nullopt,
               {{"crlb", "per-photon variance bound on delta, 2/sqrt(K)"}, {"fi_total", "sqrt(K)/2"}});
  os << "K,gamma,crlb_per_photon,crlb_std_per_photon,fi_total\n";
  for (double k : ks) {
    double crlb = 0.0;
    check(bspade_crlb(k, 1.0, &crlb), "crlb");
    // gamma <= 1 root of (gamma + 1/gamma)^2 / 4 = K.
    const double gamma = std::sqrt(k) - std::sqrt(k - 1.0);
    os << num(k) << ',' << num(gamma) << ',' << num(crlb) << ',' << num(std::sqrt(crlb)) << ','
       << num(0.5 * std::sqrt(k)) << '\n';
  }
  log << "wrote " << (config.out_dir / "crlb_curves.csv").string() << " (" << ks.size() << " rows)\n";
  return kOk;
}

int cmd_matrices(const RunConfig& config, std::ostream& log)
{
  config.validate();
  const double gamma = config.resolved_gamma();
  const auto grid = separation_grid(config, 0.0, kMatricesStop, kGridStep);
  const ModelPtr model = make_model(gamma, config.modes_k, config.modes_l, true);
  const auto outcomes = outcomes_of(model.get());

  auto index = open_output(config, "matrices.csv");
  write_header(index, config, "matrices", gamma,
               {{"modes", std::to_string(config.modes_k + 1) + "x" + std::to_string(config.modes_l + 1)
                            + " per arm"}});
  index << "index,d,delta,diagonal_mass,off_diagonal_mass,file\n";
  std::vector<double> p(outcomes.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    check(bspade_model_probabilities(model.get(), grid[i], p.data(), p.size()), "probabilities");
    char name[32];
    std::snprintf(name, sizeof name, "matrix_%03zu.csv", i);
    auto os = open_output(config, name);
    write_header(os, config, "matrices", gamma,
                 {{"d", num(grid[i])}, {"delta", num(2.0 * grid[i])}, {"renormalized", "true"}});
    os << "k_idler,l_idler,k_signal,l_signal,probability\n";
    double diag = 0.0;
    for (std::size_t j = 0; j < outcomes.size(); ++j) {
      const auto& o = outcomes[j];
      os << o.k_idler << ',' << o.l_idler << ',' << o.k_signal << ',' << o.l_signal << ',' << num(p[j]) << '\n';
      if (o.k_idler == o.k_signal && o.l_idler == o.l_signal)
        diag += p[j];
    }
    double total = 0.0;
    for (double v : p)
      total += v;
    index << i << ',' << num(grid[i]) << ',' << num(2.0 * grid[i]) << ',' << num(diag) << ',' << num(total - diag)
          << ',' << name << '\n';
  }
  log << "wrote " << grid.size() << " matrices to " << config.out_dir.string() << '\n';
  return kOk;
}

namespace {

struct LoadedCounts
{
  std::filesystem::path path;
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;
  std::optional<double> d; // label converted to per-arm d
  double diagonal_fraction = 0.0;
};

LoadedCounts load_counts(const std::filesystem::path& path, const RunConfig& config, const bspade_model* model)
{
  const CountsFile file = read_counts_file(path);
  LoadedCounts lc;
  lc.path = path;
  lc.counts.assign(bspade_model_outcomes(model), 0);
  std::int64_t diag = 0;
  for (const auto& r : file.rows) {
    const bspade_outcome o{r.k_signal, r.l_signal, r.k_idler, r.l_idler};
    std::size_t idx = 0;
    if (bspade_model_index_of(model, &o, &idx) != BSPADE_OK)
      throw CliError(kData, path.string() + ": mode tuple (" + std::to_string(r.k_idler) + ","
                                + std::to_string(r.l_idler) + "," + std::to_string(r.k_signal) + ","
                                + std::to_string(r.l_signal) + ") is outside the configured mode space");
    lc.counts[idx] = r.count;
    lc.total += r.count;
    if (r.k_idler == r.k_signal && r.l_idler == r.l_signal)
      diag += r.count;
  }
  if (lc.total <= 0)
    throw CliError(kData, path.string() + ": counts file has zero total counts");
  lc.diagonal_fraction = double(diag) / double(lc.total);
  if (file.separation) {
    RunConfig label_cfg = config;
    if (file.convention)
      label_cfg.sep_convention = *file.convention;
    if (label_cfg.sep_convention == SepConvention::Micrometre && !label_cfg.schmidt_waist_um)
      throw CliError(kData, path.string() + ": separation in um needs schmidt_waist_um");
    lc.d = label_cfg.to_d(*file.separation);
  }
  return lc;
}

} // namespace

int cmd_estimate(const RunConfig& config, const std::vector<std::filesystem::path>& files, std::ostream& log)
{
  config.validate();
  if (files.empty())
    throw CliError(kUsage, "estimate needs at least one counts file");
  const double gamma = config.resolved_gamma();
  const ModelPtr model = make_model(gamma, config.modes_k, config.modes_l, true);

  std::vector<LoadedCounts> data;
  for (const auto& f : files)
    data.push_back(load_counts(f, config, model.get()));

  CalibrationPtr calibration;
  std::vector<std::pair<std::string, std::string>> extra{{"calibrated", config.calibrate ? "true" : "false"}};
  if (config.calibrate) {
    std::vector<double> seps;
    std::vector<std::int64_t> flat;
    for (const auto& d : data) {
      if (!d.d)
        throw CliError(kData, d.path.string() + ": --calibrate needs a '# separation = ...' label in every file");
      seps.push_back(*d.d);
      flat.insert(flat.end(), d.counts.begin(), d.counts.end());
    }
    bspade_calibration* raw = nullptr;
    std::size_t rank_deficient = 0;
    check(bspade_calibration_fit(model.get(), seps.data(), flat.data(), seps.size(), &raw, &rank_deficient),
          "calibration");
    calibration.reset(raw);
    extra.emplace_back("calibration_rank_deficient_entries", std::to_string(rank_deficient));
    const auto first = std::min_element(data.begin(), data.end(), [](const auto& a, const auto& b) { return *a.d < *b.d; });
    if (first->diagonal_fraction < kDiagonalFloor)
      extra.emplace_back("warning", "smallest-separation file " + first->path.filename().string()
                                        + " has diagonal count fraction " + num(first->diagonal_fraction)
                                        + " < 0.82");
  }

  auto os = open_output(config, "estimates.csv");
  write_header(os, config, "estimate", gamma, extra);
  os << "file,label_d,label_delta,d_hat,delta_hat,log_likelihood,crlb_delta_variance,bound_hit,flat,converged,status\n";
  bspade_search search;
  bspade_search_default(&search);
  int failures = 0;
  for (const auto& d : data) {
    os << sanitize(d.path.filename().string()) << ',';
    if (d.d)
      os << num(*d.d) << ',' << num(2.0 * *d.d) << ',';
    else
      os << ",,";
    bspade_estimate r{};
    const bspade_status s =
        bspade_estimate_separation(model.get(), calibration.get(), d.counts.data(), d.counts.size(), &search, &r);
    if (s != BSPADE_OK) {
      ++failures;
      os << ",,,,,,," << "error: " << sanitize(bspade_last_error()) << '\n';
      continue;
    }
    os << num(r.d_hat) << ',' << num(r.delta_hat) << ',' << num(r.log_likelihood) << ',' << num(r.crlb_variance) << ','
       << r.bound_hit << ',' << r.flat << ',' << r.converged << ",ok\n";
  }
  log << "estimated " << data.size() - failures << " of " << data.size() << " files -> "
      << (config.out_dir / "estimates.csv").string() << '\n';
  return kOk;
}

int cmd_compare(const RunConfig& config, std::ostream& log)
{
  config.validate();
  const double gamma = config.resolved_gamma();
  const auto grid = separation_grid(config, 0.0, kGridStop, kGridStep);

  bspade_mc_config mc;
  bspade_mc_config_default(&mc);
  mc.gamma = gamma;
  mc.photons = config.photons;
  mc.trials = config.trials;
  mc.seed = config.seed;
  mc.max_k = config.modes_k;
  mc.max_l = config.modes_l;
  mc.threads = config.threads;

  const int projections = (config.modes_k + 1) * (config.modes_l + 1);
  auto os = open_output(config, "compare.csv");
  write_header(os, config, "compare", gamma,
               {{"trials", std::to_string(config.trials)},
                {"projections", std::to_string(projections * projections)},
                {"pixels", std::to_string(mc.pixels) + " over [" + num(mc.pixel_lo) + ", " + num(mc.pixel_hi) + "]"},
                {"search", "[" + num(mc.search.lo) + ", " + num(mc.search.hi) + "] grid "
                               + std::to_string(mc.search.grid_points) + " tol " + num(mc.search.tolerance)}});
  os << "d,delta,method,std_err_d,std_err_delta,mean_d,boundary_fraction,flat_fraction\n";
  for (double d : grid) {
    for (bspade_method m : {BSPADE_METHOD_SPADE, BSPADE_METHOD_DIRECT_GAUSSIAN, BSPADE_METHOD_DIRECT_SPDC}) {
      bspade_mc_result r{};
      check(bspade_mc_standard_error(m, &mc, d, &r), std::string("compare ") + bspade_method_name(m));
      os << num(d) << ',' << num(2.0 * d) << ',' << bspade_method_name(m) << ',' << num(r.std_error) << ','
         << num(2.0 * r.std_error) << ',' << num(r.mean) << ',' << num(r.boundary_fraction) << ','
         << num(r.flat_fraction) << '\n';
    }
  }
  log << "wrote " << (config.out_dir / "compare.csv").string() << " (" << grid.size() << " separations)\n";
  return kOk;
}

int cmd_simulate(const RunConfig& config, std::ostream& log)
{
  config.validate();
  const double gamma = config.resolved_gamma();
  const auto grid = separation_grid(config, 0.0, kGridStop, kGridStep);
  const ModelPtr model = make_model(gamma, config.modes_k, config.modes_l, true);
  const auto outcomes = outcomes_of(model.get());
  const std::size_t n = outcomes.size();

  bspade_calibration* raw = nullptr;
  const std::vector<double> alpha(n, config.alpha), beta(n, config.beta);
  check(bspade_calibration_create(alpha.data(), beta.data(), n, &raw), "calibration");
  const CalibrationPtr response(raw);

  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  std::vector<double> p(n);
  std::vector<std::int64_t> counts(n);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    check(bspade_model_calibrated_probabilities(model.get(), response.get(), grid[i], p.data(), n), "probabilities");
    check(bspade_sample_counts(p.data(), n, config.photons, bspade_derive_seed(config.seed, i), counts.data()),
          "sampling");
    CountsFile file;
    file.separation = grid[i];
    file.convention = SepConvention::D;
    for (std::size_t j = 0; j < n; ++j)
      file.rows.push_back({outcomes[j].k_idler, outcomes[j].l_idler, outcomes[j].k_signal, outcomes[j].l_signal,
                           counts[j]});
    char name[32];
    std::snprintf(name, sizeof name, "counts_%03zu.csv", i);
    write_counts_file(config.out_dir / name, file);
  }
  log << "wrote " << grid.size() << " counts files to " << config.out_dir.string() << '\n';
  return kOk;
}

} // namespace bspade::cli
